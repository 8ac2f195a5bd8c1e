"""Finite models of Q_p, 2x2 matrices, coset machinery, and volumes.

Scalars are exact rationals viewed p-adically (valuation + unit residue at a
chosen precision); this keeps every computation exact while still exposing
the valuation/residue interface the rest of the library needs.

Haar normalizations: multiplicative d^x with vol(O^x) = 1, additive dx with
vol(O) = 1, group measure with vol(GL2(O)) = 1, mirabolic measure with
vol(P(O)) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

DEFAULT_PRECISION = 12
MAX_COSET_INDEX = 100_000


class PrecisionError(ArithmeticError):
    pass


class IndexBoundExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# rational p-adic helpers


def val_p(x: Fraction | int, p: int) -> int | None:
    """p-adic valuation; None for zero."""
    x = Fraction(x)
    if x == 0:
        return None
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def unit_part(x: Fraction | int, p: int) -> Fraction:
    """x / p^{v(x)} as an exact rational with p-free numerator/denominator."""
    v = val_p(x, p)
    if v is None:
        raise ZeroDivisionError("unit part of zero")
    return Fraction(x) / Fraction(p) ** v


def residue(x: Fraction | int, p: int, level: int) -> int:
    """The class of a p-integral rational in Z/p^level."""
    x = Fraction(x)
    m = p**level
    if x.denominator % p == 0:
        raise ValueError("not p-integral")
    return x.numerator * pow(x.denominator, -1, m) % m


def residue_rep(x: Fraction | int, p: int, level: int) -> Fraction:
    """Canonical representative of x mod p^level Z_p (denominator a p-power)."""
    x = Fraction(x)
    if x == 0:
        return Fraction(0)
    e = 0
    d = x.denominator
    while d % p == 0:
        d //= p
        e += 1
    # x = n / (d * p^e) with gcd(d, p) = 1
    if level + e <= 0:
        # v(x) >= -e >= level, so x lies in p^level Z_p
        return Fraction(0)
    n = x.numerator * pow(d, -1, p ** (level + e))
    return Fraction(n % p ** (level + e), p**e)


class PAdic:
    """An exact rational carrying its p-adic data (valuation, unit, precision)."""

    __slots__ = ("prime", "value", "precision")

    def __init__(self, prime: int, value, precision: int = DEFAULT_PRECISION):
        self.prime = prime
        self.value = Fraction(value)
        self.precision = precision

    @property
    def valuation(self) -> int | None:
        return val_p(self.value, self.prime)

    def unit(self, level: int | None = None) -> int:
        """Residue of value / p^v in (Z/p^level)^x."""
        level = level if level is not None else self.precision
        return residue(unit_part(self.value, self.prime), self.prime, level)

    def is_zero(self) -> bool:
        return self.value == 0

    def _val(self, other) -> Fraction:
        return other.value if isinstance(other, PAdic) else Fraction(other)

    def __add__(self, other):
        return PAdic(self.prime, self.value + self._val(other), self.precision)

    __radd__ = __add__

    def __sub__(self, other):
        return PAdic(self.prime, self.value - self._val(other), self.precision)

    def __rsub__(self, other):
        return PAdic(self.prime, self._val(other) - self.value, self.precision)

    def __mul__(self, other):
        return PAdic(self.prime, self.value * self._val(other), self.precision)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return PAdic(self.prime, self.value / self._val(other), self.precision)

    def __rtruediv__(self, other):
        return PAdic(self.prime, self._val(other) / self.value, self.precision)

    def __neg__(self):
        return PAdic(self.prime, -self.value, self.precision)

    def __eq__(self, other):
        return self.value == self._val(other)

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"PAdic({self.value}, p={self.prime})"


def as_fraction(x) -> Fraction:
    if isinstance(x, PAdic):
        return x.value
    return Fraction(x)


# ---------------------------------------------------------------------------
# matrices


class Mat2:
    """A 2x2 matrix over Q with exact entries."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        self.a, self.b, self.c, self.d = (Fraction(as_fraction(x)) for x in (a, b, c, d))

    @staticmethod
    def identity() -> "Mat2":
        return Mat2(1, 0, 0, 1)

    @staticmethod
    def diag(x, y) -> "Mat2":
        return Mat2(x, 0, 0, y)

    @staticmethod
    def unipotent(x) -> "Mat2":
        return Mat2(1, x, 0, 1)

    @staticmethod
    def scalar(z) -> "Mat2":
        return Mat2(z, 0, 0, z)

    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def det_valuation(self, p: int) -> int | None:
        return val_p(self.det(), p)

    def __mul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Mat2":
        det = self.det()
        if det == 0:
            raise ZeroDivisionError("singular matrix")
        return Mat2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def entries(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def is_integral(self, p: int) -> bool:
        return all(x.denominator % p != 0 or x == 0 for x in self.entries()) and all(
            val_p(x, p) is None or val_p(x, p) >= 0 for x in self.entries()
        )

    def __eq__(self, other):
        return isinstance(other, Mat2) and self.entries() == other.entries()

    def __hash__(self):
        return hash(self.entries())

    def __repr__(self):
        return f"Mat2([[{self.a}, {self.b}], [{self.c}, {self.d}]])"

    def to_json(self) -> list[str]:
        return [str(x) for x in self.entries()]

    @staticmethod
    def from_json(data: Sequence[str]) -> "Mat2":
        return Mat2(*(Fraction(s) for s in data))


def g_tkv(p: int, t: int, k: int, v) -> Mat2:
    """diag(p^t, 1) * [[0,1],[-1,0]] * [[1, v p^{-k}],[0,1]], exactly."""
    w = Mat2(0, 1, -1, 0)
    return Mat2.diag(Fraction(p) ** t, 1) * w * Mat2.unipotent(Fraction(as_fraction(v)) * Fraction(p) ** (-k))


def in_gl2_o(g: Mat2, p: int) -> bool:
    vs = [val_p(x, p) for x in g.entries()]
    if any(v is not None and v < 0 for v in vs):
        return False
    return val_p(g.det(), p) == 0


def in_k_r(g: Mat2, p: int, r: int) -> bool:
    """Membership in K_r = {g in GL2(O): v(c) >= r, d = 1 mod p^r}."""
    if not in_gl2_o(g, p):
        return False
    vc = val_p(g.c, p)
    if vc is not None and vc < r:
        return False
    vd = val_p(g.d - 1, p)
    return vd is None or vd >= r


# ---------------------------------------------------------------------------
# coset decomposition g = z n g_{t,k,v} kappa, kappa in K_c


@dataclass(frozen=True)
class CosetDatum:
    t: int
    k: int
    v: Fraction          # unit representative mod p^{min(k, c-k)}
    z: Fraction          # central scalar
    n: Fraction          # upper-unipotent entry
    c: int

    def to_json(self) -> dict:
        return {"t": self.t, "k": self.k, "v": str(self.v),
                "z": str(self.z), "n": str(self.n), "c": self.c}


def _unit_reps(p: int, level: int) -> list[Fraction]:
    if level <= 0:
        return [Fraction(1)]
    return [Fraction(u) for u in range(1, p**level) if u % p]


def decompose(g: Mat2, p: int, c: int, t_slack: int = 4) -> CosetDatum:
    """Find (t, k, v, z, n) with g in Z N g_{t,k,v} K_c, by certified search.

    The candidate (t, k, v) grid is bounded using v(det g) and the entry
    valuations; each candidate is certified by solving exactly for z, n and
    testing K_c membership.
    """
    if g.det() == 0:
        raise ValueError("singular matrix")
    vdet = val_p(g.det(), p)
    ent_vals = [val_p(x, p) for x in g.entries() if x != 0]
    spread = max(ent_vals) - min(ent_vals) if ent_vals else 0
    t_candidates = [t for t in range(vdet - 2 * (spread + t_slack),
                                     vdet + 2 * (spread + t_slack) + 1)
                    if (vdet - t) % 2 == 0]
    for t in sorted(t_candidates, key=abs):
        for k in range(0, c + 1):
            for v in _unit_reps(p, min(k, c - k)):
                datum = _certify_coset(g, p, c, t, k, v)
                if datum is not None:
                    return datum
    raise PrecisionError("no (t,k,v) certified in the search window")


def _affine_congruence(p: int, alpha: Fraction, beta: Fraction,
                       tau: Fraction, level: int) -> tuple[int, int, int, int] | None:
    """Encode v_p(alpha*x + beta*y - tau) >= level as a*x + b*y = t (mod p^m).

    The rationals are cleared to integers; prime-to-p denominators are units
    and do not affect the condition.  Returns None when the condition is
    vacuous.
    """
    alpha, beta, tau = Fraction(alpha), Fraction(beta), Fraction(tau)
    den = alpha.denominator
    den = den * beta.denominator // _gcd(den, beta.denominator)
    den = den * tau.denominator // _gcd(den, tau.denominator)
    m = level + val_p(Fraction(den), p)
    if m <= 0:
        return None
    a = int(alpha * den)
    b = int(beta * den)
    t = int(tau * den)
    return (a, b, t, m)


def _solve_congruences(p: int, eqs: list[tuple[int, int, int, int]]) -> tuple[int, int] | None:
    """Find integer (x, y) with a*x + b*y = t (mod p^m) for every equation.

    Elimination with a minimal-valuation pivot; all equations are first lifted
    to the largest modulus.  Returns any one solution, or None.
    """
    if not eqs:
        return (0, 0)
    big = max(m for (_, _, _, m) in eqs)
    mod = p**big

    def vmod(n: int) -> int:
        n %= mod
        return big if n == 0 else val_p(Fraction(n), p)

    rows = [tuple(u * p ** (big - m) % mod for u in (a, b, t))
            for (a, b, t, m) in eqs]
    best = None
    for i, row in enumerate(rows):
        for j in (0, 1):
            vj = vmod(row[j])
            if best is None or vj < best[0]:
                best = (vj, i, j)
    pv, pi, pj = best
    if pv == big:
        return (0, 0) if all(r[2] % mod == 0 for r in rows) else None
    piv_row = rows[pi]
    piv = piv_row[pj] % mod
    piv_unit_inv = pow(piv // p**pv, -1, p ** (big - pv))
    reduced = []
    for i, row in enumerate(rows):
        if i == pi:
            continue
        f = (row[pj] // p**pv) * piv_unit_inv
        reduced.append(tuple((row[u] - f * piv_row[u]) % mod for u in (0, 1, 2)))
    # the reduced rows constrain the non-pivot variable only
    oj = 1 - pj
    res, exp = 0, 0
    for row in reduced:
        coef, t = row[oj] % mod, row[2] % mod
        cv = vmod(coef)
        if cv == big:
            if t != 0:
                return None
            continue
        if t % p**cv:
            return None
        e = big - cv
        r = (t // p**cv) * pow(coef // p**cv, -1, p**e) % p**e
        lo = min(e, exp)
        if (r - res) % p**lo:
            return None
        if e > exp:
            res, exp = r, e
    x_other = res
    rhs = (piv_row[2] - piv_row[oj] * x_other) % mod
    if rhs % p**pv:
        return None
    x_piv = (rhs // p**pv) * piv_unit_inv % p ** (big - pv)
    return (x_piv, x_other) if pj == 0 else (x_other, x_piv)


def _certify_coset(g: Mat2, p: int, c: int, t: int, k: int, v: Fraction) -> CosetDatum | None:
    """Solve g = [[z, z*n],[0, z]] g_{t,k,v} kappa with kappa in K_c, or None.

    With s = 1/z and y = n/z, kappa = s*(A^{-1} g) + y*(A^{-1} [[c,d],[0,0]])
    is affine-linear in (s, y).  The bottom row of kappa is forced to
    (p^c x, 1 + p^c y) for integer unknowns (x, y); integrality of the top
    row and unit determinant become affine congruences which are solved
    exactly, then the candidate is certified by direct membership.
    """
    A = g_tkv(p, t, k, v)
    Ainv = A.inverse()
    M1 = Ainv * g
    M2 = Ainv * Mat2(g.c, g.d, 0, 0)
    # kappa21 = s*M1.c + y*M2.c ; kappa22 = s*M1.d + y*M2.d
    det = M1.c * M2.d - M1.d * M2.c
    if det == 0:
        return None
    detB = M1.det()
    if detB == 0:
        return None
    vdetB = val_p(detB, p)
    if vdetB % 2:
        return None
    v0 = -vdetB // 2
    # base solve: bottom row exactly (0, 1)
    s0 = -M2.c / det
    y0 = M1.c / det
    # derivative with respect to eps (the kappa21 slot): bottom row (1, 0)
    s_e = M2.d / det
    y_e = -M1.d / det
    kap0 = Mat2(*(s0 * u1 + y0 * u2 for u1, u2 in zip(M1.entries(), M2.entries())))
    kapE = Mat2(*(s_e * u1 + y_e * u2 for u1, u2 in zip(M1.entries(), M2.entries())))
    pc = Fraction(p) ** c
    pv0 = Fraction(p) ** v0
    # kappa(x, y) = (1 + p^c y) kap0 + p^c x kapE ; s(x, y) likewise
    base_eqs = []
    for slot in ("a", "b"):
        cond = _affine_congruence(
            p, pc * getattr(kapE, slot), pc * getattr(kap0, slot),
            -getattr(kap0, slot), 0)
        if cond is not None:
            base_eqs.append(cond)
    for u in range(1, p):
        cond = _affine_congruence(
            p, pc * s_e / pv0, pc * s0 / pv0, u - s0 / pv0, 1)
        eqs = base_eqs + ([cond] if cond is not None else [])
        sol = _solve_congruences(p, eqs)
        if sol is None:
            continue
        x, y = sol
        s = (1 + pc * y) * s0 + pc * x * s_e
        yy = (1 + pc * y) * y0 + pc * x * y_e
        if s == 0:
            continue
        kappa = Mat2(*((1 + pc * y) * u0 + pc * x * uE
                       for u0, uE in zip(kap0.entries(), kapE.entries())))
        if not in_k_r(kappa, p, c):
            continue
        # kappa = A^{-1} [[s, y],[0, s]] g with [[s, y],[0, s]] = (z n)^{-1}
        return CosetDatum(t=t, k=k, v=v, z=1 / s, n=-yy / s, c=c)
    return None


def same_coset(g1: Mat2, g2: Mat2, p: int, c: int) -> bool:
    """Whether g1, g2 lie in the same Z N g_{t,k,v} K_c double coset."""
    d1 = decompose(g1, p, c)
    d2 = decompose(g2, p, c)
    return (d1.t, d1.k, d1.v) == (d2.t, d2.k, d2.v)


# ---------------------------------------------------------------------------
# open compacts and volumes by enumeration


@dataclass
class OpenCompact:
    """A compact open subset of GL2(O) given by a residue predicate at a level."""

    prime: int
    level: int
    predicate: Callable[[tuple[int, int, int, int]], bool]
    tag: str = ""

    @staticmethod
    def gl2_o(p: int, level: int = 1) -> "OpenCompact":
        return OpenCompact(p, level, lambda m: True, "GL2(O)")

    @staticmethod
    def k_r(p: int, r: int, level: int | None = None) -> "OpenCompact":
        level = max(r, 1) if level is None else level
        m = p**level
        pr = p**r

        def pred(ent):
            return ent[2] % pr == 0 and (ent[3] - 1) % pr == 0

        return OpenCompact(p, level, pred, f"K_{r}")


@lru_cache(maxsize=None)
def gl2_order(p: int, level: int) -> int:
    m = p**level
    return m**4 * (p - 1) * (p**2 - 1) // p**3


def _gl2_residues(p: int, level: int):
    m = p**level
    for a in range(m):
        for b in range(m):
            for c in range(m):
                for d in range(m):
                    if (a * d - b * c) % p:
                        yield (a, b, c, d)


def volume(U: OpenCompact) -> Fraction:
    """vol(U) under vol(GL2(O)) = 1, by enumeration at U's level."""
    p, level = U.prime, U.level
    count = sum(1 for mat in _gl2_residues(p, level) if U.predicate(mat))
    return Fraction(count, gl2_order(p, level))


def volume_p_mirabolic(p: int, level: int,
                       predicate: Callable[[int, int], bool]) -> Fraction:
    """vol of {[[a,b],[0,1]]: predicate(a,b)} in P(O), vol(P(O)) = 1."""
    m = p**level
    count = sum(1 for a in range(m) if a % p for b in range(m) if predicate(a, b))
    total = (p - 1) * p ** (level - 1) * m
    return Fraction(count, total)


# ---------------------------------------------------------------------------
# lattices, points, and orbit enumeration

# A Z_p-lattice in Q^2 (rows) is stored by a canonical upper-triangular basis
# [[p^e1, u],[0, p^e2]] with u = u mod p^e2 a canonical rational residue.


class RowLattice:
    __slots__ = ("prime", "b11", "b12", "b22")

    def __init__(self, prime: int, rows: Sequence[tuple[Fraction, Fraction]]):
        self.prime = prime
        self.b11, self.b12, self.b22 = self._canonicalize(rows)

    def _canonicalize(self, rows):
        p = self.prime
        r1, r2 = [(Fraction(a), Fraction(b)) for a, b in rows]
        if r1[0] == 0 or (r2[0] != 0 and val_p(r2[0], p) < val_p(r1[0], p)):
            r1, r2 = r2, r1
        if r1[0] == 0:
            raise ValueError("degenerate lattice")
        # eliminate the first coordinate of r2
        q = r2[0] / r1[0]
        r2 = (Fraction(0), r2[1] - q * r1[1])
        if r2[1] == 0:
            raise ValueError("degenerate lattice")
        # scale rows to make leading entries exact powers of p
        e1 = val_p(r1[0], p)
        u1 = unit_part(r1[0], p)
        r1 = (Fraction(p) ** e1, r1[1] / u1)
        e2 = val_p(r2[1], p)
        r2 = (Fraction(0), Fraction(p) ** e2)
        # reduce the off-diagonal entry modulo p^e2
        b12 = residue_rep(r1[1], p, e2)
        return r1[0], b12, r2[1]

    def rows(self) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
        return ((self.b11, self.b12), (Fraction(0), self.b22))

    def act(self, kappa: Mat2) -> "RowLattice":
        out = []
        for (x, y) in self.rows():
            out.append((x * kappa.a + y * kappa.c, x * kappa.b + y * kappa.d))
        return RowLattice(self.prime, out)

    def coords(self, w: tuple[Fraction, Fraction]) -> tuple[Fraction, Fraction]:
        """Coordinates of a row vector in the upper-triangular basis."""
        c1 = w[0] / self.b11
        c2 = (w[1] - c1 * self.b12) / self.b22
        return (c1, c2)

    def contains(self, w: tuple[Fraction, Fraction]) -> bool:
        c1, c2 = self.coords(w)
        return all(x == 0 or val_p(x, self.prime) >= 0 for x in (c1, c2))

    def key(self):
        return (self.b11, self.b12, self.b22)

    def __eq__(self, other):
        return isinstance(other, RowLattice) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


class LatticePoint:
    """A pair (lattice V, coset w + p^r V): the datum stabilized by g K_r g^{-1}.

    K_r is the stabilizer of ((O^2), (0,1) + p^r O^2) under right
    multiplication, so g K_r g^{-1} (intersected with H(F)) is the stabilizer
    of the translated point with V = O^2 g^{-1}, w = (0,1) g^{-1}.
    """

    __slots__ = ("prime", "r", "lattice", "w")

    def __init__(self, prime: int, r: int, lattice: RowLattice,
                 w: tuple[Fraction, Fraction]):
        self.prime = prime
        self.r = r
        self.lattice = lattice
        self.w = self._reduce(w, lattice)

    def _reduce(self, w, lattice):
        c1, c2 = lattice.coords(w)
        c1 = residue_rep(c1, self.prime, self.r)
        c2 = residue_rep(c2, self.prime, self.r)
        rows = lattice.rows()
        return (c1 * rows[0][0] + c2 * rows[1][0], c1 * rows[0][1] + c2 * rows[1][1])

    @staticmethod
    def from_conjugator(p: int, r: int, g: Mat2) -> "LatticePoint":
        ginv = g.inverse()
        lat = RowLattice(p, [(ginv.a, ginv.b), (ginv.c, ginv.d)])
        w = (ginv.c, ginv.d)  # (0,1) g^{-1}
        return LatticePoint(p, r, lat, w)

    def act(self, kappa: Mat2) -> "LatticePoint":
        lat = self.lattice.act(kappa)
        w = (self.w[0] * kappa.a + self.w[1] * kappa.c,
             self.w[0] * kappa.b + self.w[1] * kappa.d)
        return LatticePoint(self.prime, self.r, lat, w)

    def key(self):
        c1, c2 = self.lattice.coords(self.w)
        return (self.r, self.lattice.key(),
                residue_rep(c1, self.prime, self.r),
                residue_rep(c2, self.prime, self.r))

    def stabilizes(self, kappa: Mat2) -> bool:
        moved = self.act(kappa)
        return moved.key() == self.key()


def _topological_generators(p: int, level: int) -> list[Mat2]:
    """Generators of GL2(Z_p) modulo any principal congruence level <= level."""
    m = p ** max(level, 2)
    u = next(g for g in range(2, m) if g % p and _is_primitive_root(g, p, max(level, 2)))
    gens = [Mat2.unipotent(1), Mat2(1, 0, 1, 1), Mat2.diag(u, 1)]
    return gens + [g.inverse() for g in gens]


def _is_primitive_root(g: int, p: int, level: int) -> bool:
    m = p**level
    order = (p - 1) * p ** (level - 1)
    seen = 1
    x = g % m
    for _ in range(order - 1):
        if x == 1:
            return False
        x = x * g % m
    return x == 1


def orbit_transversal(p: int, points: Iterable[LatticePoint],
                      extra_state=None,
                      extra_act: Callable | None = None,
                      max_index: int = MAX_COSET_INDEX,
                      gen_level: int = 6) -> list[Mat2]:
    """Left-coset representatives of H(O)/Stab(points, extra) via orbit BFS.

    The stabilizer of the point tuple is the intersection of the g K_r g^{-1}
    (one per LatticePoint) with H(O) and with the stabilizer of the optional
    extra state (e.g. a Schwartz function acted on by right translation).
    Returns one representative per coset; the index is the orbit size.
    """
    points = list(points)
    gens = _topological_generators(p, gen_level)

    def state_of(kappa: Mat2):
        # key on kappa^{-1} so that equal states mean equal LEFT cosets kappa*C
        kinv = kappa.inverse()
        key = tuple(pt.act(kinv).key() for pt in points)
        if extra_act is not None:
            key = key + (extra_act(extra_state, kinv),)
        return key

    start = Mat2.identity()
    seen = {state_of(start): start}
    frontier = [start]
    while frontier:
        new_frontier = []
        for rep in frontier:
            for gen in gens:
                # left cosets: gen * (kappa C) is well defined, (kappa C) * gen is not
                cand = gen * rep
                key = state_of(cand)
                if key not in seen:
                    if len(seen) >= max_index:
                        raise IndexBoundExceeded(
                            f"coset index exceeds bound {max_index}")
                    seen[key] = cand
                    new_frontier.append(cand)
        frontier = new_frontier
    return list(seen.values())


def enumerate_quotient(p: int, r: int, g: Mat2 | None = None,
                       max_index: int = MAX_COSET_INDEX) -> list[Mat2]:
    """Coset representatives of GL2(O) / (GL2(O) and g K_r g^{-1})."""
    g = g if g is not None else Mat2.identity()
    return orbit_transversal(p, [LatticePoint.from_conjugator(p, r, g)],
                             max_index=max_index)


def stabilizer_volume(p: int, points: Iterable[LatticePoint],
                      extra_state=None, extra_act=None,
                      max_index: int = MAX_COSET_INDEX) -> Fraction:
    """vol of the joint stabilizer in H(O), as 1 / orbit size."""
    reps = orbit_transversal(p, points, extra_state, extra_act, max_index)
    return Fraction(1, len(reps))


# ---------------------------------------------------------------------------
# mirabolic volumes via affine congruence counting


def _count_affine(p: int, W: int, rows: list[tuple[int, int, int]]) -> int:
    """Count (x, y) in (Z/p^W)^2 with a*x + b*y + c = 0 mod p^W per row.

    p-local Smith elimination: pick the entry of minimal valuation as pivot,
    clear its row and column by unimodular operations, read the count off
    the two elementary divisors.  No enumeration.
    """
    mod = p**W
    A = [[a % mod, b % mod] for (a, b, _) in rows]
    rhs = [(-c) % mod for (_, _, c) in rows]
    count = 1
    for col in range(2):
        piv, piv_v = None, None
        for i in range(col, len(A)):
            for j in range(col, 2):
                x = A[i][j]
                if x:
                    v = val_p(x, p)
                    if piv is None or v < piv_v:
                        piv, piv_v = (i, j), v
        if piv is None:
            # all remaining equations are 0 = rhs; remaining variables free
            if any(rhs[i] for i in range(col, len(A))):
                return 0
            return count * p ** (W * (2 - col))
        i0, j0 = piv
        A[col], A[i0] = A[i0], A[col]
        rhs[col], rhs[i0] = rhs[i0], rhs[col]
        if j0 != col:
            for row in A:
                row[col], row[j0] = row[j0], row[col]
        pv = p**piv_v
        u_inv = pow(A[col][col] // pv, -1, mod)
        # row operations clear the pivot column (every entry has val >= piv_v)
        for i in range(len(A)):
            if i == col or not A[i][col]:
                continue
            f = (A[i][col] // pv * u_inv) % mod
            for j in range(2):
                A[i][j] = (A[i][j] - f * A[col][j]) % mod
            rhs[i] = (rhs[i] - f * rhs[col]) % mod
        # a column operation clears the pivot row (rhs unaffected)
        if col == 0 and A[0][1]:
            A[0][1] = 0
        # pivot equation p^v * unit * x = rhs: solvable iff p^v | rhs,
        # then x is determined mod p^{W-v}: p^v choices mod p^W
        if rhs[col] % pv:
            return 0
        count *= pv
    # rows past the two pivots have cleared coefficients: 0 = rhs
    if any(rhs[i] % mod for i in range(2, len(A))):
        return 0
    return count


def volume_P(p: int, gamma: tuple[Mat2, Mat2], levels: tuple[int, int],
             depth_pad: int = 3) -> Fraction:
    """Normalized P(F)-volume of P(F) n gamma K_Pi gamma^{-1}.

    Elements [[a,b],[0,1]] of the intersection have unit a (their determinant
    is a unit), so left and right mirabolic Haar measures agree on the set;
    the vol(P(O)) = 1 normalization divides the additive da db measure by
    1 - 1/p.
    """
    m1 = _volume_P_at(p, gamma, levels, depth_pad)
    m2 = _volume_P_at(p, gamma, levels, depth_pad + 2)
    if m1 != m2:
        raise PrecisionError("mirabolic volume did not stabilize")
    return m1


def _volume_P_at(p: int, gamma: tuple[Mat2, Mat2], levels: tuple[int, int],
                 depth_pad: int) -> Fraction:
    conditions: list[tuple[Fraction, Fraction, Fraction, int]] = []
    max_m = 1
    for g, r in zip(gamma, levels):
        pt = LatticePoint.from_conjugator(p, r, g)
        lat = pt.lattice
        # kappa = [[a,b],[0,1]]: rows of V*kappa must lie in V, and
        # w*kappa = w mod p^r V.  Each gives affine conditions in (a, b).
        for (x, y) in lat.rows():
            # (x*a, x*b + y): coordinates in the basis must be integral
            c1x, c2x = lat.coords((x, Fraction(0)))      # times a
            c1y, c2y = lat.coords((Fraction(0), x))      # times b
            c1k, c2k = lat.coords((Fraction(0), y))      # constant
            conditions.append((c1x, c1y, c1k, 0))
            conditions.append((c2x, c2y, c2k, 0))
        w = pt.w
        c1x, c2x = lat.coords((w[0], Fraction(0)))
        c1y, c2y = lat.coords((Fraction(0), w[0]))
        c1k, c2k = lat.coords((Fraction(0), w[1]))
        w1, w2 = lat.coords(w)
        conditions.append((c1x, c1y, c1k - w1, r))
        conditions.append((c2x, c2y, c2k - w2, r))
        max_m = max(max_m, r)
    # b may be non-integral: substitute b = b'/p^B with b' integral
    B = depth_pad
    for (ca, cb, c0, m) in conditions:
        for x in (ca, cb, c0):
            if x != 0:
                B = max(B, m - val_p(x, p) + depth_pad)
    W = max_m + 2 * B
    int_rows = []
    for (ca, cb, c0, m) in conditions:
        scale = Fraction(p) ** (W - m)
        row = (ca * scale, cb * scale * Fraction(p) ** (-B), c0 * scale)
        lcm_den = 1
        for x in row:
            d = x.denominator
            while d % p == 0:
                d //= p
            lcm_den = lcm_den * d // _gcd(lcm_den, d)
        row = tuple(x * lcm_den for x in row)
        if any(x.denominator != 1 for x in row):
            raise PrecisionError("condition deeper than working level")
        int_rows.append(tuple(int(x) for x in row))
    total = _count_affine(p, W, int_rows)
    nonunit = _count_affine(p, W, int_rows + [(p ** (W - 1), 0, 0)])
    # da db measure: (a, b') counted mod p^W over p^{2W} cells, times p^B for b
    measure = Fraction(total - nonunit, p ** (2 * W)) * Fraction(p) ** B
    return measure / (1 - Fraction(1, p))


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)

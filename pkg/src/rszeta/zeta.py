"""Local Rankin-Selberg zeta integrals on integral data, exactly.

The module provides Schwartz functions on Q_p^2 as finite unions of boxes,
the integral-datum predicate, the inner y-integral with exact extraction of
its rational tail, the unfolded zeta integral, the compactly induced section
map and the distribution it pairs with, and the integrality certifier.

Measure conventions: vol(O, dx) = 1, vol(O^x, d^x) = 1, vol(GL2(O)) = 1,
vol(P(O)) = 1 for the mirabolic P.  Throughout X = q^{-s}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .characters import MultChar, as_fraction, psi
from .padic import (
    MAX_COSET_INDEX,
    IndexBoundExceeded,
    LatticePoint,
    Mat2,
    PrecisionError,
    RowLattice,
    _topological_generators,
    decompose,
    gl2_order,
    residue,
    residue_rep,
    val_p,
    volume_P,
)
from .reps import (
    HalfRamifiedPS,
    LocalRep,
    PiPair,
    SteinbergUnrTwist,
    Supercuspidal,
    UnramifiedPS,
    UnsupportedClass,
    central_char,
    conductor,
    rs_l_factor,
)
from .scalars import (
    CycScalar,
    LaurentPoly,
    LFactorDescriptor,
    RingSpec,
    ZetaValue,
    membership,
    renormalize,
)
from .whittaker import eval_coset

MAX_CELLS = 20_000

__all__ = [
    "SchwartzFn",
    "schwartz_translate",
    "IntegralDatumReport",
    "integral_datum_check",
    "i_new",
    "zeta_unfolded",
    "CosetPairEntry",
    "SupportedFunctionOnPGK",
    "xi_c",
    "lambda_pi",
    "master_rhs",
    "CertifyResult",
    "certify",
    "trilinear",
    "ring_for_pair",
    "vol_k",
]


# ---------------------------------------------------------------------------
# Schwartz functions on Q_p^2


def _center_rep(x: Fraction, p: int, d: int) -> Fraction:
    """Canonical representative of x mod p^d Z_p (d may be negative)."""
    if x == 0:
        return Fraction(0)
    v = val_p(x, p)
    if v >= d:
        return Fraction(0)
    return residue_rep(x, p, d)


class SchwartzFn:
    """A finite C-linear combination of box indicators on Q_p^2.

    Stored in a canonical normal form: pairwise disjoint *square* cells
    (a + p^d Z_p) x (b + p^d Z_p) with canonical centers, merged and
    maximally coarsened.  The normal form makes equality, hashing, and the
    right-translation orbit machinery exact.
    """

    __slots__ = ("prime", "cells")

    def __init__(self, prime: int,
                 boxes: Iterable[tuple[tuple, tuple[int, int], object]] = ()):
        self.prime = prime
        raw: list[tuple[Fraction, Fraction, int, CycScalar]] = []
        for center, depths, coeff in boxes:
            a, b = as_fraction(center[0]), as_fraction(center[1])
            m, n = int(depths[0]), int(depths[1])
            if not isinstance(coeff, CycScalar):
                coeff = CycScalar.rational(prime, coeff)
            if coeff.is_zero():
                continue
            raw.extend(self._squares(a, b, m, n, coeff))
        self.cells = self._normalize(raw)

    # -- construction helpers ----------------------------------------------

    def _squares(self, a, b, m, n, coeff):
        """Split a rectangular box into square cells at depth max(m, n)."""
        p = self.prime
        d = max(m, n)
        if p ** (d - m) * p ** (d - n) > MAX_CELLS:
            raise IndexBoundExceeded("box splitting exceeds the cell bound")
        out = []
        for s in range(p ** (d - m)):
            for t in range(p ** (d - n)):
                out.append((a + s * Fraction(p) ** m,
                            b + t * Fraction(p) ** n, d, coeff))
        return out

    def _normalize(self, raw):
        p = self.prime
        # canonical centers, merge duplicates
        cells: dict[tuple[int, Fraction, Fraction], CycScalar] = {}
        pending = [(d, _center_rep(a, p, d), _center_rep(b, p, d), c)
                   for (a, b, d, c) in raw]
        for d, a, b, c in pending:
            key = (d, a, b)
            cells[key] = cells[key] + c if key in cells else c
        # resolve strict containments: split the coarser cell one level,
        # keeping siblings intact (linear in the nesting depth)
        changed = True
        while changed:
            changed = False
            by_depth = sorted(cells, key=lambda k: k[0])
            for i, ka in enumerate(by_depth):
                da, aa, ba = ka
                for kb in by_depth[i + 1:]:
                    db, ab, bb = kb
                    if db <= da:
                        continue
                    if (_center_rep(ab, p, da) == aa
                            and _center_rep(bb, p, da) == ba):
                        coeff = cells.pop(ka)
                        if len(cells) + p * p > MAX_CELLS:
                            raise IndexBoundExceeded(
                                "normalization exceeds the cell bound")
                        for s in range(p):
                            for t in range(p):
                                child = (da + 1,
                                         _center_rep(aa + s * Fraction(p) ** da,
                                                     p, da + 1),
                                         _center_rep(ba + t * Fraction(p) ** da,
                                                     p, da + 1))
                                cells[child] = (cells[child] + coeff
                                                if child in cells else coeff)
                        changed = True
                        break
                if changed:
                    break
        cells = {k: c for k, c in cells.items() if not c.is_zero()}
        # maximal coarsening: merge complete equal-coefficient sibling sets
        while True:
            parents: dict[tuple[int, Fraction, Fraction], list] = {}
            for (d, a, b), c in cells.items():
                parents.setdefault(
                    (d - 1, _center_rep(a, p, d - 1), _center_rep(b, p, d - 1)),
                    []).append(((d, a, b), c))
            merged = False
            for parent, children in parents.items():
                if len(children) == p * p:
                    c0 = children[0][1]
                    if all(c == c0 for _, c in children[1:]):
                        for k, _ in children:
                            del cells[k]
                        cells[parent] = c0
                        merged = True
            if not merged:
                break
        return tuple(sorted(
            ((d, a, b, c) for (d, a, b), c in cells.items()),
            key=lambda t: (t[0], t[1], t[2], t[3].sort_key())))

    # -- basic interface ---------------------------------------------------

    @staticmethod
    def indicator(prime: int, center=(0, 0), depths=(0, 0), coeff=1) -> "SchwartzFn":
        return SchwartzFn(prime, [(center, depths, coeff)])

    @staticmethod
    def unit_box(prime: int, coeff=1) -> "SchwartzFn":
        """coeff times the indicator of Z_p^2."""
        return SchwartzFn.indicator(prime, coeff=coeff)

    def boxes(self):
        """The normalized cells as (center, depths, coeff) triples."""
        return tuple((((a, b), (d, d), c)) for (d, a, b, c) in self.cells)

    def is_zero(self) -> bool:
        return not self.cells

    def evaluate(self, x, y) -> CycScalar:
        p = self.prime
        x, y = as_fraction(x), as_fraction(y)
        for d, a, b, c in self.cells:
            if (_center_rep(x, p, d) == a and _center_rep(y, p, d) == b):
                return c
        return CycScalar.zero(p)

    def scale(self, coeff) -> "SchwartzFn":
        return SchwartzFn(self.prime,
                          [(cn, dp, c * coeff if isinstance(coeff, CycScalar)
                            else c * CycScalar.rational(self.prime, coeff))
                           for cn, dp, c in self.boxes()])

    def __add__(self, other: "SchwartzFn") -> "SchwartzFn":
        return SchwartzFn(self.prime, self.boxes() + other.boxes())

    def __sub__(self, other: "SchwartzFn") -> "SchwartzFn":
        return self + other.scale(-1)

    def key(self):
        return self.cells

    def __eq__(self, other):
        return (isinstance(other, SchwartzFn) and self.prime == other.prime
                and self.cells == other.cells)

    def __hash__(self):
        return hash((self.prime, self.cells))

    def __repr__(self):
        return f"SchwartzFn(p={self.prime}, cells={len(self.cells)})"

    def to_json(self) -> dict:
        return {"boxes": [{"center": [str(a), str(b)], "depths": [d, d],
                           "coeff": c.to_json()}
                          for (d, a, b, c) in self.cells]}

    @staticmethod
    def from_json(prime: int, data: dict) -> "SchwartzFn":
        return SchwartzFn(prime, [
            ((Fraction(bx["center"][0]), Fraction(bx["center"][1])),
             (int(bx["depths"][0]), int(bx["depths"][1])),
             CycScalar.from_json(prime, bx["coeff"]))
            for bx in data["boxes"]])


def schwartz_translate(phi: SchwartzFn, h: Mat2) -> SchwartzFn:
    """The right translate h.phi = phi((-)h), as an exact box pushforward.

    Each cell c + L (L the square lattice at the cell depth) maps onto
    c h^{-1} + L h^{-1}; the image lattice is triangularized and emitted as a
    disjoint union of boxes.
    """
    p = phi.prime
    hinv = h.inverse()
    if h.det() == 0:
        raise ValueError("translation by a singular matrix")
    out = []
    for d, a, b, coeff in phi.cells:
        pd = Fraction(p) ** d
        lat = RowLattice(p, [(pd * hinv.a, pd * hinv.b),
                             (pd * hinv.c, pd * hinv.d)])
        (b11, b12), (_, b22) = lat.rows()
        e1, e2 = val_p(b11, p), val_p(b22, p)
        ca = a * hinv.a + b * hinv.c
        cb = a * hinv.b + b * hinv.d
        if b12 == 0:
            out.append(((ca, cb), (e1, e2), coeff))
            continue
        j = e2 - val_p(b12, p)
        if p ** j > MAX_CELLS:
            raise IndexBoundExceeded("translate image exceeds the cell bound")
        for t in range(p ** j):
            out.append(((ca + t * b11, cb + t * b12), (e1 + j, e2), coeff))
    return SchwartzFn(p, out)


def _translate_key_act(phi: SchwartzFn, kinv: Mat2):
    """Orbit-state of phi under right translation, keyed for left cosets."""
    return schwartz_translate(phi, kinv.inverse()).key()


# ---------------------------------------------------------------------------
# integral data


@dataclass(frozen=True)
class IntegralDatumReport:
    stab_volume: Fraction
    required_ideal_generator: int
    is_integral: bool
    failures: tuple = ()


def integral_datum_check(phi: SchwartzFn, g: tuple[Mat2, Mat2], pair: PiPair,
                         max_index: int = MAX_COSET_INDEX) -> IntegralDatumReport:
    """Volume of Stab(phi) n g K g^{-1} in H(O) and the coefficient test.

    The datum is integral when every box coefficient lies in the ideal
    (1/vol) Z generated by the index of the joint stabilizer.
    """
    p = pair.prime
    c1, c2 = pair.conductors()
    points = [LatticePoint.from_conjugator(p, c1, g[0]),
              LatticePoint.from_conjugator(p, c2, g[1])]
    from .padic import orbit_transversal
    reps = orbit_transversal(p, points, extra_state=phi,
                             extra_act=_translate_key_act, max_index=max_index)
    vol = Fraction(1, len(reps))
    index = len(reps)
    failures = []
    for d, a, b, c in phi.cells:
        if not c.is_rational():
            failures.append(((a, b, d), "non-rational coefficient"))
            continue
        if (c.as_rational() * vol).denominator != 1:
            failures.append(((a, b, d), f"coefficient not in {index}Z"))
    return IntegralDatumReport(vol, index, not failures, tuple(failures))


# ---------------------------------------------------------------------------
# the inner y-integral


def _t_floor(pi: LocalRep) -> int:
    """Smallest t with any in-support coset value for the class of pi."""
    if isinstance(pi, UnramifiedPS):
        return 0
    if isinstance(pi, SteinbergUnrTwist):
        return -2
    if isinstance(pi, (HalfRamifiedPS, Supercuspidal)):
        return -2 * conductor(pi)
    raise UnsupportedClass(f"no value table for {type(pi).__name__}")


_PI_KEYS: dict[int, int] = {}
_PI_PINS: list = []


def _pi_key(pi) -> int:
    i = id(pi)
    if i not in _PI_KEYS:
        _PI_KEYS[i] = len(_PI_PINS)
        _PI_PINS.append(pi)
    return _PI_KEYS[i]


_COSET_CACHE: dict = {}


def _coset_val(pi: LocalRep, t: int, k: int, v: Fraction) -> CycScalar:
    key = (_pi_key(pi), t, k, v)
    out = _COSET_CACHE.get(key)
    if out is None:
        out = eval_coset(pi, t, k, v).value
        _COSET_CACHE[key] = out
    return out


def _w_slot(pi: LocalRep, d, sign: int, i: int, u: Fraction) -> CycScalar:
    """W(diag(p^i u, 1) g) from the decomposition d of g, in the sign-model.

    Uses the exact identity
    diag(p^i u,1) z n(x) g_{t,k,v} = (z u) n(p^i u x) g_{t+i,k,v/u} diag(1/u,1)
    together with the equivariance of the model.
    """
    p = pi.prime
    base = _coset_val(pi, d.t + i, d.k, sign * d.v / u)
    if base.is_zero():
        return base
    omega = central_char(pi)
    # central_char folds any unramified twist into value_at_p, matching the
    # twist^{2 v(z)} bookkeeping of the general evaluator
    zpart = omega(d.z * u) if d.z != 1 or u != 1 else CycScalar.one(p)
    npart = psi(p, sign * (Fraction(p) ** i * u * d.n)) if d.n else CycScalar.one(p)
    out = zpart * npart * base
    if sign == -1:
        out = out * omega(-1)
    return out


def _unit_average(pair: PiPair, d1, d2, i: int, level: int) -> CycScalar:
    p = pair.prime
    pi1, pi2 = pair.pi1, pair.pi2
    total = CycScalar.zero(p)
    count = 0
    for u in range(p ** level):
        if u % p == 0:
            continue
        uf = Fraction(u)
        w1 = _w_slot(pi1, d1, 1, i, uf)
        if w1.is_zero():
            count += 1
            continue
        w2 = _w_slot(pi2, d2, -1, i, uf)
        total = total + w1 * w2
        count += 1
    return total * CycScalar.rational(p, Fraction(1, count))


def _u_independent(pair: PiPair, d1, d2, i: int) -> bool:
    for pi, d in ((pair.pi1, d1), (pair.pi2, d2)):
        if central_char(pi).c > 0:
            return False
        if d.k != 0:
            return False
        if d.n != 0 and i + val_p(d.n, pair.prime) < 0:
            return False
    return True


def _a_coeff(pair: PiPair, d1, d2, i: int) -> CycScalar:
    """The exact coefficient of X^i: q^i times the unit average of W1 W2."""
    p = pair.prime
    qi = CycScalar.rational(p, Fraction(p) ** i)
    if _u_independent(pair, d1, d2, i):
        one = Fraction(1)
        w1 = _w_slot(pair.pi1, d1, 1, i, one)
        if w1.is_zero():
            return w1
        return w1 * _w_slot(pair.pi2, d2, -1, i, one) * qi
    level = 1
    for pi, d in ((pair.pi1, d1), (pair.pi2, d2)):
        c = conductor(pi)
        level = max(level, central_char(pi).c)
        if d.n != 0:
            level = max(level, -(i + val_p(d.n, p)))
        if d.k > 0:
            level = max(level, c + 1)
    a0 = _unit_average(pair, d1, d2, i, level)
    a1 = _unit_average(pair, d1, d2, i, level + 1)
    tries = 0
    while a0 != a1:
        tries += 1
        if tries > 3:
            raise PrecisionError("unit average failed to stabilize")
        level += 1
        a0, a1 = a1, _unit_average(pair, d1, d2, i, level + 1)
    return a0 * qi


def i_new(pair: PiPair, gamma: tuple[Mat2, Mat2]) -> ZetaValue:
    """The inner integral int W(diag(y,1) gamma) |y|^{s-1} d^x y, exactly.

    The y-integral is a sum over i of X^i q^i times unit averages; beyond an
    analytic head the coefficient sequence satisfies the linear recurrence
    with characteristic polynomial the denominator of the pair L-factor.
    A vanishing guard window certifies the extraction.
    """
    p = pair.prime
    c1, c2 = pair.conductors()
    d1 = decompose(gamma[0], p, c1)
    d2 = decompose(gamma[1], p, c2)
    key = (_pi_key(pair.pi1), _pi_key(pair.pi2), d1, d2)
    cached = _I_NEW_CACHE.get(key)
    if cached is not None:
        return cached
    D = rs_l_factor(pair)
    deg_d = sum(d for _, d in D)
    i_min = max(_t_floor(pair.pi1) - d1.t, _t_floor(pair.pi2) - d2.t)
    hi = max(0, c1 + 1 - d1.t, c2 + 1 - d2.t)
    for d in (d1, d2):
        if d.n != 0:
            hi = max(hi, -val_p(d.n, p))
    head = max(i_min, hi) + 2
    guard = 3
    coeffs: dict[int, CycScalar] = {}
    out = None
    for _ in range(4):
        tail_end = head + deg_d + guard
        for i in range(i_min, tail_end + 1):
            if i not in coeffs:
                coeffs[i] = _a_coeff(pair, d1, d2, i)
        series = LaurentPoly(p, coeffs)
        num = series * D.denominator_poly()
        if num.truncate(head + 1, tail_end).is_zero():
            lo = num.degree_range()[0]
            out = ZetaValue(D, num.truncate(lo, head))
            break
        head += 4
    if out is None:
        raise PrecisionError("inner-integral tail failed the recurrence guard")
    _I_NEW_CACHE[key] = out
    return out


_I_NEW_CACHE: dict = {}


# ---------------------------------------------------------------------------
# the x-integral and the unfolded zeta integral


def _coset_intersect(p, c1, r1, c2, r2):
    """(c1 + p^r1 Z) n (c2 + p^r2 Z) as a coset, or None if empty."""
    if r1 < r2:
        c1, r1, c2, r2 = c2, r2, c1, r1
    diff = c1 - c2
    if diff != 0 and val_p(diff, p) < r2:
        return None
    return (c1, r1)


def _x_integral(phi: SchwartzFn, row: tuple[Fraction, Fraction],
                omega: MultChar) -> ZetaValue:
    """int_{F^x} phi(x * row) omega(x) |x|^{2s} d^x x as a ZetaValue."""
    p = phi.prime
    total = ZetaValue.zero(p)
    for d, a, b, coeff in phi.cells:
        coset = (Fraction(0), None)  # the full line until constrained
        feasible = True
        for alpha, cent in ((row[0], a), (row[1], b)):
            if alpha == 0:
                if cent != 0 and val_p(cent, p) < d:
                    feasible = False
                    break
                continue
            this = (cent / alpha, d - val_p(alpha, p))
            if coset[1] is None:
                coset = this
            else:
                merged = _coset_intersect(p, coset[0], coset[1], this[0], this[1])
                if merged is None:
                    feasible = False
                    break
                coset = merged
        if not feasible:
            continue
        if coset[1] is None:
            raise ValueError("unbounded x-support (degenerate row)")
        c0, r = coset
        if c0 == 0 or val_p(c0, p) >= r:
            # the ball p^r Z_p: a geometric L-type tail unless omega ramifies
            if omega.c > 0:
                continue
            piece = ZetaValue(
                LFactorDescriptor(p, [(omega.value_at_p, 2)]),
                LaurentPoly(p, {2 * r: omega.value_at_p ** r}))
        else:
            a0 = val_p(c0, p)
            j = r - a0
            level = max(j, omega.c)
            vol = Fraction(1, (p - 1) * p ** (level - 1))
            acc = CycScalar.zero(p)
            for t in range(p ** (level - j)):
                acc = acc + omega(c0 * (1 + Fraction(p) ** j * t))
            piece = ZetaValue.from_poly(
                LaurentPoly(p, {2 * a0: acc * CycScalar.rational(p, vol)}))
        total = total + piece * coeff
    return total


def zeta_unfolded(phi: SchwartzFn, g: tuple[Mat2, Mat2], pair: PiPair,
                  max_index: int = MAX_COSET_INDEX) -> ZetaValue:
    """The unfolded zeta integral: vol(K') sum over kappa in H(O)/K' of the
    product of the x-integral of phi((0,x)kappa) against omega |x|^{2s} and
    the inner y-integral at kappa g, where K' = Stab(phi) n g K g^{-1}."""
    p = pair.prime
    c1, c2 = pair.conductors()
    points = [LatticePoint.from_conjugator(p, c1, g[0]),
              LatticePoint.from_conjugator(p, c2, g[1])]
    from .padic import orbit_transversal
    reps = orbit_transversal(p, points, extra_state=phi,
                             extra_act=_translate_key_act, max_index=max_index)
    vol = Fraction(1, len(reps))
    omega = pair.central()
    total = ZetaValue.zero(p)
    for kappa in reps:
        xpart = _x_integral(phi, (kappa.c, kappa.d), omega)
        if xpart.is_zero():
            continue
        ypart = i_new(pair, (kappa * g[0], kappa * g[1]))
        if ypart.is_zero():
            continue
        total = total + xpart * ypart
    return total * CycScalar.rational(p, vol)


# ---------------------------------------------------------------------------
# the compactly induced section map


@dataclass(frozen=True)
class CosetPairEntry:
    gamma1: Mat2
    gamma2: Mat2
    value: CycScalar
    det_valuation: int


class SupportedFunctionOnPGK:
    """A finitely supported function on the double cosets P(F) gamma K."""

    __slots__ = ("prime", "levels", "entries")

    def __init__(self, prime: int, levels: tuple[int, int],
                 entries: Sequence[CosetPairEntry]):
        self.prime = prime
        self.levels = levels
        self.entries = tuple(entries)

    @property
    def integer_valued(self) -> bool:
        return all(e.value.is_rational() and e.value.as_rational().denominator == 1
                   for e in self.entries)

    def decompositions(self):
        return tuple((decompose(e.gamma1, self.prime, self.levels[0]),
                      decompose(e.gamma2, self.prime, self.levels[1]))
                     for e in self.entries)

    def __len__(self):
        return len(self.entries)

    def to_json(self) -> dict:
        return {"levels": list(self.levels),
                "entries": [{"gamma1": e.gamma1.to_json(),
                             "gamma2": e.gamma2.to_json(),
                             "value": e.value.to_json(),
                             "det_valuation": e.det_valuation}
                            for e in self.entries]}


def _transversal_schreier(p: int, points, max_index: int):
    """BFS transversal of H(O)/Stab(points) plus Schreier generators of the
    stabilizer (they generate a dense subgroup of it)."""
    gens = _topological_generators(p, 6)

    def state_of(kappa: Mat2):
        kinv = kappa.inverse()
        return tuple(pt.act(kinv).key() for pt in points)

    start = Mat2.identity()
    seen = {state_of(start): start}
    frontier = [start]
    schreier: list[Mat2] = []
    while frontier:
        new_frontier = []
        for rep in frontier:
            for gen in gens:
                cand = gen * rep
                key = state_of(cand)
                other = seen.get(key)
                if other is None:
                    if len(seen) >= max_index:
                        raise IndexBoundExceeded(
                            f"coset index exceeds bound {max_index}")
                    seen[key] = cand
                    new_frontier.append(cand)
                else:
                    schreier.append(other.inverse() * cand)
        frontier = new_frontier
    return list(seen.values()), schreier


def _principal_level(p: int, points, cap: int = 14) -> int:
    """Smallest r with the full congruence subgroup 1 + p^r M2(O) inside the
    joint stabilizer, certified on its four topological generators."""
    for r in range(1, cap):
        pr = Fraction(p) ** r
        mats = [Mat2.diag(1 + pr, 1), Mat2.diag(1, 1 + pr),
                Mat2.unipotent(pr), Mat2(1, 0, pr, 1)]
        if all(pt.stabilizes(m) for m in mats for pt in points):
            return r
    raise PrecisionError("no principal congruence level found inside the stabilizer")


def xi_c(phi: SchwartzFn, g: tuple[Mat2, Mat2], pair: PiPair,
         max_index: int = MAX_COSET_INDEX) -> SupportedFunctionOnPGK:
    """The compactly induced section attached to the datum.

    f(gamma) = int over {h : h^{-1} gamma in g K} of phi_c((0,1)h) dh with
    phi_c = phi - phi((-)[p,,p]^{-1}).  Identifying P\\H with row vectors via
    h -> (0,1)h, the support is a finite set of orbits of the open compact
    W = conjugate of H(F) n g K g^{-1}; orbits are enumerated on residue
    states at a certified congruence level.
    """
    p = pair.prime
    c1, c2 = pair.conductors()
    g1, g2 = g
    phi_c = phi - schwartz_translate(phi, Mat2.scalar(Fraction(1, p)))
    gt = g2.inverse() * g1
    phit = schwartz_translate(phi_c, g2.inverse())
    if phit.is_zero():
        return SupportedFunctionOnPGK(p, (c1, c2), ())
    points = [LatticePoint.from_conjugator(p, c1, gt),
              LatticePoint.from_conjugator(p, c2, Mat2.identity())]
    reps, schreier = _transversal_schreier(p, points, max_index)
    vol_w = Fraction(1, len(reps))
    r0 = _principal_level(p, points)

    # classify cells: every cell avoiding 0 has one min-valuation ell
    cell_data = []
    for d, a, b, coeff in phit.cells:
        va = val_p(a, p) if a != 0 else None
        vb = val_p(b, p) if b != 0 else None
        fixed = [v for v in (va, vb) if v is not None and v < d]
        if not fixed:
            raise PrecisionError("support of the centered function touches 0")
        cell_data.append((min(fixed), d, a, b, coeff))

    entries: list[CosetPairEntry] = []
    for ell in sorted({cd[0] for cd in cell_data}):
        cells = [cd for cd in cell_data if cd[0] == ell]
        level = max(r0, max(cd[1] for cd in cells) - ell, 1)
        mod = p ** level
        gens_mod = set()
        for s in schreier:
            for m in (s, s.inverse()):
                tup = tuple(residue(x, p, level) for x in m.entries())
                if tup != (1, 0, 0, 1):
                    gens_mod.add(tup)
        gens_mod = sorted(gens_mod)
        # seeds and cell membership at the working level
        cell_residues = []
        seeds = []
        for _, d, a, b, coeff in cells:
            step = p ** (d - ell)
            ra = residue(a * Fraction(p) ** (-ell), p, level)
            rb = residue(b * Fraction(p) ** (-ell), p, level)
            cell_residues.append((ra, rb, step, coeff))
            for s in range(mod // step):
                u1 = (ra + s * step) % mod
                for t in range(mod // step):
                    u2 = (rb + t * step) % mod
                    if u1 % p or u2 % p:
                        seeds.append((u1, u2))
        visited: set[tuple[int, int]] = set()
        for seed in seeds:
            if seed in visited:
                continue
            orbit = [seed]
            visited.add(seed)
            qpos = 0
            while qpos < len(orbit):
                u1, u2 = orbit[qpos]
                qpos += 1
                for (ma, mb, mc, md) in gens_mod:
                    nxt = ((u1 * ma + u2 * mc) % mod, (u1 * mb + u2 * md) % mod)
                    if nxt not in visited:
                        if len(visited) > max_index:
                            raise IndexBoundExceeded(
                                "orbit enumeration exceeds the index bound")
                        visited.add(nxt)
                        orbit.append(nxt)
            value = CycScalar.zero(p)
            for ra, rb, step, coeff in cell_residues:
                cnt = sum(1 for (u1, u2) in orbit
                          if (u1 - ra) % step == 0 and (u2 - rb) % step == 0)
                if cnt:
                    value = value + coeff * CycScalar.rational(
                        p, vol_w * Fraction(cnt, len(orbit)))
            if value.is_zero():
                continue
            u1, u2 = seed
            w1 = Fraction(u1) * Fraction(p) ** ell
            w2 = Fraction(u2) * Fraction(p) ** ell
            if u2 % p:
                h = Mat2(1, 0, w1, w2)
            else:
                h = Mat2(0, 1, w1, w2)
            entries.append(CosetPairEntry(h * gt, h, value, ell))
    return SupportedFunctionOnPGK(p, (c1, c2), entries)


# ---------------------------------------------------------------------------
# the distribution on the induced space, and the certifier


def vol_k(p: int, r: int) -> Fraction:
    """vol(K_r) under vol(GL2(O)) = 1."""
    if r == 0:
        return Fraction(1)
    return Fraction((p - 1) * p ** (2 * r - 1), gl2_order(p, r))


def lambda_pi(f: SupportedFunctionOnPGK, pair: PiPair) -> ZetaValue:
    """The value of the distribution on f, via the characteristic-function
    formula: Vol(K) sum of f(gamma) vol_P(P n gamma K gamma^{-1})^{-1}
    X^{v(det gamma_2)} times the inner integral at gamma."""
    p = pair.prime
    c1, c2 = pair.conductors()
    if (c1, c2) != f.levels:
        raise ValueError("level mismatch between the function and the pair")
    volK = CycScalar.rational(p, vol_k(p, c1) * vol_k(p, c2))
    total = ZetaValue.zero(p)
    for e in f.entries:
        vP = volume_P(p, (e.gamma1, e.gamma2), (c1, c2))
        weight = e.value * volK * CycScalar.rational(p, 1 / vP)
        inner = i_new(pair, (e.gamma1, e.gamma2))
        if inner.is_zero():
            continue
        total = total + inner * LaurentPoly.x_pow(p, e.det_valuation, weight)
    return total


def master_rhs(Z: ZetaValue, pair: PiPair, g2: Mat2) -> ZetaValue:
    """Vol(K) X^{v(det g2)} (1 - omega(p) X^2) Z."""
    p = pair.prime
    c1, c2 = pair.conductors()
    omega = pair.central()
    vdet = val_p(g2.det(), p)
    mult = LaurentPoly(p, {vdet: CycScalar.rational(p, vol_k(p, c1) * vol_k(p, c2))})
    mult = mult * LaurentPoly(p, {0: CycScalar.one(p), 2: -omega.value_at_p})
    return Z * mult


def ring_for_pair(pair: PiPair, extra_symbols: Iterable[str] = (),
                  extra_constants: Iterable[CycScalar] = ()) -> RingSpec:
    """The coefficient ring Z[1/p, mu_{nu q^tau}] extended by the symbols and
    eigenvalue constants mandated by the class of the pair."""
    p = pair.prime
    order = pair.nu * p ** pair.tau if pair.tau else 1
    constants: list[CycScalar] = list(extra_constants)
    symbols = set(extra_symbols)
    for pi in (pair.pi1, pair.pi2):
        if isinstance(pi, UnramifiedPS):
            if pi.numeric:
                constants.extend([pi.alpha, pi.beta])
            else:
                symbols.update({"h", "z"})
        if isinstance(pi, (SteinbergUnrTwist, HalfRamifiedPS)):
            constants.append(pi.chi.value_at_p)
            symbols.update(pi.chi.value_at_p.symbols_used())
        twist = getattr(pi, "twist", None)
        if twist is not None:
            symbols.update(twist.symbols_used())
            if not twist.symbols_used():
                constants.append(twist)
    return RingSpec(p, max(order, 1), allow_sqrt=True,
                    allowed_symbols=symbols, allowed_constants=constants)


@dataclass(frozen=True)
class CertifyResult:
    report: IntegralDatumReport
    refused: bool
    l_factor: LFactorDescriptor | None = None
    phi_poly: LaurentPoly | None = None
    verdicts: tuple = ()
    identity_check: bool | None = None
    section_integer_valued: bool | None = None

    @property
    def all_verdicts_pass(self) -> bool:
        return all(bool(v) for _, v in self.verdicts)


def certify(phi: SchwartzFn, g: tuple[Mat2, Mat2], pair: PiPair,
            A: RingSpec | None = None, check_identity: bool = True,
            max_index: int = MAX_COSET_INDEX) -> CertifyResult:
    """Certify the integrality theorem on one datum.

    Computes Z by unfolding, extracts Phi = Z / L as a Laurent polynomial
    (a PoleMismatch here is a theorem violation and propagates loudly), runs
    coefficient membership against A, and independently cross-checks the
    identity relating the induced-section route to Z.
    """
    report = integral_datum_check(phi, g, pair, max_index=max_index)
    if not report.is_integral:
        return CertifyResult(report=report, refused=True)
    target = rs_l_factor(pair)
    Z = zeta_unfolded(phi, g, pair, max_index=max_index)
    phi_poly = renormalize(Z, target)
    if A is None:
        A = ring_for_pair(pair)
    verdicts = tuple((n, membership(c, A))
                     for n, c in sorted(phi_poly.coeffs.items()))
    identity = None
    section_int = None
    if check_identity:
        f = xi_c(phi, g, pair, max_index=max_index)
        section_int = f.integer_valued
        identity = lambda_pi(f, pair) == master_rhs(Z, pair, g[1])
    return CertifyResult(report=report, refused=False, l_factor=target,
                         phi_poly=phi_poly, verdicts=verdicts,
                         identity_check=identity,
                         section_integer_valued=section_int)


def trilinear(phi: SchwartzFn, g: tuple[Mat2, Mat2], pair: PiPair,
              max_index: int = MAX_COSET_INDEX) -> CycScalar:
    """Phi = Z / L evaluated at X = 1 (s -> 0) on an integral datum."""
    report = integral_datum_check(phi, g, pair, max_index=max_index)
    if not report.is_integral:
        raise ValueError("not an integral datum; the value is only defined there")
    Z = zeta_unfolded(phi, g, pair, max_index=max_index)
    return renormalize(Z, rs_l_factor(pair)).eval_at_one()

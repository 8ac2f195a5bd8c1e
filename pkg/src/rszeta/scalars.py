"""Exact coefficient arithmetic.

Elements of cyclotomic fields with an adjoined formal square root of the
residue characteristic p (written Q, with Q^2 = p) and formal commuting
unitary symbols (unramified character values, normalized Hecke symbols),
Laurent polynomials in X = q^{-s}, L-factor descriptors, zeta values as
(L-part, polynomial) pairs, and a ring-membership oracle.

A cyclotomic number of level N is stored as a sparse map

    (zeta exponent mod N, Q-degree in {0,1}, symbol monomial) -> Fraction

reduced to the tensor power basis: for every prime power l^e || N the
exponent component j mod l^e lies in [0, phi(l^e)).  This makes lifting
between levels and subfield tests cheap.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Iterator, Mapping

Mono = tuple[tuple[str, int], ...]
Key = tuple[int, int, Mono]


class NonInvertible(ArithmeticError):
    """Raised when a scalar has no (computable) inverse."""


class PoleMismatch(ArithmeticError):
    """Raised when an exact division by an L-factor leaves a remainder."""


# ---------------------------------------------------------------------------
# integer / polynomial helpers


@lru_cache(maxsize=None)
def _prime_power_split(n: int) -> tuple[tuple[int, int], ...]:
    """Factor n as a tuple of (prime, exponent) pairs."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@lru_cache(maxsize=None)
def _canon_expansion(N: int, j: int) -> tuple[tuple[int, int], ...]:
    """Expand zeta_N^j in the tensor power basis as ((exponent, coeff), ...).

    Uses the relation sum_{k=0}^{l-1} zeta_N^{j + k N/l} = 0 for each prime
    l | N to push every prime-power component below phi(l^e).
    """
    j %= N
    for (l, e) in _prime_power_split(N):
        pe = l**e
        if (j % pe) >= pe - pe // l:
            step = N // l
            acc: dict[int, int] = {}
            for k in range(1, l):
                for (j2, c) in _canon_expansion(N, (j - k * step) % N):
                    acc[j2] = acc.get(j2, 0) - c
            return tuple(sorted((a, b) for a, b in acc.items() if b))
    return ((j, 1),)


def _exponent_in_subfield(N: int, M: int, j: int) -> bool:
    """Whether the basis element zeta_N^j lies in Q(zeta_M) (for M | N)."""
    for (l, e) in _prime_power_split(N):
        d = 0
        m = M
        while m % l == 0:
            m //= l
            d += 1
        if d < e and (j % l**e) % l ** (e - d) != 0:
            return False
    return True


@lru_cache(maxsize=None)
def _cyclotomic_poly(N: int) -> tuple[int, ...]:
    """Coefficients (low to high) of the N-th cyclotomic polynomial."""
    # x^N - 1 = prod_{d | N} Phi_d; divide out recursively.
    num = [0] * (N + 1)
    num[0], num[N] = -1, 1
    for d in range(1, N):
        if N % d == 0:
            num = _poly_exact_div_int(num, list(_cyclotomic_poly(d)))
    return tuple(num)


def _poly_exact_div_int(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        out[i] = c
        if c:
            for k, dc in enumerate(den):
                num[i + k] -= c * dc
    assert not any(num), "non-exact polynomial division"
    return out


def _poly_trim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_divmod(a: list[Fraction], b: list[Fraction]):
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    inv = 1 / b[-1]
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] * inv
        q[i] = c
        if c:
            for k, bc in enumerate(b):
                a[i + k] -= c * bc
    return _poly_trim(q), _poly_trim(a)


def _poly_xgcd(a: list[Fraction], b: list[Fraction]):
    """Extended gcd in Q[x]: returns (g, s, t) with s*a + t*b = g."""
    r0, r1 = _poly_trim(list(a)), _poly_trim(list(b))
    s0, s1 = [Fraction(1)], []
    t0, t1 = [], [Fraction(1)]
    while r1:
        q, r = _poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
        t0, t1 = t1, _poly_sub(t0, _poly_mul(q, t1))
    return r0, s0, t0


def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for k, y in enumerate(b):
                out[i + k] += x * y
    return _poly_trim(out)


def _poly_sub(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, x in enumerate(b):
        out[i] -= x
    return _poly_trim(out)


def _mono_mul(a: Mono, b: Mono) -> Mono:
    acc = dict(a)
    for name, e in b:
        acc[name] = acc.get(name, 0) + e
        if acc[name] == 0:
            del acc[name]
    return tuple(sorted(acc.items()))


def _mono_inv(a: Mono) -> Mono:
    return tuple((name, -e) for name, e in a)


# ---------------------------------------------------------------------------
# CycScalar


class CycScalar:
    """An exact scalar: cyclotomic number with formal sqrt(p) and symbols."""

    __slots__ = ("prime", "level", "coords")

    def __init__(self, prime: int, level: int = 1,
                 coords: Mapping[Key, Fraction] | None = None,
                 _canonical: bool = False):
        self.prime = prime
        self.level = level
        if coords is None:
            coords = {}
        if _canonical:
            self.coords = dict(coords)
            return
        acc: dict[Key, Fraction] = {}
        for (j, qd, mono), c in coords.items():
            c = Fraction(c)
            if not c:
                continue
            # normalize Q-degree into {0,1} carrying powers of p (Q^2 = p)
            if qd not in (0, 1):
                c *= Fraction(prime) ** (qd // 2)
                qd %= 2
            for (j2, zc) in _canon_expansion(level, j):
                k = (j2, qd, mono)
                acc[k] = acc.get(k, Fraction(0)) + c * zc
                if not acc[k]:
                    del acc[k]
        self.coords = acc

    # -- constructors ------------------------------------------------------

    @staticmethod
    def rational(prime: int, value) -> "CycScalar":
        return CycScalar(prime, 1, {(0, 0, ()): Fraction(value)})

    @staticmethod
    def zero(prime: int) -> "CycScalar":
        return CycScalar(prime, 1, {}, _canonical=True)

    @staticmethod
    def one(prime: int) -> "CycScalar":
        return CycScalar.rational(prime, 1)

    @staticmethod
    def zeta(prime: int, order: int, exponent: int = 1) -> "CycScalar":
        return CycScalar(prime, order, {(exponent % order, 0, ()): Fraction(1)})

    @staticmethod
    def sqrt_q(prime: int) -> "CycScalar":
        """The formal Q with Q^2 = p."""
        return CycScalar(prime, 1, {(0, 1, ()): Fraction(1)})

    @staticmethod
    def q_half(prime: int, m: int) -> "CycScalar":
        """q^{m/2} as p^{floor(m/2)} * Q^{m mod 2}."""
        return CycScalar(prime, 1, {(0, m % 2, ()): Fraction(prime) ** (m // 2)})

    @staticmethod
    def symbol(prime: int, name: str, exponent: int = 1) -> "CycScalar":
        mono: Mono = ((name, exponent),) if exponent else ()
        return CycScalar(prime, 1, {(0, 0, mono): Fraction(1)})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coords

    def is_rational(self) -> bool:
        return all(k == (0, 0, ()) for k in self.coords)

    def as_rational(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        if not self.is_rational():
            raise ValueError("not a rational scalar")
        return self.coords[(0, 0, ())]

    def symbols_used(self) -> set[str]:
        return {name for (_, _, mono) in self.coords for (name, _) in mono}

    def lift(self, level: int) -> "CycScalar":
        if level == self.level:
            return self
        if level % self.level:
            raise ValueError("can only lift to a multiple of the level")
        r = level // self.level
        coords: dict[Key, Fraction] = {}
        for (j, qd, mono), c in self.coords.items():
            k = (j * r, qd, mono)
            coords[k] = coords.get(k, Fraction(0)) + c
        # canonical form is basis-dependent: re-reduce at the new level
        return CycScalar(self.prime, level, coords)

    def compress(self) -> "CycScalar":
        """Rewrite at the minimal level supporting all coordinates."""
        N = self.level
        M = 1
        for (l, e) in _prime_power_split(N):
            # minimal d with l^{e-d} dividing the l-component of every exponent
            d = 0
            for (j, _, _) in self.coords:
                comp = j % l**e
                dd = e
                while dd > d and comp % l ** (e - dd + 1) == 0:
                    dd -= 1
                d = max(d, dd)
            M *= l**d
        if M == N:
            return self
        coords: dict[Key, Fraction] = {}
        for (j, qd, mono), c in self.coords.items():
            k = (j * M // N, qd, mono)
            coords[k] = coords.get(k, Fraction(0)) + c
        return CycScalar(self.prime, max(M, 1), coords)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "CycScalar":
        if isinstance(other, CycScalar):
            if other.prime != self.prime:
                raise ValueError("mixed primes")
            return other
        return CycScalar.rational(self.prime, other)

    def __add__(self, other) -> "CycScalar":
        other = self._coerce(other)
        L = _lcm(self.level, other.level)
        a, b = self.lift(L), other.lift(L)
        acc = dict(a.coords)
        for k, c in b.coords.items():
            acc[k] = acc.get(k, Fraction(0)) + c
            if not acc[k]:
                del acc[k]
        return CycScalar(self.prime, L, acc, _canonical=True)

    __radd__ = __add__

    def __neg__(self) -> "CycScalar":
        return CycScalar(self.prime, self.level,
                         {k: -c for k, c in self.coords.items()}, _canonical=True)

    def __sub__(self, other) -> "CycScalar":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "CycScalar":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "CycScalar":
        other = self._coerce(other)
        L = _lcm(self.level, other.level)
        a, b = self.lift(L), other.lift(L)
        p = self.prime
        acc: dict[Key, Fraction] = {}
        for (j1, q1, m1), c1 in a.coords.items():
            for (j2, q2, m2), c2 in b.coords.items():
                c = c1 * c2
                qd = q1 + q2
                if qd == 2:
                    c *= p
                    qd = 0
                mono = _mono_mul(m1, m2)
                for (j, zc) in _canon_expansion(L, (j1 + j2) % L):
                    k = (j, qd, mono)
                    acc[k] = acc.get(k, Fraction(0)) + c * zc
                    if not acc[k]:
                        del acc[k]
        return CycScalar(p, L, acc, _canonical=True)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "CycScalar":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "CycScalar":
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "CycScalar":
        if n < 0:
            return self.inverse() ** (-n)
        out = CycScalar.one(self.prime)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def _pure_cyclotomic_parts(self):
        """Split as u + v*Q with u, v symbol-free, or raise."""
        u: dict[Key, Fraction] = {}
        v: dict[Key, Fraction] = {}
        for (j, qd, mono), c in self.coords.items():
            if mono:
                raise NonInvertible("general inversion with symbols unsupported")
            (u if qd == 0 else v)[(j, 0, ())] = c
        return (CycScalar(self.prime, self.level, u, _canonical=True),
                CycScalar(self.prime, self.level, v, _canonical=True))

    def _invert_pure(self) -> "CycScalar":
        """Invert a symbol-free, Q-free scalar via xgcd mod Phi_N."""
        N = self.level
        poly = [Fraction(0)] * N
        for (j, _, _), c in self.coords.items():
            poly[j] += c
        phi = [Fraction(c) for c in _cyclotomic_poly(N)]
        g, s, _ = _poly_xgcd(_poly_trim(poly), phi)
        if len(g) != 1:
            raise NonInvertible("zero divisor or zero in cyclotomic inversion")
        inv_const = 1 / g[0]
        coords = {(j, 0, ()): c * inv_const for j, c in enumerate(s) if c}
        return CycScalar(self.prime, N, coords)

    def inverse(self) -> "CycScalar":
        if self.is_zero():
            raise NonInvertible("inversion of zero")
        if len(self.coords) == 1:
            ((j, qd, mono), c), = self.coords.items()
            inv_c = 1 / c
            if qd:
                inv_c /= self.prime  # Q^{-1} = Q/p
            coords = {((-j) % self.level, qd, _mono_inv(mono)): inv_c}
            return CycScalar(self.prime, self.level, coords)
        monos = {mono for (_, _, mono) in self.coords}
        if len(monos) == 1 and (m0 := monos.pop()):
            stripped = CycScalar(self.prime, self.level,
                                 {(j, qd, ()): c for (j, qd, _), c in self.coords.items()},
                                 _canonical=True)
            return stripped.inverse() * CycScalar(self.prime, 1, {(0, 0, _mono_inv(m0)): Fraction(1)})
        u, v = self._pure_cyclotomic_parts()
        if v.is_zero():
            return u._invert_pure()
        den = u * u - v * v * self.prime
        if den.is_zero():
            raise NonInvertible("zero divisor (formal sqrt collision)")
        return (u - v * CycScalar.sqrt_q(self.prime)) * den._invert_pure()

    def conj(self) -> "CycScalar":
        coords: dict[Key, Fraction] = {}
        for (j, qd, mono), c in self.coords.items():
            coords[((-j) % self.level, qd, _mono_inv(mono))] = c
        return CycScalar(self.prime, self.level, coords)

    def substitute(self, values: Mapping[str, "CycScalar"]) -> "CycScalar":
        """Replace formal symbols by concrete scalars."""
        out = CycScalar.zero(self.prime)
        for (j, qd, mono), c in self.coords.items():
            term = CycScalar(self.prime, self.level, {(j, qd, ()): c}, _canonical=True)
            for name, e in mono:
                if name in values:
                    term = term * values[name] ** e
                else:
                    term = term * CycScalar.symbol(self.prime, name, e)
            out = out + term
        return out

    # -- comparison / canonical form --------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = CycScalar.rational(self.prime, other)
        if not isinstance(other, CycScalar):
            return NotImplemented
        if other.prime != self.prime:
            return False
        L = _lcm(self.level, other.level)
        return self.lift(L).coords == other.lift(L).coords

    def __hash__(self):
        return hash(self.sort_key())

    def sort_key(self):
        c = self.compress()
        return (c.level,
                tuple(sorted((j, qd, mono, co.numerator, co.denominator)
                             for (j, qd, mono), co in c.coords.items())))

    def __repr__(self) -> str:
        if self.is_zero():
            return "Cyc(0)"
        parts = []
        for (j, qd, mono), c in sorted(self.coords.items()):
            s = str(c)
            if j:
                s += f"*z{self.level}^{j}"
            if qd:
                s += "*Q"
            for name, e in mono:
                s += f"*{name}^{e}" if e != 1 else f"*{name}"
            parts.append(s)
        return "Cyc(" + " + ".join(parts) + ")"

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        c = self.compress()
        terms = []
        for (j, qd, mono), co in sorted(c.coords.items()):
            terms.append({"zeta_exp": j, "q_half_deg": qd,
                          "symbols": {name: e for name, e in mono},
                          "num": str(co.numerator), "den": str(co.denominator)})
        return {"level": c.level, "terms": terms}

    @staticmethod
    def from_json(prime: int, data: dict) -> "CycScalar":
        coords: dict[Key, Fraction] = {}
        for t in data.get("terms", []):
            mono = tuple(sorted((str(k), int(v)) for k, v in t.get("symbols", {}).items()))
            key = (int(t["zeta_exp"]), int(t["q_half_deg"]), mono)
            coords[key] = coords.get(key, Fraction(0)) + Fraction(int(t["num"]), int(t["den"]))
        return CycScalar(prime, int(data.get("level", 1)), coords)


def ring_arith(a: CycScalar, b: CycScalar | None, op: str) -> CycScalar:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    raise ValueError(f"unknown op {op!r}")


def conj(a: CycScalar) -> CycScalar:
    return a.conj()


# ---------------------------------------------------------------------------
# Laurent polynomials in X = q^{-s}


class LaurentPoly:
    """Laurent polynomial in X = q^{-s} with CycScalar coefficients."""

    __slots__ = ("prime", "coeffs")

    def __init__(self, prime: int, coeffs: Mapping[int, CycScalar] | None = None):
        self.prime = prime
        self.coeffs: dict[int, CycScalar] = {}
        if coeffs:
            for n, c in coeffs.items():
                if not isinstance(c, CycScalar):
                    c = CycScalar.rational(prime, c)
                if not c.is_zero():
                    self.coeffs[n] = c

    @staticmethod
    def zero(prime: int) -> "LaurentPoly":
        return LaurentPoly(prime)

    @staticmethod
    def one(prime: int) -> "LaurentPoly":
        return LaurentPoly(prime, {0: CycScalar.one(prime)})

    @staticmethod
    def x_pow(prime: int, n: int, coeff: CycScalar | int = 1) -> "LaurentPoly":
        return LaurentPoly(prime, {n: coeff})

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree_range(self) -> tuple[int, int]:
        if not self.coeffs:
            return (0, 0)
        return (min(self.coeffs), max(self.coeffs))

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        acc = dict(self.coeffs)
        for n, c in other.coeffs.items():
            acc[n] = acc[n] + c if n in acc else c
            if acc[n].is_zero():
                del acc[n]
        return LaurentPoly(self.prime, acc)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.prime, {n: -c for n, c in self.coeffs.items()})

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other) -> "LaurentPoly":
        if isinstance(other, (int, Fraction, CycScalar)):
            return self.scale(other)
        acc: dict[int, CycScalar] = {}
        for n1, c1 in self.coeffs.items():
            for n2, c2 in other.coeffs.items():
                n = n1 + n2
                t = c1 * c2
                acc[n] = acc[n] + t if n in acc else t
        return LaurentPoly(self.prime, {n: c for n, c in acc.items() if not c.is_zero()})

    __rmul__ = __mul__

    def scale(self, c) -> "LaurentPoly":
        if not isinstance(c, CycScalar):
            c = CycScalar.rational(self.prime, c)
        return LaurentPoly(self.prime, {n: co * c for n, co in self.coeffs.items()})

    def truncate(self, lo: int, hi: int) -> "LaurentPoly":
        return LaurentPoly(self.prime,
                           {n: c for n, c in self.coeffs.items() if lo <= n <= hi})

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(tuple(sorted((n, c.sort_key()) for n, c in self.coeffs.items())))

    def divide_by_factor(self, c: CycScalar, d: int) -> "LaurentPoly":
        """Exact division by (1 - c X^d); raises PoleMismatch on remainder."""
        if self.is_zero():
            return self
        lo, hi = self.degree_range()
        out: dict[int, CycScalar] = {}
        # synthetic division from the bottom: q_n = p_n + c * q_{n-d};
        # exactness requires q_n = 0 for every n > hi - d.
        for n in range(lo, hi + 1):
            q = self.coeffs.get(n, CycScalar.zero(self.prime))
            prev = out.get(n - d)
            if prev is not None:
                q = q + c * prev
            if not q.is_zero():
                if n > hi - d:
                    raise PoleMismatch("division by (1 - c X^d) leaves a remainder")
                out[n] = q
        return LaurentPoly(self.prime, out)

    def eval_at_one(self) -> CycScalar:
        out = CycScalar.zero(self.prime)
        for c in self.coeffs.values():
            out = out + c
        return out

    def substitute(self, values: Mapping[str, CycScalar]) -> "LaurentPoly":
        return LaurentPoly(self.prime,
                           {n: c.substitute(values) for n, c in self.coeffs.items()})

    def __repr__(self) -> str:
        return "LaurentPoly(" + ", ".join(
            f"X^{n}: {c!r}" for n, c in sorted(self.coeffs.items())) + ")"

    def to_json(self) -> dict:
        return {"terms": [{"x_pow": n, "coeff": c.to_json()}
                          for n, c in sorted(self.coeffs.items())]}

    @staticmethod
    def from_json(prime: int, data: dict) -> "LaurentPoly":
        return LaurentPoly(prime, {int(t["x_pow"]): CycScalar.from_json(prime, t["coeff"])
                                   for t in data.get("terms", [])})


# ---------------------------------------------------------------------------
# L-factor descriptors


class LFactorDescriptor:
    """A formal product of factors (1 - c X^d)^{-1}, as a multiset of (c, d)."""

    __slots__ = ("prime", "factors")

    def __init__(self, prime: int, factors: Iterable[tuple[CycScalar, int]] = ()):
        self.prime = prime
        fs = []
        for c, d in factors:
            if not isinstance(c, CycScalar):
                c = CycScalar.rational(prime, c)
            fs.append((c, d))
        self.factors: tuple[tuple[CycScalar, int], ...] = tuple(
            sorted(fs, key=lambda f: (f[1], f[0].sort_key())))

    def __iter__(self) -> Iterator[tuple[CycScalar, int]]:
        return iter(self.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def __mul__(self, other: "LFactorDescriptor") -> "LFactorDescriptor":
        return LFactorDescriptor(self.prime, self.factors + other.factors)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LFactorDescriptor):
            return NotImplemented
        return ([f[1] for f in self.factors] == [f[1] for f in other.factors]
                and all(a[0] == b[0] for a, b in zip(self.factors, other.factors)))

    def __hash__(self):
        return hash(tuple((c.sort_key(), d) for c, d in self.factors))

    def denominator_poly(self) -> LaurentPoly:
        """The polynomial prod (1 - c X^d) (the reciprocal of the L-factor)."""
        out = LaurentPoly.one(self.prime)
        for c, d in self.factors:
            out = out * (LaurentPoly.one(self.prime) - LaurentPoly.x_pow(self.prime, d, c))
        return out

    def series(self, bound: int) -> LaurentPoly:
        return series_expand(self, bound)

    def __repr__(self) -> str:
        if not self.factors:
            return "LFactor(1)"
        return "LFactor(" + " * ".join(f"(1 - {c!r} X^{d})^-1" for c, d in self.factors) + ")"

    def to_json(self) -> dict:
        return {"factors": [{"c": c.to_json(), "d": d} for c, d in self.factors]}

    @staticmethod
    def from_json(prime: int, data: dict) -> "LFactorDescriptor":
        return LFactorDescriptor(prime, [(CycScalar.from_json(prime, f["c"]), int(f["d"]))
                                         for f in data.get("factors", [])])


def series_expand(D: LFactorDescriptor, bound: int) -> LaurentPoly:
    """Power-series expansion of prod (1 - c X^d)^{-1} to degrees 0..bound."""
    p = D.prime
    out = LaurentPoly.one(p)
    for c, d in D:
        # multiply by 1 + cX^d + c^2 X^{2d} + ... truncated
        geom = {0: CycScalar.one(p)}
        acc = CycScalar.one(p)
        n = d
        while n <= bound:
            acc = acc * c
            geom[n] = acc
            n += d
        out = (out * LaurentPoly(p, geom)).truncate(0, bound)
    return out


def _multiset_union_max(a: LFactorDescriptor, b: LFactorDescriptor):
    """Multiset max-union; returns (union, extra_over_a, extra_over_b)."""
    from collections import Counter

    ka = Counter((c.sort_key(), d) for c, d in a)
    kb = Counter((c.sort_key(), d) for c, d in b)
    lookup = {(c.sort_key(), d): (c, d) for c, d in tuple(a) + tuple(b)}
    union, extra_a, extra_b = [], [], []
    for key in set(ka) | set(kb):
        na, nb = ka.get(key, 0), kb.get(key, 0)
        m = max(na, nb)
        union += [lookup[key]] * m
        extra_a += [lookup[key]] * (m - na)
        extra_b += [lookup[key]] * (m - nb)
    return (LFactorDescriptor(a.prime, union),
            LFactorDescriptor(a.prime, extra_a),
            LFactorDescriptor(a.prime, extra_b))


# ---------------------------------------------------------------------------
# ZetaValue


class ZetaValue:
    """A rational function represented as l_part (descriptor) times poly."""

    __slots__ = ("l_part", "poly")

    def __init__(self, l_part: LFactorDescriptor, poly: LaurentPoly):
        self.l_part = l_part
        self.poly = poly

    @property
    def prime(self) -> int:
        return self.poly.prime

    @staticmethod
    def from_poly(poly: LaurentPoly) -> "ZetaValue":
        return ZetaValue(LFactorDescriptor(poly.prime), poly)

    @staticmethod
    def zero(prime: int) -> "ZetaValue":
        return ZetaValue(LFactorDescriptor(prime), LaurentPoly.zero(prime))

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def __add__(self, other: "ZetaValue") -> "ZetaValue":
        union, extra_self, extra_other = _multiset_union_max(self.l_part, other.l_part)
        p = (self.poly * extra_self.denominator_poly()
             + other.poly * extra_other.denominator_poly())
        return ZetaValue(union, p)

    def __neg__(self) -> "ZetaValue":
        return ZetaValue(self.l_part, -self.poly)

    def __sub__(self, other: "ZetaValue") -> "ZetaValue":
        return self + (-other)

    def __mul__(self, other) -> "ZetaValue":
        if isinstance(other, ZetaValue):
            return ZetaValue(self.l_part * other.l_part, self.poly * other.poly)
        if isinstance(other, LaurentPoly):
            return ZetaValue(self.l_part, self.poly * other)
        return ZetaValue(self.l_part, self.poly.scale(other))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, ZetaValue):
            return NotImplemented
        # cross-multiplied polynomial identity
        return (self.poly * other.l_part.denominator_poly()
                == other.poly * self.l_part.denominator_poly())

    def __hash__(self):
        raise TypeError("ZetaValue is unhashable (non-canonical pair)")

    def series(self, lo: int, hi: int) -> LaurentPoly:
        """Exact Laurent series coefficients of the rational function."""
        out = self.poly
        for c, d in self.l_part:
            if out.is_zero():
                break
            bottom = out.degree_range()[0]
            geom = {0: CycScalar.one(self.prime)}
            acc = CycScalar.one(self.prime)
            n = d
            while n <= hi - bottom:
                acc = acc * c
                geom[n] = acc
                n += d
            out = (out * LaurentPoly(self.prime, geom)).truncate(bottom, hi)
        return out.truncate(lo, hi)

    def __repr__(self) -> str:
        return f"ZetaValue({self.l_part!r}, {self.poly!r})"

    def to_json(self) -> dict:
        return {"l_part": self.l_part.to_json(), "poly": self.poly.to_json()}


def renormalize(z: ZetaValue, target: LFactorDescriptor) -> LaurentPoly:
    """Extract Phi with z = target * Phi; raises PoleMismatch on failure."""
    _, extra_z, extra_t = _multiset_union_max(z.l_part, target)
    # z / target = poly * (extra factors of target not in z) / (extra of z)
    num = z.poly * extra_z.denominator_poly()
    for c, d in extra_t:
        num = num.divide_by_factor(c, d)
    return num


# ---------------------------------------------------------------------------
# ring membership


class RingSpec:
    """The coefficient subring A = Z[1/p, mu_M][symbols, constants]."""

    __slots__ = ("prime", "root_order", "allow_sqrt", "allowed_symbols",
                 "allowed_constants", "_effective_m")

    def __init__(self, prime: int, root_order: int, allow_sqrt: bool = False,
                 allowed_symbols: Iterable[str] = (),
                 allowed_constants: Iterable[CycScalar] = ()):
        if root_order < 1:
            raise ValueError("root_order must be >= 1")
        self.prime = prime
        self.root_order = root_order
        self.allow_sqrt = allow_sqrt
        self.allowed_symbols = frozenset(allowed_symbols)
        self.allowed_constants = tuple(allowed_constants)
        m = root_order
        for const in self.allowed_constants:
            m = _lcm(m, const.compress().level)
        self._effective_m = m


class MembershipResult:
    __slots__ = ("verdict", "certificate")

    def __init__(self, verdict: bool, certificate: str | None = None):
        self.verdict = verdict
        self.certificate = certificate

    def __bool__(self) -> bool:
        return self.verdict

    def __repr__(self) -> str:
        return f"MembershipResult({self.verdict}, {self.certificate!r})"


def membership(a: CycScalar, A: RingSpec) -> MembershipResult:
    """Decide whether a lies in A; failure carries a certificate."""
    if a.prime != A.prime:
        return MembershipResult(False, f"prime mismatch {a.prime} != {A.prime}")
    M = A._effective_m
    L = _lcm(a.level, M)
    lifted = a.lift(L)
    for (j, qd, mono), c in lifted.coords.items():
        if qd and not A.allow_sqrt:
            return MembershipResult(False, f"sqrt(p) term at zeta exponent {j}")
        for name, _ in mono:
            if name not in A.allowed_symbols:
                return MembershipResult(False, f"symbol {name!r} not allowed")
        if not _exponent_in_subfield(L, M, j):
            return MembershipResult(
                False, f"coordinate zeta_{L}^{j} outside Q(mu_{M})")
        den = c.denominator
        while den % A.prime == 0:
            den //= A.prime
        if den != 1:
            return MembershipResult(False, f"denominator {c.denominator} not a power of {A.prime}")
    return MembershipResult(True)

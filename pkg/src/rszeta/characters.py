"""Characters of Q_p and of its quadratic extensions.

Additive character psi of conductor Z_p, multiplicative characters of Q_p^x
given by discrete-log data at a fixed primitive root, the unit b_chi attached
to a ramified character, and quadratic extensions E/Q_p with their norm, trace,
eta_{E/F} and unitary characters of E^x.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd as _gcd

from .scalars import CycScalar
from .padic import PAdic, residue_rep, val_p


class NoSolution(Exception):
    """The asserted existence of a solution failed (implementation bug)."""


class NonUnique(Exception):
    """The asserted uniqueness of a solution failed (implementation bug)."""


class UnsupportedExtension(Exception):
    """Character data outside the supported (cyclic unit group) range."""


def _phi(p: int, c: int) -> int:
    return (p - 1) * p ** (c - 1) if c >= 1 else 1


@lru_cache(maxsize=None)
def _primitive_root(p: int) -> int:
    """Smallest generator of (Z/p^2)^x; generates (Z/p^c)^x for every c >= 1."""
    m = p * p
    order = (p - 1) * p
    for g in range(2, m):
        if g % p == 0:
            continue
        x, k = g, 1
        while x != 1:
            x = x * g % m
            k += 1
        if k == order:
            return g
    raise AssertionError("no primitive root found")


@lru_cache(maxsize=None)
def _dlog_table(p: int, c: int) -> dict:
    g = _primitive_root(p)
    m = p**c
    table = {}
    x = 1
    for k in range(_phi(p, c)):
        table[x] = k
        x = x * g % m
    return table


def _unit_residue(x: Fraction, p: int, c: int) -> int:
    """The class of a unit x in (Z/p^c)^x."""
    x = Fraction(x)
    num, den = x.numerator, x.denominator
    m = p**c
    if num % p == 0 or den % p == 0:
        raise ValueError("not a unit")
    return num * pow(den, -1, m) % m


def as_fraction(x) -> Fraction:
    if isinstance(x, PAdic):
        return x.value
    return Fraction(x)


def psi(p: int, x) -> CycScalar:
    """The standard additive character of conductor Z_p: psi(a/p^m) = zeta_{p^m}^a."""
    x = as_fraction(x)
    if x == 0 or val_p(x, p) >= 0:
        return CycScalar.one(p)
    m = -val_p(x, p)
    rep = residue_rep(x, p, 0)          # a/p^m with 0 <= a < p^m
    a = int(rep * p**m)
    return CycScalar.zeta(p, p**m, a)


class MultChar:
    """Character of Q_p^x: chi(p^v u) = value_at_p^v * zeta_{phi(p^c)}^{a dlog(u)}.

    The conductor is normalized to be minimal at construction.
    """

    __slots__ = ("prime", "c", "a", "value_at_p")

    def __init__(self, prime: int, c: int, a: int = 0,
                 value_at_p: CycScalar | None = None):
        if value_at_p is None:
            value_at_p = CycScalar.one(prime)
        if c < 0:
            raise ValueError("conductor must be >= 0")
        if c >= 1:
            a %= _phi(prime, c)
        else:
            a = 0
        # chi is trivial on 1 + p^{c-1} iff chi(g) is a phi(p^{c-1})-th root,
        # i.e. p | a for c >= 2 (resp. a = 0 for c = 1)
        while c >= 2 and a % prime == 0:
            a //= prime
            c -= 1
        if c == 1 and a == 0:
            c = 0
        self.prime = prime
        self.c = c
        self.a = a
        self.value_at_p = value_at_p

    @classmethod
    def trivial(cls, p: int) -> "MultChar":
        return cls(p, 0)

    @classmethod
    def unramified(cls, p: int, value_at_p: CycScalar) -> "MultChar":
        return cls(p, 0, 0, value_at_p)

    def order_units(self) -> int:
        """Order of the restriction to O^x."""
        phi = _phi(self.prime, self.c)
        return phi // _gcd(phi, self.a) if self.c else 1

    def o(self) -> int:
        """o(chi) = #(O^x / 1 + p^c O) = phi(p^c)."""
        return _phi(self.prime, self.c)

    def is_trivial(self) -> bool:
        return self.c == 0 and self.value_at_p == CycScalar.one(self.prime)

    def is_unramified(self) -> bool:
        return self.c == 0

    def eval_unit(self, u) -> CycScalar:
        if self.c == 0:
            return CycScalar.one(self.prime)
        k = _dlog_table(self.prime, self.c)[_unit_residue(as_fraction(u), self.prime, self.c)]
        return CycScalar.zeta(self.prime, _phi(self.prime, self.c), self.a * k)

    def __call__(self, x) -> CycScalar:
        x = as_fraction(x)
        if x == 0:
            raise ValueError("character evaluated at 0")
        v = val_p(x, self.prime)
        u = x / Fraction(self.prime) ** v
        return self.value_at_p**v * self.eval_unit(u)

    def _lift_exp(self, c: int) -> int:
        """Exponent of this character written at (possibly larger) conductor c."""
        if self.c == 0:
            return 0
        return self.a * (_phi(self.prime, c) // _phi(self.prime, self.c))

    def __mul__(self, other: "MultChar") -> "MultChar":
        if self.prime != other.prime:
            raise ValueError("prime mismatch")
        c = max(self.c, other.c)
        return MultChar(self.prime, c, self._lift_exp(c) + other._lift_exp(c),
                        self.value_at_p * other.value_at_p)

    def inverse(self) -> "MultChar":
        return MultChar(self.prime, self.c, -self.a, self.value_at_p.inverse())

    def conj(self) -> "MultChar":
        return MultChar(self.prime, self.c, -self.a, self.value_at_p.conj())

    def __pow__(self, n: int) -> "MultChar":
        return MultChar(self.prime, self.c, self.a * n, self.value_at_p**n)

    def __eq__(self, other) -> bool:
        return (isinstance(other, MultChar)
                and (self.prime, self.c, self.a) == (other.prime, other.c, other.a)
                and self.value_at_p == other.value_at_p)

    def __hash__(self):
        return hash((self.prime, self.c, self.a))

    def __repr__(self):
        return f"MultChar(p={self.prime}, c={self.c}, a={self.a})"

    def to_json(self) -> dict:
        return {"p": self.prime, "conductor": self.c, "gen_exp": self.a,
                "value_at_p": self.value_at_p.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "MultChar":
        p = data["p"]
        return cls(p, data["conductor"], data["gen_exp"],
                   CycScalar.from_json(p, data["value_at_p"]))


def all_unit_chars(p: int, c: int) -> list[MultChar]:
    """All characters of O^x with conductor exactly c (trivial at p)."""
    if c == 0:
        return [MultChar.trivial(p)]
    out = []
    for a in range(_phi(p, c)):
        chi = MultChar(p, c, a)
        if chi.c == c:
            out.append(chi)
    return out


def b_chi(chi: MultChar) -> int:
    """The unit b with chi(1+x) = psi(b p^{-c} x) for all v(x) >= ceil(c/2).

    Exhaustive solve over classes mod p^{floor(c/2)}, certified on all x mod p^c.
    """
    p, c = chi.prime, chi.c
    if c < 2:
        raise ValueError("b_chi requires conductor >= 2")
    ceil, floor = (c + 1) // 2, c // 2
    xs = [Fraction(p**ceil * y) for y in range(p ** (c - ceil))]
    found = []
    for b in range(1, p**floor):
        if b % p == 0:
            continue
        if all(chi(1 + x) == psi(p, Fraction(b, p**c) * x) for x in xs):
            found.append(b)
    if not found:
        raise NoSolution("no b certified the additive characterization")
    if len(found) > 1:
        raise NonUnique(f"multiple candidates {found}")
    return found[0]


# ---------------------------------------------------------------------------
# quadratic extensions


def legendre(p: int, u) -> int:
    r = _unit_residue(as_fraction(u), p, 1)
    return 1 if pow(r, (p - 1) // 2, p) == 1 else -1


def smallest_nonresidue(p: int) -> int:
    return next(u for u in range(2, p) if legendre(p, u) == -1)


def hilbert_symbol(p: int, x, y) -> int:
    """(x, y)_p for odd p."""
    x, y = as_fraction(x), as_fraction(y)
    a, b = val_p(x, p), val_p(y, p)
    u = x / Fraction(p) ** a
    w = y / Fraction(p) ** b
    sign = -1 if (a * b * (p - 1) // 2) % 2 else 1
    return sign * legendre(p, u) ** b * legendre(p, w) ** a


class QuadExt:
    """Quadratic extension E = Q_p(sqrt(d)) with a distinguished uniformizer.

    kinds: "inert" (d a non-residue unit), "ramified_1" (d = -p, so
    Nr(pi_E) = p exactly), "ramified_2" (the other ramified class; no
    uniformizer has norm exactly p there, and the unit Nr(pi_E)/p is recorded).
    """

    __slots__ = ("prime", "kind", "d", "e", "f", "norm_unit")

    def __init__(self, prime: int, kind: str):
        if prime == 2:
            raise ValueError("p = 2 not supported")
        self.prime = prime
        self.kind = kind
        eps = smallest_nonresidue(prime)
        if kind == "inert":
            self.d = Fraction(eps)
            self.e, self.f = 1, 2
        elif kind == "ramified_1":
            self.d = Fraction(-prime)
            self.e, self.f = 2, 1
        elif kind == "ramified_2":
            self.d = Fraction(-eps * prime)
            self.e, self.f = 2, 1
        else:
            raise ValueError(f"unknown kind {kind!r}")
        pi = self.uniformizer()
        nr = pi.norm()
        self.norm_unit = nr / Fraction(prime) ** self.f
        if val_p(self.norm_unit, prime) != 0:
            raise AssertionError("uniformizer norm is not p^f times a unit")
        if kind != "ramified_2" and self.norm_unit != 1:
            raise AssertionError("Nr(pi_E) = p^f convention violated")

    def uniformizer(self) -> "EElt":
        if self.kind == "inert":
            return EElt(self, Fraction(self.prime), Fraction(0))
        return EElt(self, Fraction(0), Fraction(1))

    def one(self) -> "EElt":
        return EElt(self, Fraction(1), Fraction(0))

    def from_base(self, x) -> "EElt":
        return EElt(self, as_fraction(x), Fraction(0))

    def residue_card(self) -> int:
        return self.prime**self.f

    def unit_levels(self, c: int) -> tuple[int, int]:
        """(m_a, m_b): pi_E^c O_E = p^{m_a} Z_p + p^{m_b} theta Z_p."""
        if self.kind == "inert":
            return (c, c)
        return ((c + 1) // 2, c // 2)

    def unit_residues(self, c: int) -> list["EElt"]:
        """Representatives of (O_E / pi_E^c)^x."""
        p = self.prime
        ma, mb = self.unit_levels(c)
        out = []
        for a in range(p**ma):
            for b in range(p**mb):
                x = EElt(self, Fraction(a), Fraction(b))
                if x.val() == 0:
                    out.append(x)
        return out

    def vol_O_E(self) -> CycScalar:
        """Additive volume of O_E under the self-dual-style normalization q^{(1-e)/2}."""
        return CycScalar.q_half(self.prime, 1 - self.e)

    def __eq__(self, other):
        return (isinstance(other, QuadExt)
                and (self.prime, self.kind) == (other.prime, other.kind))

    def __hash__(self):
        return hash((self.prime, self.kind))

    def __repr__(self):
        return f"QuadExt(p={self.prime}, {self.kind})"


@dataclass(frozen=True)
class EElt:
    """Element a + b*sqrt(d) of a quadratic extension, exact rational coordinates."""

    ext: QuadExt
    a: Fraction
    b: Fraction

    def __add__(self, other):
        other = self._coerce(other)
        return EElt(self.ext, self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        other = self._coerce(other)
        return EElt(self.ext, self.a - other.a, self.b - other.b)

    def __mul__(self, other):
        other = self._coerce(other)
        d = self.ext.d
        return EElt(self.ext,
                    self.a * other.a + d * self.b * other.b,
                    self.a * other.b + self.b * other.a)

    def __neg__(self):
        return EElt(self.ext, -self.a, -self.b)

    def _coerce(self, other):
        if isinstance(other, EElt):
            if other.ext is not self.ext and other.ext.d != self.ext.d:
                raise ValueError("extension mismatch")
            return other
        return EElt(self.ext, as_fraction(other), Fraction(0))

    def conj_E(self) -> "EElt":
        return EElt(self.ext, self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - self.ext.d * self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a

    def inverse(self) -> "EElt":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverting 0 in E")
        return EElt(self.ext, self.a / n, -self.b / n)

    def __pow__(self, n: int) -> "EElt":
        if n < 0:
            return self.inverse() ** (-n)
        out = self.ext.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def val(self) -> int | None:
        """Valuation normalized with v_E(pi_E) = 1."""
        p = self.ext.prime
        va = val_p(self.a, p)
        vb = val_p(self.b, p)
        if self.ext.kind == "inert":
            parts = [v for v in (va, vb) if v is not None]
        else:
            parts = [v for v in (None if va is None else 2 * va,
                                 None if vb is None else 2 * vb + 1)
                     if v is not None]
        return min(parts) if parts else None

    def is_integral(self) -> bool:
        v = self.val()
        return v is None or v >= 0

    def unit_key(self, c: int) -> tuple:
        """The class of a unit in (O_E / pi_E^c)^x."""
        if self.val() != 0:
            raise ValueError("not a unit")
        p = self.ext.prime
        ma, mb = self.ext.unit_levels(c)
        return (residue_rep(self.a, p, ma), residue_rep(self.b, p, mb))

    def __repr__(self):
        return f"EElt({self.a} + {self.b}*sqrt({self.ext.d}))"


def norm_trace(E: QuadExt, x: EElt) -> tuple[Fraction, Fraction]:
    return (x.norm(), x.trace())


def eta_EF(E: QuadExt, x) -> int:
    """+1 iff x is a norm from E^x (quadratic character of class field theory)."""
    x = as_fraction(x)
    if x == 0:
        raise ValueError("eta evaluated at 0")
    return hilbert_symbol(E.prime, x, E.d)


@lru_cache(maxsize=None)
def _e_unit_group(ext_key, c: int):
    """(reps, dlog) for (O_E/pi_E^c)^x when the group is cyclic."""
    p, kind = ext_key
    ext = QuadExt(p, kind)
    reps = ext.unit_residues(c)
    order = len(reps)
    keys = {x.unit_key(c) for x in reps}
    for g in reps:
        dlog = {}
        x = ext.one()
        for k in range(order):
            key = x.unit_key(c)
            if key in dlog:
                break
            dlog[key] = k
            x = x * g
        if len(dlog) == order and x.unit_key(c) == ext.one().unit_key(c):
            assert set(dlog) == keys
            return reps, dlog
    raise UnsupportedExtension(
        f"(O_E/pi_E^{c})^x is not cyclic for {kind}, p={p}")


class ECharacter:
    """Unitary character of E^x given by an exponent on a cyclic generator.

    xi(pi_E^v u) = value_at_piE^v * zeta_n^{a dlog(u)} with n the order of
    (O_E/pi_E^c)^x.  Conductors with non-cyclic unit group (inert, c >= 2)
    are rejected; the desk scale never needs them.
    """

    __slots__ = ("ext", "c", "a", "value_at_piE")

    def __init__(self, ext: QuadExt, c: int, a: int = 0,
                 value_at_piE: CycScalar | None = None):
        if value_at_piE is None:
            value_at_piE = CycScalar.one(ext.prime)
        if c < 1:
            raise ValueError("conductor must be >= 1 (c = 0 not used here)")
        _, dlog = _e_unit_group((ext.prime, ext.kind), c)
        n = len(dlog)
        a %= n
        # normalize the conductor to be minimal
        while c >= 2:
            down_reps, down_dlog = _e_unit_group((ext.prime, ext.kind), c - 1)
            if not self._trivial_on_level(ext, c, a, n):
                break
            # re-express on the smaller group via its generator
            gen = next(x for x in down_reps if down_dlog[x.unit_key(c - 1)] == 1)
            val = CycScalar.zeta(ext.prime, n, a * dlog[gen.unit_key(c)])
            n_down = len(down_dlog)
            a = next(k for k in range(n_down)
                     if CycScalar.zeta(ext.prime, n_down, k) == val)
            c, n = c - 1, n_down
        self.ext = ext
        self.c = c
        self.a = a
        self.value_at_piE = value_at_piE

    @staticmethod
    def _trivial_on_level(ext: QuadExt, c: int, a: int, n: int) -> bool:
        _, dlog = _e_unit_group((ext.prime, ext.kind), c)
        one_key = ext.one().unit_key(c - 1)
        for key, k in dlog.items():
            x = EElt(ext, key[0], key[1])
            if x.unit_key(c - 1) == one_key and (a * k) % n:
                return False
        return True

    def order_units(self) -> int:
        _, dlog = _e_unit_group((self.ext.prime, self.ext.kind), self.c)
        n = len(dlog)
        return n // _gcd(n, self.a) if self.a else 1

    def o(self) -> int:
        """o(xi) = #((O_E/pi_E^c)^x)."""
        _, dlog = _e_unit_group((self.ext.prime, self.ext.kind), self.c)
        return len(dlog)

    def eval_unit(self, u: EElt) -> CycScalar:
        _, dlog = _e_unit_group((self.ext.prime, self.ext.kind), self.c)
        n = len(dlog)
        return CycScalar.zeta(self.ext.prime, n, self.a * dlog[u.unit_key(self.c)])

    def __call__(self, x: EElt) -> CycScalar:
        v = x.val()
        if v is None:
            raise ValueError("character evaluated at 0")
        u = x * self.ext.uniformizer() ** (-v)
        return self.value_at_piE**v * self.eval_unit(u)

    def inverse(self) -> "ECharacter":
        return ECharacter(self.ext, self.c, -self.a, self.value_at_piE.inverse())

    def conj(self) -> "ECharacter":
        return ECharacter(self.ext, self.c, -self.a, self.value_at_piE.conj())

    def galois_twist(self) -> "ECharacter":
        """xi^sigma: precompose with the nontrivial automorphism of E."""
        _, dlog = _e_unit_group((self.ext.prime, self.ext.kind), self.c)
        n = len(dlog)
        gen = next(EElt(self.ext, k[0], k[1]) for k, v in dlog.items() if v == 1)
        val = self.eval_unit(gen.conj_E())
        a = next(k for k in range(n) if CycScalar.zeta(self.ext.prime, n, k) == val)
        # sigma(pi_E) = pi_E * (unit); fold the unit value into the pi_E value
        pi = self.ext.uniformizer()
        u = pi.conj_E() * pi.inverse()
        if u.val() != 0:
            raise AssertionError("sigma(pi_E)/pi_E should be a unit")
        return ECharacter(self.ext, self.c, a,
                          self.value_at_piE * self.eval_unit(u))

    def is_regular(self) -> bool:
        """Nontrivial on ker(Nr): tested on norm-one unit classes mod pi_E^c."""
        reps, _ = _e_unit_group((self.ext.prime, self.ext.kind), self.c)
        p = self.ext.prime
        one = CycScalar.one(p)
        # norm-one classes mod pi_E^c are detected by Nr(u) = 1 mod p^m
        m = self.c if self.ext.e == 1 else (self.c + 1) // 2
        for u in reps:
            if residue_rep(u.norm() - 1, p, m) == 0 and self.eval_unit(u) != one:
                return True
        return False

    def restrict_to_F(self) -> MultChar:
        """xi|_{F^x} as a character of Q_p^x (uses Nr(pi_E) = p^f * unit)."""
        p = self.ext.prime
        # conductor of the restriction is at most c+1 (ramified index bound)
        cF = self.c + 1
        g = _primitive_root(p)
        val_g = self.eval_unit(self.ext.from_base(g))
        phi = _phi(p, cF)
        a = next((k for k in range(phi)
                  if CycScalar.zeta(p, phi, k) == val_g
                  and MultChar(p, cF, k).eval_unit(g) == val_g), None)
        if a is None:
            raise NoSolution("restriction is not a character mod p^{c+1}")
        # xi(p) = xi(pi_E^e * unit adjustment): p = Nr(pi_E)/norm_unit for f=1;
        # for the inert case p = pi_E
        if self.ext.f == 2:
            value_at_p = self.value_at_piE
        else:
            pi2 = self.ext.uniformizer() ** 2
            u = pi2.inverse() * self.ext.from_base(p)
            value_at_p = self.value_at_piE**2 * self.eval_unit(u)
        return MultChar(p, cF, a, value_at_p)

    def to_json(self) -> dict:
        return {"p": self.ext.prime, "ext_kind": self.ext.kind,
                "conductor": self.c, "gen_exp": self.a,
                "value_at_piE": self.value_at_piE.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "ECharacter":
        ext = QuadExt(data["p"], data["ext_kind"])
        return cls(ext, data["conductor"], data["gen_exp"],
                   CycScalar.from_json(data["p"], data["value_at_piE"]))

    def __eq__(self, other):
        return (isinstance(other, ECharacter)
                and (self.ext.prime, self.ext.kind, self.c, self.a)
                == (other.ext.prime, other.ext.kind, other.c, other.a)
                and self.value_at_piE == other.value_at_piE)

    def __repr__(self):
        return f"ECharacter({self.ext!r}, c={self.c}, a={self.a})"

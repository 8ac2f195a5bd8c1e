"""Representation classes for GL2(Q_p): conductors, central characters,
L- and epsilon-factors, and normalized Schur polynomials.

Every class is stored in its normal form where the ramified data is trivial
on the uniformizer; an optional unramified twist is carried as a unitary
symbol and folded in wherever a value at p is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .scalars import CycScalar, LFactorDescriptor
from .characters import (
    ECharacter,
    EElt,
    MultChar,
    QuadExt,
    _phi,
    eta_EF,
    psi,
)
from .sums import epsilon_gl1, gamma_const


class UnsupportedClass(ValueError):
    """Raised when an operation is not implemented for a representation class."""


def _twist_or_one(prime: int, twist: CycScalar | None) -> CycScalar:
    return CycScalar.one(prime) if twist is None else twist


class UnramifiedPS:
    """Unramified principal series, either with numeric Satake scalars
    (alpha, beta) or with formal normalized Hecke data (h, z) only,
    where h = q^{1/2}(alpha + beta) and z = alpha*beta.
    """

    def __init__(self, prime: int, alpha: CycScalar | None = None,
                 beta: CycScalar | None = None, tempered: bool = True):
        self.prime = prime
        self.alpha = alpha
        self.beta = beta
        self.tempered = tempered
        if alpha is not None:
            if beta is None:
                raise ValueError("alpha and beta must be given together")
            self.h = CycScalar.sqrt_q(prime) * (alpha + beta)
            self.z = alpha * beta
        else:
            self.h = CycScalar.symbol(prime, "h")
            self.z = CycScalar.symbol(prime, "z")

    @property
    def numeric(self) -> bool:
        return self.alpha is not None

    def dual(self) -> "UnramifiedPS":
        if not self.numeric:
            return UnramifiedPS(self.prime)
        return UnramifiedPS(self.prime, self.alpha.conj(), self.beta.conj(),
                            self.tempered)

    def __eq__(self, other):
        return (isinstance(other, UnramifiedPS) and self.prime == other.prime
                and self.h == other.h and self.z == other.z)

    def __hash__(self):
        return hash(("UnramifiedPS", self.prime, self.h, self.z))

    def __repr__(self):
        if self.numeric:
            return f"UnramifiedPS(p={self.prime}, alpha={self.alpha!r}, beta={self.beta!r})"
        return f"UnramifiedPS(p={self.prime}, formal)"


@dataclass(frozen=True)
class SteinbergUnrTwist:
    """St otimes chi for an unramified character chi."""

    chi: MultChar

    def __post_init__(self):
        if not self.chi.is_unramified():
            raise ValueError("twisting character must be unramified")

    @property
    def prime(self) -> int:
        return self.chi.prime

    def dual(self) -> "SteinbergUnrTwist":
        return SteinbergUnrTwist(self.chi.inverse())


@dataclass(frozen=True)
class HalfRamifiedPS:
    """I(chi*omega, chi^{-1}) with chi unramified, omega ramified,
    omega(p) = 1, times an optional unramified unitary twist."""

    chi: MultChar
    omega: MultChar
    twist: CycScalar | None = None

    def __post_init__(self):
        if not self.chi.is_unramified():
            raise ValueError("chi must be unramified")
        if self.omega.is_unramified():
            raise ValueError("omega must be ramified")
        if self.omega.value_at_p != CycScalar.one(self.omega.prime):
            raise ValueError("omega must be trivial at p")

    @property
    def prime(self) -> int:
        return self.chi.prime

    def dual(self) -> "HalfRamifiedPS":
        tw = None if self.twist is None else self.twist.conj()
        return HalfRamifiedPS(self.chi.inverse(), self.omega.inverse(), tw)


@dataclass(frozen=True)
class FullyRamifiedPS:
    """I(chi*chi1, chi^{-1}*chi2) with chi unramified and chi1, chi2 ramified
    with chi_i(p) = 1, times an optional unramified twist.  Carries metadata
    only: no value table is attached to this class."""

    chi: MultChar
    chi1: MultChar
    chi2: MultChar
    twist: CycScalar | None = None

    def __post_init__(self):
        if not self.chi.is_unramified():
            raise ValueError("chi must be unramified")
        for part in (self.chi1, self.chi2):
            if part.is_unramified():
                raise ValueError("chi1, chi2 must be ramified")
            if part.value_at_p != CycScalar.one(part.prime):
                raise ValueError("chi1, chi2 must be trivial at p")

    @property
    def prime(self) -> int:
        return self.chi.prime

    def dual(self) -> "FullyRamifiedPS":
        tw = None if self.twist is None else self.twist.conj()
        return FullyRamifiedPS(self.chi.inverse(), self.chi1.inverse(),
                               self.chi2.inverse(), tw)


@dataclass(frozen=True)
class SteinbergRamTwist:
    """St otimes chi for a ramified character chi with chi(p) = 1, times an
    optional unramified twist.  Metadata only: no value table."""

    chi: MultChar
    twist: CycScalar | None = None

    def __post_init__(self):
        if self.chi.is_unramified():
            raise ValueError("chi must be ramified")
        if self.chi.value_at_p != CycScalar.one(self.chi.prime):
            raise ValueError("chi must be trivial at p")

    @property
    def prime(self) -> int:
        return self.chi.prime

    def dual(self) -> "SteinbergRamTwist":
        tw = None if self.twist is None else self.twist.conj()
        return SteinbergRamTwist(self.chi.inverse(), tw)


@dataclass(frozen=True)
class Supercuspidal:
    """Dihedral supercuspidal attached to a quadratic extension E and a
    regular character xi of E^x, normalized so the central character is
    trivial at p, times an optional unramified twist."""

    ext: QuadExt
    xi: ECharacter
    twist: CycScalar | None = None

    def __post_init__(self):
        if not self.xi.is_regular():
            raise ValueError("xi must be regular")

    @property
    def prime(self) -> int:
        return self.ext.prime

    def dual(self) -> "Supercuspidal":
        tw = None if self.twist is None else self.twist.conj()
        return Supercuspidal(self.ext, self.xi.inverse(), tw)


LocalRep = Union[UnramifiedPS, SteinbergUnrTwist, HalfRamifiedPS,
                 FullyRamifiedPS, SteinbergRamTwist, Supercuspidal]


def conductor(pi: LocalRep) -> int:
    if isinstance(pi, UnramifiedPS):
        return 0
    if isinstance(pi, SteinbergUnrTwist):
        return 1
    if isinstance(pi, HalfRamifiedPS):
        return pi.omega.c
    if isinstance(pi, FullyRamifiedPS):
        return pi.chi1.c + pi.chi2.c
    if isinstance(pi, SteinbergRamTwist):
        return 2 * pi.chi.c
    if isinstance(pi, Supercuspidal):
        E = pi.ext
        return E.f * pi.xi.c + E.e - 1
    raise UnsupportedClass(type(pi).__name__)


def dual(pi: LocalRep) -> LocalRep:
    return pi.dual()


def eta_char(E: QuadExt) -> MultChar:
    """The quadratic character of F^x cut out by E, as explicit data."""
    p = E.prime
    value = CycScalar.rational(p, eta_EF(E, Fraction(p)))
    if E.e == 1:
        return MultChar.unramified(p, value)
    return MultChar(p, 1, _phi(p, 1) // 2, value)


def central_char(pi: LocalRep) -> MultChar:
    p = pi.prime
    if isinstance(pi, UnramifiedPS):
        return MultChar.unramified(p, pi.z)
    if isinstance(pi, SteinbergUnrTwist):
        return pi.chi * pi.chi
    if isinstance(pi, HalfRamifiedPS):
        base = pi.omega
    elif isinstance(pi, FullyRamifiedPS):
        base = pi.chi1 * pi.chi2
    elif isinstance(pi, SteinbergRamTwist):
        base = pi.chi * pi.chi
    elif isinstance(pi, Supercuspidal):
        base = eta_char(pi.ext) * pi.xi.restrict_to_F()
    else:
        raise UnsupportedClass(type(pi).__name__)
    tw = getattr(pi, "twist", None)
    if tw is not None:
        base = base * MultChar.unramified(p, tw * tw)
    return base


def _inducing_data(pi: LocalRep) -> list[tuple[MultChar, CycScalar]] | None:
    """Inducing characters of pi as (ramified part, value at p) pairs, with the
    Steinberg classes contributing their single |.|^{1/2}-shifted character.
    Supercuspidals return None."""
    p = pi.prime
    one = CycScalar.one(p)
    if isinstance(pi, UnramifiedPS):
        if not pi.numeric:
            raise UnsupportedClass("formal unramified data has no factored Satake scalars")
        triv = MultChar.trivial(p)
        return [(triv, pi.alpha), (triv, pi.beta)]
    if isinstance(pi, SteinbergUnrTwist):
        return [(MultChar.trivial(p), pi.chi(p) * CycScalar.q_half(p, -1))]
    tw = _twist_or_one(p, getattr(pi, "twist", None))
    if isinstance(pi, HalfRamifiedPS):
        return [(pi.omega, pi.chi(p) * tw), (MultChar.trivial(p), pi.chi.inverse()(p) * tw)]
    if isinstance(pi, FullyRamifiedPS):
        return [(pi.chi1, pi.chi(p) * tw), (pi.chi2, pi.chi.inverse()(p) * tw)]
    if isinstance(pi, SteinbergRamTwist):
        return [(pi.chi, tw * CycScalar.q_half(p, -1))]
    if isinstance(pi, Supercuspidal):
        return None
    raise UnsupportedClass(type(pi).__name__)


def l_factor_gl2(pi: LocalRep) -> LFactorDescriptor:
    p = pi.prime
    data = _inducing_data(pi)
    if data is None:
        return LFactorDescriptor(p)
    factors = [(value, 1) for ram, value in data if ram.is_trivial()]
    return LFactorDescriptor(p, factors)


def _units_agree(a: ECharacter, b: ECharacter) -> bool:
    E = a.ext
    level = max(a.c, b.c, 1)
    return all(a.eval_unit(u) == b.eval_unit(u) for u in E.unit_residues(level))


def _eta_self_twist_equivalent(pi: Supercuspidal) -> bool:
    """Whether pi otimes eta_{E/F} is isomorphic to pi."""
    E = pi.ext
    if E.e == 1:
        # eta composed with the norm is trivial: norms have even valuation
        return True
    # for ramified E, eta o Nr fixes units and negates the value at the
    # uniformizer; compare against xi and its Galois conjugate
    xi = pi.xi
    neg = CycScalar.rational(E.prime, -1)
    flipped_value = neg * xi.value_at_piE
    if flipped_value == xi.value_at_piE:
        return True
    sigma = xi.galois_twist()
    return _units_agree(xi, sigma) and sigma.value_at_piE == flipped_value


def _rs_supercuspidal_pair(p1: Supercuspidal, p2: Supercuspidal) -> LFactorDescriptor:
    p = p1.prime
    E = p1.ext
    empty = LFactorDescriptor(p)
    if (E.prime, E.kind) != (p2.ext.prime, p2.ext.kind):
        return empty
    m = 2 if E.e == 1 else 1  # valuation of the norm of the uniformizer of E
    t1 = _twist_or_one(p, p1.twist)
    t2 = _twist_or_one(p, p2.twist)
    target = p2.xi.inverse()
    for cand in (p1.xi, p1.xi.galois_twist()):
        if not _units_agree(target, cand):
            continue
        # solve mu(p)^m from the values at the uniformizer of E, folding the
        # unramified twists through the norm
        ratio = (target.value_at_piE * (t2.conj() ** m)
                 / (cand.value_at_piE * (t1 ** m)))
        if _eta_self_twist_equivalent(p1):
            # pi_1 | . |^{s0} is eta-self-equivalent: the factor is in X^2
            c = ratio.inverse() if m == 2 else (ratio ** 2).inverse()
            return LFactorDescriptor(p, [(c, 2)])
        # only possible over ramified E, where m = 1
        return LFactorDescriptor(p, [(ratio.inverse(), 1)])
    return empty


def rs_l_factor(pair: "PiPair") -> LFactorDescriptor:
    pi1, pi2 = pair.pi1, pair.pi2
    p = pi1.prime
    sc1 = isinstance(pi1, Supercuspidal)
    sc2 = isinstance(pi2, Supercuspidal)
    if sc1 and sc2:
        return _rs_supercuspidal_pair(pi1, pi2)
    if sc1 or sc2:
        return LFactorDescriptor(p)
    st1 = isinstance(pi1, (SteinbergUnrTwist, SteinbergRamTwist))
    st2 = isinstance(pi2, (SteinbergUnrTwist, SteinbergRamTwist))
    if st1 and st2:
        # sp(2) x sp(2) = sp(3) + sp(1): monodromy invariants carry Frobenius
        # eigenvalues w/q and w, with w the value at p of the twist product
        # (and no factor at all when that product ramifies)
        ram1 = isinstance(pi1, SteinbergRamTwist)
        ram2 = isinstance(pi2, SteinbergRamTwist)
        if ram1 != ram2:
            return LFactorDescriptor(p)
        if ram1:
            prod = pi1.chi * pi2.chi
            if not prod.is_unramified():
                return LFactorDescriptor(p)
            w = prod(p) * _twist_or_one(p, pi1.twist) * _twist_or_one(p, pi2.twist)
        else:
            w = pi1.chi(p) * pi2.chi(p)
        return LFactorDescriptor(p, [
            (w * CycScalar.rational(p, Fraction(1, p)), 1),
            (w, 1),
        ])
    data1 = _inducing_data(pi1)
    data2 = _inducing_data(pi2)
    factors = []
    for r1, v1 in data1:
        for r2, v2 in data2:
            if (r1 * r2).is_unramified():
                factors.append((v1 * v2, 1))
    return LFactorDescriptor(p, factors)


def _epsilon_xi_trace(pi: Supercuspidal) -> CycScalar:
    """epsilon(1/2, xi, psi o Tr) as a finite sum over the shell of elements
    of E of valuation 1 - e - c(xi)."""
    E = pi.ext
    p = E.prime
    xi = pi.xi
    c = max(xi.c, 1)
    n = 1 - E.e - c
    pieE = E.uniformizer()
    shell = pieE ** n
    M = c + 2  # deep enough that psi(Tr(shell * (1 + pi_E^M O_E))) is constant
    xi_inv = xi.inverse()
    total = CycScalar.zero(p)
    for d in E.unit_residues(M):
        total = total + xi_inv.eval_unit(d) * psi(p, (shell * d).trace())
    # |x|_E^{-1/2} on the shell, the additive volume of each unit class, and
    # the value of xi^{-1} at the shell's uniformizer power
    modulus = CycScalar.q_half(p, E.f * n)
    class_vol = E.vol_O_E() * Fraction(p) ** (-E.f * (n + M))
    value = xi_inv.value_at_piE ** n
    return modulus * class_vol * value * total


def epsilon_gl2(pi: LocalRep) -> CycScalar:
    p = pi.prime
    if isinstance(pi, UnramifiedPS):
        return CycScalar.one(p)
    if isinstance(pi, SteinbergUnrTwist):
        return -pi.chi(p)
    tw = _twist_or_one(p, getattr(pi, "twist", None))
    tw_char = MultChar.unramified(p, tw)
    if isinstance(pi, HalfRamifiedPS):
        return epsilon_gl1(pi.omega * MultChar.unramified(p, pi.chi(p)) * tw_char).at_half()
    if isinstance(pi, FullyRamifiedPS):
        e1 = epsilon_gl1(pi.chi1 * MultChar.unramified(p, pi.chi(p)) * tw_char)
        e2 = epsilon_gl1(pi.chi2 * MultChar.unramified(p, pi.chi.inverse()(p)) * tw_char)
        return e1.at_half() * e2.at_half()
    if isinstance(pi, SteinbergRamTwist):
        eps = epsilon_gl1(pi.chi * tw_char).at_half()
        return eps * eps
    if isinstance(pi, Supercuspidal):
        value = gamma_const(pi.ext) * _epsilon_xi_trace(pi)
        value = value * tw ** conductor(pi)
        if value * value.conj() != CycScalar.one(p):
            raise AssertionError("supercuspidal epsilon is not unit modulus")
        return value
    raise UnsupportedClass(type(pi).__name__)


def schur_norm(i: int, pi: UnramifiedPS) -> CycScalar:
    """Normalized Schur value q^{-i/2} (alpha^{i+1} - beta^{i+1})/(alpha - beta)
    by the recurrence s_i = (h/q) s_{i-1} - (z/q) s_{i-2}."""
    if i < -1:
        raise ValueError("i must be >= -1")
    p = pi.prime
    prev, cur = CycScalar.zero(p), CycScalar.one(p)  # s_{-1}, s_0
    for _ in range(max(i, 0)):
        prev, cur = cur, pi.h * Fraction(1, p) * cur - pi.z * Fraction(1, p) * prev
    return prev if i == -1 else cur


class PiPair:
    """A pair of local representations with its derived size data."""

    def __init__(self, pi1: LocalRep, pi2: LocalRep):
        if pi1.prime != pi2.prime:
            raise ValueError("mismatched primes")
        self.pi1 = pi1
        self.pi2 = pi2
        self.tau = max(conductor(pi1), conductor(pi2))
        self.nu = 1 if self.tau == 0 and conductor(pi1) == 0 == conductor(pi2) \
            else pi1.prime ** 2 - 1

    @property
    def prime(self) -> int:
        return self.pi1.prime

    def conductors(self) -> tuple[int, int]:
        return (conductor(self.pi1), conductor(self.pi2))

    def central(self) -> MultChar:
        return central_char(self.pi1) * central_char(self.pi2)

    def __repr__(self):
        return f"PiPair({self.pi1!r}, {self.pi2!r})"


# --- serialization -----------------------------------------------------------


def rep_to_json(pi: LocalRep) -> dict:
    if isinstance(pi, UnramifiedPS):
        out = {"class": "UnramifiedPS", "prime": pi.prime, "tempered": pi.tempered}
        if pi.numeric:
            out["alpha"] = pi.alpha.to_json()
            out["beta"] = pi.beta.to_json()
        return out
    if isinstance(pi, SteinbergUnrTwist):
        return {"class": "SteinbergUnrTwist", "chi": pi.chi.to_json()}
    tw = getattr(pi, "twist", None)
    tw_json = None if tw is None else tw.to_json()
    if isinstance(pi, HalfRamifiedPS):
        return {"class": "HalfRamifiedPS", "chi": pi.chi.to_json(),
                "omega": pi.omega.to_json(), "twist": tw_json}
    if isinstance(pi, FullyRamifiedPS):
        return {"class": "FullyRamifiedPS", "chi": pi.chi.to_json(),
                "chi1": pi.chi1.to_json(), "chi2": pi.chi2.to_json(),
                "twist": tw_json}
    if isinstance(pi, SteinbergRamTwist):
        return {"class": "SteinbergRamTwist", "chi": pi.chi.to_json(),
                "twist": tw_json}
    if isinstance(pi, Supercuspidal):
        return {"class": "Supercuspidal", "xi": pi.xi.to_json(), "twist": tw_json}
    raise UnsupportedClass(type(pi).__name__)


def rep_from_json(data: dict) -> LocalRep:
    cls = data["class"]
    if cls == "UnramifiedPS":
        p = data["prime"]
        if "alpha" in data:
            return UnramifiedPS(p, CycScalar.from_json(p, data["alpha"]),
                                CycScalar.from_json(p, data["beta"]),
                                data.get("tempered", True))
        return UnramifiedPS(p, tempered=data.get("tempered", True))
    if cls == "SteinbergUnrTwist":
        return SteinbergUnrTwist(MultChar.from_json(data["chi"]))
    tw = data.get("twist")
    if cls == "Supercuspidal":
        xi = ECharacter.from_json(data["xi"])
        p = xi.ext.prime
        twist = None if tw is None else CycScalar.from_json(p, tw)
        return Supercuspidal(xi.ext, xi, twist)
    chi = MultChar.from_json(data["chi"])
    twist = None if tw is None else CycScalar.from_json(chi.prime, tw)
    if cls == "HalfRamifiedPS":
        return HalfRamifiedPS(chi, MultChar.from_json(data["omega"]), twist)
    if cls == "FullyRamifiedPS":
        return FullyRamifiedPS(chi, MultChar.from_json(data["chi1"]),
                               MultChar.from_json(data["chi2"]), twist)
    if cls == "SteinbergRamTwist":
        return SteinbergRamTwist(chi, twist)
    raise UnsupportedClass(cls)

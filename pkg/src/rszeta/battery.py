"""Random integral-datum generation and batch certification.

Sampling distributions (fixed; the acceptance battery records its seed):

- Representations: per class, unit-circle Satake parameters (roots of unity)
  for unramified principal series; root-of-unity twist values for Steinberg;
  unit characters of conductor 1 or 2 for the half-ramified class; regular
  characters of level 1 over the inert and both ramified quadratic extensions
  for the supercuspidal class, normalized to have trivial central value at p.
- Schwartz functions: one or two boxes; depths uniform in [0, 2]; each center
  coordinate is 0 with probability 1/3, else s*p^v with s a unit in [1, p-1]
  and v uniform in [-2, 2]; coefficients are nonzero integers in [-3, 3].
- Group elements: each entry is 0 with probability 1/4, else s*p^v with
  s in [-3, 3] nonzero and v in [-1, 1] (inside the desk bound [-3, 3]),
  resampled until the determinant is nonzero.

A raw datum is made integral by scaling the Schwartz function by the index of
its joint stabilizer, which leaves the stabilizer itself unchanged.  Data
whose joint coset index exceeds the generation cap are resampled so batch
runs stay at desk scale.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .characters import ECharacter, MultChar, QuadExt
from .padic import IndexBoundExceeded, Mat2
from .reps import (
    HalfRamifiedPS,
    LocalRep,
    PiPair,
    SteinbergUnrTwist,
    Supercuspidal,
    UnramifiedPS,
    central_char,
)
from .scalars import CycScalar, membership, renormalize
from .reps import rs_l_factor
from .zeta import (
    SchwartzFn,
    certify,
    integral_datum_check,
    ring_for_pair,
    zeta_unfolded,
)

CLASS_NAMES = ("unramified", "steinberg", "half-ramified", "supercuspidal")

GEN_MAX_INDEX = 3000
GEN_INDEX_CAP = 600


def class_pairs() -> list[tuple[str, str]]:
    """The ten unordered pairs of implemented classes."""
    out = []
    for i, a in enumerate(CLASS_NAMES):
        for b in CLASS_NAMES[i:]:
            out.append((a, b))
    return out


def _normalized_supercuspidal(p: int, kind: str, exponent: int) -> Supercuspidal:
    E = QuadExt(p, kind)
    for k in range(4):
        val = CycScalar.zeta(p, 4, k)
        pi = Supercuspidal(E, ECharacter(E, 1, exponent, val))
        if central_char(pi).value_at_p == CycScalar.one(p):
            return pi
    raise AssertionError("no normalizing value at p found")


def random_rep(rng: random.Random, p: int, kind: str) -> LocalRep:
    if kind == "unramified":
        k = rng.randrange(24)
        alpha = CycScalar.zeta(p, 24, k)
        beta = CycScalar.zeta(p, 24, rng.randrange(24))
        return UnramifiedPS(p, alpha, beta)
    if kind == "steinberg":
        chi = MultChar.unramified(p, CycScalar.zeta(p, 8, rng.randrange(8)))
        return SteinbergUnrTwist(chi)
    if kind == "half-ramified":
        c = rng.choice([1, 2])
        n_chars = (p - 1) * p ** (c - 1)
        omega = MultChar(p, c, rng.randrange(1, n_chars))
        chi = MultChar.unramified(p, CycScalar.zeta(p, 8, rng.randrange(8)))
        return HalfRamifiedPS(chi, omega)
    if kind == "supercuspidal":
        ext_kind = rng.choice(["inert", "ramified_1", "ramified_2"])
        for _ in range(8):
            try:
                return _normalized_supercuspidal(
                    p, ext_kind, rng.randrange(1, 2 * (p + 1)))
            except ValueError:
                continue
        return _normalized_supercuspidal(p, ext_kind, 1)
    raise ValueError(f"unknown class {kind!r}")


def random_pair(rng: random.Random, p: int, kinds: tuple[str, str]) -> PiPair:
    return PiPair(random_rep(rng, p, kinds[0]), random_rep(rng, p, kinds[1]))


def _random_coord(rng: random.Random, p: int) -> Fraction:
    if rng.random() < Fraction(1, 3):
        return Fraction(0)
    s = rng.randrange(1, p)
    v = rng.randrange(-2, 3)
    return Fraction(s) * Fraction(p) ** v


def random_schwartz(rng: random.Random, p: int) -> SchwartzFn:
    boxes = []
    for _ in range(rng.choice([1, 2])):
        center = (_random_coord(rng, p), _random_coord(rng, p))
        depths = (rng.randrange(0, 3), rng.randrange(0, 3))
        coeff = rng.choice([c for c in range(-3, 4) if c])
        boxes.append((center, depths, coeff))
    phi = SchwartzFn(p, boxes)
    if phi.is_zero():
        return random_schwartz(rng, p)
    return phi


def random_matrix(rng: random.Random, p: int) -> Mat2:
    while True:
        entries = []
        for _ in range(4):
            if rng.random() < 0.25:
                entries.append(Fraction(0))
            else:
                s = rng.choice([x for x in range(-3, 4) if x])
                entries.append(Fraction(s) * Fraction(p) ** rng.randrange(-1, 2))
        m = Mat2(*entries)
        if m.det() != 0:
            return m


@dataclass(frozen=True)
class BatteryDatum:
    phi: SchwartzFn
    g: tuple[Mat2, Mat2]
    pair: PiPair
    stab_index: int


def random_integral_datum(rng: random.Random, pair: PiPair,
                          max_tries: int = 200) -> BatteryDatum:
    """Draw (phi, g) and scale phi by its joint-stabilizer index."""
    p = pair.prime
    for _ in range(max_tries):
        phi = random_schwartz(rng, p)
        g = (random_matrix(rng, p), random_matrix(rng, p))
        try:
            report = integral_datum_check(phi, g, pair,
                                          max_index=GEN_MAX_INDEX)
        except IndexBoundExceeded:
            continue
        index = report.required_ideal_generator
        if index > GEN_INDEX_CAP:
            continue
        scaled = phi.scale(index)
        return BatteryDatum(scaled, g, pair, index)
    raise RuntimeError("failed to draw an integral datum within the cap")


@dataclass(frozen=True)
class BatteryItem:
    datum: BatteryDatum
    renormalized: bool
    membership_ok: bool
    identity_ok: bool | None
    failure: str | None

    @property
    def ok(self) -> bool:
        return (self.renormalized and self.membership_ok
                and self.identity_ok is not False and self.failure is None)


def run_datum(datum: BatteryDatum, check_identity: bool = False) -> BatteryItem:
    pair = datum.pair
    if check_identity:
        res = certify(datum.phi, datum.g, pair, check_identity=True)
        if res.refused:
            return BatteryItem(datum, False, False, None, "refused")
        return BatteryItem(datum, True, res.all_verdicts_pass,
                           bool(res.identity_check)
                           and bool(res.section_integer_valued), None)
    Z = zeta_unfolded(datum.phi, datum.g, pair)
    phi_poly = renormalize(Z, rs_l_factor(pair))
    A = ring_for_pair(pair)
    mem = all(bool(membership(c, A)) for c in phi_poly.coeffs.values())
    return BatteryItem(datum, True, mem, None, None)


def run_battery(seed: int, p: int, kinds: tuple[str, str], n: int,
                check_identity: bool = False) -> list[BatteryItem]:
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        pair = random_pair(rng, p, kinds)
        datum = random_integral_datum(rng, pair)
        out.append(run_datum(datum, check_identity=check_identity))
    return out

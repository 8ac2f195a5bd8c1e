import random
from fractions import Fraction

import pytest

from rszeta.characters import ECharacter, MultChar, QuadExt
from rszeta.padic import Mat2, in_k_r, val_p
from rszeta.reps import (
    HalfRamifiedPS,
    PiPair,
    SteinbergUnrTwist,
    Supercuspidal,
    UnramifiedPS,
    central_char,
    conductor,
    dual,
    rs_l_factor,
)
from rszeta.scalars import (
    CycScalar,
    LaurentPoly,
    PoleMismatch,
    ZetaValue,
    renormalize,
    series_expand,
)
from rszeta.whittaker import eval_general
from rszeta.zeta import (
    SchwartzFn,
    _center_rep,
    _w_slot,
    _x_integral,
    certify,
    i_new,
    integral_datum_check,
    lambda_pi,
    master_rhs,
    ring_for_pair,
    schwartz_translate,
    trilinear,
    vol_k,
    xi_c,
    zeta_unfolded,
)

P = 3


def rat(x, p=P):
    return CycScalar.rational(p, x)


def ups_numeric(p=P):
    return UnramifiedPS(p, CycScalar.zeta(p, 8, 1), CycScalar.zeta(p, 8, 7))


def make_sc(p, kind):
    E = QuadExt(p, kind)
    for k in range(4):
        val = CycScalar.zeta(p, 4, k)
        pi = Supercuspidal(E, ECharacter(E, 1, 1, val))
        if central_char(pi).value_at_p == CycScalar.one(p):
            return pi
    raise AssertionError("no normalizing value found")


def random_g(rng, p, vmin=-1, vmax=1):
    while True:
        g = Mat2(*[Fraction(rng.randrange(-4, 5)) * Fraction(p) ** rng.randrange(vmin, vmax + 1)
                   for _ in range(4)])
        if g.det() != 0:
            return g


# --- canonical representatives ------------------------------------------------


def test_center_rep():
    assert _center_rep(Fraction(0), P, 2) == 0
    assert _center_rep(Fraction(9), P, 2) == 0
    assert _center_rep(Fraction(10), P, 2) == 1
    assert _center_rep(Fraction(1, 3), P, 0) == Fraction(1, 3)
    assert _center_rep(Fraction(1, 3), P, -1) == 0
    assert _center_rep(Fraction(4, 9), P, -1) == Fraction(1, 9)
    assert _center_rep(Fraction(5), P, -2) == 0


# --- Schwartz normal form -----------------------------------------------------


def test_box_evaluate():
    phi = SchwartzFn.indicator(P, (1, Fraction(1, 3)), (1, 0), 2)
    assert phi.evaluate(4, Fraction(1, 3)) == rat(2)
    assert phi.evaluate(1, Fraction(1, 3) + 1) == rat(2)
    assert phi.evaluate(2, Fraction(1, 3)) == rat(0)
    assert phi.evaluate(1, Fraction(2, 3)) == rat(0)


def test_rectangle_splits_to_squares():
    phi = SchwartzFn.indicator(P, (0, 0), (0, 2))
    assert len(phi.cells) == P ** 2
    assert all(d == 2 for d, _, _, _ in phi.cells)


def test_sibling_coarsening():
    boxes = [((a, b), (1, 1), 1) for a in range(P) for b in range(P)]
    phi = SchwartzFn(P, boxes)
    assert phi == SchwartzFn.unit_box(P)


def test_nested_boxes_resolve():
    phi = SchwartzFn(P, [((0, 0), (0, 0), 1), ((0, 0), (2, 2), 5)])
    assert phi.evaluate(0, 0) == rat(6)
    assert phi.evaluate(1, 1) == rat(1)
    assert phi.evaluate(9, 0) == rat(6)
    assert phi.evaluate(3, 0) == rat(1)
    # cells are pairwise disjoint in the normal form
    for i, (d1, a1, b1, _) in enumerate(phi.cells):
        for d2, a2, b2, _ in phi.cells[i + 1:]:
            d = min(d1, d2)
            assert not (_center_rep(a1, P, d) == _center_rep(a2, P, d)
                        and _center_rep(b1, P, d) == _center_rep(b2, P, d))


def test_cancellation_to_zero():
    phi = SchwartzFn.unit_box(P) - SchwartzFn.unit_box(P)
    assert phi.is_zero()


def test_json_roundtrip():
    phi = SchwartzFn(P, [((Fraction(1, 3), 2), (0, 1), Fraction(5, 2)),
                         ((0, 0), (1, 1), -1)])
    assert SchwartzFn.from_json(P, phi.to_json()) == phi


# --- translation --------------------------------------------------------------


def test_translate_identity_and_diag():
    phi = SchwartzFn.unit_box(P)
    assert schwartz_translate(phi, Mat2.identity()) == phi
    got = schwartz_translate(phi, Mat2.diag(Fraction(1, P), 1))
    assert got == SchwartzFn.indicator(P, (0, 0), (1, 0))


def test_translate_action_axiom_and_pointwise():
    rng = random.Random(7)
    phi = SchwartzFn(P, [((1, Fraction(1, 3)), (1, 0), 2), ((0, 0), (0, 2), -1)])
    for _ in range(12):
        h1, h2 = random_g(rng, P), random_g(rng, P)
        lhs = schwartz_translate(schwartz_translate(phi, h1), h2)
        rhs = schwartz_translate(phi, h2 * h1)
        assert lhs == rhs
        v = (Fraction(rng.randrange(-9, 10), P), Fraction(rng.randrange(-9, 10), P))
        w = (v[0] * h1.a + v[1] * h1.c, v[0] * h1.b + v[1] * h1.d)
        assert schwartz_translate(phi, h1).evaluate(*v) == phi.evaluate(*w)


# --- integral datum -----------------------------------------------------------


def test_integral_datum_unramified():
    pair = PiPair(ups_numeric(), ups_numeric())
    rep = integral_datum_check(SchwartzFn.unit_box(P), (Mat2.identity(),) * 2, pair)
    assert rep.stab_volume == 1 and rep.is_integral


def test_integral_datum_level_one_refusal():
    st = SteinbergUnrTwist(MultChar.trivial(P))
    pair = PiPair(st, st)
    g = (Mat2.identity(), Mat2.identity())
    rep = integral_datum_check(SchwartzFn.unit_box(P, coeff=Fraction(1, 8)), g, pair)
    assert rep.stab_volume == Fraction(1, 8)
    assert rep.required_ideal_generator == 8
    assert not rep.is_integral
    assert integral_datum_check(SchwartzFn.unit_box(P, coeff=8), g, pair).is_integral


def test_integral_datum_deep_coefficient():
    pair = PiPair(ups_numeric(), ups_numeric())
    phi = SchwartzFn.unit_box(P, coeff=Fraction(1, P ** 10))
    rep = integral_datum_check(phi, (Mat2.identity(),) * 2, pair)
    assert not rep.is_integral


# --- diagonal Whittaker slot values -------------------------------------------


def reps_for_slots(p=P):
    return [
        ups_numeric(p),
        SteinbergUnrTwist(MultChar.unramified(p, rat(-1, p))),
        HalfRamifiedPS(MultChar.trivial(p), MultChar(p, 1, 1)),
        make_sc(p, "inert"),
    ]


def test_w_slot_matches_general_evaluation():
    from rszeta.padic import decompose
    rng = random.Random(21)
    for pi in reps_for_slots():
        c = conductor(pi)
        for _ in range(10):
            g = random_g(rng, P)
            d = decompose(g, P, c)
            for sign in (1, -1):
                i = rng.randrange(-3, 4)
                u = Fraction(rng.choice([1, 2, 4, 5]))
                lhs = _w_slot(pi, d, sign, i, u)
                rhs = eval_general(
                    pi, Mat2.diag(Fraction(P) ** i * u, Fraction(1)) * g, sign)
                assert lhs == rhs, (pi, g, sign, i, u)


# --- the x-integral -----------------------------------------------------------


def brute_x_integral(phi, row, omega, lo=-8, hi=10, level=4):
    """Riemann-sum oracle over annuli p^m O^x, m in [lo, hi); valid when the
    support of x -> phi(x row) lies inside that valuation window."""
    p = phi.prime
    coeffs = {}
    for m in range(lo, hi):
        acc = CycScalar.zero(p)
        for u in range(p ** level):
            if u % p == 0:
                continue
            x = Fraction(u) * Fraction(p) ** m
            val = phi.evaluate(x * row[0], x * row[1])
            if not val.is_zero():
                acc = acc + val * omega(x)
        if not acc.is_zero():
            vol = Fraction(1, (p - 1) * p ** (level - 1))
            coeffs[2 * m] = acc * CycScalar.rational(p, vol)
    return coeffs


def test_x_integral_against_riemann_oracle():
    rng = random.Random(31)
    omegas = [MultChar.trivial(P), MultChar.unramified(P, rat(-1)),
              MultChar(P, 1, 1), MultChar(P, 2, 1, CycScalar.zeta(P, 4, 1))]
    for trial in range(12):
        phi = SchwartzFn(P, [((Fraction(rng.randrange(-4, 5), P), Fraction(rng.randrange(-4, 5))),
                              (rng.randrange(0, 3), rng.randrange(0, 3)),
                              rng.randrange(1, 4))])
        row = (Fraction(rng.randrange(-4, 5)), Fraction(rng.randrange(-4, 5)))
        if row == (0, 0):
            continue
        omega = omegas[trial % len(omegas)]
        got = _x_integral(phi, row, omega)
        want = brute_x_integral(phi, row, omega)
        ser = got.series(-16, 20)
        for m in range(-16, 20):
            assert ser.coeffs.get(m, CycScalar.zero(P)) == want.get(m, CycScalar.zero(P)), \
                (trial, m)


def test_x_integral_ramified_ball_vanishes():
    phi = SchwartzFn.unit_box(P)
    got = _x_integral(phi, (Fraction(1), Fraction(0)), MultChar(P, 1, 1))
    assert got.is_zero()


# --- the inner y-integral -----------------------------------------------------


def _avg_at_level(pair, gamma, i, level):
    p = pair.prime
    tot = CycScalar.zero(p)
    cnt = 0
    for u in range(p ** level):
        if u % p == 0:
            continue
        d = Mat2.diag(Fraction(p) ** i * Fraction(u), Fraction(1))
        w1 = eval_general(pair.pi1, d * gamma[0], 1)
        w2 = eval_general(pair.pi2, d * gamma[1], -1)
        tot = tot + w1 * w2
        cnt += 1
    return tot * CycScalar.rational(p, Fraction(1, cnt))


def brute_i_coeff(pair, gamma, i):
    p = pair.prime
    level = 2
    a = _avg_at_level(pair, gamma, i, level)
    while True:
        b = _avg_at_level(pair, gamma, i, level + 1)
        if a == b:
            return a * CycScalar.rational(p, Fraction(p) ** i)
        a = b
        level += 1
        assert level <= 6, "oracle average failed to stabilize"


@pytest.mark.parametrize("kinds", [("ups", "ups"), ("st", "st"),
                                   ("half", "sc"), ("sc", "sc")])
def test_i_new_against_brute_series(kinds):
    table = {"ups": ups_numeric(), "st": SteinbergUnrTwist(MultChar.trivial(P)),
             "half": HalfRamifiedPS(MultChar.trivial(P), MultChar(P, 1, 1)),
             "sc": make_sc(P, "inert")}
    pair = PiPair(table[kinds[0]], table[kinds[1]])
    rng = random.Random(sum(map(ord, kinds[0] + kinds[1])))
    for _ in range(3):
        gamma = (random_g(rng, P), random_g(rng, P))
        ser = i_new(pair, gamma).series(-8, 6)
        for i in range(-8, 7):
            want = brute_i_coeff(pair, gamma, i)
            assert ser.coeffs.get(i, CycScalar.zero(P)) == want, (gamma, i)


# --- the unfolded zeta integral -----------------------------------------------


def test_classical_unramified_value():
    rng = random.Random(3)
    phi = SchwartzFn.unit_box(P)
    g = (Mat2.identity(), Mat2.identity())
    for _ in range(3):
        pi1 = UnramifiedPS(P, CycScalar.zeta(P, 24, rng.randrange(24)),
                           CycScalar.zeta(P, 24, rng.randrange(24)))
        pi2 = UnramifiedPS(P, CycScalar.zeta(P, 24, rng.randrange(24)),
                           CycScalar.zeta(P, 24, rng.randrange(24)))
        pair = PiPair(pi1, pi2)
        Z = zeta_unfolded(phi, g, pair)
        L = rs_l_factor(pair)
        # the full unfolded integral is L(Pi, s) itself: the x-integral's
        # 1/(1 - omega(p) X^2) tail cancels the Cauchy-identity numerator
        assert Z.series(0, 12) == series_expand(L, 12)
        assert renormalize(Z, L) == LaurentPoly.one(P)


def test_zeta_linearity_in_phi():
    pair = PiPair(ups_numeric(), SteinbergUnrTwist(MultChar.trivial(P)))
    g = (Mat2.identity(), Mat2.diag(1, P))
    phi1 = SchwartzFn.unit_box(P)
    phi2 = SchwartzFn.indicator(P, (1, 0), (1, 1), 1)
    z1 = zeta_unfolded(phi1, g, pair)
    z2 = zeta_unfolded(phi2, g, pair)
    z12 = zeta_unfolded(phi1 + phi2.scale(5), g, pair)
    assert z12 == z1 + z2 * rat(5)
    assert zeta_unfolded(phi1.scale(Fraction(2, 3)), g, pair) == z1 * rat(Fraction(2, 3))


def test_zeta_right_k_invariance():
    rng = random.Random(11)
    st = SteinbergUnrTwist(MultChar.trivial(P))
    pair = PiPair(st, st)
    phi = SchwartzFn(P, [((0, 0), (1, 0), 8), ((1, 1), (0, 0), 8)])
    g = (Mat2.diag(1, P), Mat2.identity())
    base = zeta_unfolded(phi, g, pair)

    def random_k1():
        while True:
            m = Mat2(rng.randrange(-6, 7), rng.randrange(-6, 7),
                     P * rng.randrange(-6, 7), 1 + P * rng.randrange(-6, 7))
            if in_k_r(m, P, 1):
                return m

    for _ in range(3):
        g2 = (g[0] * random_k1(), g[1] * random_k1())
        assert zeta_unfolded(phi, g2, pair) == base


def test_zeta_left_h_invariance():
    # Z(phi((-)h), (h g1, h g2)) = X^{-v(det h)} Z(phi, g): a change of
    # variables in the intrinsic integral, nontrivial for the unfolded sum
    # since the stabilizer intersection with H(O) is not conjugation-stable
    rng = random.Random(17)
    pair = PiPair(ups_numeric(), ups_numeric())
    phi = SchwartzFn(P, [((0, 0), (0, 0), 1), ((Fraction(1, 3), 0), (0, 1), 2)])
    g = (Mat2.identity(), Mat2.diag(1, P))
    base = zeta_unfolded(phi, g, pair)
    for _ in range(4):
        h = random_g(rng, P)
        phi_h = schwartz_translate(phi, h)
        got = zeta_unfolded(phi_h, (h * g[0], h * g[1]), pair)
        vh = val_p(h.det(), P)
        assert got * LaurentPoly.x_pow(P, vh) == base, h


def test_zeta_vanishes_for_ramified_central_character_on_unit_box():
    # every x-constraint from ch(O^2) is a full ball, whose twisted Tate
    # integral vanishes when the central character ramifies
    half = HalfRamifiedPS(MultChar.trivial(P), MultChar(P, 1, 1))
    pair = PiPair(half, ups_numeric())
    phi = SchwartzFn.unit_box(P, coeff=24)
    Z = zeta_unfolded(phi, (Mat2.identity(),) * 2, pair)
    assert Z.is_zero()


# --- the induced section and the distribution ---------------------------------


def test_xi_c_classical():
    pair = PiPair(ups_numeric(), ups_numeric())
    f = xi_c(SchwartzFn.unit_box(P), (Mat2.identity(),) * 2, pair)
    assert len(f.entries) == 1
    e = f.entries[0]
    assert e.value == CycScalar.one(P)
    assert e.det_valuation == 0
    assert f.integer_valued


def test_xi_c_h_invariance():
    rng = random.Random(23)
    pair = PiPair(ups_numeric(), ups_numeric())
    phi = SchwartzFn(P, [((0, 0), (1, 1), 3), ((1, 0), (0, 1), -1)])
    g = (Mat2.diag(1, P), Mat2.identity())
    base = xi_c(phi, g, pair)
    base_vals = sorted((str(e.value), e.det_valuation) for e in base.entries)
    for _ in range(3):
        h = random_g(rng, P)
        phi_h = schwartz_translate(phi, h)
        got = xi_c(phi_h, (h * g[0], h * g[1]), pair)
        got_vals = sorted((str(e.value), e.det_valuation) for e in got.entries)
        assert got_vals == base_vals


def test_xi_c_non_integral_negative_control():
    st = SteinbergUnrTwist(MultChar.trivial(P))
    pair = PiPair(st, st)
    f = xi_c(SchwartzFn.unit_box(P, coeff=Fraction(1, 8)),
             (Mat2.identity(),) * 2, pair)
    assert not f.integer_valued


def test_lambda_single_coset_unramified():
    pair = PiPair(ups_numeric(), ups_numeric())
    from rszeta.zeta import CosetPairEntry, SupportedFunctionOnPGK
    f = SupportedFunctionOnPGK(P, (0, 0), [CosetPairEntry(
        Mat2.identity(), Mat2.identity(), CycScalar.one(P), 0)])
    got = lambda_pi(f, pair)
    assert got == i_new(pair, (Mat2.identity(), Mat2.identity()))


# --- the master identity and the certifier ------------------------------------


def class_roster():
    return {
        "unramified": ups_numeric(),
        "steinberg": SteinbergUnrTwist(MultChar.unramified(P, rat(-1))),
        "half-ramified": HalfRamifiedPS(MultChar.trivial(P), MultChar(P, 1, 1)),
        "supercuspidal": make_sc(P, "ramified_1"),
    }


@pytest.mark.parametrize("k1", ["unramified", "steinberg", "half-ramified",
                                "supercuspidal"])
@pytest.mark.parametrize("k2", ["unramified", "steinberg", "half-ramified",
                                "supercuspidal"])
def test_master_identity_all_class_pairs(k1, k2):
    roster = class_roster()
    pair = PiPair(roster[k1], roster[k2])
    rng = random.Random(sum(map(ord, k1 + "|" + k2)))
    from rszeta.battery import random_integral_datum
    datum = random_integral_datum(rng, pair)
    Z = zeta_unfolded(datum.phi, datum.g, pair)
    f = xi_c(datum.phi, datum.g, pair)
    assert f.integer_valued
    assert lambda_pi(f, pair) == master_rhs(Z, pair, datum.g[1])


def test_certify_full_result():
    st = SteinbergUnrTwist(MultChar.trivial(P))
    pair = PiPair(st, st)
    res = certify(SchwartzFn.unit_box(P, coeff=8), (Mat2.identity(),) * 2, pair)
    assert not res.refused
    assert res.identity_check and res.section_integer_valued
    assert res.all_verdicts_pass
    assert res.phi_poly == LaurentPoly(P, {-1: rat(2)})


def test_certify_refusal():
    st = SteinbergUnrTwist(MultChar.trivial(P))
    pair = PiPair(st, st)
    res = certify(SchwartzFn.unit_box(P), (Mat2.identity(),) * 2, pair)
    assert res.refused and res.phi_poly is None


def test_trilinear_value_and_membership():
    st = SteinbergUnrTwist(MultChar.trivial(P))
    pair = PiPair(st, st)
    val = trilinear(SchwartzFn.unit_box(P, coeff=8), (Mat2.identity(),) * 2, pair)
    assert val == rat(2)
    from rszeta.scalars import membership
    assert membership(val, ring_for_pair(pair))


def test_trilinear_requires_integral_datum():
    st = SteinbergUnrTwist(MultChar.trivial(P))
    pair = PiPair(st, st)
    with pytest.raises(ValueError):
        trilinear(SchwartzFn.unit_box(P), (Mat2.identity(),) * 2, pair)


def test_vol_k_values():
    assert vol_k(P, 0) == 1
    assert vol_k(P, 1) == Fraction(1, 8)

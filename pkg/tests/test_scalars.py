import pytest
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from rszeta.scalars import (
    CycScalar,
    LaurentPoly,
    LFactorDescriptor,
    MembershipResult,
    NonInvertible,
    PoleMismatch,
    RingSpec,
    ZetaValue,
    membership,
    renormalize,
    ring_arith,
    series_expand,
)

P = 3


def zeta(order, e=1):
    return CycScalar.zeta(P, order, e)


def rat(x):
    return CycScalar.rational(P, x)


# --- basic relations -------------------------------------------------------


def test_cyclotomic_relation():
    assert zeta(3) + zeta(3, 2) + rat(1) == rat(0)


def test_sqrt_relation():
    Q = CycScalar.sqrt_q(P)
    assert Q * Q == rat(3)


def test_inv_root_of_unity():
    assert zeta(8).inverse() == zeta(8, 7)


def test_q_half_power():
    assert CycScalar.q_half(P, 2) == rat(3)
    assert CycScalar.q_half(P, -2) == rat(Fraction(1, 3))
    assert CycScalar.q_half(P, -1) * CycScalar.q_half(P, 1) == rat(1)
    assert CycScalar.q_half(P, 3) == CycScalar.sqrt_q(P) * 3


def test_level_lift_round_trip():
    a = zeta(3) + rat(Fraction(1, 2))
    assert a.lift(12).compress() == a
    assert a.lift(12) == a


def test_conj_examples():
    assert CycScalar.zeta(P, 5).conj() == CycScalar.zeta(P, 5, 4)
    Q = CycScalar.sqrt_q(P)
    assert Q.conj() == Q
    U = CycScalar.symbol(P, "U")
    a = rat(3) * U * U * zeta(4)
    assert a.conj() == rat(3) * U.inverse() ** 2 * zeta(4, 3)


def test_symbol_inverse():
    U = CycScalar.symbol(P, "U")
    assert U * U.inverse() == rat(1)
    mixed = (rat(2) + zeta(3)) * U
    assert mixed * mixed.inverse() == rat(1)


def test_inversion_of_zero_raises():
    with pytest.raises(NonInvertible):
        rat(0).inverse()


def test_general_cyclotomic_inverse():
    a = rat(1) + zeta(5) * 2
    assert a * a.inverse() == rat(1)
    b = rat(2) + CycScalar.sqrt_q(P)
    assert b * b.inverse() == rat(1)


def test_ring_arith_dispatch():
    assert ring_arith(rat(2), rat(3), "add") == rat(5)
    assert ring_arith(rat(2), rat(3), "mul") == rat(6)
    assert ring_arith(rat(2), None, "inv") == rat(Fraction(1, 2))


scalars = st.builds(
    lambda rs, zs: sum(
        (CycScalar.zeta(P, order, e) * rat(c) for (order, e), c in zip(zs, rs)),
        CycScalar.zero(P),
    ),
    st.lists(st.fractions(max_denominator=6), min_size=0, max_size=3),
    st.lists(
        st.tuples(st.sampled_from([1, 3, 4, 8, 9]), st.integers(0, 8)),
        min_size=0,
        max_size=3,
    ),
)


@settings(max_examples=60, deadline=None)
@given(scalars, scalars, scalars)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert a * b == b * a


@settings(max_examples=40, deadline=None)
@given(scalars, scalars)
def test_conj_is_ring_hom_involution(a, b):
    assert a.conj().conj() == a
    assert (a * b).conj() == a.conj() * b.conj()
    assert (a + b).conj() == a.conj() + b.conj()


@settings(max_examples=30, deadline=None)
@given(scalars)
def test_serialization_round_trip(a):
    assert CycScalar.from_json(P, a.to_json()) == a


# --- Laurent polynomials and descriptors -----------------------------------


def c_sym(name):
    return CycScalar.symbol(P, name)


def test_series_expand_geometric():
    c = c_sym("c")
    D = LFactorDescriptor(P, [(c, 1)])
    got = series_expand(D, 2)
    want = LaurentPoly(P, {0: rat(1), 1: c, 2: c * c})
    assert got == want


def test_series_expand_empty():
    assert series_expand(LFactorDescriptor(P), 5) == LaurentPoly.one(P)


def test_series_expand_convolution():
    c, e = c_sym("c"), c_sym("e")
    D = LFactorDescriptor(P, [(c, 1), (e, 2)])
    got = series_expand(D, 3)
    want = LaurentPoly(
        P, {0: rat(1), 1: c, 2: c * c + e, 3: c * c * c + c * e}
    )
    assert got == want


@settings(max_examples=25, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(-2, 2), st.integers(1, 2)), min_size=0, max_size=3
    ),
    st.integers(0, 6),
)
def test_series_times_denominator_is_one(factors, bound):
    D = LFactorDescriptor(P, [(rat(c), d) for c, d in factors])
    prod = (series_expand(D, bound) * D.denominator_poly()).truncate(0, bound)
    assert prod == LaurentPoly.one(P)


def test_renormalize_identity_descriptor():
    c = c_sym("c")
    D = LFactorDescriptor(P, [(c, 1)])
    poly = LaurentPoly(P, {0: rat(1), 1: c})
    assert renormalize(ZetaValue(D, poly), D) == poly


def test_renormalize_multiplies_through():
    c = c_sym("c")
    one_minus = LaurentPoly(P, {0: rat(1), 1: -c})
    z = ZetaValue(LFactorDescriptor(P), one_minus)
    got = renormalize(z, LFactorDescriptor(P, [(c, 1)]))
    assert got == one_minus * one_minus


def test_renormalize_pole_mismatch():
    c = c_sym("c")
    z = ZetaValue(LFactorDescriptor(P, [(c, 1)]), LaurentPoly.one(P))
    with pytest.raises(PoleMismatch):
        renormalize(z, LFactorDescriptor(P))


def test_zeta_value_cross_multiplied_equality():
    c = c_sym("c")
    # (1 - cX)/(1 - cX)^{-1}-free form equals descriptor form of 1
    z1 = ZetaValue(
        LFactorDescriptor(P, [(c, 1)]), LaurentPoly(P, {0: rat(1), 1: -c})
    )
    z2 = ZetaValue.from_poly(LaurentPoly.one(P))
    assert z1 == z2
    z3 = z1 + z2
    assert renormalize(z3, LFactorDescriptor(P)) == LaurentPoly(P, {0: rat(2)})


def test_zeta_value_series():
    c = rat(2)
    z = ZetaValue(LFactorDescriptor(P, [(c, 1)]), LaurentPoly.one(P))
    s = z.series(0, 4)
    assert s == LaurentPoly(P, {i: rat(2**i) for i in range(5)})


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.tuples(st.integers(-8, 8), st.integers(-2, 2)), max_size=4),
    st.lists(st.tuples(st.integers(-2, 2), st.integers(1, 2)), max_size=2),
)
def test_renormalize_series_consistency(poly_terms, factors):
    poly = LaurentPoly(P, {n: rat(c) for n, c in poly_terms})
    D = LFactorDescriptor(P, [(rat(c), d) for c, d in factors])
    z = ZetaValue(D, poly)
    phi = renormalize(z, D)
    assert phi == poly
    # series of D times phi equals series of z to a healthy truncation order
    lo = poly.degree_range()[0]
    assert (series_expand(D, 8 + max(0, -lo)) * phi).truncate(lo, 8) == z.series(lo, 8)


# --- membership ------------------------------------------------------------


def test_membership_p_inverse():
    A = RingSpec(3, 24)
    assert membership(rat(Fraction(1, 3)), A).verdict


def test_membership_bad_denominator():
    A = RingSpec(3, 24)
    res = membership(rat(Fraction(1, 2)), A)
    assert not res.verdict
    assert "denominator" in res.certificate


def test_membership_outside_subfield():
    A = RingSpec(3, 24)
    res = membership(CycScalar.zeta(3, 5), A)
    assert not res.verdict
    assert "outside" in res.certificate


def test_membership_sqrt_flag():
    Q = CycScalar.sqrt_q(3)
    assert not membership(Q, RingSpec(3, 24)).verdict
    assert membership(Q, RingSpec(3, 24, allow_sqrt=True)).verdict


def test_membership_symbols():
    U = CycScalar.symbol(3, "U")
    assert not membership(U, RingSpec(3, 24)).verdict
    assert membership(U, RingSpec(3, 24, allowed_symbols={"U"})).verdict
    assert membership(U.inverse(), RingSpec(3, 24, allowed_symbols={"U"})).verdict


def test_membership_constants_extend_field():
    A = RingSpec(3, 8, allowed_constants=[CycScalar.zeta(3, 5)])
    assert membership(CycScalar.zeta(3, 5), A).verdict


members = st.builds(
    lambda rs, zs: sum(
        (
            CycScalar.zeta(3, order, e) * CycScalar.rational(3, c)
            for (order, e), c in zip(zs, rs)
        ),
        CycScalar.zero(3),
    ),
    st.lists(
        st.integers(-5, 5).map(lambda n: Fraction(n, 9)), min_size=1, max_size=3
    ),
    st.lists(
        st.tuples(st.sampled_from([1, 2, 3, 4, 6, 8, 12, 24]), st.integers(0, 23)),
        min_size=1,
        max_size=3,
    ),
)


@settings(max_examples=40, deadline=None)
@given(members, members)
def test_membership_closed_under_ring_ops(a, b):
    A = RingSpec(3, 24)
    assert membership(a, A).verdict
    assert membership(b, A).verdict
    assert membership(a + b, A).verdict
    assert membership(a * b, A).verdict

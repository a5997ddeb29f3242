import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavcal.bounds import (
    NU1,
    conjecture_handles,
    cornishelm_report,
    fit_affine,
    fit_inverse,
    fixed_point_cstar,
    g_bound_check,
    g_values,
    kappa_for_mode,
    lambda_bound,
    lambda_zero,
    bartok_check,
    mintrace_check,
    sampled_handles,
    symmetric_rotations,
    xi_profile,
    zy_compare,
)
from cavcal.errors import DegenerateGrid, EmptyGrid, NegativeWeight, NoBracket, NonpositiveDeterminant, OrderViolation, ParamRange
from cavcal.gridsup import sample_matrices
from cavcal.mat3core import IDENTITY, RngStream
from cavcal.paperfn import SQRT2, MaterialParams, default_hprime, rational_profile

TABLE1 = [
    (1.01, 0.44566175), (1.1, 0.40919852), (1.2, 0.37509864), (1.3, 0.34624489), (1.4, 0.32151312), (1.5, 0.30007890),
    (1.6, 0.28132398), (1.7, 0.26477551), (1.8, 0.25006575), (1.9, 0.23690440), (2.0, 0.22505900),
]
TABLE2 = [
    (1.01, 1.86212), (1.1, 2.02791), (1.2, 2.21231), (1.3, 2.39673), (1.4, 2.58098), (1.5, 2.76509),
    (1.6, 2.94943), (1.7, 3.13421), (1.8, 3.31866), (1.9, 3.50261), (2.0, 3.68432),
]


def test_fit_inverse_table1():
    f = fit_inverse(TABLE1)
    assert f.coefficients[0] == pytest.approx(0.4501, abs=5e-4)
    assert f.max_abs_deviation < 5e-7
    assert f.argmax_deviation == 2.0


@given(st.floats(0.01, 10), st.lists(st.floats(0.1, 5), min_size=2, max_size=20, unique=True))
def test_fit_inverse_exact(nu, lams):
    f = fit_inverse([(x, nu / x) for x in lams])
    assert f.coefficients[0] == pytest.approx(nu, rel=1e-14)


def test_fit_affine_table2():
    f = fit_affine(TABLE2)
    nu2, nu3 = f.coefficients
    assert nu3 == pytest.approx(1.842, abs=0.01)
    assert nu2 == pytest.approx(1.764e-3, abs=5e-3)
    assert fit_affine([(1, 2), (2, 5)]).coefficients == pytest.approx([-1, 3])
    assert fit_affine([(x, 0.5 + 2 * x) for x in (1, 2, 4)]).max_abs_deviation < 1e-12


def test_fit_errors():
    with pytest.raises(EmptyGrid):
        fit_inverse([])
    with pytest.raises(EmptyGrid):
        fit_affine([(1.0, 2.0)])
    with pytest.raises(DegenerateGrid):
        fit_affine([(1.0, 2.0), (1.0, 3.0)])


def test_xi_profile_and_fixed_point():
    m2, m3 = conjecture_handles()
    for lam, expect in ((1.0, 3.1420), (2.0, 6.2839)):
        c = fixed_point_cstar(lam, m2, m3)
        assert c == pytest.approx(expect, abs=1e-4)
        assert c == pytest.approx(SQRT2 * lam / NU1, rel=1e-12)
        assert abs(m2(lam, c) / m3(lam, c) - c) <= 1e-10
        f1, f2, xi = xi_profile(c, lam, 2.5, m2, m3)
        assert f1 == pytest.approx(f2, rel=1e-9)
        assert xi == pytest.approx(m2(lam, c) ** -0.5 * m3(lam, c) ** -0.5, rel=1e-9)
        big = xi_profile(100 * c, lam, 2.5, m2, m3)
        small = xi_profile(c / 100, lam, 2.5, m2, m3)
        assert big[2] == big[0] and small[2] == small[1]
    assert fixed_point_cstar(1.0, lambda l, c: 5.0, lambda l, c: 1.0) == pytest.approx(5.0, abs=1e-10)


def test_fixed_point_no_bracket():
    with pytest.raises(NoBracket):
        fixed_point_cstar(1.0, lambda l, c: 1e9, lambda l, c: 1.0)


def test_fixed_point_is_xi_minimiser():
    m2, m3 = conjecture_handles()
    c = fixed_point_cstar(1.5, m2, m3)
    xs = np.geomspace(c / 10, c * 10, 401)
    vals = [xi_profile(x, 1.5, 2.7, m2, m3)[2] for x in xs]
    assert min(vals) >= xi_profile(c, 1.5, 2.7, m2, m3)[2] * (1 - 1e-9)


def test_sampled_handles_fixed_point():
    p = rational_profile(sample_matrices(0, 20_000, 3.0, 0, "symmetric"))
    m2, m3 = sampled_handles(p)
    c = fixed_point_cstar(1.0, m2, m3)
    assert 1.0 < c < 10.0


def test_lambda_bound():
    r = lambda_bound(2.5, 2**-0.5, 1.0, 0.4501)
    assert r.term_cstar == pytest.approx(0.4431, abs=1e-4)
    assert r.term_est1 == pytest.approx(1.3217, abs=1e-4)
    assert r.rhs == r.term_cstar and r.rhs == r.satisfied_for_hprime
    assert r.admits(default_hprime(1.0))
    for lam in (1.0, 1.5, 2.0):
        assert lambda_bound(2.5, 2**-0.5, lam).term_cstar == pytest.approx(r.term_cstar, rel=1e-9)
    near3 = lambda_bound(3 - 1e-9, 1.0, 1.5)
    assert near3.term_cstar == pytest.approx(0.5 / 0.4501, rel=1e-6)
    with pytest.raises(ParamRange):
        lambda_bound(3.0, 1.0, 1.0)


def test_lambda_zero():
    lam0 = lambda_zero(2.5, 2**-0.5)
    rhs = lambda_bound(2.5, 2**-0.5, 1.0).rhs
    assert lam0 ** 0.5 * default_hprime(lam0**3) == pytest.approx(rhs, rel=1e-10)
    assert lam0 > 1


def test_kappa_modes():
    assert kappa_for_mode(2.5, "min") == pytest.approx(2**-0.5)
    assert kappa_for_mode(2.5, "max") == pytest.approx(2.5 * 2**-1.5)
    with pytest.raises(ParamRange):
        kappa_for_mode(2.5, "value", 2.0)


def test_zy():
    z, y, less = zy_compare(3.0, 0.4501)
    assert (round(z, 4), round(y, 4), less) == (2.2217, 5.1962, True)
    z, y, less = zy_compare(2.0, 0.4501)
    assert z == pytest.approx(1 / SQRT2) and y == 2.0 and less
    z, y, less = zy_compare(3.0, 0.1923)
    assert (round(z, 4), round(y, 4), less) == (5.2002, 5.1962, False)
    qs = np.linspace(2, 3, 101)
    zs, ys, flags = zip(*(zy_compare(q, 0.4501) for q in qs))
    assert all(flags)
    assert np.all(np.diff(zs, 2) >= -1e-12) and np.all(np.diff(ys[1:], 2) <= 1e-12)


def test_g_bound_examples():
    assert g_bound_check((0, 0, 0), 100, RngStream(0))[:2] == (0, 0)
    emp, bound, ok = g_bound_check((5, 1, -1), 1000, RngStream(0))
    assert bound == 0 and emp == pytest.approx(0, abs=1e-12) and ok
    emp, bound, ok = g_bound_check((5, -2, -3), 1000, RngStream(0))
    assert bound == -10 and emp == pytest.approx(-10) and ok
    with pytest.raises(OrderViolation):
        g_bound_check((1, 2, 0), 10, RngStream(0))


def test_g_bound_sampled():
    gen = RngStream(8).generator
    for k in range(200):
        abc = np.sort(gen.normal(scale=3, size=3))[::-1]
        assert g_bound_check(abc, 10_000, RngStream(8, k + 1))[2]


def test_mintrace():
    assert mintrace_check(RngStream(1), 100_000)
    tr = np.trace(symmetric_rotations(RngStream(2), 1000), axis1=1, axis2=2)
    assert tr.min() == pytest.approx(-1, abs=1e-9) and tr.max() == pytest.approx(3, abs=1e-9)
    r = symmetric_rotations(RngStream(3), 100)
    assert np.allclose(r, np.swapaxes(r, 1, 2))


def test_bartok_examples():
    h, bound, branch, ok = bartok_check(np.diag([2.0, 3.0, 4.0]), 1.0)
    assert (h, bound, branch, ok) == (pytest.approx(6), pytest.approx(6), "l1>=lam", True)
    h, bound, branch, ok = bartok_check(np.diag([0.5, 2.0, 2.0]), 1.0)
    assert (h, bound, branch, ok) == (pytest.approx(-0.5), pytest.approx(-4.5), "l1<=lam", True)
    with pytest.raises(NonpositiveDeterminant):
        bartok_check(np.diag([-1.0, 1.0, 1.0]), 1.0)


def test_cornishelm():
    mat = MaterialParams(2.5, 0.8, 1.0)
    assert cornishelm_report([(1.0, IDENTITY)], 1.0, mat) == (0, 0)
    lhs, rhs = cornishelm_report([(1.0, np.diag([2.0, 3.0, 4.0]))], 1.0, mat)
    assert lhs == pytest.approx(6 + 0.8 * 14**1.25) and rhs == 0
    lhs, rhs = cornishelm_report([(1.0, np.diag([0.5, 2.0, 2.0]))], 1.0, mat)
    assert lhs == 0 and rhs == pytest.approx(0.5 * 3 * 3)
    with pytest.raises(NegativeWeight):
        cornishelm_report([(-1.0, IDENTITY)], 1.0, mat)


def test_g_values_consistent_with_g_of_R():
    from cavcal.paperfn import g_of_R
    from cavcal.mat3core import random_rotation

    r = random_rotation(RngStream(4), 20)
    abc = (3.0, 1.0, -1.0)
    assert np.allclose(g_values(r, abc), [g_of_R(x, abc) for x in r])

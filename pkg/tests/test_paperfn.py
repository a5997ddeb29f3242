import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavcal.errors import DegenerateArgument, NotARotation, ParamRange
from cavcal.mat3core import IDENTITY, determinant, frobenius_norm, singular_values
from cavcal.paperfn import (
    A0,
    F1,
    F2,
    SQRT2,
    G,
    G_minus,
    H,
    K_hat,
    MaterialParams,
    N,
    P,
    alpha_beta_gamma,
    default_h,
    default_hprime,
    dist_to_stretch,
    eval_profile,
    g_of_R,
    kappa_bounds,
    m_l,
    rational_profile,
    stored_energy,
)

from conftest import lams, mat3

D = np.diag([-1.0, 1.0, 1.0])


def test_P_examples():
    assert P(1.3 * IDENTITY, 1.3) == pytest.approx(0, abs=1e-15)
    a = np.outer([1.0, 2.0, 2.0], [0.0, 0.6, 0.8])
    for lam in (1.0, 1.7):
        assert P(a, lam) == pytest.approx(-lam * 3.0, abs=1e-12)
    assert P(np.diag([1.0, 2.0, 3.0]), 1.0) == pytest.approx(5.0)


def test_N_examples():
    assert N(2.0 * IDENTITY, 2.0) == 0
    assert N(np.diag([1.0, 2.0, 3.0]), 1.0) == 5
    assert N(D, 1.0) == -2


def test_G_examples():
    assert G(0.7 * IDENTITY, 0.7) == pytest.approx(0, abs=1e-15)
    for lam in (0.5, 1.0, 3.0):
        assert G(D, lam) == pytest.approx(4 - 2 * lam)
    assert G_minus(D, 1.0) == 0
    assert G_minus(D, 3.0) == pytest.approx(2.0)
    assert G_minus(IDENTITY, 1.0) == 0


@given(st.lists(st.floats(0, 10), min_size=3, max_size=3), lams)
def test_G_vanishes_on_nonnegative_diagonals(d, lam):
    assert abs(G(np.diag(d), lam)) <= 1e-12 * max(1, max(d)) ** 2 * max(1, lam)


@given(mat3, lams)
def test_G_is_P_minus_N_and_G_minus(a, lam):
    g = G(a, lam)
    assert g == pytest.approx(P(a, lam) - N(a, lam), abs=1e-10 * max(1, frobenius_norm(a)) ** 2 * max(1, lam))
    assert G_minus(a, lam) == pytest.approx((abs(g) - g) / 2)


def test_m_l_examples():
    assert m_l(D, 1.0, 2) == pytest.approx(0.5)
    assert m_l(D, 1.0, 3) == pytest.approx(0.25)
    assert m_l(D, 3.0, 3, "neg") == pytest.approx(2.0 / (3 - 6 + 27) ** 1.5)
    with pytest.raises(DegenerateArgument):
        m_l(1.5 * IDENTITY, 1.5)


def test_profile_examples():
    p = rational_profile(D)
    assert (p.a1, p.a2, p.b1, p.b2, p.b3) == pytest.approx((4, -2, 3, -2, 3))
    assert eval_profile(p, 1.0, 2) == pytest.approx(0.5)
    assert eval_profile(p, 2.0, 2) == 0
    assert eval_profile(p, 3.0, 2, "neg") == pytest.approx(1 / 12)
    q = rational_profile(np.diag([0.3, 1.0, 2.0]))
    assert abs(q.a1) < 1e-14 and abs(q.a2) < 1e-14
    with pytest.raises(DegenerateArgument):
        eval_profile(rational_profile(IDENTITY), 1.0)


def test_profile_matches_direct(gen):
    a = gen.uniform(-5, 5, size=(10_000, 3, 3))
    p = rational_profile(a)
    for lam in (1.0, 1.5, 2.0):
        g = G(a, lam)
        assert np.allclose(p.a1 + p.a2 * lam, g, rtol=1e-10, atol=1e-10)
        assert np.allclose(p.b1 + p.b2 * lam + p.b3 * lam**2, dist_to_stretch(a, lam) ** 2, rtol=1e-12)
        for l in (2, 3):
            assert np.allclose(eval_profile(p, lam, l), m_l(a, lam, l), rtol=1e-10, atol=1e-12)


def test_profile_take():
    p = rational_profile(np.stack([D, IDENTITY, 2 * D]))
    assert len(p) == 3
    assert len(p.take(np.array([True, False, True]))) == 2


def test_K_hat():
    assert K_hat(A0) == pytest.approx(SQRT2, abs=1e-15)
    assert K_hat(IDENTITY) == pytest.approx(0, abs=1e-15)
    assert K_hat(np.outer([1.0, 2.0, 3.0], [1.0, -1.0, 0.5])) == pytest.approx(0, abs=1e-12)
    assert K_hat(7 * A0) == pytest.approx(SQRT2)
    with pytest.raises(DegenerateArgument):
        K_hat(np.zeros((3, 3)))


def test_K_hat_bound_sampled(gen):
    vals = K_hat(gen.normal(size=(200_000, 3, 3)))
    assert vals.max() <= SQRT2 + 1e-9


def test_alpha_beta_gamma(gen):
    assert alpha_beta_gamma(2 * IDENTITY, 2.0) == pytest.approx((0, 0, 0))
    assert alpha_beta_gamma(np.diag([1.0, 2.0, 3.0]), 1.0) == pytest.approx((5, 1, -1))
    a = gen.uniform(-5, 5, size=(10_000, 3, 3))
    al, be, ga = alpha_beta_gamma(a, 1.3)
    assert np.all(al >= be - 1e-12) and np.all(be >= ga - 1e-12)
    assert np.allclose(al + be + ga, P(a, 1.3))


def test_g_of_R():
    abc = (3.0, 1.0, -2.0)
    assert g_of_R(IDENTITY, abc) == 0
    assert g_of_R(np.diag([-1.0, -1.0, 1.0]), abc) == pytest.approx(2 * 3 + 2 * 1)
    with pytest.raises(NotARotation):
        g_of_R(np.diag([-1.0, 1.0, 1.0]), abc)
    with pytest.raises(NotARotation):
        g_of_R(2 * IDENTITY, abc)


def test_H_examples():
    assert H(1.2 * IDENTITY, 1.2) == pytest.approx(0, abs=1e-14)
    assert H(np.diag([2.0, 3.0, 4.0]), 1.0) == pytest.approx(6.0)
    assert H(D, 1.0) == pytest.approx(2.0)


def test_H_lower_bound(gen):
    a = gen.uniform(-3, 3, size=(200_000, 3, 3))
    a = a[determinant(a) > 0][:100_000]
    s = singular_values(a)
    for lam in (1.0, 1.5, 2.0):
        h = H(a, lam)
        above = (s[:, 0] - lam) * (s[:, 1] - lam) * (s[:, 2] - lam)
        below = (s[:, 0] - lam) * (s[:, 1] + lam) * (s[:, 2] + lam)
        bound = np.where(s[:, 0] >= lam, above, below)
        assert np.all(h >= bound - 1e-9)


def test_material_params_validation():
    lo, hi = kappa_bounds(2.5)
    assert lo == pytest.approx(2**-0.5)
    MaterialParams(2.5, lo)
    MaterialParams(2.5, hi, hprime=1.0)
    for bad in ((2.0, 1.0), (3.0, 0.5), (2.5, 0.5), (2.5, 0.9)):
        with pytest.raises(ParamRange):
            MaterialParams(*bad)
    with pytest.raises(ParamRange):
        MaterialParams(2.5, lo, hprime=-1.0)


def test_F1_F2_examples():
    mat = MaterialParams(2.5, 0.8, 0.0)
    lam = 1.4
    assert F1([lam] * 3, lam, mat) == 0
    assert F1([lam + 1] * 3, lam, mat) == pytest.approx(0.4 * 3**1.25)
    assert F2(lam * IDENTITY, lam, mat) == 0
    assert F2(D, lam, mat) == pytest.approx(0.4 * float(dist_to_stretch(D, lam)) ** 2.5)


def test_F1_nonnegative_under_est1(gen):
    # F1 >= 0 on positive triples once lam^(3-q) h' <= (kappa/2)(q-2)^((2-q)/2) q^(q/2)
    q, kappa, lam = 2.5, 0.8, 1.3
    hp = 0.5 * kappa * (q - 2) ** ((2 - q) / 2) * q ** (q / 2) / lam ** (3 - q)
    mat = MaterialParams(q, kappa, hp)
    sig = gen.uniform(0, 6, size=(100_000, 3))
    assert np.all(F1(sig, lam, mat) >= -1e-12)


def test_F2_nonnegative_under_est2(gen):
    # with M2 = sqrt 2, M3 = nu1/lam and h' below the c* term, F2 >= 0 on sampled matrices
    q, kappa, lam, nu1 = 2.5, 0.8, 1.5, 0.4501
    hp = 0.5 * kappa * SQRT2 ** (q - 3) * nu1 ** (2 - q) / lam ** (3 - q)
    mat = MaterialParams(q, kappa, hp)
    a = gen.uniform(-3, 3, size=(100_000, 3, 3))
    assert np.all(F2(a, lam, mat) >= -1e-12)


def test_stored_energy():
    mat = MaterialParams(2.5, 0.8)
    assert stored_energy(IDENTITY, mat) == pytest.approx(3**1.25 + 2)
    assert stored_energy(np.diag([1.0, 0.0, 2.0]), mat) == math.inf
    assert stored_energy(np.diag([-1.0, 1.0, 1.0]), mat) == math.inf
    lam = 1.7
    assert stored_energy(lam * IDENTITY, mat) == pytest.approx(3**1.25 * lam**2.5 + lam**3 + lam**-3)
    assert default_h(0.0) == math.inf
    assert default_hprime(1.0) == 0

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oscillab import phase_core as pc
from oscillab.errors import DomainError, QuadratureResolutionError

STP = pc.SpaceTimePoint
finite = dict(allow_nan=False, allow_infinity=False)


def point(d):
    """Admissible (lam, x, t, w): t in [lam/4, 4 lam], |x_i| <= 12 lam."""
    return st.tuples(
        st.floats(1.0, 100.0, **finite),
        st.lists(st.floats(-12, 12, **finite), min_size=d, max_size=d),
        st.floats(0.25, 4.0, **finite),
        st.lists(st.floats(0, 1, **finite), min_size=d, max_size=d),
    ).map(lambda a: (a[0], [a[0] * v for v in a[1]], a[0] * a[2], a[3]))


# ---- closed-form values

def test_phase_trivial_values():
    assert pc.phase(pc.PhaseField(1.0), STP((0.0,), 1.0), (0.0,)) == pytest.approx(1.0, abs=0)
    pf = pc.PhaseField(2.0)
    assert pc.phase(pf, STP((1.0, 0.0), 1.0), (1.0, 0.0)) == 4.0


def test_phase_derived_value():
    got = pc.phase(pc.PhaseField(10.0), STP((3.0, 4.0), 5.0), (0.0, 0.0))
    assert got == pytest.approx(20 * math.sqrt(1.25), rel=1e-14)


def test_derivatives_at_stationary_point():
    pf = pc.PhaseField(7.0)
    w = np.array([0.2, 0.6])
    t = 3.0
    p = STP(tuple(t * w), t)
    assert np.allclose(pc.phase_grad_x(pf, p, w), 0.0, atol=1e-14)
    assert pc.phase_dt(pf, p, w) == pytest.approx(-49.0 / 9.0, rel=1e-14)
    assert pc.mixed_hessian_det(pf, p, w) == pytest.approx(1.0, abs=1e-15)


def test_mixed_hessian_det_unit_offset():
    # lam = 1, n = 3, x - t w = (1, 0): the 2x2 block has eigenvalues -1/sqrt(2), -1/2^{3/2}
    pf = pc.PhaseField(1.0)
    p = STP((1.0, 0.0), 1.0)
    H = pc.phase_mixed_hessian(pf, p, (0.0, 0.0))
    assert abs(np.linalg.det(H)) == pytest.approx(0.25, rel=1e-14)
    assert pc.mixed_hessian_det(pf, p, (0.0, 0.0)) == pytest.approx(0.25, rel=1e-14)


def _numeric_mixed_hessian(lam, x, t, w, h=1e-6):
    d = len(x)
    H = np.empty((d + 1, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        H[:d, j] = (pc.grad_x_arr(lam, x, t, w + e) - pc.grad_x_arr(lam, x, t, w - e)) / (2 * h)
        H[d, j] = (pc.dt_arr(lam, x, t, w + e) - pc.dt_arr(lam, x, t, w - e)) / (2 * h)
    return H


@given(point(2))
def test_mixed_hessian_det_matches_numeric(args):
    lam, x, t, w = args
    x, w = np.array(x), np.array(w)
    H = _numeric_mixed_hessian(lam, x, t, w)
    closed = float(pc.mixed_hessian_det_arr(lam, x, t, w))
    # the d x d block from grad_x; the t row does not enter the determinant
    assert abs(np.linalg.det(H[:2])) == pytest.approx(closed, rel=1e-5)


@given(point(2))
def test_gradients_match_central_differences(args):
    lam, x, t, w = args
    x, w = np.array(x), np.array(w)
    h = 1e-5 * lam
    grad = pc.grad_x_arr(lam, x, t, w)
    scale = max(np.abs(grad).max(), lam / t * 1e-3)
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (pc.phase_arr(lam, x + e, t, w) - pc.phase_arr(lam, x - e, t, w)) / (2 * h)
        assert abs(fd - grad[j]) <= 1e-6 * scale
    fd_t = (pc.phase_arr(lam, x, t + h, w) - pc.phase_arr(lam, x, t - h, w)) / (2 * h)
    dt = pc.dt_arr(lam, x, t, w)
    assert abs(fd_t - dt) <= 1e-6 * max(abs(dt), lam ** 2 / t ** 2 * 1e-3)
    hw = 1e-6
    gw = pc.grad_omega_arr(lam, x, t, w)
    for j in range(2):
        e = np.zeros(2)
        e[j] = hw
        fd = (pc.phase_arr(lam, x, t, w + e) - pc.phase_arr(lam, x, t, w - e)) / (2 * hw)
        assert abs(fd - gw[j]) <= 1e-6 * max(np.abs(gw).max(), lam)


@given(point(2))
def test_dt_domega_matches_differences(args):
    lam, x, t, w = args
    x, w = np.array(x), np.array(w)
    h = 1e-6
    got = pc.dt_domega_arr(lam, x, t, w)
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (pc.dt_arr(lam, x, t, w + e) - pc.dt_arr(lam, x, t, w - e)) / (2 * h)
        assert abs(fd - got[j]) <= 1e-5 * max(np.abs(got).max(), lam / t)


def test_taylor_remainder_is_second_order():
    pf = pc.PhaseField(50.0)
    p0 = STP((10.0, -5.0), 40.0)
    w = np.array([0.3, 0.4])
    r1 = abs(pc.taylor_remainder(pf, p0, STP((10.1, -4.9), 40.1), w))
    r2 = abs(pc.taylor_remainder(pf, p0, STP((10.05, -4.95), 40.05), w))
    assert r1 / r2 == pytest.approx(4.0, rel=0.05)


def test_zero_time_rejected():
    with pytest.raises(DomainError):
        pc.phase(pc.PhaseField(2.0), STP((0.0,), 0.0), (0.0,))
    with pytest.raises(DomainError):
        pc.PhaseField(0.5)


# ---- pseudo-conformal map

def test_pseudo_examples():
    u, t = pc.pseudo_forward((3.0,), 2.0)
    assert np.allclose(u, [1.5]) and t == 0.5
    u, t = pc.pseudo_forward((0.0,), 1.0)
    assert np.allclose(u, [0.0]) and t == 1.0
    with pytest.raises(DomainError):
        pc.pseudo_forward((1.0,), 0.0)


def test_pseudo_round_trip_bulk():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(10_000):
        x = rng.uniform(-5, 5, 2)
        xn = rng.choice([-1, 1]) * rng.uniform(0.2, 5)
        u, t = pc.pseudo_forward(x, xn)
        y, yn = pc.pseudo_inverse(u, t)
        worst = max(worst, np.abs(y - x).max(), abs(yn - xn))
    assert worst <= 1e-12


# ---- scale ladder

def test_ladder_examples():
    assert pc.scale_ladder(4, 100.0, 200.0, 2.0).value == 400.0
    assert pc.scale_ladder(2, 10.0, 40.0, 1.0).value == pytest.approx(2.5 * 40.0)


@given(st.integers(2, 16), st.floats(1, 1e4, **finite), st.floats(1, 1e6, **finite),
       st.floats(1, 8, **finite))
def test_ladder_between_one_and_three(K, R, lam, c_n):
    if R > lam:
        with pytest.raises(DomainError):
            pc.scale_ladder(K, R, lam, c_n)
        return
    v = pc.scale_ladder(K, R, lam, c_n).value / (c_n * lam)
    assert 1.0 <= v <= 3.0


# ---- bumps

def test_plateau_support():
    x = np.linspace(-3, 3, 601)
    b = pc.plateau(x, -1, 1, -2, 2)
    assert np.all(b[np.abs(x) <= 1] == 1.0)
    assert np.all(b[np.abs(x) >= 2] == 0.0)
    assert np.all((b >= 0) & (b <= 1))


# ---- Bochner-Riesz multiplier

def _mode(shape, k, width):
    g = pc.GridFunction.zeros(shape, (0.0,) * len(shape), (width,) * len(shape))
    return g.with_samples(np.exp(2j * np.pi * g.nodes() @ np.asarray(k, float)))


def test_bochner_riesz_modes():
    zero = _mode((32, 32), (0, 0), 4.0)
    assert np.allclose(pc.apply_bochner_riesz(zero, 0.7).samples, zero.samples)
    # spacing 1/8: frequency 1.25 is resolved and lies outside the unit ball
    hi = _mode((32, 32), (1.25, 0), 4.0)
    assert np.allclose(pc.apply_bochner_riesz(hi, 0.7).samples, 0.0, atol=1e-12)
    g = pc.GridFunction.zeros((64, 64), (0.0, 0.0), (64.0, 64.0))
    nodes = g.nodes()
    k = np.array([16 / 64, 16 / 64])  # |xi|^2 = 1/8
    f = g.with_samples(np.exp(2j * np.pi * nodes @ k))
    out = pc.apply_bochner_riesz(f, 1.0)
    assert np.allclose(out.samples, (1 - 0.125) * f.samples, atol=1e-12)
    k2 = np.array([0.5, 0.5])  # |xi|^2 = 0.5, exactly representable on a 64 grid
    f2 = g.with_samples(np.exp(2j * np.pi * nodes @ k2))
    assert np.allclose(pc.apply_bochner_riesz(f2, 1.0).samples, 0.5 * f2.samples, atol=1e-12)


def test_negative_alpha_guarded():
    with pytest.raises(DomainError):
        pc.bochner_riesz_multiplier(np.array([0.1]), -0.5)
    assert pc.bochner_riesz_multiplier(np.array([0.5]), -1.0, allow_negative=True)[0] == 2.0


# ---- operators

def test_H_of_zero_is_zero():
    pf = pc.PhaseField(16.0)
    g = pc.GridFunction.zeros((64,))
    assert np.all(pc.eval_H_lambda(pf, g, np.array([[0.0, 16.0], [3.0, 20.0]])) == 0)


def test_H_one_point_oracle():
    pf = pc.PhaseField(8.0)
    m = 256
    s = np.zeros(m, complex)
    s[100] = 3.0
    g = pc.GridFunction(s, (0.0,), (1.0,))
    w0 = (100 + 0.5) / m
    P = np.array([[1.0, 8.0], [-4.0, 12.0]])
    got = pc.eval_H_lambda(pf, g, P)
    want = 3.0 / m * np.exp(2j * np.pi * pc.phase_arr(8.0, P[:, :1], P[:, 1], np.array([w0])))
    assert np.allclose(got, want, rtol=1e-12)


@given(st.floats(0, 2 * math.pi, **finite))
def test_H_modulus_phase_invariant(theta):
    pf = pc.PhaseField(8.0)
    g = pc.GridFunction.from_callable(lambda p: np.cos(3 * p[:, 0]) + 1j * p[:, 0], (128,))
    P = np.array([[0.5, 8.0], [2.0, 10.0]])
    a = np.abs(pc.eval_H_lambda(pf, g, P))
    b = np.abs(pc.eval_H_lambda(pf, g.with_samples(g.samples * np.exp(1j * theta)), P))
    assert np.allclose(a, b, rtol=1e-12)


def test_H_resolution_guard():
    pf = pc.PhaseField(4096.0)
    g = pc.GridFunction.from_callable(lambda p: np.ones(len(p)), (16,))
    with pytest.raises(QuadratureResolutionError):
        pc.eval_H_lambda(pf, g, np.array([[0.0, 4096.0]]))


def test_S_lambda_one_point_oracle():
    f = pc.GridFunction.zeros((32, 32), (0.0, 0.0), (1.0, 1.0))
    s = np.zeros((32, 32), complex)
    s[5, 7] = 2.0
    f = f.with_samples(s)
    y = np.array([(5.5) / 32, (7.5) / 32])
    P = np.array([[3.0, 4.0]])
    got = pc.eval_S_lambda(2.0, f, P, check_resolution=False)
    want = 2.0 / 32 ** 2 * np.exp(2j * np.pi * 2.0 * np.linalg.norm(P[0] - y))
    assert got[0] == pytest.approx(want, rel=1e-12)
    assert np.all(pc.eval_S_lambda(2.0, f.with_samples(0 * s), P) == 0)


def test_S_bar_matches_frozen_operator_after_change_of_variables():
    # phi(x, t; w) = lam * |(x/t, lam/t) - (w, 0)|, so S-bar at (x, t) is the frozen
    # Carleson-Sjolin operator at the pseudo-conformal image lifted by lam
    pf = pc.PhaseField(16.0)
    g = pc.GridFunction.from_callable(lambda p: np.exp(-((p[:, 0] - 0.5) / 0.2) ** 2), (512,))
    P = np.array([[3.0, 20.0], [-1.0, 30.0], [10.0, 8.0]])
    a = pc.eval_S_bar(pf, g, P)
    b = pc.eval_S_bar(pf, g, P, amplitude=lambda x, t, w: np.ones(len(w)))
    assert np.allclose(a, b, rtol=1e-12)
    mapped = []
    for x, t in P:
        u, s = pc.pseudo_forward([x], t)
        mapped.append([u[0], pf.lam * s])
    c = pc.eval_S_frozen(pf.lam, g, np.array(mapped), check_resolution=False)
    assert np.allclose(a, c, rtol=1e-9, atol=1e-12)


def test_l2_bound_zero_and_phase_invariance():
    pf = pc.PhaseField(16.0)
    g0 = pc.GridFunction.zeros((256,))
    assert pc.l2_bound_check(pf, g0, [16.0]) == 0.0
    g = pc.GridFunction.from_callable(
        lambda p: np.exp(-((p[:, 0] - 0.5) / 0.15) ** 2) * (1 + 1j * p[:, 0]), (256,))
    a = pc.l2_bound_check(pf, g, [8.0, 16.0, 32.0])
    b = pc.l2_bound_check(pf, g.with_samples(g.samples * 1j), [8.0, 16.0, 32.0])
    assert a == pytest.approx(b, rel=1e-12)
    assert a <= 10.0

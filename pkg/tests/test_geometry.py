import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oscillab import geometry as geo
from oscillab import phase_core as pc
from oscillab import wavepackets as wp

finite = dict(allow_nan=False, allow_infinity=False)


# ---- Gauss map

def test_gauss_map_examples():
    assert np.allclose(geo.gauss_map(np.zeros(2)), [0, 0, 1])
    assert np.allclose(geo.gauss_map(np.array([1.0, 0.0])), np.array([1, 0, 1]) / math.sqrt(2))


@given(st.lists(st.floats(0, 1, **finite), min_size=2, max_size=2),
       st.floats(0.3, 3.0, **finite))
def test_gauss_map_matches_wedge(w, tfrac):
    pf = pc.PhaseField(64.0)
    rng = np.random.default_rng(0)
    w = np.array(w)
    G = geo.gauss_map(w)
    assert abs(np.linalg.norm(G) - 1) <= 1e-14
    for _ in range(10):
        x = rng.uniform(-200, 200, 2)
        num = geo.gauss_map_numeric(pf, x, tfrac * 64.0, w)
        assert geo.line_angle(num, G) <= 1e-8


# ---- subspaces

def test_angle_to_subspace_extremes():
    V = geo.Subspace.span([[1, 0, 0], [0, 1, 0]])
    assert geo.angle_to_subspace([1, 1, 0], V) == pytest.approx(0.0, abs=1e-15)
    assert geo.angle_to_subspace([0, 0, 1], V) == pytest.approx(math.pi / 2)


def test_angle_to_subspace_matches_sampling():
    rng = np.random.default_rng(3)
    V = geo.Subspace.span(rng.normal(size=(2, 3)))
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    th = np.linspace(0, 2 * np.pi, 10_000, endpoint=False)
    circle = np.cos(th)[:, None] * V.basis[0] + np.sin(th)[:, None] * V.basis[1]
    brute = np.min(np.arccos(np.clip(circle @ d, -1, 1)))
    assert geo.angle_to_subspace(d, V) == pytest.approx(brute, abs=1e-3)


@given(st.lists(st.floats(-5, 5, **finite), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 1e-3))
def test_angle_is_scale_invariant(v):
    V = geo.Subspace.span([[1, 2, 0]])
    a = geo.angle_to_subspace(np.array(v), V)
    b = geo.angle_to_subspace(3.7 * np.array(v), V)
    assert 0 <= a <= math.pi / 2 + 1e-15
    assert a == pytest.approx(b, abs=1e-12)


# ---- polynomials and varieties

def test_polynomial_json_round_trip_and_product():
    P = geo.Polynomial.linear([1.0, -2.0], 3.0) * geo.Polynomial.sphere([0.0, 1.0], 2.0)
    Q = geo.Polynomial.from_json(2, P.to_json())
    X = np.random.default_rng(0).normal(size=(20, 2))
    assert np.allclose(P(X), Q(X))
    assert P.degree == 3


@given(st.lists(st.floats(-3, 3, **finite), min_size=2, max_size=2),
       st.lists(st.floats(-3, 3, **finite), min_size=2, max_size=2))
def test_restrict_to_line_agrees_with_evaluation(a, b):
    P = geo.Polynomial(2, (((2, 1), 1.5), ((0, 2), -1.0), ((1, 0), 0.5), ((0, 0), 2.0)))
    coeffs = P.restrict_to_line(a, b)
    for s in (-1.3, 0.0, 0.7):
        direct = P(np.array(a) + s * np.array(b))
        assert np.polyval(coeffs[::-1], s) == pytest.approx(direct, rel=1e-9, abs=1e-9)


def test_variety_distance_and_tangent_space():
    Z = geo.Variety((geo.Polynomial.sphere([0, 0, 0], 2.0),), 3)
    assert np.allclose(Z.distance([[0, 0, 5.0], [3.0, 0, 0]]), [3.0, 1.0], atol=1e-9)
    T = Z.tangent_basis(np.array([0, 0, 2.0]))
    assert np.allclose(np.abs(T @ [0, 0, 1]), 0)
    H = geo.Variety.hyperplane([0, 0, 1.0], [0, 0, 1.0])
    assert np.allclose(H.distance([[4, 5, 3.0]]), [2.0])


def test_multigrain_nesting():
    big = geo.Grain(geo.Variety.whole_space(3), (0, 0, 0), 100.0)
    mid = geo.Grain(geo.Variety.hyperplane([0, 0, 1.0], [0, 0, 0]), (1, 0, 0), 50.0)
    line = geo.Variety((geo.Polynomial.linear([0, 0, 1.0]), geo.Polynomial.linear([0, 1.0, 0])), 3)
    small = geo.Grain(line, (1, 0, 0), 10.0)
    mg = geo.Multigrain((big, mid, small))
    assert mg.scales == (100.0, 50.0, 10.0)
    assert mg.check_nested(np.random.default_rng(0), 200)
    with pytest.raises(ValueError):
        geo.Multigrain((big, geo.Grain(mid.variety, (90, 0, 0), 50.0)))


# ---- tangency

def _tube(point, direction, r, delta=0.1):
    d = np.asarray(direction, float)
    return SimpleNamespace(point=np.asarray(point, float), direction=d / np.linalg.norm(d),
                           scale_r=r, radius=r ** (0.5 + delta), empty=False)


def test_tangency_axis_aligned_fails():
    Z = geo.Variety.hyperplane([0, 0, 1.0], [0, 0, 50.0])     # {t = 50}
    grain = geo.Grain(Z, (0, 0, 50.0), 256.0)
    assert not geo.tangency_check(_tube((0, 0, 50), (0, 0, 1), 256.0), grain, 0.1)


def test_tangency_contained_line_passes():
    Z = geo.Variety.hyperplane([1.0, 0, 0], [0, 0, 0])
    grain = geo.Grain(Z, (0, 0, 0), 256.0)
    assert geo.tangency_check(_tube((0, 0, 0), (0, 1, 1), 256.0), grain, 0.1)


@pytest.mark.parametrize("factor,expected", [(2.0, False), (0.1, True)])
def test_tangency_tilted_plane(factor, expected):
    r, dm = 256.0, 0.1
    ang = factor * r ** (-0.5 + dm)
    Z = geo.Variety.hyperplane([1.0, 0, 0], [0, 0, 0])
    direction = (math.sin(ang), 0.0, math.cos(ang))
    grain = geo.Grain(Z, (0, 0, 0), r)
    # keep the core inside the neighbourhood so only the angle decides
    grain_small = geo.Grain(Z, (0, 0, 0), 0.9 * r ** (0.5 + dm) / max(math.sin(ang), 1e-9))
    g = grain if factor < 1 else grain_small
    assert geo.tangency_check(_tube((0, 0, 0), direction, r), g, dm) is expected


def test_real_tube_through_x0_is_tangent_to_its_line():
    lam, r = 4096.0, 256.0
    pf = pc.PhaseField(lam)
    x0 = pc.SpaceTimePoint((0.3 * lam,), lam)
    cap = min(wp.make_caps(r, 1), key=lambda c: abs(c.center[0] - 0.3))
    packet = list(wp.single_packet_set(pc.GridFunction.zeros((4096,)), r, x0, pf, cap, (0.0,)))[0]
    tube = wp.tube_of(packet, 0.1)
    e = geo.gauss_map(np.asarray(cap.center))
    Z = geo.Variety.hyperplane([e[1], -e[0]], x0.as_array())
    assert geo.tangency_check(tube, geo.Grain(Z, tuple(x0.as_array()), r), 0.1)


# ---- Phi map

def test_phi_map_zero_at_centre():
    pf = pc.PhaseField(100.0)
    w = np.array([0.2, 0.7])
    assert np.allclose(geo.phi_map(pf, 150.0, w, 150.0 * w), 0.0)


@given(st.lists(st.floats(-1, 1, **finite), min_size=2, max_size=2),
       st.floats(0.25, 4, **finite))
def test_phi_jacobian_symmetric_and_matches_differences(xf, tf):
    lam = 100.0
    pf = pc.PhaseField(lam)
    w = np.array([0.3, 0.6])
    t0 = tf * lam
    x = t0 * w + np.array(xf) * 3 * lam
    J = geo.phi_jacobian(pf, t0, w, x)
    assert np.allclose(J, J.T, atol=1e-15)
    h = 1e-4
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        col = (geo.phi_map(pf, t0, w, x + e) - geo.phi_map(pf, t0, w, x - e)) / (2 * h)
        assert np.allclose(col, J[:, j], atol=1e-8)
    ev = np.linalg.eigvalsh(J)
    assert np.all(ev > 0)


def test_phi_ball_image_near_identity():
    pf = pc.PhaseField(4096.0)
    w = np.array([0.3])
    t0 = 4096.0
    for ell in (16.0, 256.0):
        lo, hi = geo.phi_ball_image(pf, t0, w, t0 * w + 100.0, ell)
        assert 1 / 8 <= lo <= hi <= 8


# ---- transversality sampler

def test_transversality_vacuous_and_degenerate():
    Z = geo.Variety.hyperplane([1.0, 0.0], [0.0, 0.0])
    ident = lambda x: np.asarray(x, float)
    jac = lambda x: np.eye(2)
    assert geo.transversality_sampler(ident, jac, [[1.0, 0.0]], Z, [0.0], [[0.0, 1.0]]) == [False]
    # Pi_c parallel to Z at c != 0: no intersection, vacuously transverse
    assert geo.transversality_sampler(ident, jac, [[1.0, 0.0]], Z, [2.0], [[0.0, 1.0]]) == [True]


def test_transversality_generic():
    Z = geo.Variety((geo.Polynomial.sphere([0.0, 0.0, 0.0], 1.0),), 3)
    phi = lambda x: np.asarray(x, float) + 0.1 * np.sin(np.asarray(x, float))
    jac = lambda x: np.eye(3) + 0.1 * np.diag(np.cos(np.asarray(x, float)))
    rng = np.random.default_rng(5)
    cs = rng.uniform(-0.9, 0.9, 100)
    seeds = rng.normal(size=(6, 3))
    verdicts = geo.transversality_sampler(phi, jac, [[0.3, 0.5, 0.8]], Z, cs, seeds)
    assert sum(verdicts) >= 99


# ---- nested direction counting

def _planted(lam=4096.0, r=256.0):
    pf = pc.PhaseField(lam)
    x0 = pc.SpaceTimePoint((0.3 * lam,), lam)
    caps = wp.make_caps(r, 1)
    grid = pc.GridFunction.zeros((4096,))
    tubes = []
    for cap in caps:
        if 0.0 <= cap.center[0] <= 0.6:
            p = list(wp.single_packet_set(grid, r, x0, pf, cap, (0.0,)))[0]
            tubes.append(wp.tube_of(p, 0.1))
    return pf, x0, caps, tubes


def test_nested_count_vacuous_and_empty():
    pf, x0, caps, tubes = _planted()
    c = tuple(x0.as_array())
    mg = geo.Multigrain((geo.Grain(geo.Variety.whole_space(2), c, 256.0),))
    assert geo.nested_direction_count(mg, tubes) == len({t.cap.index for t in tubes})
    assert geo.nested_direction_count(mg, []) == 0


def test_nested_count_planted_line():
    pf, x0, caps, tubes = _planted()
    c = x0.as_array()
    target = min(tubes, key=lambda t: abs(t.cap.center[0] - 0.3))
    e = target.direction
    Z = geo.Variety.hyperplane([e[1], -e[0]], c)
    mg = geo.Multigrain((geo.Grain(geo.Variety.whole_space(2), tuple(c), 256.0),
                         geo.Grain(Z, tuple(c), 256.0)), deltas=(0.1, 0.1))
    got = set(geo.nested_direction_count(mg, tubes, return_caps=True))
    # planted: tubes whose core stays within C r^{1/2+delta} of the line in the ball
    want = set()
    for t in tubes:
        core = geo._core_points(t, c, 256.0, 17)
        if len(core) and np.all(Z.distance(core) <= 4 * 256.0 ** 0.6):
            want.add(t.cap.index)
    assert got == want and target.cap.index in got

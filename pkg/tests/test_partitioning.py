import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from oscillab import geometry as geo
from oscillab import partitioning as part
from oscillab.errors import DegenerateConfigurationError

finite = dict(allow_nan=False, allow_infinity=False)


def test_square_corners():
    W = part.WeightedPoints([[0, 0], [1, 0], [0, 1], [1, 1]], np.ones(4))
    P = part.equal_mass_partition(W, 2)
    assert P.degree == 2
    assert sorted(P.cell_weights().values()) == [1.0, 1.0, 1.0, 1.0]
    # the two forms are the two axis bisectors, in some order
    forms = sorted((tuple(np.round(np.abs(P.frame[a]), 12)), round(abs(o), 12))
                   for fac in P.factors for a, o in fac)
    assert forms == [((0.0, 1.0), 0.5), ((1.0, 0.0), 0.5)]


def test_weight_on_one_point_is_reported_degenerate():
    X = np.random.default_rng(0).normal(size=(20, 2))
    w = np.zeros(20)
    w[3] = 5.0
    P = part.equal_mass_partition(part.WeightedPoints(X, w), 4)
    assert P.degenerate
    assert max(P.cell_weights().values()) == 5.0


def test_coincident_points_raise():
    W = part.WeightedPoints(np.ones((5, 3)), np.ones(5))
    with pytest.raises(DegenerateConfigurationError):
        part.equal_mass_partition(W, 2)


def test_uniform_cube_counts():
    rng = np.random.default_rng(0)
    W = part.WeightedPoints(rng.uniform(-1, 1, (10_000, 3)), np.ones(10_000))
    P = part.equal_mass_partition(W, 4)
    wts = P.cell_weights()
    assert sum(1 for v in wts.values() if v > 0) <= 8 * 4 ** 3
    assert max(wts.values()) <= 4 * 4 ** -3 * W.total


@given(arrays(float, (60, 3), elements=st.floats(-10, 10, **finite)), st.integers(2, 5))
def test_cells_and_wall_partition_the_points(X, d):
    if np.all(np.ptp(X, axis=0) == 0):
        return
    W = part.WeightedPoints(X, np.ones(len(X)))
    P = part.equal_mass_partition(W, d)
    seen = np.concatenate([P.wall] + [v for v in P.cells.values()])
    assert sorted(seen.tolist()) == list(range(len(X)))
    pats = P.sign_pattern(X)
    for key, idx in P.cells.items():
        assert np.all(pats[idx] == np.array(key))


def test_line_crossings_examples():
    Q = geo.Polynomial.linear([1.0, 0.0]) * geo.Polynomial.linear([0.0, 1.0], 0.5)
    assert part.line_cell_crossings(Q, [-1.0, -1.0], [1.0, 0.7]) <= 3
    assert part.line_cell_crossings(Q, [0.0, 3.0], [0.0, 1.0]) == 0


def test_line_inside_partition_wall():
    W = part.WeightedPoints([[0, 0], [1, 0], [0, 1], [1, 1]], np.ones(4))
    P = part.equal_mass_partition(W, 2)
    a, offs = P.factors[0][0]
    point = P.frame[a] * offs
    other = P.frame[1 - a]
    assert part.line_cell_crossings(P, point, other) == 0


@given(arrays(float, (2, 3), elements=st.floats(-2, 2, **finite)))
def test_lines_cross_at_most_degree_plus_one(ab):
    rng = np.random.default_rng(11)
    W = part.WeightedPoints(rng.uniform(-1, 1, (2000, 3)), np.ones(2000))
    P = _cached(W)
    a, b = ab
    if np.linalg.norm(b) < 1e-6:
        return
    assert part.line_cell_crossings(P, a, b) <= P.degree + 1


_CACHE = {}


def _cached(W):
    if "p" not in _CACHE:
        _CACHE["p"] = part.equal_mass_partition(W, 4)
    return _CACHE["p"]


def test_shrunken_cells():
    X = np.array([[0.0, 1.0], [-5.0, 0.0], [10 * 100 ** 0.6, 3.0], [-10 * 100 ** 0.6, 2.0],
                  [-20.0, 1.0], [30.0, -1.0]])
    W = part.WeightedPoints(X, np.ones(len(X)))
    P = part.Partition(np.eye(2), [[(0, 0.0)]], {}, np.zeros(0, int), W.weights)
    pats = P.sign_pattern(X)
    on_wall = np.any(pats == 0, axis=1)
    P.cells = {}
    for i in np.flatnonzero(~on_wall):
        P.cells.setdefault(tuple(pats[i]), []).append(i)
    P.cells = {k: np.array(v) for k, v in P.cells.items()}
    P.wall = np.flatnonzero(on_wall)
    for method in ("first_order", "exact"):
        cells, wall = part.shrunken_cells(P, W, 100.0, 0.1, method)
        kept = set(np.concatenate(list(cells.values())).tolist())
        assert 0 not in kept
        assert {2, 3} <= kept
        retained = sum(W.weights[v].sum() for v in cells.values())
        assert retained >= (1 - len(wall) / len(X)) * W.total - 1e-12


def test_dichotomy_ball_is_cellular():
    rng = np.random.default_rng(2)
    r = 1e4
    X = rng.normal(size=(3000, 3))
    X = X / np.linalg.norm(X, axis=1)[:, None] * r * rng.uniform(0, 1, (3000, 1)) ** (1 / 3)
    out = part.dichotomy_step(part.WeightedPoints(X, np.ones(3000)), geo.Variety.whole_space(3),
                              4, r, 0.02)
    assert out.kind == "cellular"
    assert out.retained_fraction >= 0.5
    assert out.c_hi <= 8


def test_dichotomy_slab_recovers_plane():
    rng = np.random.default_rng(4)
    r, dm = 1e4, 0.02
    th = r ** (0.5 + dm)
    normal = np.array([1.0, 2.0, 2.0]) / 3
    X = rng.uniform(-r / 2, r / 2, (3000, 3))
    X = X - np.outer(X @ normal, normal) + np.outer(rng.uniform(-th / 2, th / 2, 3000), normal)
    out = part.dichotomy_step(part.WeightedPoints(X, np.ones(3000)), geo.Variety.whole_space(3),
                              4, r, dm)
    assert out.kind == "algebraic"
    assert out.capture >= 0.9
    lin = out.variety.polys[-1]
    grad = lin.gradient(np.zeros(3))
    assert abs(abs(grad @ normal) / np.linalg.norm(grad) - 1) < 1e-3


def test_dichotomy_single_point_is_algebraic():
    W = part.WeightedPoints([[1.0, 2.0, 3.0]], [1.0])
    out = part.dichotomy_step(W, geo.Variety.whole_space(3), 3, 100.0, 0.1)
    assert out.kind == "algebraic" and out.capture == 1.0


def test_dichotomy_inside_hyperplane():
    rng = np.random.default_rng(6)
    r = 1e4
    Z = geo.Variety.hyperplane([0, 0, 1.0], [0, 0, 0])
    X = rng.uniform(-r / 2, r / 2, (3000, 3))
    X[:, 2] = rng.uniform(-1, 1, 3000)
    out = part.dichotomy_step(part.WeightedPoints(X, np.ones(3000)), Z, 4, r, 0.02)
    assert out.kind == "cellular"
    # the partition only cuts along Z
    for fac in out.partition.factors:
        for axis, _ in fac:
            assert abs(out.partition.frame[axis][2]) < 1e-9


def test_partition_json():
    rng = np.random.default_rng(0)
    W = part.WeightedPoints(rng.normal(size=(50, 2)), np.ones(50))
    P = part.equal_mass_partition(W, 2)
    js = P.to_json()
    assert js["poly"]["degree"] == P.degree
    assert sum(len(c["indices"]) for c in js["cells"]) + len(js["wall_indices"]) == 50


@given(st.floats(0.1, 10, **finite))
def test_weights_scaling_keeps_cells(c):
    rng = np.random.default_rng(8)
    W = part.WeightedPoints(rng.normal(size=(200, 3)), rng.uniform(0.5, 2, 200))
    a = part.equal_mass_partition(W, 3)
    b = part.equal_mass_partition(W.scaled(c), 3)
    assert [[ax for ax, _ in f] for f in a.factors] == [[ax for ax, _ in f] for f in b.factors]
    oa = [o for f in a.factors for _, o in f]
    ob = [o for f in b.factors for _, o in f]
    assert np.allclose(oa, ob, rtol=1e-9, atol=1e-12)

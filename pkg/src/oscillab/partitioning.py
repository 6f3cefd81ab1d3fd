"""Discrete polynomial partitioning of weighted point sets.

The partitioning polynomial is a product of bisecting factors. Factor k acts on
coordinate axis k mod n of a principal-axis frame and is itself a product of
linear forms, one per current interval on that axis, placed at the weighted
median of the interval. Cells are sign patterns of the factors; with this
layout they are boxes in the frame, so each is connected.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DegenerateConfigurationError
from .geometry import Polynomial, Variety


@dataclass(frozen=True)
class WeightedPoints:
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.points, float))
        w = np.asarray(self.weights, float)
        if len(w) != len(P):
            raise ValueError("one weight per point")
        if np.any(w < 0) or not w.sum() > 0:
            raise ValueError("weights must be nonnegative with positive total")
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "weights", w)

    @property
    def total(self):
        return float(self.weights.sum())

    @property
    def dim(self):
        return self.points.shape[1]

    def scaled(self, c):
        return WeightedPoints(self.points, self.weights * c)


@dataclass
class Partition:
    frame: np.ndarray          # rows: orthonormal directions
    factors: list              # list of lists of (axis, offset): linear forms q_axis . x - offset
    cells: dict                # sign pattern -> index array
    wall: np.ndarray           # indices with some factor exactly zero
    weights: np.ndarray
    degenerate: bool = False

    @property
    def degree(self):
        return sum(len(f) for f in self.factors)

    @property
    def n_factors(self):
        return len(self.factors)

    def linear_forms(self):
        out = []
        for fac in self.factors:
            for axis, off in fac:
                out.append(Polynomial.linear(self.frame[axis], off))
        return out

    def factor_polys(self):
        polys = []
        for fac in self.factors:
            p = None
            for axis, off in fac:
                lin = Polynomial.linear(self.frame[axis], off)
                p = lin if p is None else p * lin
            polys.append(p)
        return polys

    @property
    def poly(self):
        p = None
        for q in self.factor_polys():
            p = q if p is None else p * q
        return p

    def sign_pattern(self, X):
        X = np.atleast_2d(np.asarray(X, float))
        pats = []
        for fac in self.factors:
            val = np.ones(len(X))
            for axis, off in fac:
                val = val * (X @ self.frame[axis] - off)
            pats.append(np.sign(val))
        return np.stack(pats, axis=-1).astype(int) if pats else np.zeros((len(X), 0), int)

    def cell_weights(self):
        return {k: float(self.weights[v].sum()) for k, v in self.cells.items()}

    def wall_distance(self, X):
        """Exact distance to the union of the factor hyperplanes."""
        X = np.atleast_2d(np.asarray(X, float))
        best = np.full(len(X), np.inf)
        for fac in self.factors:
            for axis, off in fac:
                best = np.minimum(best, np.abs(X @ self.frame[axis] - off))
        return best

    def to_json(self):
        poly = self.poly
        return {"poly": poly.to_json() if poly is not None else None,
                "cells": [{"sign_pattern": list(k), "indices": [int(i) for i in v],
                           "weight": float(self.weights[v].sum())}
                          for k, v in sorted(self.cells.items())],
                "wall_indices": [int(i) for i in self.wall]}


def principal_frame(W):
    c = np.average(W.points, axis=0, weights=W.weights)
    X = W.points - c
    cov = (X * W.weights[:, None]).T @ X / W.total
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    return vecs[:, order].T


def _weighted_cut(values, weights):
    """Threshold between distinct values splitting the weight in half, or None."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    w = weights[order]
    if v[0] == v[-1]:
        return None
    cum = np.cumsum(w)
    half = cum[-1] / 2.0
    i = int(np.searchsorted(cum, half - 1e-15 * cum[-1]))
    i = min(i, len(v) - 1)
    above = v[v > v[i]]
    if len(above):
        return 0.5 * (v[i] + above[0])
    below = v[v < v[i]]
    return 0.5 * (v[i] + below[-1])


def equal_mass_partition(W, d, frame=None, n_eff=None):
    """Product of ceil(m log2 d) bisecting factors, m = n_eff or the ambient dimension."""
    if d < 2:
        raise ValueError("d must be >= 2")
    P = W.points
    n = W.dim
    m = n if n_eff is None else n_eff
    if len(P) > 1 and np.all(np.ptp(P, axis=0) == 0):
        raise DegenerateConfigurationError("all points coincide; nothing can be separated")
    if frame is None:
        frame = principal_frame(W) if len(P) > 1 else np.eye(n)
    n_fac = int(math.ceil(m * math.log2(d) - 1e-12))
    coords = P @ frame.T
    cuts = [[] for _ in range(n)]      # per-axis sorted thresholds
    factors = []
    pos = W.weights > 0
    for k in range(n_fac):
        axis = k % m
        edges = [-np.inf] + cuts[axis] + [np.inf]
        fac = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            sel = (coords[:, axis] > lo) & (coords[:, axis] < hi)
            use = sel & pos if np.any(sel & pos) else sel
            if not np.any(use):
                continue
            c = _weighted_cut(coords[use, axis], W.weights[use])
            if c is not None:
                fac.append((axis, float(c)))
        cuts[axis] = sorted(cuts[axis] + [c for _, c in fac])
        if fac:
            factors.append(fac)
    part = Partition(frame, factors, {}, np.zeros(0, int), W.weights)
    pats = part.sign_pattern(P)
    on_wall = np.any(pats == 0, axis=1) if pats.size else np.zeros(len(P), bool)
    cells = {}
    for i in np.flatnonzero(~on_wall):
        cells.setdefault(tuple(int(s) for s in pats[i]), []).append(int(i))
    part.cells = {k: np.array(v, int) for k, v in cells.items()}
    part.wall = np.flatnonzero(on_wall)
    wts = part.cell_weights()
    part.degenerate = bool(wts) and max(wts.values()) >= W.total * (1 - 1e-12)
    return part


def line_cell_crossings(P, a, b):
    """Number of distinct cells met by the line a + s b.

    P is a Partition (cells = sign patterns) or a Polynomial (cells counted as
    the open intervals between consecutive real roots).
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if isinstance(P, Partition):
        roots = []
        for fac in P.factors:
            for axis, off in fac:
                q = P.frame[axis]
                slope = float(q @ b)
                const = float(q @ a) - off
                if slope == 0:
                    if const == 0:
                        return 0
                    continue
                roots.append(-const / slope)
        pts = _interval_midpoints(np.unique(roots))
        pats = P.sign_pattern(a + pts[:, None] * b)
        return len({tuple(p) for p in pats})
    coeffs = P.restrict_to_line(a, b)
    if np.all(np.abs(coeffs) <= 1e-14 * max(1.0, np.abs(coeffs).max())):
        return 0
    trimmed = np.trim_zeros(coeffs, "b")
    if len(trimmed) <= 1:
        return 1
    r = np.roots(trimmed[::-1])
    real = np.unique(np.round(r[np.abs(r.imag) < 1e-9].real, 12))
    return len(real) + 1


def _interval_midpoints(roots):
    if len(roots) == 0:
        return np.array([0.0])
    gaps = np.diff(roots)
    pad = max(1.0, float(np.ptp(roots)))
    mids = [roots[0] - pad] + list(roots[:-1] + gaps / 2) + [roots[-1] + pad]
    return np.array(mids)


def shrunken_cells(part, W, r, delta_m, method="first_order"):
    """Cell membership after removing the r^(1/2+delta_m) neighbourhood of Z(P)."""
    thick = r ** (0.5 + delta_m)
    X = W.points
    if method == "exact":
        wall = part.wall_distance(X) <= thick
    else:
        poly = part.poly
        if poly is None:
            wall = np.zeros(len(X), bool)
        else:
            val = np.abs(poly(X))
            grad = np.linalg.norm(poly.gradient(X), axis=-1)
            wall = val <= thick * grad
    return {k: v[~wall[v]] for k, v in part.cells.items()}, np.flatnonzero(wall)


# ---------------------------------------------------------------- dichotomy

@dataclass
class CellularOutcome:
    partition: Partition
    cells: dict                 # label -> indices after shrinking and refinement
    cell_weights: dict
    retained_fraction: float
    c_lo: float
    c_hi: float
    heavy_fraction: float
    refinements: int
    kind: str = "cellular"


@dataclass
class AlgebraicOutcome:
    variety: Variety
    capture: float
    source: str
    kind: str = "algebraic"


def _diameter(X):
    if len(X) < 2:
        return 0.0
    lo, hi = X.min(axis=0), X.max(axis=0)
    return float(np.linalg.norm(hi - lo))


def _refine(cells, W, max_diam):
    """Extra spatial bisection of cells whose bounding box is too wide."""
    out = {}
    splits = 0
    stack = list(cells.items())
    while stack:
        key, idx = stack.pop()
        X = W.points[idx]
        if len(idx) < 2 or _diameter(X) <= max_diam:
            out[key] = idx
            continue
        axis = int(np.argmax(np.ptp(X, axis=0)))
        c = _weighted_cut(X[:, axis], np.maximum(W.weights[idx], 1e-300))
        if c is None:
            out[key] = idx
            continue
        left = X[:, axis] < c
        stack.append((key + ((axis, -1),), idx[left]))
        stack.append((key + ((axis, 1),), idx[~left]))
        splits += 1
    return out, splits


def _fit_section(Z, W, idx=None):
    """Hyperplane through the weighted centroid with the least-variance normal (within Z)."""
    X = W.points if idx is None else W.points[idx]
    w = W.weights if idx is None else W.weights[idx]
    n = W.dim
    c = np.average(X, axis=0, weights=np.maximum(w, 1e-300))
    Y0 = X - c
    if Z.polys:
        T = Z.tangent_basis(Z.project(c[None, :])[0][0])
        coords = Y0 @ T.T
        cov = (coords * w[:, None]).T @ coords
        vals, vecs = np.linalg.eigh(cov)
        normal = vecs[:, 0] @ T
    else:
        cov = (Y0 * w[:, None]).T @ Y0
        vals, vecs = np.linalg.eigh(cov)
        normal = vecs[:, 0]
    normal = normal / np.linalg.norm(normal)
    return Variety(Z.polys + (Polynomial.linear(normal, float(normal @ c)),), n)


def _capture(Y, W, thick):
    d = Y.distance(W.points)
    return float(W.weights[d <= thick].sum() / W.total)


def dichotomy_step(W, Z, d, r, delta_m, c_cell=0.125, center=None):
    """Cellular or algebraic outcome for one partitioning step inside B_r and near Z."""
    thick = r ** (0.5 + delta_m)
    m = Z.dim
    if Z.polys:
        dist = Z.distance(W.points)
        if np.any(dist[W.weights > 0] > thick * (1 + 1e-9)):
            raise ValueError("weight must lie in the r^(1/2+delta_m) neighbourhood of Z")
    try:
        frame = None
        if Z.polys:
            c = np.average(W.points, axis=0, weights=W.weights)
            T = Z.tangent_basis(Z.project(c[None, :])[0][0])
            sub = WeightedPoints(W.points @ T.T, W.weights)
            inner = principal_frame(sub) if len(W.points) > 1 else np.eye(m)
            normals = np.linalg.svd(Z.jacobian(c))[2][: W.dim - m]
            frame = np.concatenate([inner @ T, normals], axis=0)
        part = equal_mass_partition(W, d, frame=frame, n_eff=m)
    except DegenerateConfigurationError:
        Y = _fit_section(Z, W)
        return AlgebraicOutcome(Y, _capture(Y, W, thick), "degenerate")
    cells, wall = shrunken_cells(part, W, r, delta_m, method="exact")
    retained = sum(float(W.weights[v].sum()) for v in cells.values())
    if retained >= 0.5 * W.total and not part.degenerate:
        cells = {k: v for k, v in cells.items() if len(v)}
        cells, splits = _refine(cells, W, r / 2)
        wts = {k: float(W.weights[v].sum()) for k, v in cells.items()}
        norm = W.total * float(d) ** (-m)
        positive = [x for x in wts.values() if x > 0]
        eff = max(len(positive), 1)
        heavy = sum(1 for x in positive if x >= c_cell * W.total / eff) / eff
        return CellularOutcome(part, cells, wts, retained / W.total,
                               min(positive) / norm, max(positive) / norm, heavy, splits)
    # algebraic: a fitted hyperplane section when it holds half the weight,
    # otherwise the wall Z(P) itself (which holds it by construction)
    best = _fit_section(Z, W)
    cap = _capture(best, W, thick)
    if cap >= 0.5:
        return AlgebraicOutcome(best, cap, "fitted")
    wall_cap = float(W.weights[part.wall_distance(W.points) <= thick].sum() / W.total)
    return AlgebraicOutcome(Variety(Z.polys + (part.poly,), W.dim), wall_cap, "wall")

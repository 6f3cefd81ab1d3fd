"""Broad norms over K^2-tiles and the exponent bookkeeping that goes with them."""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
import math

import numpy as np

from .errors import ConfigError, DomainError


# ---------------------------------------------------------------- exponents

def p_critical(n, k):
    """2 + 6 / (2(n-1) + (k-1) prod_{i=k}^{n-1} 2i/(2i+1)), exactly."""
    if not (2 <= k <= n - 1):
        raise DomainError(f"need 2 <= k <= n-1, got n={n}, k={k}")
    prod = Fraction(1)
    for i in range(k, n):
        prod *= Fraction(2 * i, 2 * i + 1)
    return 2 + Fraction(6) / (2 * (n - 1) + (k - 1) * prod)


def bound_range(n, k):
    if k < 2:
        raise DomainError("k must be >= 2")
    lo = 2 + Fraction(4, 2 * n - k)
    hi = math.inf if k == 2 else 2 + Fraction(2, k - 2)
    return lo, hi


def guth_exponent(n):
    """2(3n+1)/(3n-3) for odd n, 2(3n+2)/(3n-2) for even n."""
    if n % 2:
        return Fraction(2 * (3 * n + 1), 3 * n - 3)
    return Fraction(2 * (3 * n + 2), 3 * n - 2)


def _gap(p):
    return Fraction(1, 2) - 1 / Fraction(p)


@dataclass(frozen=True)
class ExponentTable:
    n: int
    k: int
    p: dict          # i -> p_i
    alpha: dict
    beta: dict       # includes beta_{n+1}

    def to_json(self):
        f = lambda d: {str(i): float(v) for i, v in sorted(d.items())}
        return {"n": self.n, "k": self.k, "p": f(self.p), "alpha": f(self.alpha),
                "beta": f(self.beta)}


def exponent_table(n, k, p_vec):
    """p_vec lists p_k, ..., p_n (non-increasing, all >= 2)."""
    if len(p_vec) != n - k + 1:
        raise ValueError(f"expected {n - k + 1} exponents")
    p = {k + j: Fraction(v).limit_denominator(10 ** 12) if isinstance(v, float) else Fraction(v)
         for j, v in enumerate(p_vec)}
    vals = [p[i] for i in range(k, n + 1)]
    if any(a < b for a, b in zip(vals, vals[1:])) or vals[-1] < 2:
        raise ValueError("need p_k >= ... >= p_n >= 2")
    alpha, beta = {n: Fraction(1)}, {n: Fraction(1), n + 1: Fraction(1)}
    for i in range(k, n):
        g = _gap(p[i])
        if g == 0:
            raise ZeroDivisionError(f"p_{i} = 2 makes 1/2 - 1/p_{i} vanish")
        alpha[i] = _gap(p[i + 1]) / g
        beta[i] = _gap(p[n]) / g
    return ExponentTable(n, k, p, alpha, beta)


def m_constant(r_vec, d_vec, table, l, delta):
    """M(r_l, D_l) with r_vec, d_vec indexed l..n."""
    n = table.n
    if len(r_vec) != n - l + 1 or len(d_vec) != n - l + 1:
        raise ValueError("r_vec and d_vec must cover indices l..n")
    if l not in table.beta:
        raise ValueError(f"beta_{l} not in table")
    b = {i: float(v) for i, v in table.beta.items()}
    logm = (n - l) * delta * sum(math.log(D) for D in d_vec)
    for j, i in enumerate(range(l, n + 1)):
        logm += 0.5 * (b[i + 1] - b[i]) * math.log(r_vec[j])
        logm += 0.5 * (b[i + 1] - b[l]) * math.log(d_vec[j])
    return math.exp(logm)


def step_constants(j, d, r, n_a, n_c, delta, p, n, delta_m=0.0, c_const=1.0):
    """(C^I, C^II, C^III, C^IV) for a step with #a algebraic and #c cellular counts."""
    if n_a + n_c != j or min(n_a, n_c) < 0:
        raise ValueError("counters must be nonnegative and sum to j")
    c1 = d ** (n_c * delta) * math.log(r) ** (2 * p * n_a * (1 + delta))
    c2 = d ** (n_c * delta + n * n_a * (1 + delta))
    c3 = d ** (n_c * delta + n_a * delta) * r ** (c_const * n_a * delta_m)
    c4 = d ** (j * delta) * r ** (c_const * n_a * delta_m)
    return c1, c2, c3, c4


# ---------------------------------------------------------------- broad norms

@dataclass(frozen=True)
class BroadNormConfig:
    k: int
    A: int
    K: float
    p: float
    n: int = 3
    grassmann_samples: int = 32

    def __post_init__(self):
        if self.k < 2 or self.k > self.n - 1:
            raise ConfigError("need 2 <= k <= n-1")
        if self.A < 1:
            raise ConfigError("A must be >= 1")
        if self.K < 2 or self.p < 2:
            raise ConfigError("need K >= 2 and p >= 2")
        if self.grassmann_samples < self.A:
            raise ConfigError("grassmann_samples must be >= A")


def sphere_design(n, count):
    """Deterministic spread of `count` unit vectors in R^n (one per antipodal pair)."""
    pts = list(np.eye(n))
    i = 0
    golden = (np.sqrt(5) - 1) / 2
    while len(pts) < count:
        i += 1
        # Kronecker sequence mapped to the upper hemisphere
        u = np.mod(i * golden * np.arange(1, n + 1) / np.sqrt(np.arange(1, n + 1) + 1), 1.0)
        v = np.tan(np.pi * (u - 0.5) * 0.9)
        v[-1] = abs(v[-1]) + 1e-3
        pts.append(v / np.linalg.norm(v))
    return np.array(pts[:count])


def _orth(vectors):
    q, rdiag = np.linalg.qr(np.asarray(vectors, float).T)
    if np.min(np.abs(np.diag(rdiag))) < 1e-9:
        return None
    return q.T


def grassmann_net(cfg, directions=None, masses=None):
    """List of orthonormal (k-1)-frames: sphere-design spans plus data-adapted spans."""
    m = cfg.k - 1
    base = sphere_design(cfg.n, 2 * (cfg.n - 1))
    subs, seen = [], set()

    def add(vs):
        q = _orth(vs)
        if q is None:
            return
        P = np.round(q.T @ q, 9)
        key = P.tobytes()
        if key not in seen:
            seen.add(key)
            subs.append(q)

    for combo in combinations(range(len(base)), m):
        add(base[list(combo)])
    if directions is not None and len(directions):
        D = np.asarray(directions, float)
        w = np.ones(len(D)) if masses is None else np.asarray(masses, float)
        keyed = sorted(range(len(D)), key=lambda i: (-w[i], tuple(np.round(D[i], 12))))
        keyed = [i for i in keyed if w[i] > 0]
        top = 1
        while top < len(keyed) and math.comb(top + 1, m) + len(subs) <= cfg.grassmann_samples:
            top += 1
        for combo in combinations(keyed[:top], m):
            if len(subs) >= max(cfg.grassmann_samples, len(base)):
                break
            add(D[list(combo)])
    return subs


def _angles(directions, subs):
    D = np.asarray(directions, float)
    D = D / np.linalg.norm(D, axis=-1, keepdims=True)
    out = np.empty((len(subs), len(D)))
    for s, q in enumerate(subs):
        resid = D - (D @ q.T) @ q
        out[s] = np.arcsin(np.clip(np.linalg.norm(resid, axis=-1), 0, 1))
    return out


def broad_local(masses, directions, cfg, subspaces=None, return_choice=False):
    """min over A-tuples of sampled subspaces of the largest mass among non-excluded caps.

    masses[tau] is the L^p mass of cap tau on one K^2-ball; directions[tau] its
    Gauss direction. A cap is excluded by V when its angle to V is <= 1/K.
    """
    masses = np.asarray(masses, float)
    if masses.size == 0 or not np.any(masses > 0):
        return (0.0, ()) if return_choice else 0.0
    subs = subspaces if subspaces is not None else grassmann_net(cfg, directions, masses)
    order = sorted(range(len(masses)), key=lambda i: -masses[i])
    ms = masses[order]
    cover = _angles(np.asarray(directions)[order], subs) <= 1.0 / cfg.K
    S = len(subs)
    A = min(cfg.A, S)
    best, choice = np.inf, ()
    combos = combinations(range(S), A)
    while True:
        chunk = np.array([c for _, c in zip(range(20000), combos)])
        if chunk.size == 0:
            break
        union = np.any(cover[chunk], axis=1)           # (c, caps)
        unc = ~union
        first = np.where(unc.any(axis=1), unc.argmax(axis=1), len(ms))
        vals = np.where(first < len(ms), ms[np.minimum(first, len(ms) - 1)], 0.0)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best, choice = float(vals[i]), tuple(int(v) for v in chunk[i])
        if best == 0.0:
            break
    return (best, choice) if return_choice else best


def _tile_index(shape, lo, spacing, side):
    axes = [lo[i] + (np.arange(shape[i]) + 0.5) * spacing[i] for i in range(len(shape))]
    return [np.floor((a - lo[i]) / side).astype(int) for i, a in enumerate(axes)], axes


def _box_overlap(a_lo, a_hi, b_lo, b_hi):
    return float(np.prod(np.clip(np.minimum(a_hi, b_hi) - np.maximum(a_lo, b_lo), 0, None)))


def broad_norm(field, directions, cfg, lo, spacing, U=None, subspaces=None):
    """BL^p_{k,A}(U) of per-cap samples field[tau, ...] on a cell-centred grid.

    Tiles of side K^2 are anchored at `lo`; U is a list of disjoint boxes
    (lo, hi), default the whole grid. Weights are exact box overlaps.
    """
    field = np.asarray(field)
    ncaps, shape = field.shape[0], field.shape[1:]
    lo = np.asarray(lo, float)
    spacing = np.broadcast_to(np.asarray(spacing, float), (len(shape),))
    side = cfg.K ** 2
    hi = lo + spacing * np.array(shape)
    if U is None:
        U = [(lo, hi)]
    if len(U) == 0:
        return 0.0
    idx, _ = _tile_index(shape, lo, spacing, side)
    n_tiles = [int(i.max()) + 1 for i in idx]
    cell = float(np.prod(spacing))
    dens = np.abs(field) ** cfg.p * cell
    # per-tile masses via reduceat along each axis
    red = dens
    for ax in range(len(shape)):
        starts = np.searchsorted(idx[ax], np.arange(n_tiles[ax]))
        red = np.add.reduceat(red, starts, axis=ax + 1)
    total = 0.0
    for tile in np.ndindex(*n_tiles):
        t_lo = lo + np.array(tile) * side
        t_hi = np.minimum(t_lo + side, hi)
        vol = float(np.prod(t_hi - t_lo))
        w = sum(_box_overlap(t_lo, t_hi, np.asarray(b0, float), np.asarray(b1, float))
                for b0, b1 in U) / vol
        if w <= 0:
            continue
        masses = red[(slice(None),) + tile]
        total += w * broad_local(masses, directions, cfg, subspaces)
    return total ** (1.0 / cfg.p)

"""Closed-form phase, its derivatives, and the oscillatory operators built on it.

Conventions: a space-time point is (x, t) with x in R^d, d = n - 1, and the
phase is

    phi(x, t; w) = (lam / t) * sqrt(lam^2 + |x - t w|^2).

Array helpers broadcast over leading axes; the last axis of x and omega is the
spatial index.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from ._parallel import chunked_map
from .errors import DomainError, QuadratureResolutionError

TWO_PI = 2.0 * np.pi
# phase increment allowed per quadrature cell, in cycles (pi/2 radians)
NYQUIST_CYCLES = 0.25


@dataclass(frozen=True)
class PhaseField:
    lam: float
    c_n: float = 4.0

    def __post_init__(self):
        if not self.lam >= 1:
            raise DomainError(f"lambda must be >= 1, got {self.lam}")
        if not self.c_n >= 1:
            raise DomainError(f"c_n must be >= 1, got {self.c_n}")


@dataclass(frozen=True)
class SpaceTimePoint:
    x: tuple
    t: float

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in np.atleast_1d(self.x)))
        object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self):
        return len(self.x) + 1

    def as_array(self):
        return np.array(self.x + (self.t,))


@dataclass(frozen=True)
class GridFunction:
    """Complex samples at the cell centres of a uniform grid on a box.

    Quadrature over the grid is the midpoint rule, which coincides with the
    trapezoid rule of the periodic extension.
    """

    samples: np.ndarray
    lo: tuple
    hi: tuple
    periodic: bool = True

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if s.ndim != len(lo) or len(lo) != len(hi):
            raise ValueError("samples rank must match the box dimension")
        if any(b <= a for a, b in zip(lo, hi)):
            raise ValueError("domain must have positive volume")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    @property
    def shape(self):
        return self.samples.shape

    @property
    def spacing(self):
        return np.array([(b - a) / m for a, b, m in zip(self.lo, self.hi, self.shape)])

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def axes(self):
        return [a + (np.arange(m) + 0.5) * h
                for a, m, h in zip(self.lo, self.shape, self.spacing)]

    def nodes(self):
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def flat(self):
        return self.samples.ravel()

    def l2_norm(self):
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.cell_volume))

    def with_samples(self, samples):
        return GridFunction(np.asarray(samples).reshape(self.shape), self.lo, self.hi,
                            self.periodic)

    @classmethod
    def from_callable(cls, fn, shape, lo=None, hi=None, periodic=True):
        shape = tuple(int(m) for m in np.atleast_1d(shape))
        lo = (0.0,) * len(shape) if lo is None else lo
        hi = (1.0,) * len(shape) if hi is None else hi
        probe = cls(np.zeros(shape, complex), lo, hi, periodic)
        vals = np.asarray(fn(probe.nodes()), dtype=complex).reshape(shape)
        return cls(vals, lo, hi, periodic)

    @classmethod
    def zeros(cls, shape, lo=None, hi=None):
        return cls.from_callable(lambda p: np.zeros(len(p)), shape, lo, hi)


# ---------------------------------------------------------------- closed forms

def _check_t(t):
    if np.any(np.asarray(t) == 0):
        raise DomainError("t = 0 is outside the domain of the phase")


def _unpack(p):
    if isinstance(p, SpaceTimePoint):
        return np.array(p.x), p.t
    arr = np.asarray(p, dtype=float)
    return arr[..., :-1], arr[..., -1]


def _u(x, t, omega):
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    t = np.asarray(t, dtype=float)
    return x - t[..., None] * omega


def phase_arr(lam, x, t, omega):
    _check_t(t)
    u = _u(x, t, omega)
    return lam / np.asarray(t, float) * np.sqrt(lam * lam + np.sum(u * u, axis=-1))


def grad_x_arr(lam, x, t, omega):
    _check_t(t)
    u = _u(x, t, omega)
    s = np.sqrt(lam * lam + np.sum(u * u, axis=-1))
    return (lam / np.asarray(t, float) / s)[..., None] * u


def dt_arr(lam, x, t, omega):
    _check_t(t)
    t = np.asarray(t, float)
    u = _u(x, t, omega)
    s = np.sqrt(lam * lam + np.sum(u * u, axis=-1))
    return -lam / t**2 * (lam * lam + np.sum(np.asarray(x, float) * u, axis=-1)) / s


def grad_omega_arr(lam, x, t, omega):
    _check_t(t)
    u = _u(x, t, omega)
    s = np.sqrt(lam * lam + np.sum(u * u, axis=-1))
    return -(lam / s)[..., None] * u


def mixed_hessian_arr(lam, x, t, omega):
    """d/dx_i d/dw_j of the phase, shape (..., d, d)."""
    _check_t(t)
    u = _u(x, t, omega)
    s2 = lam * lam + np.sum(u * u, axis=-1)
    d = u.shape[-1]
    eye = np.eye(d)
    num = s2[..., None, None] * eye - u[..., :, None] * u[..., None, :]
    return -lam * num / (s2 ** 1.5)[..., None, None]


def dt_domega_arr(lam, x, t, omega):
    """d/dt d/dw_j of the phase, shape (..., d)."""
    _check_t(t)
    x = np.asarray(x, float)
    omega = np.asarray(omega, float)
    u = _u(x, t, omega)
    s2 = lam * lam + np.sum(u * u, axis=-1)
    xu = np.sum(x * u, axis=-1)
    wu = np.sum(omega * u, axis=-1)
    num = (lam * lam + xu)[..., None] * omega - wu[..., None] * x
    return lam * num / (s2 ** 1.5)[..., None]


def mixed_hessian_det_arr(lam, x, t, omega):
    _check_t(t)
    u = _u(x, t, omega)
    d = u.shape[-1]
    s2 = lam * lam + np.sum(u * u, axis=-1)
    return (lam * lam / s2) ** ((d + 2) / 2.0)


# single-point API

def phase(pf, p, omega):
    x, t = _unpack(p)
    return float(phase_arr(pf.lam, x, t, omega))


def phase_grad_x(pf, p, omega):
    x, t = _unpack(p)
    return grad_x_arr(pf.lam, x, t, omega)


def phase_dt(pf, p, omega):
    x, t = _unpack(p)
    return float(dt_arr(pf.lam, x, t, omega))


def phase_grad_omega(pf, p, omega):
    x, t = _unpack(p)
    return grad_omega_arr(pf.lam, x, t, omega)


def phase_mixed_hessian(pf, p, omega):
    x, t = _unpack(p)
    return mixed_hessian_arr(pf.lam, x, t, omega)


def phase_dt_domega(pf, p, omega):
    x, t = _unpack(p)
    return dt_domega_arr(pf.lam, x, t, omega)


def mixed_hessian_det(pf, p, omega):
    """|det| of the mixed Hessian: (lam^2 / (lam^2 + |x - t w|^2))^((d+2)/2)."""
    x, t = _unpack(p)
    return float(mixed_hessian_det_arr(pf.lam, x, t, omega))


def taylor_remainder(pf, p0, p, omega):
    """Second-order Taylor remainder of the phase in (x, t) about p0."""
    x0, t0 = _unpack(p0)
    x, t = _unpack(p)
    lam = pf.lam
    lin = (np.sum(grad_x_arr(lam, x0, t0, omega) * (np.asarray(x) - x0), axis=-1)
           + dt_arr(lam, x0, t0, omega) * (np.asarray(t) - t0))
    return phase_arr(lam, x, t, omega) - phase_arr(lam, x0, t0, omega) - lin


# ---------------------------------------------------------------- transforms

def pseudo_forward(x_prime, x_n):
    if x_n == 0:
        raise DomainError("x_n = 0 has no pseudo-conformal image")
    return np.asarray(x_prime, float) / x_n, 1.0 / x_n


def pseudo_inverse(u, t):
    if t == 0:
        raise DomainError("t = 0 has no pseudo-conformal preimage")
    return np.asarray(u, float) / t, 1.0 / t


@dataclass(frozen=True)
class ScaleLadder:
    k_param: int
    r: float
    lam: float
    c_n: float
    value: float = field(default=0.0)


def _floor_log(base, v):
    m = 0
    acc = 1.0
    while acc * base <= v * (1 + 1e-12):
        acc *= base
        m += 1
    return m


def scale_ladder(K, R, lam, c_n=4.0):
    if K < 2:
        raise DomainError("K must be >= 2")
    if R < 1:
        raise DomainError("R must be >= 1")
    if R > lam:
        raise DomainError(f"R = {R} exceeds lambda = {lam}")
    base = c_n * lam
    if lam / R < K:
        value = base
    else:
        m = _floor_log(K, lam / R)
        value = base * (2.0 + sum(K ** (-j) for j in range(1, m)))
    return ScaleLadder(int(K), float(R), float(lam), float(c_n), float(value))


# ---------------------------------------------------------------- bumps

def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, built from exp(-1/s)."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
        out = a / (a + b)
    return np.where(s <= 0, 0.0, np.where(s >= 1, 1.0, out))


def plateau(x, inner_lo, inner_hi, outer_lo, outer_hi):
    """Smooth bump equal to 1 on [inner_lo, inner_hi], 0 outside (outer_lo, outer_hi)."""
    x = np.asarray(x, float)
    up = smooth_step((x - outer_lo) / (inner_lo - outer_lo))
    down = smooth_step((outer_hi - x) / (outer_hi - inner_hi))
    return up * down


def cutoff_bump(pf, R, K, x, t):
    """Smooth cutoff equal to 1 on the working box and supported on its double."""
    lam_r = scale_ladder(K, R, pf.lam, pf.c_n).value
    x = np.atleast_2d(np.asarray(x, float))
    out = plateau(np.asarray(t, float), R / pf.c_n, pf.c_n * pf.lam,
                  R / (2 * pf.c_n), 2 * pf.c_n * pf.lam)
    for i in range(x.shape[-1]):
        out = out * plateau(x[..., i], -lam_r, lam_r, -2 * lam_r, 2 * lam_r)
    return out


# ---------------------------------------------------------------- operators

def _points_arrays(points, d):
    if isinstance(points, SpaceTimePoint):
        points = [points]
    if len(points) and isinstance(points[0], SpaceTimePoint):
        arr = np.array([p.as_array() for p in points], dtype=float)
    else:
        arr = np.atleast_2d(np.asarray(points, dtype=float))
    if arr.shape[-1] != d + 1:
        raise ValueError(f"points must have {d + 1} coordinates")
    return arr[:, :-1], arr[:, -1]


def _nyquist_ok(grad, spacing):
    """grad: (..., d) phase gradient in cycles per unit; spacing: (d,)."""
    inc = np.max(np.abs(grad) * spacing, axis=tuple(range(grad.ndim - 1)))
    return inc


def _oscillatory_sum(phase_fn, grad_fn, nodes, weights, m, spacing, check, chunk):
    out = np.empty(m, dtype=complex)

    def work(a, b):
        ph = phase_fn(a, b)
        if check:
            inc = _nyquist_ok(grad_fn(a, b), spacing)
            if np.any(inc > NYQUIST_CYCLES):
                raise QuadratureResolutionError(
                    f"phase advances {inc.max():.3f} cycles per cell "
                    f"(limit {NYQUIST_CYCLES}); refine the grid")
        out[a:b] = np.exp(TWO_PI * 1j * ph) @ weights
        return None

    chunked_map(work, m, chunk)
    return out


def _chunk_for(n_nodes):
    return max(1, int(2_000_000 // max(n_nodes, 1)))


def eval_H_lambda(pf, g, points, cutoff=False, cutoff_R=None, cutoff_K=2,
                  check_resolution=True):
    """Quadrature for the integral of exp(2 pi i phi(x, t; w)) g(w) dw."""
    d = g.dim
    X, T = _points_arrays(points, d)
    _check_t(T)
    nz = np.flatnonzero(g.flat())
    if nz.size == 0:
        return np.zeros(len(T), complex)
    nodes = g.nodes()[nz]
    weights = g.flat()[nz] * g.cell_volume
    lam = pf.lam

    def ph(a, b):
        return phase_arr(lam, X[a:b, None, :], np.broadcast_to(T[a:b, None], (b - a, len(nodes))),
                         nodes[None, :, :])

    def gr(a, b):
        return grad_omega_arr(lam, X[a:b, None, :],
                              np.broadcast_to(T[a:b, None], (b - a, len(nodes))),
                              nodes[None, :, :])

    out = _oscillatory_sum(ph, gr, nodes, weights, len(T), g.spacing, check_resolution,
                           _chunk_for(len(nodes)))
    if cutoff:
        R = pf.lam ** 0.5 if cutoff_R is None else cutoff_R
        out = out * cutoff_bump(pf, R, cutoff_K, X, T)
    return out


def eval_S_bar(pf, g, points, amplitude=None, check_resolution=True):
    """Frozen-variable operator with phase phi and amplitude a(x, t, w)."""
    if amplitude is None:
        return eval_H_lambda(pf, g, points, check_resolution=check_resolution)
    d = g.dim
    X, T = _points_arrays(points, d)
    _check_t(T)
    nodes = g.nodes()
    base = g.flat() * g.cell_volume
    out = np.empty(len(T), complex)
    for i in range(len(T)):
        amp = amplitude(X[i], T[i], nodes)
        gi = GridFunction((base / g.cell_volume * amp).reshape(g.shape), g.lo, g.hi)
        out[i] = eval_H_lambda(pf, gi, np.r_[X[i], T[i]][None, :],
                               check_resolution=check_resolution)[0]
    return out


def eval_S_lambda(lam, f, points, amplitude=None, check_resolution=True):
    """Carleson-Sjolin operator: integral of exp(2 pi i lam |x - y|) a(x - y) f(y) dy."""
    P = np.atleast_2d(np.asarray(points, float))
    if P.shape[-1] != f.dim:
        raise ValueError("points and f must live in the same dimension")
    nz = np.flatnonzero(f.flat())
    if nz.size == 0:
        return np.zeros(len(P), complex)
    nodes = f.nodes()[nz]
    vals = f.flat()[nz] * f.cell_volume
    out = np.empty(len(P), complex)

    def work(a, b):
        z = P[a:b, None, :] - nodes[None, :, :]
        dist = np.sqrt(np.sum(z * z, axis=-1))
        if check_resolution:
            inc = np.max(lam * np.abs(z) / np.maximum(dist, 1e-300)[..., None] * f.spacing)
            if inc > NYQUIST_CYCLES:
                raise QuadratureResolutionError(
                    f"phase advances {inc:.3f} cycles per cell; refine the grid")
        amp = 1.0 if amplitude is None else amplitude(z)
        out[a:b] = (np.exp(TWO_PI * 1j * lam * dist) * amp) @ vals

    chunked_map(work, len(P), _chunk_for(len(nodes)))
    return out


def eval_S_frozen(lam, f0, points, amplitude=None, check_resolution=True):
    """Carleson-Sjolin operator applied to f0(y') placed on the slice y_n = 0."""
    P = np.atleast_2d(np.asarray(points, float))
    nodes = f0.nodes()
    vals = f0.flat() * f0.cell_volume
    out = np.empty(len(P), complex)
    for i, p in enumerate(P):
        z = np.concatenate([p[None, :-1] - nodes, np.full((len(nodes), 1), p[-1])], axis=1)
        dist = np.sqrt(np.sum(z * z, axis=-1))
        if check_resolution:
            inc = np.max(lam * np.abs(z[:, :-1]) / dist[:, None] * f0.spacing)
            if inc > NYQUIST_CYCLES:
                raise QuadratureResolutionError(
                    f"phase advances {inc:.3f} cycles per cell; refine the grid")
        amp = 1.0 if amplitude is None else amplitude(z)
        out[i] = np.sum(np.exp(TWO_PI * 1j * lam * dist) * amp * vals)
    return out


def bochner_riesz_multiplier(xi_norm_sq, alpha, allow_negative=False):
    """(1 - |xi|^2)_+^alpha; negative alpha only on request, zero off the open ball."""
    if alpha < 0 and not allow_negative:
        raise DomainError("alpha must be nonnegative")
    base = 1.0 - np.asarray(xi_norm_sq, float)
    inside = base > 0
    out = np.zeros_like(base)
    out[inside] = base[inside] ** alpha
    return out


def frequency_grid(f):
    freqs = [np.fft.fftfreq(m, d=h) for m, h in zip(f.shape, f.spacing)]
    mesh = np.meshgrid(*freqs, indexing="ij")
    return mesh


def apply_bochner_riesz(f, alpha, allow_negative=False):
    """Fourier multiplier (1 - |xi|^2)_+^alpha on the grid's dual lattice."""
    mesh = frequency_grid(f)
    xi2 = sum(m * m for m in mesh)
    mult = bochner_riesz_multiplier(xi2, alpha, allow_negative)
    out = np.fft.ifftn(np.fft.fftn(f.samples) * mult)
    return f.with_samples(out)


def l2_bound_check(pf, g, t_samples, x_half_width=None, samples_per_unit=None):
    """max over t of ||H g(., t)||_2 / ||g||_2 on the spatial slice."""
    return float(l2_bound_batch(pf, [g], t_samples, x_half_width, samples_per_unit)[0])


def l2_bound_batch(pf, gs, t_samples, x_half_width=None, samples_per_unit=None):
    """Per-function max over t of ||H g(., t)||_2 / ||g||_2; all g share one grid.

    The kernel is formed once per slice and applied to every function, so a
    batch costs about as much as a single evaluation.
    """
    G = np.stack([np.asarray(g.samples).ravel() for g in gs], axis=1)
    norms = np.array([g.l2_norm() for g in gs])
    nodes = gs[0].nodes()
    w = gs[0].cell_volume
    d = gs[0].dim
    lam = pf.lam
    half = 3 * pf.c_n * lam if x_half_width is None else x_half_width
    keep = np.any(G != 0, axis=1)
    nodes, G = nodes[keep], G[keep] * w
    best = np.zeros(len(gs))
    for t in np.atleast_1d(t_samples):
        # |grad_x phi| <= lam / t bounds the spatial bandwidth
        per_unit = 4 * lam / abs(t) if samples_per_unit is None else samples_per_unit
        m = max(8, int(math.ceil(2 * half * per_unit)))
        ax = -half + (np.arange(m) + 0.5) * (2 * half / m)
        mesh = np.meshgrid(*([ax] * d), indexing="ij")
        X = np.stack([q.ravel() for q in mesh], axis=-1)
        # |grad_w phi| < lam, so lam * h bounds the phase advance per omega cell
        if lam * float(np.max(gs[0].spacing)) > NYQUIST_CYCLES:
            raise QuadratureResolutionError(f"omega grid too coarse for lam={lam}")

        def work(a, b):
            ph = phase_arr(lam, X[a:b, None, :], np.full((b - a, len(nodes)), float(t)),
                           nodes[None, :, :])
            return np.exp(TWO_PI * 1j * ph) @ G

        vals = np.concatenate(chunked_map(work, len(X), max(1, 2 ** 21 // max(len(nodes), 1))))
        cell = (2 * half / m) ** d
        l2 = np.sqrt(np.sum(np.abs(vals) ** 2, axis=0) * cell)
        with np.errstate(invalid="ignore", divide="ignore"):
            best = np.maximum(best, np.where(norms > 0, l2 / np.where(norms > 0, norms, 1), 0))
    return best

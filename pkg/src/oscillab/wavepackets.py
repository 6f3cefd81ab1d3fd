"""Scale-r wave packet decomposition relative to a ball centre, and tube geometry.

A cap theta has side (9/11) r^(-1/2). Its Fourier-series cell has side r^(-1/2)
(the 11/9 dilate), so the translation lattice is r^(1/2) Z^d. For
F = g e^{2 pi i phi(x0; .)} psi_theta,

    g_T(w) = e^{-2 pi i phi(x0; w)} r^(d/2) F^(v) e^{2 pi i v.w} psitilde_theta(w),

and summing over all v and theta reproduces g exactly; truncating v is the only
approximation.
"""
from dataclasses import dataclass, field, replace
import itertools
import json
import math

import numpy as np

from .errors import QuadratureResolutionError, SeparationError
from .geometry import gauss_map
from .phase_core import (GridFunction, PhaseField, SpaceTimePoint, TWO_PI, eval_H_lambda,
                         grad_omega_arr, phase_arr, smooth_step, plateau)

CAP_FRACTION = 9.0 / 11.0
DEFAULT_EPS_FRAC = 0.045


def cap_side(r):
    return CAP_FRACTION * r ** -0.5


def default_v_radius(r):
    return r ** 0.5 * (4 + math.log2(r))


@dataclass(frozen=True)
class Cap:
    center: tuple
    side: float
    index: tuple

    @property
    def cell(self):
        """Side of the Fourier-series cell around the cap."""
        return self.side * 11.0 / 9.0


def make_caps(r, dim):
    """Caps of side (9/11) r^(-1/2) whose 11/10 dilates meet B(0, 2).

    Including the caps that only touch the ball through their dilate keeps the
    partition of unity exact on all of B(0, 2).
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    s = cap_side(r)
    reach = 2.0 + 0.05 * s
    kmax = int(math.ceil(reach / s)) + 1
    out = []
    for k in itertools.product(range(-kmax, kmax), repeat=dim):
        lo = np.array(k) * s
        hi = lo + s
        nearest = np.clip(0.0, lo, hi)
        if np.linalg.norm(nearest) <= reach:
            out.append(Cap(tuple((lo + hi) / 2), s, tuple(int(v) for v in k)))
    out.sort(key=lambda c: c.index)
    return out


def _step(y):
    # symmetric smooth step on [-1, 1]; S(y) + S(-y) = 1
    return smooth_step((np.asarray(y, float) + 1.0) / 2.0)


@dataclass(frozen=True)
class PartitionOfUnity:
    """Tensor products of mollified cap indicators, summing to one exactly."""

    r: float
    dim: int
    eps_frac: float = DEFAULT_EPS_FRAC

    def __post_init__(self):
        if not 0 < self.eps_frac < 0.05:
            raise ValueError("mollifier radius must stay inside the 11/10 dilate")

    @property
    def side(self):
        return cap_side(self.r)

    @property
    def eps(self):
        return self.eps_frac * self.side

    def psi_1d(self, k, x):
        s, e = self.side, self.eps
        return _step((x - k * s) / e) - _step((x - (k + 1) * s) / e)

    def psi_tilde_1d(self, k, x):
        s, e = self.side, self.eps
        c = (k + 0.5) * s
        half_in = s / 2 + e
        half_out = s * 11.0 / 18.0
        return plateau(x, c - half_in, c + half_in, c - half_out, c + half_out)

    def psi(self, cap, pts):
        pts = np.atleast_2d(np.asarray(pts, float))
        out = np.ones(len(pts))
        for i, k in enumerate(cap.index):
            out = out * self.psi_1d(k, pts[:, i])
        return out

    def psi_tilde(self, cap, pts):
        pts = np.atleast_2d(np.asarray(pts, float))
        out = np.ones(len(pts))
        for i, k in enumerate(cap.index):
            out = out * self.psi_tilde_1d(k, pts[:, i])
        return out


def partition_of_unity(caps, eps_frac=DEFAULT_EPS_FRAC):
    s = caps[0].side
    r = (CAP_FRACTION / s) ** 2
    return PartitionOfUnity(r, len(caps[0].center), eps_frac)


# ---------------------------------------------------------------- packets

@dataclass(frozen=True)
class WavePacket:
    cap: Cap
    v: tuple
    coeff: complex
    scale_r: float
    x0: SpaceTimePoint
    pf: PhaseField
    eps_frac: float = DEFAULT_EPS_FRAC

    @property
    def lattice_ok(self):
        q = np.asarray(self.v) / self.scale_r ** 0.5
        return bool(np.allclose(q, np.round(q), atol=1e-9))


@dataclass
class CapBlock:
    """All packets of one cap: coefficients on a box of lattice translations."""

    cap: Cap
    v_axes: list          # per-axis 1d arrays of lattice values
    coeffs: np.ndarray    # shape (len(v_axes[0]), ...)
    node_slices: list     # per-axis index arrays into the grid axes


@dataclass
class PacketSet:
    r: float
    x0: SpaceTimePoint
    pf: PhaseField
    delta: float
    eps_frac: float
    blocks: list
    grid_lo: tuple = ()
    grid_hi: tuple = ()
    grid_shape: tuple = ()

    def __len__(self):
        return sum(b.coeffs.size for b in self.blocks)

    def __iter__(self):
        for b in self.blocks:
            for idx in itertools.product(*[range(len(a)) for a in b.v_axes]):
                v = tuple(float(b.v_axes[i][j]) for i, j in enumerate(idx))
                yield WavePacket(b.cap, v, complex(b.coeffs[idx]), self.r, self.x0, self.pf,
                                 self.eps_frac)

    def __getitem__(self, i):
        for k, p in enumerate(self):
            if k == i:
                return p
        raise IndexError(i)

    @property
    def pou(self):
        return PartitionOfUnity(self.r, len(self.x0.x), self.eps_frac)

    def grid(self):
        return GridFunction(np.zeros(self.grid_shape, complex), self.grid_lo, self.grid_hi)

    def coefficient_array(self):
        return np.concatenate([b.coeffs.ravel() for b in self.blocks]) if self.blocks \
            else np.zeros(0, complex)

    def with_coefficients(self, flat):
        flat = np.asarray(flat, complex)
        out, pos = [], 0
        for b in self.blocks:
            n = b.coeffs.size
            out.append(CapBlock(b.cap, b.v_axes, flat[pos:pos + n].reshape(b.coeffs.shape),
                                b.node_slices))
            pos += n
        return replace(self, blocks=out)

    def scaled(self, c):
        return self.with_coefficients(self.coefficient_array() * c)

    def to_json(self):
        recs = []
        for p in self:
            tube = tube_of(p, self.delta)
            recs.append({"theta_index": list(p.cap.index), "v": list(p.v),
                         "coeff_re": p.coeff.real, "coeff_im": p.coeff.imag,
                         "empty": bool(tube.empty)})
        return {"r": self.r, "delta": self.delta, "x0": list(self.x0.x) + [self.x0.t],
                "packets": recs}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, indent=1)


def _axis_nodes(lo, hi, m):
    h = (hi - lo) / m
    return lo + (np.arange(m) + 0.5) * h


def _lattice_range(lo, hi, step):
    a = math.ceil(lo / step - 1e-9)
    b = math.floor(hi / step + 1e-9)
    return np.arange(a, b + 1) * step


def _tensor_apply(arr, mats):
    """Contract axis i of arr with mats[i] (shape (out_i, in_i))."""
    out = arr
    for i, M in enumerate(mats):
        out = np.moveaxis(np.tensordot(M, out, axes=([1], [i])), 0, i)
    return out


def _cap_nodes(cap, axes):
    half = cap.cell / 2
    sl = []
    for i, ax in enumerate(axes):
        c = cap.center[i]
        sl.append(np.flatnonzero(np.abs(ax - c) < half))
    return sl


def _x0_phase(pf, x0, pts):
    pts = np.asarray(pts, float)
    return phase_arr(pf.lam, np.broadcast_to(np.asarray(x0.x), pts.shape),
                     np.full(pts.shape[:-1], x0.t), pts)


def _block_points(axes, sl):
    mesh = np.meshgrid(*[axes[i][s] for i, s in enumerate(sl)], indexing="ij")
    return np.stack(mesh, axis=-1)


def decompose(g, r, x0, pf, v_radius=None, delta=0.1, eps_frac=DEFAULT_EPS_FRAC,
              caps=None):
    """Wave packets of g at scale r about the ball centre x0.

    Translations kept per cap: lattice points within v_radius (sup norm) of the
    origin, and within v_radius of the range of grad_w phi(x0; .) over the cap's
    cell (where the modulated function actually lives).
    """
    d = g.dim
    if v_radius is None:
        v_radius = default_v_radius(r)
    if v_radius < 10 * r ** 0.5 - 1e-9:
        raise ValueError("v_radius must be at least 10 r^(1/2)")
    axes = g.axes()
    h = g.spacing
    step = r ** 0.5
    caps = make_caps(r, d) if caps is None else caps
    pou = PartitionOfUnity(r, d, eps_frac)
    samples = g.samples
    nz = np.argwhere(samples != 0)
    blocks = []
    if len(nz):
        lo_nz = np.array([axes[i][nz[:, i].min()] for i in range(d)])
        hi_nz = np.array([axes[i][nz[:, i].max()] for i in range(d)])
    for cap in caps:
        if not len(nz):
            break
        c = np.asarray(cap.center)
        if np.any(c + cap.cell / 2 < lo_nz) or np.any(c - cap.cell / 2 > hi_nz):
            continue
        sl = _cap_nodes(cap, axes)
        if any(len(s) == 0 for s in sl):
            continue
        pts = _block_points(axes, sl)
        block_g = samples[np.ix_(*sl)]
        if not np.any(block_g):
            continue
        psi = np.ones(block_g.shape)
        for i, s in enumerate(sl):
            shp = [1] * d
            shp[i] = len(s)
            psi = psi * pou.psi_1d(cap.index[i], axes[i][s]).reshape(shp)
        ph = _x0_phase(pf, x0, pts)
        F = block_g * np.exp(TWO_PI * 1j * ph) * psi
        if not np.any(F):
            continue
        drift = grad_omega_arr(pf.lam, np.broadcast_to(np.asarray(x0.x), pts.shape),
                               np.full(pts.shape[:-1], x0.t), pts).reshape(-1, d)
        dlo, dhi = drift.min(axis=0), drift.max(axis=0)
        v_axes = []
        for i in range(d):
            a = _lattice_range(dlo[i] - v_radius, dhi[i] + v_radius, step)
            b = _lattice_range(-v_radius, v_radius, step)
            vals = np.union1d(np.round(a / step), np.round(b / step)) * step
            v_axes.append(vals)
            if np.max(np.abs(vals)) * h[i] >= 0.5:
                raise QuadratureResolutionError(
                    f"grid spacing {h[i]:.3g} cannot resolve translations up to "
                    f"{np.max(np.abs(vals)):.3g}")
        mats = [np.exp(-TWO_PI * 1j * np.outer(v_axes[i], axes[i][sl[i]])) for i in range(d)]
        coeffs = _tensor_apply(F, mats) * g.cell_volume
        blocks.append(CapBlock(cap, v_axes, coeffs, sl))
    return PacketSet(float(r), x0, pf, float(delta), eps_frac, blocks,
                     tuple(g.lo), tuple(g.hi), tuple(g.shape))


def _block_values(ps, block, coeffs=None):
    """Samples of sum over the block's packets (or a coefficient override) on its nodes."""
    d = len(ps.grid_shape)
    axes = [_axis_nodes(ps.grid_lo[i], ps.grid_hi[i], ps.grid_shape[i]) for i in range(d)]
    sl = block.node_slices
    pts = _block_points(axes, sl)
    coeffs = block.coeffs if coeffs is None else coeffs
    mats = [np.exp(TWO_PI * 1j * np.outer(axes[i][sl[i]], block.v_axes[i])) for i in range(d)]
    series = _tensor_apply(coeffs, mats)
    pt = np.ones(series.shape)
    pou = ps.pou
    for i, s in enumerate(sl):
        shp = [1] * d
        shp[i] = len(s)
        pt = pt * pou.psi_tilde_1d(block.cap.index[i], axes[i][s]).reshape(shp)
    ph = _x0_phase(ps.pf, ps.x0, pts)
    return ps.r ** (d / 2) * series * pt * np.exp(-TWO_PI * 1j * ph)


def reconstruct(ps, which=None):
    """Sum of g_T over all packets (or over blocks selected by `which`) on the grid."""
    out = np.zeros(ps.grid_shape, complex)
    for k, b in enumerate(ps.blocks):
        if which is not None and not which(k, b):
            continue
        out[np.ix_(*b.node_slices)] += _block_values(ps, b)
    return GridFunction(out, ps.grid_lo, ps.grid_hi)


def packet_function(ps, packet):
    """g_T as a GridFunction on the decomposition grid."""
    for b in ps.blocks:
        if b.cap.index != packet.cap.index:
            continue
        co = np.zeros(b.coeffs.shape, complex)
        idx = tuple(int(np.argmin(np.abs(b.v_axes[i] - packet.v[i])))
                    for i in range(len(packet.v)))
        co[idx] = packet.coeff
        out = np.zeros(ps.grid_shape, complex)
        out[np.ix_(*b.node_slices)] = _block_values(ps, b, co)
        return GridFunction(out, ps.grid_lo, ps.grid_hi)
    raise KeyError("packet cap not present in this decomposition")


def single_packet_set(template_grid, r, x0, pf, cap, v, coeff=1.0, delta=0.1,
                      eps_frac=DEFAULT_EPS_FRAC):
    """A PacketSet holding exactly one packet, laid out on template_grid."""
    axes = template_grid.axes()
    sl = _cap_nodes(cap, axes)
    shape = tuple(1 for _ in v)
    block = CapBlock(cap, [np.array([float(c)]) for c in v],
                     np.full(shape, complex(coeff)), sl)
    return PacketSet(float(r), x0, pf, float(delta), eps_frac, [block],
                     tuple(template_grid.lo), tuple(template_grid.hi),
                     tuple(template_grid.shape))


def packet_set_from(template_grid, r, x0, pf, entries, delta=0.1, eps_frac=DEFAULT_EPS_FRAC):
    """PacketSet built from explicit (cap, v, coeff) entries, grouped by cap."""
    axes = template_grid.axes()
    by_cap = {}
    for cap, v, c in entries:
        by_cap.setdefault(cap, {})[tuple(float(x) for x in v)] = complex(c)
    blocks = []
    for cap in sorted(by_cap, key=lambda c: c.index):
        items = by_cap[cap]
        d = len(next(iter(items)))
        v_axes = [np.unique([v[i] for v in items]) for i in range(d)]
        coeffs = np.zeros([len(a) for a in v_axes], complex)
        for v, c in items.items():
            coeffs[tuple(int(np.searchsorted(v_axes[i], v[i])) for i in range(d))] += c
        blocks.append(CapBlock(cap, v_axes, coeffs, _cap_nodes(cap, axes)))
    return PacketSet(float(r), x0, pf, float(delta), eps_frac, blocks,
                     tuple(template_grid.lo), tuple(template_grid.hi),
                     tuple(template_grid.shape))


def l2_orthogonality_report(ps, g, theta_index=None):
    """(sum_T ||g_T||^2 / ||g||^2, fixed-cap ratio ||sum g_T||^2 / sum ||g_T||^2)."""
    gnorm2 = g.l2_norm() ** 2
    cell = g.cell_volume
    d = g.dim
    total = 0.0
    per_block = []
    axes = g.axes()
    pou = ps.pou
    for b in ps.blocks:
        pt = np.ones([len(s) for s in b.node_slices])
        for i, s in enumerate(b.node_slices):
            shp = [1] * d
            shp[i] = len(s)
            pt = pt * pou.psi_tilde_1d(b.cap.index[i], axes[i][s]).reshape(shp)
        each = ps.r ** d * np.abs(b.coeffs) ** 2 * np.sum(pt ** 2) * cell
        total += float(each.sum())
        per_block.append(float(each.sum()))
    first = total / gnorm2 if gnorm2 > 0 else float("nan")
    if not ps.blocks:
        return first, float("nan")
    if theta_index is None:
        k = int(np.argmax(per_block))
    else:
        k = [b.cap.index for b in ps.blocks].index(tuple(theta_index))
    b = ps.blocks[k]
    vals = _block_values(ps, b)
    summed = float(np.sum(np.abs(vals) ** 2) * cell)
    second = summed / per_block[k] if per_block[k] > 0 else float("nan")
    return first, second


# ---------------------------------------------------------------- tubes

def emptiness_threshold(pf):
    a = 10.0 * pf.c_n
    return a * pf.lam / math.sqrt(1.0 + a * a)


@dataclass(frozen=True)
class Tube:
    cap: Cap
    v: tuple
    x0: SpaceTimePoint
    delta: float
    scale_r: float
    lam: float
    offset: tuple      # grad_w phi(x0; w_theta) - v
    empty: bool

    @property
    def radius(self):
        return self.scale_r ** (0.5 + self.delta)

    @property
    def direction(self):
        return gauss_map(np.asarray(self.cap.center))

    def core_x(self, t):
        a = np.asarray(self.offset)
        lam = self.lam
        shift = lam * a / math.sqrt(lam * lam - float(a @ a))
        return np.multiply.outer(np.asarray(t, float), np.asarray(self.cap.center)) - shift

    @property
    def point(self):
        return np.concatenate([self.core_x(self.x0.t), [self.x0.t]])

    def distance(self, P):
        """Euclidean distance in R^n from points to the core line."""
        P = np.atleast_2d(np.asarray(P, float))
        e = self.direction
        rel = P - self.point
        return np.linalg.norm(rel - (rel @ e)[:, None] * e[None, :], axis=-1)


def tube_of(packet, delta=0.1):
    pf = packet.pf
    w = np.asarray(packet.cap.center, float)
    x0 = packet.x0
    grad0 = grad_omega_arr(pf.lam, np.asarray(x0.x), x0.t, w)
    a = grad0 - np.asarray(packet.v, float)
    empty = float(np.linalg.norm(a)) >= emptiness_threshold(pf)
    return Tube(packet.cap, tuple(packet.v), x0, float(delta), packet.scale_r, pf.lam,
                tuple(float(c) for c in a), bool(empty))


def core_residual(tube, t_values, pf):
    """|grad_w phi(x(t), t; w) - grad_w phi(x0; w) + v| along the core."""
    w = np.asarray(tube.cap.center)
    xs = tube.core_x(np.asarray(t_values, float))
    g = grad_omega_arr(pf.lam, xs, np.asarray(t_values, float), w)
    g0 = grad_omega_arr(pf.lam, np.asarray(tube.x0.x), tube.x0.t, w)
    return np.linalg.norm(g - g0 + np.asarray(tube.v), axis=-1)


def ball_samples(center, radius, per_axis):
    c = np.asarray(center, float)
    n = len(c)
    ax = np.linspace(-radius, radius, per_axis)
    mesh = np.meshgrid(*([ax] * n), indexing="ij")
    P = np.stack([m.ravel() for m in mesh], axis=-1)
    P = P[np.linalg.norm(P, axis=-1) <= radius] + c
    return P


def essential_support_ratio(ps, packet, tube, ball, per_axis=96, core_samples=64):
    """max |H g_T| outside the doubled tube / max inside the tube, both within the ball.

    The packet is normalized to coefficient 1 first.
    """
    center, radius = ball
    unit = replace(packet, coeff=1.0 + 0j)
    gT = packet_function(ps, unit)
    P = ball_samples(center, radius, per_axis)
    dist = tube.distance(P)
    core = _core_in_ball(tube, center, radius, core_samples)
    inside = np.concatenate([P[dist <= tube.radius], core])
    outside = P[dist >= 2 * tube.radius]
    if len(inside) == 0:
        raise ValueError("tube misses the ball")
    vin = np.abs(eval_H_lambda(ps.pf, gT, inside))
    vout = np.abs(eval_H_lambda(ps.pf, gT, outside)) if len(outside) else np.zeros(1)
    return float(vout.max() / vin.max())


def point_ratio(ps, packet, tube, distance):
    """|H g_T| at a point `distance` off the core (through x0's time) over the core value."""
    unit = replace(packet, coeff=1.0 + 0j)
    gT = packet_function(ps, unit)
    on = tube.point
    e = tube.direction
    normal = np.zeros_like(e)
    normal[0] = e[-1]
    normal[-1] = -e[0]
    normal /= np.linalg.norm(normal)
    off = on + distance * normal
    vals = np.abs(eval_H_lambda(ps.pf, gT, np.stack([on, off])))
    return float(vals[1] / vals[0])


def packet_sup(ps, packet, ball, per_axis=64):
    gT = packet_function(ps, packet)
    P = ball_samples(ball[0], ball[1], per_axis)
    return float(np.abs(eval_H_lambda(ps.pf, gT, P)).max()), gT.l2_norm()


def _core_in_ball(tube, center, radius, count):
    from .geometry import _core_points
    return _core_points(tube, center, radius, count)


# ---------------------------------------------------------------- two scales

@dataclass
class TwoScaleLink:
    big: WavePacket
    small: PacketSet
    children: list        # indices into the flat packet order of `small`
    angle_threshold: float
    shift_threshold: float


def predicted_shift(pf, big, small_center):
    w = np.asarray(big.cap.center, float)
    g1 = grad_omega_arr(pf.lam, np.asarray(small_center.x), small_center.t, w)
    g0 = grad_omega_arr(pf.lam, np.asarray(big.x0.x), big.x0.t, w)
    return g1 - g0 + np.asarray(big.v)


def two_scale_children(ps_big, big, small_center, rho, delta=0.1, c_angle=4.0, c_shift=8.0,
                       v_radius=None):
    """Decompose g_T at scale rho about small_center and select the linked children."""
    if not ps_big.r ** 0.5 - 1e-9 <= rho <= ps_big.r + 1e-9:
        raise ValueError("need r^(1/2) <= rho <= r")
    pf = ps_big.pf
    gT = packet_function(ps_big, big)
    small = decompose(gT, rho, small_center, pf, v_radius=v_radius, delta=delta,
                      eps_frac=ps_big.eps_frac)
    target = predicted_shift(pf, big, small_center)
    ang = c_angle * rho ** -0.5
    shift = c_shift * ps_big.r ** ((1 + delta) / 2)
    kids = []
    for i, p in enumerate(small):
        if np.linalg.norm(np.subtract(p.cap.center, big.cap.center)) > ang:
            continue
        if np.linalg.norm(np.asarray(p.v) - target) > shift:
            continue
        kids.append(i)
    return TwoScaleLink(big, small, kids, ang, shift)


def capture_fraction(ps_big, link):
    """1 - ||g_T - sum over children||^2 / ||g_T||^2."""
    gT = packet_function(ps_big, link.big)
    flat = link.small.coefficient_array()
    mask = np.zeros(len(flat), bool)
    mask[link.children] = True
    kept = reconstruct(link.small.with_coefficients(np.where(mask, flat, 0)))
    resid = gT.samples - kept.samples
    n2 = np.sum(np.abs(gT.samples) ** 2)
    return float(1 - np.sum(np.abs(resid) ** 2) / n2)


def child_geometry(link, small_center, rho, big_tube, significant=None):
    """(max Hausdorff distance of child cores to the parent core inside B(small_center, rho),
    max cap distance) over children; `significant` restricts to given child indices."""
    from .geometry import _core_points
    pkts = list(link.small)
    idx = link.children if significant is None else significant
    hmax, amax = 0.0, 0.0
    c = np.concatenate([np.asarray(small_center.x), [small_center.t]])
    for i in idx:
        p = pkts[i]
        tb = tube_of(p, link.small.delta)
        if tb.empty:
            continue
        core = _core_points(tb, c, rho, 17)
        if len(core) == 0:
            continue
        hmax = max(hmax, float(big_tube.distance(core).max()))
        amax = max(amax, float(np.linalg.norm(np.subtract(p.cap.center, link.big.cap.center))))
    return hmax, amax


# ---------------------------------------------------------------- discrete sums

def discrete_extension_sum(pf, D, F, points, r2):
    """Sum over w in D of F(w) exp(2 pi i phi(x; w)); D must be 1/r2 separated."""
    D = np.atleast_2d(np.asarray(D, float))
    F = np.asarray(F, complex)
    if len(D) > 1:
        diff = D[:, None, :] - D[None, :, :]
        dist = np.where(np.eye(len(D), dtype=bool), np.inf, np.linalg.norm(diff, axis=-1))
        if dist.min() < 1.0 / r2 * (1 - 1e-12):
            raise SeparationError(f"points closer than 1/{r2}")
    P = np.atleast_2d(np.asarray(points, float))
    X, T = P[:, :-1], P[:, -1]
    ph = phase_arr(pf.lam, X[:, None, :], np.broadcast_to(T[:, None], (len(P), len(D))),
                   D[None, :, :])
    return np.exp(TWO_PI * 1j * ph) @ F

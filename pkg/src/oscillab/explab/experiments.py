"""Scripted desk-scale experiments. Each returns a list of ReportRow."""
from dataclasses import replace
import math
import time

import numpy as np

from .. import broadnorm as bn
from .. import geometry as geo
from .. import partitioning as part
from .. import phase_core as pc
from .. import wavepackets as wp
from ..errors import DegenerateConfigurationError, QuadratureResolutionError
from .report import ReportRow
from .rng import stream


class _Rows:
    """Collects rows and stamps each with the time since the previous one."""

    def __init__(self, experiment):
        self.experiment = experiment
        self.rows = []
        self._t = time.perf_counter()

    def add(self, check, params, measured, reference, comparison="le", tolerance=0.0):
        now = time.perf_counter()
        self.rows.append(ReportRow.make(self.experiment, check, params, measured, reference,
                                        comparison, tolerance, now - self._t))
        self._t = now


def _bump(s):
    s = np.asarray(s, float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(1 - 1 / (1 - s[inside] ** 2))
    return out


# ---------------------------------------------------------------- exponents

def exponent_records(n_max):
    recs = []
    for n in range(3, n_max + 1):
        for k in range(2, n):
            pc_ = bn.p_critical(n, k)
            lo, hi = bn.bound_range(n, k)
            recs.append({"n": n, "k": k, "p_critical": str(pc_),
                         "p_critical_float": float(pc_), "range_low": float(lo),
                         "range_high": float(hi)})
    return recs


def run_exponents(cfg):
    out = _Rows("exponents")
    v = bn.p_critical(3, 2)
    out.add("p_critical_3_2", {"n": 3, "k": 2}, float(v), 3.25, "eq")
    out.add("p_critical_3_2_exact", {"n": 3, "k": 2}, float(v == bn.Fraction(13, 4)), 1.0, "eq")
    n_max = int(cfg.extra.get("n_max", 20))
    bad = 0
    for n in range(3, n_max + 1):
        vals = [bn.p_critical(n, k) for k in range(2, n)]
        bad += sum(1 for a, b in zip(vals, vals[1:]) if not b < a)
    out.add("p_critical_monotone_violations", {"n_max": n_max}, bad, 0, "eq")
    lo, hi = bn.bound_range(4, 3)
    out.add("bound_range_4_3_low", {"n": 4, "k": 3}, float(lo), 2.8, "eq")
    out.add("bound_range_4_3_exact", {"n": 4, "k": 3},
            float(lo == bn.Fraction(14, 5) and hi == 4), 1.0, "eq")
    out.add("p_critical_n_k", {"n": cfg.n, "k": cfg.k}, float(bn.p_critical(cfg.n, cfg.k)),
            0.0, "info")
    return out.rows


# ---------------------------------------------------------------- phase identities

def _numeric_mixed_hessian(lam, x, t, omega):
    cols = geo._complex_step_columns(lam, x, t, omega)
    return cols[:-1, :]


def _numeric_phi_jacobian(lam, t0, omega, x, h=1e-20):
    d = len(x)
    J = np.empty((d, d))
    for j in range(d):
        xc = np.asarray(x, complex)
        xc[j] += 1j * h
        u = xc - t0 * np.asarray(omega, float)
        s = np.sqrt(lam * lam + np.sum(u * u))
        J[:, j] = np.imag(lam * u / s) / h
    return J


def run_phase_checks(cfg):
    out = _Rows("phase")
    lam, c_n = cfg.lam, cfg.c_n
    pf = pc.PhaseField(lam, c_n)
    N = cfg.samples
    # Gauss map: numeric wedge against the closed form
    worst = 0.0
    for n in (2, 3):
        rng = stream(cfg.seed, "phase.gauss", n)
        d = n - 1
        for _ in range(N):
            x = rng.uniform(-2 * lam, 2 * lam, d)
            t = rng.uniform(lam / c_n, c_n * lam)
            w = rng.uniform(0, 1, d)
            a = geo.gauss_map_numeric(pf, x, t, w)
            b = geo.gauss_map(w)
            worst = max(worst, 2 * math.asin(min(1.0, np.linalg.norm(a - b) / 2)))
    out.add("gauss_map_angle_error", {"samples": 2 * N, "lam": lam}, worst, 1e-6, "le")
    # mixed-Hessian determinant
    worst = 0.0
    rng = stream(cfg.seed, "phase.det", 0)
    d = cfg.n - 1
    for _ in range(N):
        x = rng.uniform(-2 * lam, 2 * lam, d)
        t = rng.uniform(lam / c_n, c_n * lam)
        w = rng.uniform(0, 1, d)
        num = abs(np.linalg.det(_numeric_mixed_hessian(lam, x, t, w)))
        closed = float(pc.mixed_hessian_det_arr(lam, x, t, w))
        worst = max(worst, abs(num - closed) / closed)
    out.add("mixed_hessian_det_rel_error", {"samples": N, "n": cfg.n}, worst, 1e-8, "le")
    w = rng.uniform(0, 1, d)
    t = rng.uniform(lam / c_n, c_n * lam)
    at_stationary = float(pc.mixed_hessian_det_arr(lam, t * w, t, w))
    out.add("mixed_hessian_det_at_x_eq_tw", {"n": cfg.n}, at_stationary, 1.0, "eq")
    # Phi-map Jacobian spectra on the operator's spatial domain
    rng = stream(cfg.seed, "phase.phi", 0)
    sym, c_all, c_near, mismatch = 0.0, 1.0, 1.0, 0.0
    for _ in range(N):
        t0 = rng.uniform(lam / c_n, c_n * lam)
        w = rng.uniform(0, 1, d)
        direction = rng.normal(size=d)
        direction /= np.linalg.norm(direction)
        x = direction * 3 * c_n * lam * rng.uniform(0, 1) ** (1 / d)
        J = _numeric_phi_jacobian(lam, t0, w, x)
        Jc = geo.phi_jacobian(pf, t0, w, x)
        sym = max(sym, float(np.max(np.abs(J - J.T))))
        mismatch = max(mismatch, float(np.max(np.abs(J - Jc))))
        ev = np.linalg.eigvalsh(0.5 * (J + J.T))
        c = max(ev.max(), 1 / ev.min())
        c_all = max(c_all, c)
        if np.linalg.norm(x - t0 * w) <= math.sqrt(3) * lam:
            c_near = max(c_near, c)
    out.add("phi_jacobian_asymmetry", {"samples": N}, sym, 1e-12, "le")
    out.add("phi_jacobian_closed_form_error", {"samples": N}, mismatch, 1e-10, "le")
    out.add("phi_jacobian_spectral_constant", {"samples": N, "c_n": c_n}, c_all, 8.0, "le")
    out.add("phi_jacobian_spectral_constant_near", {"samples": N, "u_max": "sqrt3*lam"},
            c_near, 8.0, "le")
    # L^2 boundedness proxy
    nf = int(cfg.extra.get("l2_functions", 20))
    ns = int(cfg.extra.get("l2_slices", 8))
    pf2 = pc.PhaseField(lam, c_n)
    m = int(cfg.extra.get("l2_omega_nodes", 512))
    gs = []
    for i in range(nf):
        r2 = stream(cfg.seed, "phase.l2", i)
        coeffs = r2.normal(size=9) + 1j * r2.normal(size=9)
        ks = np.arange(-4, 5)
        center = r2.uniform(0.35, 0.65)

        def fn(p, coeffs=coeffs, center=center):
            w_ = p[:, 0]
            return _bump((w_ - center) / 0.3) * (np.exp(2j * np.pi * np.outer(w_, ks)) @ coeffs)

        gs.append(pc.GridFunction.from_callable(fn, (m,)))
    ts = np.linspace(lam / 2, 2 * lam, ns)
    ratios = pc.l2_bound_batch(pf2, gs, ts)
    out.add("l2_bound_max_ratio", {"functions": nf, "slices": ns, "lam": lam},
            float(ratios.max()), 10.0, "le")
    return out.rows


# ---------------------------------------------------------------- Knapp

def knapp_ratio(n, alpha, p, delta, grid, box, zero=False):
    g = pc.GridFunction.zeros((grid,) * n, (-box / 2,) * n, (box / 2,) * n)
    if delta * box < 4:
        raise QuadratureResolutionError(
            f"cap thickness {delta} spans {delta * box:.2f} frequency cells (< 4)")
    if (1 + delta) >= grid / (2 * box):
        raise QuadratureResolutionError("frequency grid does not reach the unit sphere")
    mesh = pc.frequency_grid(g)
    a = (mesh[0] - 1) / delta
    prof = _bump(a)
    for m in mesh[1:]:
        prof = prof * _bump(m / math.sqrt(delta))
    if zero:
        prof = np.zeros_like(prof)
    f = g.with_samples(np.fft.ifftn(prof))
    mf = pc.apply_bochner_riesz(f, alpha, allow_negative=True)
    den = np.sum(np.abs(f.samples) ** p) ** (1 / p)
    if den == 0:
        return float("nan")
    return float(np.sum(np.abs(mf.samples) ** p) ** (1 / p) / den)


def run_knapp(cfg):
    out = _Rows("knapp")
    n, p = cfg.n, cfg.p
    crit = n * (0.5 - 1 / p) - 0.5
    box = float(cfg.extra.get("box", 256.0))
    if cfg.extra.get("zero_input"):
        v = knapp_ratio(n, crit, p, cfg.scales[0], cfg.grid, box, zero=True)
        out.add("degenerate_zero_input", {"n": n}, v, float("nan"), "info")
        return out.rows
    for off in cfg.extra.get("offsets", [-0.2, 0.3]):
        alpha = crit + off
        ratios = []
        for delta in cfg.scales:
            r = knapp_ratio(n, alpha, p, delta, cfg.grid, box)
            ratios.append(r)
            out.add("ratio", {"alpha": alpha, "delta": delta, "p": p, "n": n}, r, 0.0, "info")
        diffs = np.diff(ratios)
        if off < 0:
            out.add("increasing_below_critical", {"alpha": alpha, "critical": crit},
                    float(diffs.min()), 0.0, "gt")
        else:
            out.add("nonincreasing_above_critical", {"alpha": alpha, "critical": crit},
                    float(diffs.max()), 0.0, "le")
    return out.rows


# ---------------------------------------------------------------- wave packets

def _suite_setup(cfg):
    lam, r = cfg.lam, cfg.r
    pf = pc.PhaseField(lam, cfg.c_n)
    frac = float(cfg.extra.get("x0_frac", 0.3))
    x0 = pc.SpaceTimePoint((frac * lam,) * (cfg.n - 1), lam)
    return pf, x0, frac


def _test_function(cfg, shape):
    rng = stream(cfg.seed, "wavepackets.g", 0)
    coeffs = rng.normal(size=5) + 1j * rng.normal(size=5)
    ks = np.arange(1, 6)

    def fn(p):
        val = np.ones(len(p), complex)
        for i in range(p.shape[1]):
            val = val * _bump((p[:, i] - 0.5) / 0.3)
        return val * (np.exp(2j * np.pi * np.outer(p[:, 0], ks)) @ coeffs)

    return pc.GridFunction.from_callable(fn, shape)


def _nearest_cap(caps, frac):
    return min(caps, key=lambda c: np.linalg.norm(np.asarray(c.center) - frac))


def run_wavepacket_suite(cfg):
    out = _Rows("wavepackets")
    if cfg.n != 2:
        raise ValueError("the packet suite runs in n = 2 (one frequency variable)")
    pf, x0, frac = _suite_setup(cfg)
    lam, r, rho, delta = cfg.lam, cfg.r, cfg.rho, cfg.delta
    v_radius = float(cfg.extra.get("v_radius", wp.default_v_radius(r)))
    g = _test_function(cfg, (cfg.grid,))
    ps = wp.decompose(g, r, x0, pf, v_radius=v_radius, delta=delta)
    base = {"lam": lam, "r": r, "delta": delta, "v_radius": v_radius}
    if cfg.extra.get("corrupt"):
        flat = ps.coefficient_array().copy()
        flat[: len(flat) // 2] *= -1
        ps = ps.with_coefficients(flat)
    rec = wp.reconstruct(ps)
    err = np.linalg.norm(rec.samples - g.samples) / np.linalg.norm(g.samples)
    out.add("reconstruction_rel_error", dict(base, packets=len(ps)), err, 1e-3, "le")
    first, second = wp.l2_orthogonality_report(ps, g)
    out.add("packet_energy_ratio_low", base, first, 0.25, "ge")
    out.add("packet_energy_ratio_high", base, first, 4.0, "le")
    out.add("fixed_cap_energy_ratio", base, second, 0.0, "info")

    # pairwise orthogonality: caps two or more apart have disjoint supports
    blocks = ps.blocks
    worst = 0.0
    rng = stream(cfg.seed, "wavepackets.pairs", 0)
    pk = list(ps)
    for _ in range(200):
        i, j = rng.integers(0, len(pk), 2)
        if abs(pk[i].cap.index[0] - pk[j].cap.index[0]) < 2:
            continue
        a = wp.packet_function(ps, pk[i]).samples
        b = wp.packet_function(ps, pk[j]).samples
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na > 0 and nb > 0:
            worst = max(worst, abs(np.vdot(a, b)) / (na * nb))
    out.add("nonadjacent_cap_inner_product", base, worst, 0.0, "eq", 1e-12)

    # essential support of a packet through the ball centre
    caps = wp.make_caps(r, 1)
    cap = _nearest_cap(caps, frac)
    step = r ** 0.5
    v = (0.0,)          # a = grad_w phi(x0; w_theta): the core passes through x0
    grid = pc.GridFunction.zeros((cfg.grid,))
    single = wp.single_packet_set(grid, r, x0, pf, cap, v, delta=delta)
    packet = list(single)[0]
    tube = wp.tube_of(packet, delta)
    center = np.concatenate([np.asarray(x0.x), [x0.t]])
    per_axis = int(cfg.extra.get("ball_per_axis", 128))
    ess = wp.essential_support_ratio(single, packet, tube, (center, r), per_axis=per_axis)
    out.add("essential_support_ratio", dict(base, per_axis=per_axis), ess, 0.05, "le")
    far = wp.point_ratio(single, packet, tube, 10 * r ** (0.5 + delta))
    out.add("offcore_point_ratio_10_radii", base, far, 0.05, "le")

    # empty tubes: translations pushing |a| past the threshold
    thr = wp.emptiness_threshold(pf)
    worst = 0.0
    count = 0
    for k, c in enumerate(caps):
        if k % max(1, len(caps) // 4):
            continue
        w = np.asarray(c.center)
        gg = pc.grad_omega_arr(lam, np.asarray(x0.x), x0.t, w)
        for sgn in (1.0, -1.0):
            vv = gg + sgn * 1.05 * lam
            vv = tuple(float(np.round(q / step) * step) for q in vv)
            sp = wp.single_packet_set(grid, r, x0, pf, c, vv, delta=delta)
            pk1 = list(sp)[0]
            if not wp.tube_of(pk1, delta).empty:
                continue
            sup, norm = wp.packet_sup(sp, pk1, (center, r), per_axis=64)
            if norm > 0:
                worst = max(worst, sup / norm)
                count += 1
    out.add("empty_packet_sup_over_norm", dict(base, packets=count, threshold=thr),
            worst, 0.05, "le")

    # two scales: a parent off the ball centre, children about a shifted centre
    parent_v = (v[0] + step,)
    parent_set = wp.single_packet_set(grid, r, x0, pf, cap, parent_v, coeff=0.7 + 0.2j,
                                      delta=delta)
    parent = list(parent_set)[0]
    ptube = wp.tube_of(parent, delta)
    shift = cfg.extra.get("small_shift", [60.0, 100.0])
    small_center = pc.SpaceTimePoint((x0.x[0] + shift[0],), x0.t + shift[1])
    link = wp.two_scale_children(parent_set, parent, small_center, rho, delta,
                                 v_radius=v_radius)
    cap_frac = wp.capture_fraction(parent_set, link)
    haus, ang = wp.child_geometry(link, small_center, rho, ptube)
    tparams = dict(base, rho=rho, children=len(link.children))
    out.add("two_scale_capture", tparams, cap_frac, 0.99, "ge")
    out.add("two_scale_hausdorff", tparams, haus, 16 * r ** (0.5 + delta), "le")
    out.add("two_scale_cap_distance", tparams, ang, 16 * rho ** -0.5, "le")
    return out.rows


# ---------------------------------------------------------------- transverse equidistribution

def _line_variety(point, direction):
    e = np.asarray(direction, float)
    normal = np.array([e[1], -e[0]])
    return geo.Variety.hyperplane(normal, point)


def transverse_ratio(cfg, r, rho, Z, trial, empty_w=False):
    """(ratio, #big tangent packets, #small tangent packets) for one random h."""
    pf, x0, frac = _suite_setup(cfg)
    lam, delta, dm = cfg.lam, cfg.delta, cfg.delta_m
    grid = pc.GridFunction.zeros((cfg.grid,))
    caps = wp.make_caps(r, 1)
    cap_z = _nearest_cap(caps, frac)
    center = np.concatenate([np.asarray(x0.x), [x0.t]])
    grain = geo.Grain(Z, tuple(center), r)
    rng = stream(cfg.seed, f"transequi.{int(r)}.{int(rho)}", trial)
    # one (cap-block, w) family: caps within rho^(-1/2) of cap_z, |v - w| <= kmax r^(1/2),
    # w = 0 so every tube passes near x0
    step = r ** 0.5
    kmax = int(cfg.extra.get("kmax", 1))
    entries = []
    for cap in caps:
        if abs(cap.center[0] - cap_z.center[0]) > rho ** -0.5:
            continue
        for k in range(-kmax, kmax + 1):
            v = (k * step,)
            probe = list(wp.single_packet_set(grid, r, x0, pf, cap, v, delta=delta))[0]
            if geo.tangency_check(wp.tube_of(probe, delta), grain, dm):
                entries.append((cap, v, rng.normal() + 1j * rng.normal()))
    if not entries:
        raise DegenerateConfigurationError("no scale-r packets are tangent to Z in the ball")
    h = wp.reconstruct(wp.packet_set_from(grid, r, x0, pf, entries, delta))
    small = wp.decompose(h, rho, x0, pf, v_radius=float(cfg.extra.get("v_radius", 1024.0)),
                         delta=delta)
    sgrain = geo.Grain(Z, tuple(center), rho)
    pk = list(small)
    mask = np.zeros(len(pk), bool)
    if not empty_w:
        for i, p in enumerate(pk):
            if abs(p.cap.center[0] - cap_z.center[0]) > 2 * rho ** (-0.5 + dm):
                continue
            mask[i] = geo.tangency_check(wp.tube_of(p, delta), sgrain, dm)
    flat = small.coefficient_array()
    hw = wp.reconstruct(small.with_coefficients(np.where(mask, flat, 0)))
    return hw.l2_norm() ** 2 / h.l2_norm() ** 2, len(entries), int(mask.sum())


def run_transverse_equidistribution(cfg, Z=None):
    out = _Rows("transequi")
    if cfg.n != 2:
        raise ValueError("the equidistribution experiment runs in n = 2")
    pf, x0, frac = _suite_setup(cfg)
    center = np.concatenate([np.asarray(x0.x), [x0.t]])
    kind = cfg.extra.get("z", "hyperplane")
    if Z is None:
        caps = wp.make_caps(cfg.pairs[0][0] if cfg.pairs else cfg.r, 1)
        e = geo.gauss_map(np.asarray(_nearest_cap(caps, frac).center))
        if kind == "whole":
            Z = geo.Variety.whole_space(2)
        elif kind == "sphere":
            radius = float(cfg.extra.get("sphere_radius", 8 * cfg.lam))
            normal = np.array([e[1], -e[0]])
            Z = geo.Variety((geo.Polynomial.sphere(center + radius * normal, radius),), 2)
        else:
            Z = _line_variety(center, e)
    m = Z.dim
    bound = -(cfg.n - m) / 2
    pairs = cfg.pairs or ((cfg.r, cfg.rho),)
    means = []
    for r, rho in pairs:
        cfg.check_scales(r, rho)
        vals = [transverse_ratio(cfg, r, rho, Z, i, bool(cfg.extra.get("empty_w")))
                for i in range(cfg.samples)]
        mean = float(np.mean([v[0] for v in vals]))
        means.append((r / rho, mean))
        out.add("mass_ratio", {"r": r, "rho": rho, "trials": cfg.samples,
                               "big_packets": vals[0][1], "small_packets": vals[0][2], "z": kind},
                mean, 0.0, "info")
    if len(means) >= 2 and all(mv > 0 for _, mv in means):
        xs = np.log([q for q, _ in means])
        ys = np.log([mv for _, mv in means])
        slope = float(np.polyfit(xs, ys, 1)[0])
        out.add("fitted_exponent", {"pairs": [list(p) for p in pairs], "m": m}, slope,
                bound + 0.25, "le")
    return out.rows


# ---------------------------------------------------------------- parabolic rescaling

def rescaled_evaluation(lam, K, w, g_tau, g_tilde, points):
    """(original, rescaled) values of H g_tau at the points."""
    pf = pc.PhaseField(lam)
    d = len(w)
    orig = pc.eval_H_lambda(pf, g_tau, points)
    P = np.asarray(points, float)
    X, T = P[:, :-1], P[:, -1]
    mapped = np.concatenate([(X - T[:, None] * np.asarray(w)) / K, (T / K ** 2)[:, None]],
                            axis=1)
    resc = K ** (-d) * pc.eval_H_lambda(pc.PhaseField(lam / K), g_tilde, mapped)
    return orig, resc, mapped


def domain_boxes(lam, R, K, c_n):
    """(closed-form image box, target box) as (lo, hi) pairs over (x..., t)."""
    lad = pc.scale_ladder(K, R, lam, c_n).value
    lam_p, r2 = lam / K, R / K ** 2
    tgt = pc.scale_ladder(K, r2, lam_p, c_n).value
    img = (lad / K + c_n * R / K, R / (K ** 2 * c_n), lam * c_n / K ** 2)
    box = (tgt, r2 / c_n, lam_p * c_n)
    return img, box


def run_parabolic_rescale(cfg):
    out = _Rows("rescale")
    lam, K, c_n = cfg.lam, cfg.K, cfg.c_n
    d = cfg.n - 1
    w = np.asarray((cfg.extra.get("w", [0.25]) * d)[:d], float)
    if np.any(w < 0) or np.any(w + 1 / K > 1 + 1e-12):
        raise ValueError("the cap must sit inside [0,1]^(n-1)")
    rng = stream(cfg.seed, "rescale.g", 0)
    coeffs = rng.normal(size=4) + 1j * rng.normal(size=4)

    def g(omega):
        s = (omega - (w + 0.5 / K)) * 2 * K / 0.9
        val = np.prod(_bump(s), axis=-1)
        return val * (np.exp(2j * np.pi * np.outer(omega[:, 0] * K, np.arange(4))) @ coeffs)

    n1 = cfg.grid
    n2 = n1 if K == 1 else int(round(1.5 * n1)) // 2 * 2 + 1
    g_tau = pc.GridFunction.from_callable(g, (n1,) * d, tuple(w), tuple(w + 1 / K))
    g_til = pc.GridFunction.from_callable(lambda e: g(w + e / K), (n2,) * d)
    R = float(cfg.extra.get("R", lam ** (1 - cfg.eps)))
    pts_rng = stream(cfg.seed, "rescale.points", 0)
    # points near the stationary set x = t w* (w* in the cap), where H g_tau is not negligible
    T = pts_rng.uniform(R / c_n, c_n * lam, cfg.samples)
    w_star = w + pts_rng.uniform(0.2, 0.8, (cfg.samples, d)) / K
    X = T[:, None] * w_star + pts_rng.uniform(-1, 1, (cfg.samples, d)) * R ** 0.5
    pts = np.concatenate([X, T[:, None]], axis=1)
    orig, resc, _ = rescaled_evaluation(lam, K, w, g_tau, g_til, pts)
    rel = np.abs(orig - resc) / np.maximum(np.abs(orig), 1e-300)
    out.add("max_relative_deviation", {"lam": lam, "K": K, "points": cfg.samples,
                                        "n1": n1, "n2": n2}, float(rel.max()), 1e-4, "le")
    out.add("min_abs_value", {"points": cfg.samples}, float(np.abs(orig).min()), 0.0, "info")
    if K < 2:
        return out.rows
    corners = int(cfg.extra.get("corners", 1000))
    c_rng = stream(cfg.seed, "rescale.corners", 0)
    bad = 0
    tested = 0
    while tested < corners:
        lam_s = float(2 ** c_rng.uniform(6, 14))
        K_s = float(c_rng.choice([2, 4, 8]))
        hi_r = lam_s ** (1 - cfg.eps)
        if hi_r < K_s ** 2:
            continue
        R_s = float(np.exp(c_rng.uniform(math.log(K_s ** 2), math.log(hi_r))))
        (xr, t_lo, t_hi), (bx, b_lo, b_hi) = domain_boxes(lam_s, R_s, K_s, c_n)
        for sx in (-1, 1):
            for tt in (t_lo, t_hi):
                ok = abs(sx * xr) <= bx * (1 + 1e-12) and b_lo * (1 - 1e-12) <= tt <= b_hi * (1 + 1e-12)
                bad += not ok
                tested += 1
    out.add("domain_inclusion_violations", {"corners": tested}, bad, 0, "eq")
    # the literal image of balls under (x, t) -> ((x - t w)/K, t/K^2), for comparison
    inside = 0
    total = 0
    for _ in range(200):
        lam_s = lam
        R_s = R
        lad = pc.scale_ladder(K, R_s, lam_s, c_n).value
        xc = c_rng.uniform(-lad + R_s, lad - R_s)
        tc = c_rng.uniform(R_s / c_n + R_s, c_n * lam_s - R_s)
        (_, _, _), (bx, b_lo, b_hi) = domain_boxes(lam_s, R_s, K, c_n)
        for sx in (-1, 1):
            for st in (-1, 1):
                x_, t_ = xc + sx * R_s, tc + st * R_s
                xm = (x_ - t_ * w[0]) / K
                tm = t_ / K ** 2
                inside += abs(xm) <= bx and b_lo <= tm <= b_hi
                total += 1
    out.add("literal_ball_image_inclusion_fraction", {"balls": 200, "R": R}, inside / total,
            1.0, "info")
    return out.rows


# ---------------------------------------------------------------- decoupling scan

def _surface(lam, x0, t0, omega):
    return geo._grad_xt(lam, x0, t0, omega)


def second_fundamental(lam, x0, t0, omega0, h=1e-4):
    """Hessian in omega of <grad_(x,t) phi(x0; omega), (omega0, 1)> at omega0 (central FD)."""
    omega0 = np.asarray(omega0, float)
    d = len(omega0)
    N = np.concatenate([omega0, [1.0]])
    f = lambda w: float(_surface(lam, x0, t0, w) @ N)
    H = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            ei = np.eye(d)[i] * h
            ej = np.eye(d)[j] * h
            H[i, j] = (f(omega0 + ei + ej) - f(omega0 + ei - ej) - f(omega0 - ei + ej)
                       + f(omega0 - ei - ej)) / (4 * h * h)
    return H


def decoupling_ratio(lam, K, p, x0, t0, coeffs, per_axis, m):
    """||sum F_tau||_p / (K^((m-1)(1/2-1/p)) (sum ||F_tau||_p^p)^(1/p)) on a K^2-ball grid."""
    d = len(x0)
    n = d + 1
    caps = [np.array(c) / K for c in np.ndindex(*([int(K)] * d))]
    q = 24
    loc = (np.arange(q) + 0.5) / q / K
    mesh = np.stack(np.meshgrid(*([loc] * d), indexing="ij"), -1).reshape(-1, d)
    weight = np.prod(_bump((mesh * K - 0.5) * 2 / 0.95), axis=-1) / (q * K) ** d
    ax = np.linspace(-K ** 2, K ** 2, per_axis)
    grid = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), -1).reshape(-1, n)
    grid = grid[np.linalg.norm(grid, axis=-1) <= K ** 2]
    fs = []
    for c, a in zip(caps, coeffs):
        if a == 0:
            continue
        om = c + mesh
        S = _surface(lam, np.asarray(x0), t0, om)          # (q^d, n)
        fs.append(np.exp(2j * np.pi * grid @ S.T) @ (weight * a))
    total = np.sum(fs, axis=0)
    num = np.sum(np.abs(total) ** p) ** (1 / p)
    den = sum(np.sum(np.abs(F) ** p) for F in fs) ** (1 / p)
    return float(num / (K ** ((m - 1) * (0.5 - 1 / p)) * den))


def run_decoupling_scan(cfg):
    out = _Rows("decouple")
    lam, n = cfg.lam, cfg.n
    d = n - 1
    H0 = second_fundamental(lam, np.zeros(d), lam, np.zeros(d))
    out.add("hessian_identity_deviation", {"lam": lam}, float(np.max(np.abs(H0 - np.eye(d)))),
            1e-6, "le")
    rng = stream(cfg.seed, "decouple.curv", 0)
    worst = math.inf
    for _ in range(cfg.samples):
        x0 = rng.uniform(-lam, lam, d)
        t0 = rng.uniform(lam / 2, 2 * lam)
        om = rng.uniform(0, 1, d)
        H = second_fundamental(lam, x0, t0, om)
        ev = np.linalg.eigvalsh(0.5 * (H + H.T))
        worst = min(worst, float(ev.min()))
    out.add("min_second_fundamental_eigenvalue", {"samples": cfg.samples}, worst, 0.0, "gt")
    K, p = cfg.K, cfg.p
    per_axis = cfg.grid
    bound_single = K ** (-(n - 1) * (0.5 - 1 / p))
    coeffs = np.zeros(int(K) ** d, complex)
    coeffs[0] = 1.0
    single = decoupling_ratio(lam, K, p, np.zeros(d), lam, coeffs, per_axis, n)
    out.add("single_cap_ratio", {"K": K, "p": p}, single, bound_single * (1 + 1e-6), "le")
    trials = int(cfg.extra.get("trials", 8))
    vals = []
    for i in range(trials):
        r2 = stream(cfg.seed, "decouple.coeffs", i)
        c = r2.normal(size=int(K) ** d) + 1j * r2.normal(size=int(K) ** d)
        vals.append(decoupling_ratio(lam, K, p, np.zeros(d), lam, c, per_axis, n))
    out.add("random_cap_ratio_max", {"K": K, "p": p, "trials": trials}, max(vals), 0.0, "info")
    return out.rows


# ---------------------------------------------------------------- partitioning

def run_partition(cfg):
    out = _Rows("partition")
    d = int(cfg.extra.get("d", 4))
    n = cfg.n
    rng = stream(cfg.seed, "partition.points", 0)
    W = part.WeightedPoints(rng.uniform(-1, 1, (cfg.samples, n)), np.ones(cfg.samples))
    P = part.equal_mass_partition(W, d)
    weights = P.cell_weights()
    out.add("nonempty_cells", {"d": d, "n": n, "points": cfg.samples},
            sum(1 for v in weights.values() if v > 0), 8 * d ** n, "le")
    out.add("max_cell_weight_fraction", {"d": d, "n": n}, max(weights.values()) / W.total,
            4 * d ** (-n), "le")
    lines = int(cfg.extra.get("lines", 1000))
    lrng = stream(cfg.seed, "partition.lines", 0)
    bad = 0
    for _ in range(lines):
        a = lrng.uniform(-1, 1, n)
        b = lrng.normal(size=n)
        bad += part.line_cell_crossings(P, a, b) > P.degree + 1
    out.add("line_crossing_violations", {"lines": lines, "degree": P.degree}, bad, 0, "eq")
    # dichotomy on a ball and on a planted slab
    r = float(cfg.extra.get("r", 1.0e4))
    dm = float(cfg.extra.get("wall_delta_m", 0.02))
    brng = stream(cfg.seed, "partition.ball", 0)
    X = brng.normal(size=(4000, n))
    X = X / np.linalg.norm(X, axis=1)[:, None] * r * brng.uniform(0, 1, (4000, 1)) ** (1 / n)
    res = part.dichotomy_step(part.WeightedPoints(X, np.ones(len(X))),
                              geo.Variety.whole_space(n), d, r, dm)
    out.add("ball_is_cellular", {"r": r, "delta_m": dm}, float(res.kind == "cellular"), 1.0, "eq")
    th = r ** (0.5 + dm)
    normal = np.ones(n) / math.sqrt(n)
    Y = X - np.outer(X @ normal, normal) + np.outer(brng.uniform(-th / 2, th / 2, len(X)), normal)
    res = part.dichotomy_step(part.WeightedPoints(Y, np.ones(len(Y))),
                              geo.Variety.whole_space(n), d, r, dm)
    cap = res.capture if res.kind == "algebraic" else 0.0
    out.add("slab_algebraic_capture", {"r": r, "delta_m": dm}, cap, 0.9, "ge")
    return out.rows


# ---------------------------------------------------------------- broad norms

def run_broad_checks(cfg):
    out = _Rows("broad")
    n, K, k, p = cfg.n, cfg.K, cfg.k, cfg.p
    A_values = [int(a) for a in cfg.extra.get("A_values", [1, 2, 4])]
    side = K ** 2
    per = int(cfg.extra.get("per_axis", 16))
    spacing = 2 * side / per
    lo = np.zeros(n)
    hi = np.full(n, 2 * side)
    cut = 0.55 * 2 * side
    U1 = [(lo, np.concatenate([[cut], hi[1:]]))]
    U2 = [(np.concatenate([[cut], lo[1:]]), hi)]
    vanish = anti = sub = 0
    for i in range(cfg.samples):
        rng = stream(cfg.seed, "broad", i)
        nc = int(rng.integers(1, 12))
        dirs = geo.gauss_map(rng.uniform(0, 1, (nc, n - 1)))
        F = rng.normal(size=(nc,) + (per,) * n) * (rng.uniform(size=(nc,) + (1,) * n) < 0.7)
        vals = [bn.broad_norm(F, dirs, bn.BroadNormConfig(k, A, K, p, n), lo, spacing)
                for A in A_values]
        anti += sum(1 for a, b in zip(vals, vals[1:]) if b > a * (1 + 1e-12))
        c0 = bn.BroadNormConfig(k, A_values[0], K, p, n)
        a = bn.broad_norm(F, dirs, c0, lo, spacing, U1) ** p
        b = bn.broad_norm(F, dirs, c0, lo, spacing, U2) ** p
        c = bn.broad_norm(F, dirs, c0, lo, spacing, U1 + U2) ** p
        sub += c > (a + b) * (1 + 1e-12)
        G = np.zeros_like(F)
        G[0] = rng.normal(size=(per,) * n)
        vanish += bn.broad_norm(G, dirs, c0, lo, spacing) != 0.0
    params = {"instances": cfg.samples, "n": n, "K": K, "k": k, "A": A_values}
    out.add("single_cap_vanishing_violations", params, vanish, 0, "eq")
    out.add("antitone_in_A_violations", params, anti, 0, "eq")
    out.add("subadditivity_violations", params, sub, 0, "eq")
    return out.rows


RUNNERS = {
    "knapp": run_knapp,
    "wavepackets": run_wavepacket_suite,
    "transequi": run_transverse_equidistribution,
    "rescale": run_parabolic_rescale,
    "decouple": run_decoupling_scan,
    "partition": run_partition,
    "exponents": run_exponents,
    "phase": run_phase_checks,
    "broad": run_broad_checks,
}


def run(cfg):
    return RUNNERS[cfg.name](cfg)

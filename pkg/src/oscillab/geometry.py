"""Gauss map, subspaces, real polynomial varieties and tube/variety geometry."""
from dataclasses import dataclass, field
import itertools
import math
import warnings

import numpy as np

from .errors import IllConditionedError
from .phase_core import grad_omega_arr, grad_x_arr, dt_arr

RANK_TOL = 1e-8


# ---------------------------------------------------------------- Gauss map

def gauss_map(omega):
    omega = np.asarray(omega, float)
    v = np.concatenate([omega, np.ones(omega.shape[:-1] + (1,))], axis=-1)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _grad_xt(lam, x, t, omega):
    gx = grad_x_arr(lam, x, t, omega)
    gt = dt_arr(lam, x, t, omega)
    return np.concatenate([gx, np.asarray(gt)[..., None]], axis=-1)


def _complex_step_columns(lam, x, t, omega, h=1e-20):
    """Columns d/dw_j of grad_(x,t) phi by the complex-step method."""
    omega = np.asarray(omega, float)
    d = omega.shape[-1]
    cols = []
    for j in range(d):
        w = omega.astype(complex)
        w[..., j] += 1j * h
        # the closed forms are analytic in w, so the imaginary part is the derivative
        u = np.asarray(x, float) - t * w
        s = np.sqrt(lam * lam + np.sum(u * u, axis=-1))
        gx = lam / t * u / s
        gt = -lam / t**2 * (lam * lam + np.sum(np.asarray(x, float) * u, axis=-1)) / s
        cols.append(np.imag(np.concatenate([gx, [gt]])) / h)
    return np.stack(cols, axis=-1)


def wedge(columns):
    """Generalized cross product of n-1 column vectors in R^n."""
    M = np.asarray(columns, float)
    n = M.shape[0]
    out = np.empty(n)
    for k in range(n):
        minor = np.delete(M, k, axis=0)
        out[k] = (-1) ** k * np.linalg.det(minor)
    return out


def gauss_map_numeric(pf, x, t, omega):
    """Normalized wedge of the omega-derivatives of grad_(x,t) phi."""
    w = wedge(_complex_step_columns(pf.lam, x, t, omega))
    w = w / np.linalg.norm(w)
    return w if w[-1] >= 0 else -w


def line_angle(a, b):
    a = np.asarray(a, float) / np.linalg.norm(a)
    b = np.asarray(b, float) / np.linalg.norm(b)
    c = abs(float(np.dot(a, b)))
    s = np.linalg.norm(a - np.dot(a, b) * b)
    return math.atan2(s, c)


# ---------------------------------------------------------------- subspaces

@dataclass(frozen=True)
class Subspace:
    basis: np.ndarray  # (dim, n), orthonormal rows

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, float))
        if b.size and not np.allclose(b @ b.T, np.eye(len(b)), atol=1e-12):
            raise ValueError("basis must be orthonormal")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def ambient(self):
        return self.basis.shape[1]

    @classmethod
    def span(cls, vectors, tol=1e-12):
        A = np.atleast_2d(np.asarray(vectors, float))
        _, s, vt = np.linalg.svd(A, full_matrices=False)
        keep = s > tol * max(s.max(), 1.0)
        return cls(vt[keep])

    def project(self, v):
        v = np.asarray(v, float)
        return (v @ self.basis.T) @ self.basis


def angle_to_subspace(direction, V):
    d = np.asarray(direction, float)
    d = d / np.linalg.norm(d, axis=-1, keepdims=True)
    resid = np.linalg.norm(d - V.project(d), axis=-1)
    return np.arcsin(np.clip(resid, 0.0, 1.0))


def cap_directions(cap, samples_per_axis=3):
    """Gauss directions at a small tensor grid of points of a cap."""
    c = np.asarray(cap.center, float)
    offs = np.linspace(-0.5, 0.5, samples_per_axis) * cap.side
    pts = np.array([c + np.array(o) for o in itertools.product(offs, repeat=len(c))])
    return gauss_map(pts)


def cap_angle(cap, V, samples_per_axis=3):
    return float(np.min(angle_to_subspace(cap_directions(cap, samples_per_axis), V)))


def cap_in_V(cap, V, K, samples_per_axis=3):
    return cap_angle(cap, V, samples_per_axis) < 1.0 / K


# ---------------------------------------------------------------- polynomials

@dataclass(frozen=True)
class Polynomial:
    """Real polynomial on R^n as {exponent tuple: coefficient}."""

    ambient_dim: int
    terms: tuple = field(default=())  # sorted tuple of (exponents, coeff)

    def __post_init__(self):
        items = dict(self.terms) if not isinstance(self.terms, dict) else self.terms
        clean = {}
        for e, c in dict(items).items():
            e = tuple(int(v) for v in e)
            if len(e) != self.ambient_dim:
                raise ValueError("exponent length must equal ambient_dim")
            if c != 0:
                clean[e] = clean.get(e, 0.0) + float(c)
        object.__setattr__(self, "terms", tuple(sorted(clean.items())))

    @classmethod
    def from_dict(cls, n, d):
        return cls(n, tuple(d.items()))

    @classmethod
    def linear(cls, normal, offset=0.0):
        """normal . x - offset."""
        normal = np.asarray(normal, float)
        n = len(normal)
        terms = {}
        for i, a in enumerate(normal):
            e = [0] * n
            e[i] = 1
            terms[tuple(e)] = float(a)
        terms[(0,) * n] = -float(offset)
        return cls(n, tuple(terms.items()))

    @classmethod
    def sphere(cls, center, radius):
        center = np.asarray(center, float)
        n = len(center)
        terms = {(0,) * n: float(center @ center - radius * radius)}
        for i, c in enumerate(center):
            e2 = [0] * n
            e2[i] = 2
            e1 = [0] * n
            e1[i] = 1
            terms[tuple(e2)] = 1.0
            terms[tuple(e1)] = -2.0 * c
        return cls(n, tuple(terms.items()))

    @property
    def degree(self):
        return max((sum(e) for e, _ in self.terms), default=0)

    def __call__(self, X):
        X = np.asarray(X, float)
        out = np.zeros(X.shape[:-1])
        for e, c in self.terms:
            out = out + c * np.prod(X ** np.array(e), axis=-1)
        return out

    def gradient(self, X):
        X = np.asarray(X, float)
        out = np.zeros(X.shape)
        for e, c in self.terms:
            e = np.array(e)
            for i in range(self.ambient_dim):
                if e[i] == 0:
                    continue
                ei = e.copy()
                ei[i] -= 1
                out[..., i] += c * e[i] * np.prod(X ** ei, axis=-1)
        return out

    def __mul__(self, other):
        terms = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0.0) + c1 * c2
        return Polynomial(self.ambient_dim, tuple(terms.items()))

    def restrict_to_line(self, a, b):
        """Coefficients (low to high) of s -> P(a + s b)."""
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        total = np.zeros(self.degree + 1)
        for e, c in self.terms:
            poly = np.array([c])
            for i, k in enumerate(e):
                for _ in range(k):
                    poly = np.convolve(poly, [a[i], b[i]])
            total[: len(poly)] += poly
        return total

    def to_json(self):
        return {"degree": self.degree,
                "monomials": [{"exponents": list(e), "coeff": c} for e, c in self.terms]}

    @classmethod
    def from_json(cls, n, obj):
        return cls(n, tuple((tuple(m["exponents"]), m["coeff"]) for m in obj["monomials"]))


# ---------------------------------------------------------------- varieties

@dataclass(frozen=True)
class Variety:
    polys: tuple
    ambient_dim: int

    def __post_init__(self):
        object.__setattr__(self, "polys", tuple(self.polys))
        for p in self.polys:
            if p.ambient_dim != self.ambient_dim:
                raise ValueError("polynomial dimension mismatch")

    @property
    def dim(self):
        return self.ambient_dim - len(self.polys)

    @property
    def degree(self):
        # degree of this representation only
        return int(np.prod([p.degree for p in self.polys])) if self.polys else 1

    @classmethod
    def whole_space(cls, n):
        return cls((), n)

    @classmethod
    def hyperplane(cls, normal, point):
        normal = np.asarray(normal, float)
        return cls((Polynomial.linear(normal, float(normal @ np.asarray(point, float))),),
                   len(normal))

    def values(self, X):
        X = np.asarray(X, float)
        if not self.polys:
            return np.zeros(X.shape[:-1] + (0,))
        return np.stack([p(X) for p in self.polys], axis=-1)

    def jacobian(self, X):
        X = np.asarray(X, float)
        if not self.polys:
            return np.zeros(X.shape[:-1] + (0, self.ambient_dim))
        return np.stack([p.gradient(X) for p in self.polys], axis=-2)

    def rank_ok(self, z):
        J = self.jacobian(z)
        if J.shape[0] == 0:
            return True
        s = np.linalg.svd(J, compute_uv=False)
        return s[-1] > RANK_TOL * max(np.linalg.norm(J), 1e-300)

    def project(self, X, iters=50, tol=1e-12):
        """Damped Gauss-Newton (least-norm steps) from each seed onto Z.

        Returns (points, converged mask).
        """
        X = np.atleast_2d(np.asarray(X, float)).copy()
        if not self.polys:
            return X, np.ones(len(X), bool)
        ok = np.zeros(len(X), bool)
        for i in range(len(X)):
            x = X[i]
            for _ in range(iters):
                F = self.values(x)
                J = self.jacobian(x)
                scale = max(1.0, np.linalg.norm(x))
                if np.linalg.norm(F) <= tol * scale * max(1.0, np.linalg.norm(J)):
                    ok[i] = True
                    break
                step = np.linalg.lstsq(J, F, rcond=None)[0]
                damp = 1.0
                base = np.linalg.norm(F)
                while damp > 1e-4:
                    trial = x - damp * step
                    if np.linalg.norm(self.values(trial)) < base:
                        break
                    damp *= 0.5
                x = x - damp * step
            else:
                F = self.values(x)
                ok[i] = np.linalg.norm(F) <= 1e-8 * max(1.0, np.linalg.norm(self.jacobian(x)))
            X[i] = x
        return X, ok

    def distance(self, X):
        """Estimated distance to Z via Newton projection (first-order near Z)."""
        X = np.atleast_2d(np.asarray(X, float))
        if not self.polys:
            return np.zeros(len(X))
        if all(p.degree <= 1 for p in self.polys):
            # affine: exact least-norm correction
            J = self.jacobian(np.zeros(self.ambient_dim))
            F = self.values(X)
            step = np.linalg.lstsq(J, F.T, rcond=None)[0].T
            return np.linalg.norm(step, axis=-1)
        P, ok = self.project(X)
        d = np.linalg.norm(P - X, axis=-1)
        d[~ok] = np.inf
        return d

    def tangent_basis(self, z):
        """Orthonormal basis (rows) of the null space of the gradient matrix."""
        n = self.ambient_dim
        if not self.polys:
            return np.eye(n)
        J = self.jacobian(z)
        u, s, vt = np.linalg.svd(J)
        if s[-1] <= RANK_TOL * max(np.linalg.norm(J), 1e-300):
            raise IllConditionedError(f"gradients dependent at {np.asarray(z).tolist()}")
        return vt[len(s):]

    def sample(self, center, radius, count, rng):
        seeds = np.asarray(center, float) + rng.uniform(-radius, radius,
                                                        size=(count, self.ambient_dim))
        P, ok = self.project(seeds)
        inside = np.linalg.norm(P - np.asarray(center, float), axis=-1) <= radius
        return P[ok & inside]

    def to_json(self):
        return {"ambient_dim": self.ambient_dim, "polys": [p.to_json() for p in self.polys]}

    @classmethod
    def from_json(cls, obj):
        n = int(obj["ambient_dim"])
        return cls(tuple(Polynomial.from_json(n, p) for p in obj["polys"]), n)


def contains_sampled(big, small, points, tol=1e-6):
    """Sampled containment: points of `small` lie on `big` up to first-order distance."""
    if not big.polys:
        return True
    vals = np.abs(big.values(points))
    grads = np.linalg.norm(big.jacobian(points), axis=-1)
    return bool(np.all(vals <= tol * np.maximum(grads, 1e-300)))


@dataclass(frozen=True)
class Grain:
    variety: Variety
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise ValueError("grain radius must be positive")


@dataclass(frozen=True)
class Multigrain:
    grains: tuple
    deltas: tuple = ()

    def __post_init__(self):
        grains = tuple(self.grains)
        object.__setattr__(self, "grains", grains)
        n = grains[0].variety.ambient_dim
        for k, g in enumerate(grains):
            if g.variety.dim != n - k:
                raise ValueError("grain dimensions must descend n, n-1, ...")
        for big, small in zip(grains, grains[1:]):
            if small.radius > big.radius:
                raise ValueError("scales must decrease")
            gap = np.linalg.norm(np.subtract(small.center, big.center))
            if gap + small.radius > big.radius * (1 + 1e-12):
                raise ValueError("balls must be nested")

    @property
    def scales(self):
        return tuple(g.radius for g in self.grains)

    @property
    def complexity(self):
        return max(max((p.degree for p in g.variety.polys), default=0) for g in self.grains)

    def check_nested(self, rng, samples=1000):
        for big, small in zip(self.grains, self.grains[1:]):
            pts = small.variety.sample(small.center, small.radius, samples, rng)
            if len(pts) and not contains_sampled(big.variety, small.variety, pts):
                return False
        return True


# ---------------------------------------------------------------- tubes vs varieties

def _core_points(tube, center, radius, count):
    """Core-line points of a tube lying in the ball B(center, radius)."""
    c = np.asarray(center, float)
    p0 = np.asarray(tube.point, float)
    e = np.asarray(tube.direction, float)
    # solve |p0 + s e - c| <= radius
    w = p0 - c
    b = float(w @ e)
    disc = b * b - (float(w @ w) - radius * radius)
    if disc < 0:
        return np.zeros((0, len(c)))
    s0, s1 = -b - math.sqrt(disc), -b + math.sqrt(disc)
    s = np.linspace(s0, s1, count)
    return p0 + s[:, None] * e


def tangency_check(tube, grain, delta_m, c_angle=1.0, c_nbhd=1.0, samples=33, seed=0):
    """Tube/variety tangency inside the grain's ball.

    (i) core-line samples inside the ball lie within c_nbhd * r^(1/2+delta_m) of Z;
    (ii) at points of Z near the tube (within the tube radius), the angle between
    the tube direction and T_z Z is at most c_angle * r^(-1/2+delta_m).
    """
    Z = grain.variety
    r = tube.scale_r
    if getattr(tube, "empty", False):
        return False
    nb = c_nbhd * r ** (0.5 + delta_m)
    core = _core_points(tube, grain.center, grain.radius, samples)
    if len(core) == 0:
        return False
    if np.any(Z.distance(core) > nb):
        return False
    if not Z.polys:
        return True
    rng = np.random.default_rng(seed)
    reach = tube.radius
    seeds = np.concatenate([core, core + rng.uniform(-reach, reach, size=core.shape)])
    zs, ok = Z.project(seeds)
    zs = zs[ok]
    e = np.asarray(tube.direction, float)
    p0 = np.asarray(tube.point, float)
    rel = zs - p0
    perp = np.linalg.norm(rel - (rel @ e)[:, None] * e[None, :], axis=-1)
    in_ball = np.linalg.norm(zs - np.asarray(grain.center), axis=-1) <= grain.radius
    near = zs[(perp <= reach) & in_ball]
    limit = c_angle * r ** (-0.5 + delta_m)
    for z in near:
        T = Subspace(Z.tangent_basis(z))
        if angle_to_subspace(e, T) > limit:
            return False
    return True


# ---------------------------------------------------------------- Phi map

def phi_map(pf, t0, omega_theta, x):
    """x -> -grad_w phi(x, t0; w_theta)."""
    x = np.asarray(x, float)
    return -grad_omega_arr(pf.lam, x, np.full(x.shape[:-1], float(t0)), omega_theta)


def phi_jacobian(pf, t0, omega_theta, x):
    """lam (s2 I - u u^T) / s2^(3/2) with u = x - t0 w, s2 = lam^2 + |u|^2."""
    x = np.asarray(x, float)
    u = x - t0 * np.asarray(omega_theta, float)
    s2 = pf.lam ** 2 + np.sum(u * u, axis=-1)
    d = u.shape[-1]
    num = s2[..., None, None] * np.eye(d) - u[..., :, None] * u[..., None, :]
    return pf.lam * num / (s2 ** 1.5)[..., None, None]


def phi_ball_image(pf, t0, omega_theta, x, ell, boundary=256):
    """(min, max) of |Phi(y) - Phi(x)| / ell over the sphere |y - x| = ell."""
    x = np.asarray(x, float)
    d = len(x)
    if d == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        rng = np.random.default_rng(0)
        dirs = rng.normal(size=(boundary, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    y = x + ell * dirs
    rad = np.linalg.norm(phi_map(pf, t0, omega_theta, y) - phi_map(pf, t0, omega_theta, x),
                         axis=-1)
    return float(rad.min() / ell), float(rad.max() / ell)


# ---------------------------------------------------------------- transversality

def transversality_sampler(phi, jac_phi, m_vecs, Z, c_values, seeds, tol=1e-8):
    """For each c: does T_z Z + T_z Phi^{-1}(Pi_c) span R^n at sampled intersection points?

    Pi_c = {y : M y = c}. Intersection points are found by Newton on the stacked
    system [Z polys; M Phi(x) - c] from the given seeds. No points means True.
    """
    M = np.atleast_2d(np.asarray(m_vecs, float))
    n = Z.ambient_dim
    seeds = np.atleast_2d(np.asarray(seeds, float))
    verdicts = []
    for c in np.atleast_2d(np.asarray(c_values, float).reshape(-1, M.shape[0])):
        good = True
        for x in seeds:
            x = x.copy()
            conv = False
            for _ in range(60):
                F = np.concatenate([Z.values(x), M @ phi(x) - c])
                J = np.concatenate([Z.jacobian(x).reshape(-1, n), M @ jac_phi(x)], axis=0)
                if np.linalg.norm(F) < 1e-11 * max(1.0, np.linalg.norm(x)):
                    conv = True
                    break
                step = np.linalg.lstsq(J, F, rcond=None)[0]
                x = x - step
                if not np.all(np.isfinite(x)) or np.linalg.norm(x) > 1e8:
                    break
            if not conv:
                continue
            TZ = Z.tangent_basis(x) if Z.polys else np.eye(n)
            A = M @ jac_phi(x)
            _, s, vt = np.linalg.svd(A)
            rank_a = int(np.sum(s > tol * max(s.max(), 1e-300)))
            TW = vt[rank_a:]
            span = np.concatenate([TZ, TW], axis=0)
            sv = np.linalg.svd(span, compute_uv=False) if len(span) else np.zeros(1)
            if len(sv) < n:
                good = False
                break
            if sv[n - 1] < tol:
                if sv[n - 1] > 0:
                    warnings.warn("smallest singular value below rank tolerance")
                good = False
                break
        verdicts.append(good)
    return verdicts


# ---------------------------------------------------------------- nested direction counting

def _segment_hausdorff_to_line(tube_small, tube_big, center, radius, count=17):
    pts = _core_points(tube_small, center, radius, count)
    if len(pts) == 0:
        return math.inf
    e = np.asarray(tube_big.direction, float)
    rel = pts - np.asarray(tube_big.point, float)
    return float(np.max(np.linalg.norm(rel - (rel @ e)[:, None] * e[None, :], axis=-1)))


def _cap_dist(a, b):
    return float(np.linalg.norm(np.subtract(a.cap.center, b.cap.center)))


def nested_direction_count(mg, tubes, delta=0.1, witnesses=None, c_const=4.0, return_caps=False):
    """Brute-force count of caps owning a top-scale tube obeying the nested tube hypothesis.

    `tubes` are scale r_n tubes. `witnesses[k]` lists candidate tubes for the k-th
    grain (k = 1 .. len(grains) - 1); when absent, each tube is its own witness
    at every level.
    """
    grains = mg.grains
    L = len(grains)
    deltas = mg.deltas if mg.deltas else tuple(0.02 * 2.0 ** k for k in range(L))

    def cond3(tube, k):
        g = grains[k]
        r = g.radius
        if not g.variety.polys:
            return True
        core = _core_points(tube, g.center, g.radius, 17)
        if len(core) == 0:
            return False
        return bool(np.all(g.variety.distance(core) <= c_const * r ** (0.5 + deltas[k])))

    def pair_ok(t_small, k_small, t_big, k_big):
        rj = grains[k_small].radius
        ri = grains[k_big].radius
        if _cap_dist(t_small, t_big) > c_const * rj ** -0.5:
            return False
        h = _segment_hausdorff_to_line(t_small, t_big, grains[k_small].center, rj)
        return h <= c_const * ri ** ((1 + delta) / 2)

    def extend(chain):
        k = len(chain)
        if k == L:
            return True
        pool = witnesses[k] if witnesses and witnesses.get(k) is not None else [chain[0]]
        for cand in pool:
            if not cond3(cand, k):
                continue
            if all(pair_ok(cand, k, chain[i], i) for i in range(k)):
                if extend(chain + [cand]):
                    return True
        return False

    caps = set()
    for T in tubes:
        if getattr(T, "empty", False):
            continue
        if T.cap.index in caps:
            continue
        if cond3(T, 0) and extend([T]):
            caps.add(T.cap.index)
    return sorted(caps) if return_caps else len(caps)

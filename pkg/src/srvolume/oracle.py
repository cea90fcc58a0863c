"""Brute-force verifiers that share no code path with the quadrature.

* :func:`raster_volume` measures the unit ball directly, either by sweeping
  the optimal covector domain through the exponential map into a voxel
  grid, or by classifying voxel centres / quasi-random points with the
  shooting-based distance :func:`srvolume.geodesics.sr_distance`.
* :func:`ballbox_check`, :func:`cut_optimality_check` and
  :func:`diameter_check` test metric statements about balls and cut times.

Every randomised routine takes a ``seed`` and echoes it in its report.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import qmc

from .algebra import as_spectrum
from .exceptions import MemoryBudget, UnsupportedDimension, ValidationError
from .geodesics import (
    CovectorParam,
    _trig_factors,
    cut_time,
    exp_coords,
    exp_map,
    shoot_all,
    sr_distance,
)
from .group import GEODESIC_CHART, GroupPoint, inverse, product

__all__ = [
    "RasterGrid",
    "RasterReport",
    "BallBoxReport",
    "CutReport",
    "DiameterReport",
    "z_bound",
    "raster_volume",
    "ballbox_check",
    "cut_optimality_check",
    "conjugate_family_defect",
    "diameter_check",
    "random_arclength_params",
    "injectivity_check",
]

TWO_PI = 2.0 * math.pi
MAX_CELLS = 5e7


def _h_max():
    # max over phi in [0, 2 pi] of (phi - sin phi) / (2 phi^2)
    res = minimize_scalar(lambda p: -_trig_factors(p)[2] / 2, bounds=(0.5, TWO_PI),
                          method="bounded", options={"xatol": 1e-12})
    return float(-res.fun)


H_MAX = _h_max()


def z_bound(b, radius: float = 1.0) -> float:
    """Bound on |z| over the ball: ``z = sum r_i^2 b_i (φ_i - sin φ_i)/(2φ_i^2)``.

    Each mode is a convex weight times ``b_i h(φ_i) <= b_1 max h``.
    """
    b = as_spectrum(b)
    return radius ** 2 * b.b1 * H_MAX * (1.0 + 1e-9)


@dataclass
class RasterGrid:
    resolution: tuple
    lower: np.ndarray
    upper: np.ndarray
    occupancy: np.ndarray | None = field(default=None, repr=False)

    @property
    def cell_volume(self) -> float:
        return float(np.prod((self.upper - self.lower) / np.asarray(self.resolution)))

    @property
    def volume(self) -> float:
        return float(self.occupancy.sum()) * self.cell_volume


@dataclass
class RasterReport:
    value: float
    method: str
    stderr: float = 0.0
    resolution: int | None = None
    n_points: int = 0
    seed: int | None = None
    levels: list = field(default_factory=list)
    extrapolated: float | None = None

    def to_dict(self):
        return asdict(self)


def _bounding_box(b, kind, radius):
    b = as_spectrum(b, kind)
    n_h = 2 * b.ell + (b.kind == "quasi-contact")
    zb = z_bound(b, radius)
    lo = np.concatenate([np.full(n_h, -radius), [-zb]])
    hi = np.concatenate([np.full(n_h, radius), [zb]])
    return b, lo, hi


def _sweep(b, lo, hi, res, oversample=2.0, chunk=2_000_000):
    """Forward voxelisation of exp over the optimal domain D."""
    n_h = len(lo) - 1
    ell = b.ell
    cells = res ** (n_h + 1)
    if cells > MAX_CELLS:
        raise MemoryBudget(f"{cells:.3g} voxels exceed the budget")
    occ = np.zeros((res,) * (n_h + 1), dtype=bool)
    # covector ball sampled on a lattice finer than the voxel pitch
    m = int(math.ceil(oversample * res))
    axis = (np.arange(m) + 0.5) / m * 2.0 - 1.0
    U = np.stack(np.meshgrid(*([axis] * n_h), indexing="ij"), -1).reshape(-1, n_h)
    U = U[np.sum(U * U, axis=1) <= 1.0]
    W = TWO_PI / b.b1
    # z varies at most ~ 0.1 * dw per unit w; match the vertical pitch
    dz = (hi[-1] - lo[-1]) / res
    nw = int(math.ceil(oversample * 2 * W * 0.1 / dz)) + 1
    ws = (np.arange(nw) + 0.5) / nw * 2 * W - W
    pitch = (hi - lo) / res
    per = max(1, chunk // max(1, len(U)))
    u, v = U[:, :ell], U[:, ell:2 * ell]
    r = np.hypot(u, v)
    th = np.arctan2(-u, v)
    eu = U[:, 2 * ell] if n_h % 2 else None
    for k in range(0, nw, per):
        wk = ws[k:k + per]
        R = np.broadcast_to(r, (len(wk),) + r.shape).reshape(-1, ell)
        TH = np.broadcast_to(th, (len(wk),) + th.shape).reshape(-1, ell)
        WW = np.repeat(wk, len(U))
        EU = None if eu is None else np.tile(eu, len(wk))
        pts = exp_coords(R, TH, WW, b, 1.0, EU)
        idx = np.floor((pts - lo) / pitch).astype(np.int64)
        np.clip(idx, 0, res - 1, out=idx)
        occ[tuple(idx.T)] = True
    return RasterGrid((res,) * (n_h + 1), lo, hi, occ)


def _grid_membership(b, lo, hi, res, radius, chunk=1_000_000):
    dim = len(lo)
    cells = res ** dim
    if cells > MAX_CELLS:
        raise MemoryBudget(f"{cells:.3g} voxels exceed the budget")
    pitch = (hi - lo) / res
    axes = [lo[i] + (np.arange(res) + 0.5) * pitch[i] for i in range(dim)]
    occ = np.zeros(cells, dtype=bool)
    flat = np.arange(cells)
    for k in range(0, cells, chunk):
        ids = np.unravel_index(flat[k:k + chunk], (res,) * dim)
        pts = np.stack([axes[i][ids[i]] for i in range(dim)], axis=1)
        occ[k:k + chunk] = sr_distance(pts, b, b.kind) <= radius
    return RasterGrid((res,) * dim, lo, hi, occ.reshape((res,) * dim))


def _ball_points(sample, n_h):
    """Map unit-cube samples to the unit ball in R^n_h (radial law r^(1/n))."""
    from scipy.special import ndtri

    g = ndtri(np.clip(sample[:, :n_h], 1e-15, 1 - 1e-15))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = sample[:, n_h] ** (1.0 / n_h)
    return g * rad[:, None]


def _qmc_membership(b, radius, n_points, seed, replicates=8, chunk=1 << 18):
    n_h = 2 * b.ell + (b.kind == "quasi-contact")
    zb = z_bound(b, radius)
    omega = math.pi ** (n_h / 2) / math.gamma(n_h / 2 + 1)
    region = omega * radius ** n_h * 2 * zb
    per = max(1, n_points // replicates)
    m = int(math.ceil(math.log2(per)))
    estimates = []
    for rep in range(replicates):
        eng = qmc.Sobol(d=n_h + 2, scramble=True, seed=np.random.default_rng([seed, rep]))
        sample = eng.random_base2(m)
        hits = 0
        for k in range(0, len(sample), chunk):
            s = sample[k:k + chunk]
            h = _ball_points(s, n_h) * radius
            z = (2 * s[:, n_h + 1] - 1) * zb
            pts = np.concatenate([h, z[:, None]], axis=1)
            hits += int(np.count_nonzero(sr_distance(pts, b, b.kind) <= radius))
        estimates.append(region * hits / len(sample))
    est = np.array(estimates)
    return float(est.mean()), float(est.std(ddof=1) / math.sqrt(len(est))), replicates * (1 << m)


def raster_volume(b, kind: str | None = None, resolution: int = 32, method: str = "auto",
                  radius: float = 1.0, n_points: int = 1 << 20, seed: int = 0,
                  refine: bool = True) -> RasterReport:
    """Volume of the ball of ``radius`` measured without the quadrature formula.

    Methods
    -------
    ``sweep``
        push a lattice of the optimal domain D through ``exp`` at t=1 and
        count hit voxels (overestimates by a boundary layer; with
        ``refine`` the half-resolution count is used for a first-order
        Richardson extrapolation).
    ``grid``
        classify voxel centres by ``d(q) <= radius``.
    ``qmc``
        randomised (scrambled Sobol) centres in the bounding cylinder;
        ``stderr`` comes from independent scramblings.
    ``auto``
        ``grid`` when ``resolution**dim`` fits the budget, else ``qmc``.
    """
    b, lo, hi = _bounding_box(b, kind, radius)
    dim = len(lo)
    if method == "auto":
        method = "grid" if resolution ** dim <= MAX_CELLS / 10 else "qmc"
    if method == "sweep":
        if radius != 1.0:
            raise ValidationError("sweep measures the unit ball only")
        if dim > 4:
            raise UnsupportedDimension("sweep is limited to dimension <= 4; use 'qmc'")
        levels = []
        for res in ([resolution // 2, resolution] if refine else [resolution]):
            levels.append((res, _sweep(b, lo, hi, res).volume))
        value = levels[-1][1]
        extra = 2 * levels[1][1] - levels[0][1] if refine else None
        return RasterReport(extra if refine else value, "sweep", resolution=resolution,
                            levels=levels, extrapolated=extra, seed=seed)
    if method == "grid":
        levels = []
        for res in ([resolution // 2, resolution] if refine else [resolution]):
            levels.append((res, _grid_membership(b, lo, hi, res, radius).volume))
        return RasterReport(levels[-1][1], "grid", resolution=resolution, levels=levels,
                            n_points=resolution ** dim, seed=seed)
    if method == "qmc":
        value, err, n = _qmc_membership(b, radius, n_points, seed)
        return RasterReport(value, "qmc", stderr=err, n_points=n, seed=seed)
    raise ValidationError(f"unknown raster method {method!r}")


# -- ball-box -------------------------------------------------------------------


@dataclass
class BallBoxReport:
    eps: float
    c1_est: float
    c2_est: float

    def __post_init__(self):
        if not 0 < self.c1_est <= self.c2_est:
            raise ValidationError("ball-box estimates must satisfy 0 < c1 <= c2")


def _box_norm(pts):
    return np.maximum(np.max(np.abs(pts[:, :-1]), axis=1), np.sqrt(np.abs(pts[:, -1])))


def _box_boundary(rng, dim, n):
    pts = rng.uniform(-1, 1, size=(n, dim))
    face = rng.integers(0, dim, size=n)
    pts[np.arange(n), face] = np.sign(pts[np.arange(n), face]) + (pts[np.arange(n), face] == 0)
    corners = np.array(np.meshgrid(*([[-1.0, 1.0]] * dim), indexing="ij")).reshape(dim, -1).T
    return np.concatenate([pts, corners])


def random_arclength_params(rng, b, n, w_max=None, w_min=0.0):
    """Random unit covectors with |w| in [w_min, w_max] (defaults to the optimal range)."""
    b = as_spectrum(b)
    n_h = 2 * b.ell + (b.kind == "quasi-contact")
    g = rng.normal(size=(n, n_h))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    u, v = g[:, :b.ell], g[:, b.ell:2 * b.ell]
    r = np.hypot(u, v)
    th = np.arctan2(-u, v)
    eu = g[:, 2 * b.ell] if n_h % 2 else None
    w_max = TWO_PI / b.b1 if w_max is None else w_max
    w = rng.uniform(w_min, w_max, size=n) * rng.choice([-1.0, 1.0], size=n)
    return r, th, w, eu


def ballbox_check(b, eps_list, n_samples: int = 4000, seed: int = 0, kind=None) -> list:
    """Estimate ball-box constants at each ε without using dilations.

    ``c1(ε)`` is the largest ``c`` with ``Box(cε) ⊂ B(ε)``, found by bisection
    on sampled box boundaries; ``c2(ε) = max ||q||_box / ε`` over sampled
    sphere points ``exp(p, ε)``.  ``Box(s) = {|x_i|, |y_i|, |x_e| <= s, |z| <= s^2}``.
    """
    b = as_spectrum(b, kind)
    rng = np.random.default_rng(seed)
    dim = 2 * b.ell + (b.kind == "quasi-contact") + 1
    unit_box = _box_boundary(rng, dim, n_samples)
    r, th, w, eu = random_arclength_params(rng, b, n_samples)
    reports = []
    for eps in eps_list:
        if not 0 < eps <= 1:
            raise ValidationError("need 0 < eps <= 1")

        def box_points(s):
            pts = unit_box.copy()
            pts[:, :-1] *= s
            pts[:, -1] *= s * s
            return pts

        lo, hi = 0.0, 1.0
        while np.max(sr_distance(box_points(hi * eps), b, b.kind)) <= eps:
            lo, hi = hi, 2 * hi
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if np.max(sr_distance(box_points(mid * eps), b, b.kind)) <= eps:
                lo = mid
            else:
                hi = mid
        # sphere points: geodesics of length ε with w in the optimal range
        sph = exp_coords(r, th, w / eps, b, eps, eu)
        c2 = float(np.max(_box_norm(sph))) / eps
        reports.append(BallBoxReport(float(eps), lo, max(c2, lo)))
    return reports


# -- cut time ---------------------------------------------------------------


@dataclass
class CutReport:
    samples: int
    below_pass: int
    above_pass: int
    seed: int
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.below_pass == self.samples and self.above_pass == self.samples

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _same_param(p, q, tol=1e-7):
    if abs(p.w - q.w) > tol * (1 + abs(p.w)):
        return False
    if np.max(np.abs(np.subtract(p.r, q.r))) > tol:
        return False
    for r, a, c in zip(p.r, p.theta, q.theta):
        if r > tol and abs(math.remainder(a - c, TWO_PI)) > tol / r * 10:
            return False
    return True


def cut_optimality_check(samples: int, b, seed: int = 0, kind=None,
                         below: float = 0.95, above: float = 1.05) -> CutReport:
    """Uniqueness below the cut time and shorter competitors above it."""
    if samples < 1:
        raise ValidationError("need at least one sample")
    b = as_spectrum(b, kind)
    rng = np.random.default_rng(seed)
    r, th, w, eu = random_arclength_params(rng, b, samples, w_max=8.0, w_min=0.25)
    rep = CutReport(samples, 0, 0, seed)
    for k in range(samples):
        p = CovectorParam(r[k], th[k], w[k], None if eu is None else eu[k])
        tc = cut_time(p, b)
        t_lo, t_hi = below * tc, above * tc
        shots = [s for s in shoot_all(exp_map(p, b, t_lo), b, t_lo) if s.residual < 1e-9]
        if len(shots) == 1 and _same_param(shots[0].param, p):
            rep.below_pass += 1
        else:
            rep.failures.append({"sample": k, "half": "below", "solutions": len(shots)})
        shots = [s for s in shoot_all(exp_map(p, b, t_hi), b, t_hi) if s.residual < 1e-9]
        if shots and shots[0].length < t_hi * (1 - 1e-9):
            rep.above_pass += 1
        else:
            rep.failures.append({"sample": k, "half": "above", "solutions": len(shots)})
    return rep


def conjugate_family_defect(p: CovectorParam, b, n: int = 16) -> float:
    """Spread of endpoints at the cut time when the top-frequency angles rotate.

    At ``t_c`` every mode with ``b_i = b_1`` has closed its circle, so
    rotating those θ_i (and, at resonance, redistributing r among them at
    fixed sum of squares) leaves the endpoint fixed.
    """
    b = as_spectrum(b, p.kind)
    tc = cut_time(p, b)
    ref = exp_map(p, b, tc).as_array()
    top = np.array(b.freqs) == b.b1
    worst = 0.0
    rng = np.random.default_rng(0)
    for _ in range(n):
        th = np.array(p.theta) + np.where(top, rng.uniform(-math.pi, math.pi, b.ell), 0.0)
        r = np.array(p.r)
        mass = np.sqrt(np.sum(r[top] ** 2))
        g = np.abs(rng.normal(size=top.sum()))
        r[top] = mass * g / np.linalg.norm(g)
        q = CovectorParam(r, th, p.w, p.extra_u)
        worst = max(worst, float(np.max(np.abs(exp_map(q, b, tc).as_array() - ref))))
    return worst


# -- diameter -------------------------------------------------------------------


@dataclass
class DiameterReport:
    eps: float
    line_distance: float
    max_pair_distance: float
    n_pairs: int
    seed: int

    @property
    def diameter(self) -> float:
        return max(self.line_distance, self.max_pair_distance)


def _distance(p: GroupPoint, q: GroupPoint, b) -> float:
    rel = product(inverse(p, b, GEODESIC_CHART), q, b, GEODESIC_CHART)
    return float(sr_distance(rel.as_array()[None, :], b, p.kind)[0])


def diameter_check(b, eps: float, n_pairs: int = 200, seed: int = 0, kind=None) -> DiameterReport:
    """Distance of straight-line antipodes and of random sphere pairs."""
    if not eps > 0:
        raise ValidationError("need eps > 0")
    b = as_spectrum(b, kind)
    rng = np.random.default_rng(seed)
    r, th, _, eu = random_arclength_params(rng, b, 1)
    line = CovectorParam(r[0], th[0], 0.0, None if eu is None else eu[0])
    back = CovectorParam(r[0], th[0] + math.pi, 0.0, None if eu is None else -eu[0])
    d_line = _distance(exp_map(back, b, eps), exp_map(line, b, eps), b)
    r, th, w, eu = random_arclength_params(rng, b, 2 * n_pairs)
    sph = exp_coords(r, th, w / eps, b, eps, eu)
    worst = 0.0
    for k in range(n_pairs):
        pa = GroupPoint.from_array(sph[2 * k], b.kind)
        pb = GroupPoint.from_array(sph[2 * k + 1], b.kind)
        worst = max(worst, _distance(pa, pb, b))
    return DiameterReport(float(eps), d_line, worst, n_pairs, seed)


def injectivity_check(b, samples: int = 200, seed: int = 0, kind=None) -> dict:
    """Count covectors in the interior of D whose image is reached by another one.

    Interior means speed < 1 and ``|w| < 2π / b_1``.  Every endpoint is
    re-solved with the multistart shooter and the solutions are compared
    with the original up to the θ-torus symmetry of vanishing modes.
    """
    b = as_spectrum(b, kind)
    rng = np.random.default_rng(seed)
    r, th, w, eu = random_arclength_params(rng, b, samples, w_max=0.98 * TWO_PI / b.b1)
    speed = rng.uniform(0.05, 0.98, samples)
    collisions = []
    for k in range(samples):
        p = CovectorParam(r[k] * speed[k], th[k], w[k],
                          None if eu is None else eu[k] * speed[k])
        shots = [s for s in shoot_all(exp_map(p, b, 1.0), b, 1.0) if s.residual < 1e-9]
        if len(shots) != 1 or not _same_param(shots[0].param, p, tol=1e-6):
            collisions.append(k)
    return {"samples": samples, "collisions": len(collisions), "indices": collisions, "seed": seed}

import math

import numpy as np
import pytest

from srvolume.exceptions import MemoryBudget, UnsupportedDimension, ValidationError
from srvolume.geodesics import CovectorParam
from srvolume.oracle import (
    H_MAX,
    ballbox_check,
    conjugate_family_defect,
    cut_optimality_check,
    diameter_check,
    injectivity_check,
    raster_volume,
    z_bound,
)
from srvolume.volume import heisenberg_volume_exact, unit_ball_volume
from scipy.optimize import minimize_scalar


def test_h_max():
    res = minimize_scalar(lambda p: -(p - math.sin(p)) / (2 * p * p), bounds=(0.1, 2 * math.pi),
                          method="bounded", options={"xatol": 1e-12})
    assert H_MAX == pytest.approx(-res.fun, rel=1e-9)


def test_heisenberg_sweep():
    rep = raster_volume([1.0], method="sweep", resolution=48)
    assert rep.value == pytest.approx(heisenberg_volume_exact(), rel=0.02)
    assert rep.extrapolated and len(rep.levels) == 2


def test_sweep_refinement_is_monotone():
    vals = [raster_volume([1.0], method="sweep", resolution=n, refine=False).value
            for n in (16, 32, 64)]
    # marked voxels cover the ball, so refinement shrinks the estimate towards V
    exact = heisenberg_volume_exact()
    assert vals[0] >= vals[1] >= vals[2] >= exact * 0.999
    assert vals[2] - exact < 0.6 * (vals[1] - exact)  # first-order convergence


def test_grid_matches_quadrature():
    rep = raster_volume([1.0], method="grid", resolution=40)
    assert rep.value == pytest.approx(heisenberg_volume_exact(), rel=0.02)


@pytest.mark.parametrize("b,kind", [((1.0, 1.0), "contact"), ((1.0,), "quasi-contact"),
                                    ((1.0, 0.3), "contact")])
def test_qmc_matches_quadrature(b, kind):
    rep = raster_volume(b, kind, method="qmc", n_points=1 << 16, seed=3)
    ref = unit_ball_volume(b, kind).value
    assert rep.value == pytest.approx(ref, rel=0.02)
    assert rep.stderr < 0.01 * ref
    assert rep.seed == 3


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_dilation_scaling(alpha):
    b = (1.0, 0.5)
    base = raster_volume(b, method="qmc", n_points=1 << 16, seed=1).value
    scaled = raster_volume(b, method="qmc", n_points=1 << 16, seed=1, radius=alpha).value
    assert scaled == pytest.approx(alpha ** 6 * base, rel=0.02)


def test_raster_reproducible():
    a = raster_volume((1.0, 0.5), method="qmc", n_points=1 << 14, seed=9)
    b = raster_volume((1.0, 0.5), method="qmc", n_points=1 << 14, seed=9)
    assert a.to_dict() == b.to_dict()


def test_raster_errors():
    with pytest.raises(MemoryBudget):
        raster_volume([1.0], method="grid", resolution=2000)
    with pytest.raises(UnsupportedDimension):
        raster_volume((1.0, 0.5), method="sweep")
    with pytest.raises(ValidationError):
        raster_volume([1.0], method="sweep", radius=2.0)
    with pytest.raises(ValidationError):
        raster_volume([1.0], method="magic")


def test_z_extent_is_linear_in_b():
    assert z_bound((3.0, 1.5)) == pytest.approx(3 * z_bound((1.0, 0.5)))


def test_ballbox_heisenberg():
    reps = ballbox_check([1.0], [0.25, 0.5, 1.0], n_samples=1500, seed=2)
    for r in reps:
        assert 0 < r.c1_est <= r.c2_est
    for attr in ("c1_est", "c2_est"):
        vals = [getattr(r, attr) for r in reps]
        assert (max(vals) - min(vals)) / max(vals) < 0.05


def test_cut_check_heisenberg_and_resonance():
    for b in ([1.0], (1.0, 1.0)):
        rep = cut_optimality_check(10, b, seed=5)
        assert rep.passed, rep.failures


def test_conjugate_family_at_resonance():
    p = CovectorParam((0.6, 0.8), (0.2, -1.1), 1.7)
    assert conjugate_family_defect(p, (1.0, 1.0)) < 1e-12
    assert conjugate_family_defect(p, (1.0, 0.5)) < 1e-12


def test_diameter():
    for eps in (0.25, 0.5, 1.0):
        rep = diameter_check((1.0, 0.6), eps, n_pairs=50, seed=4)
        assert rep.line_distance == pytest.approx(2 * eps, abs=1e-10)
        assert rep.max_pair_distance <= 2 * eps + 1e-9
        assert rep.diameter == pytest.approx(2 * eps, abs=1e-10)


def test_injectivity():
    rep = injectivity_check((1.0, 0.6), samples=40, seed=8)
    assert rep["collisions"] == 0

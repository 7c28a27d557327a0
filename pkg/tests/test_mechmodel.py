"""Closed-form brake model against the independent linear-solve route.

Expected values below were frozen from a 50-digit evaluation of the same
balance equations (mpmath LU solve), independent of the package code.
"""

import math

import numpy as np
import pytest

from brakeopt import (
    BrakeGeometry,
    FrictionSet,
    LoadCase,
    SingularDenominator,
    ValidationError,
    braking_force,
    normal_forces,
    solve_equilibrium,
)
from brakeopt.mechmodel import braking_force_ensemble, trig_arrays

# nominal duty point: shipped geometry/friction, Fs = 42 kN, alpha = 6 deg
NOMINAL = dict(Fg=50.0, Fb=30.0, Fs=42.0, alpha=math.radians(6.0))
EXPECTED_NOMINAL = {
    "N1": 6.7826553117379913641,
    "N2": 48.405552696300047345,
    "N3": 11.656952539550374688,
    "N4": 11.656952539550374688,
    "Rx": -30.343047460449625312,
    "Ry": -38.251457119067443797,
    "Fh": 7.2693735011397308283,
}
FS_ZERO_N4 = 35.636363636363636364  # numerator of the N4 form vanishes


def rel_err(x, ref):
    return abs(x - ref) / (1.0 + abs(ref))


@pytest.fixture(scope="module")
def geom(cfg):
    return cfg.geometry


@pytest.fixture(scope="module")
def fric(cfg):
    return cfg.friction


def test_nominal_closed_form_matches_frozen_values(geom, fric):
    sol = braking_force(geom, fric, LoadCase(**NOMINAL))
    for name, ref in EXPECTED_NOMINAL.items():
        assert rel_err(getattr(sol, name), ref) < 1e-12, name
    assert sol.valid


def test_nominal_linear_solve_matches_frozen_values(geom, fric):
    sol = solve_equilibrium(geom, fric, LoadCase(**NOMINAL))
    for name, ref in EXPECTED_NOMINAL.items():
        assert rel_err(getattr(sol, name), ref) < 1e-12, name


def test_two_routes_agree_at_nominal(geom, fric):
    load = LoadCase(**NOMINAL)
    a = braking_force(geom, fric, load)
    b = solve_equilibrium(geom, fric, load)
    for name in ("N1", "N2", "N3", "N4", "Rx", "Ry", "Fh"):
        assert rel_err(getattr(a, name), getattr(b, name)) < 1e-12, name


def test_zero_loads_give_zero_everything(geom, fric):
    load = LoadCase(Fg=0.0, Fb=0.0, Fs=0.0, alpha=math.radians(6.0))
    for sol in (braking_force(geom, fric, load), solve_equilibrium(geom, fric, load)):
        for name in ("N1", "N2", "N3", "N4", "T1", "T2", "T3", "T4", "Fh"):
            assert getattr(sol, name) == pytest.approx(0.0, abs=1e-13), name
        assert sol.valid


def test_spring_force_that_zeroes_n4(geom, fric):
    load = LoadCase(Fg=50.0, Fb=30.0, Fs=FS_ZERO_N4, alpha=math.radians(6.0))
    n1, n2, n3, n4 = normal_forces(geom, fric, load)
    assert abs(n4) < 1e-12
    assert abs(n3 - n4) < 1e-12


def test_zero_spring_force_flags_invalid_without_clamping(geom, fric):
    sol = braking_force(geom, fric, LoadCase(Fg=50.0, Fb=30.0, Fs=0.0, alpha=math.radians(6.0)))
    assert not sol.valid
    assert sol.N4 < 0  # reported as-is
    assert sol.Fh == pytest.approx(-7.88688510315, rel=1e-9)
    oracle = solve_equilibrium(geom, fric, LoadCase(Fg=50.0, Fb=30.0, Fs=0.0, alpha=math.radians(6.0)))
    assert not oracle.valid
    assert rel_err(sol.Fh, oracle.Fh) < 1e-12


def test_friction_ratios_are_exact(geom, fric):
    sol = braking_force(geom, fric, LoadCase(**NOMINAL))
    assert sol.T1 == fric.mu1 * sol.N1
    assert sol.T2 == fric.mu2 * sol.N2
    assert sol.T3 == (geom.f / geom.R) * sol.N3
    assert sol.T4 == fric.mu4 * sol.N4
    assert sol.Fh == sol.T1 + sol.T2 + sol.T3 + sol.T4


def _random_cases(n, seed=20240817):
    """Geometry jittered +/-20%, alpha in [0, 18] deg, Fs in [0, 56] kN."""
    rng = np.random.default_rng(seed)
    base = dict(a=55.0, b=16.6, c=52.7, d=34.5, e=60.7, f=0.005,
                l=49.0, m=40.0, n=17.5, R=29.0)
    for _ in range(n):
        factors = rng.uniform(0.8, 1.2, size=len(base))
        geom = BrakeGeometry(**{k: v * s for (k, v), s in zip(base.items(), factors)})
        load = LoadCase(Fg=50.0, Fb=30.0,
                        Fs=float(rng.uniform(0.0, 56.0)),
                        alpha=math.radians(float(rng.uniform(0.0, 18.0))))
        yield geom, load


def test_randomized_sweep_routes_agree(fric):
    for geom, load in _random_cases(300):
        a = braking_force(geom, fric, load)
        b = solve_equilibrium(geom, fric, load)
        for name in ("N1", "N2", "N3", "N4", "Fh"):
            assert rel_err(getattr(a, name), getattr(b, name)) < 1e-10, name


def test_randomized_sweep_n3_equals_n4(fric):
    for geom, load in _random_cases(300, seed=7):
        for sol in (braking_force(geom, fric, load), solve_equilibrium(geom, fric, load)):
            assert abs(sol.N3 - sol.N4) <= 1e-12 * (1.0 + abs(sol.N4))


@pytest.mark.parametrize("fs_triple", [(0.0, 28.0, 56.0), (10.0, 25.0, 40.0)])
def test_braking_force_affine_in_spring_force(geom, fric, fs_triple):
    lo, mid, hi = fs_triple
    assert hi - mid == mid - lo

    def fh(fs):
        return braking_force(geom, fric, LoadCase(Fg=50.0, Fb=30.0, Fs=fs, alpha=math.radians(6.0))).Fh

    second_diff = fh(lo) + fh(hi) - 2.0 * fh(mid)
    assert abs(second_diff) < 1e-10 * (1.0 + abs(fh(mid)))


def test_braking_force_affine_in_weight_plus_inertia(geom, fric):
    def fh(fg):
        return braking_force(geom, fric, LoadCase(Fg=fg, Fb=0.0, Fs=42.0, alpha=math.radians(6.0))).Fh

    second_diff = fh(0.0) + fh(160.0) - 2.0 * fh(80.0)
    assert abs(second_diff) < 1e-10 * (1.0 + abs(fh(80.0)))


def test_singular_n4_denominator_raises(fric):
    # mu4*(n+l) == m exactly: 0.15 * 80 == 12
    geom = BrakeGeometry(a=55.0, b=16.6, c=52.7, d=34.5, e=60.7, f=0.005,
                         l=62.5, m=12.0, n=17.5, R=29.0)
    with pytest.raises(SingularDenominator) as err:
        normal_forces(geom, fric, LoadCase(**NOMINAL))
    assert "n+l" in err.value.name


def test_singular_n1_denominator_raises(fric):
    # choose c so the N1 denominator cancels at alpha = 0
    dwe = 34.5 + 60.7 * fric.mu2
    c_sing = 16.6 * fric.mu1 + dwe / fric.mu2
    geom = BrakeGeometry(a=55.0, b=16.6, c=c_sing, d=34.5, e=60.7, f=0.005,
                         l=49.0, m=40.0, n=17.5, R=29.0)
    with pytest.raises(SingularDenominator) as err:
        normal_forces(geom, fric, LoadCase(Fg=50.0, Fb=30.0, Fs=42.0, alpha=0.0))
    assert "cos(alpha)" in err.value.name


def test_ensemble_route_flags_singular_samples_instead_of_raising(fric):
    dwe = 34.5 + 60.7 * fric.mu2
    c_sing = 16.6 * fric.mu1 + dwe / fric.mu2
    geom = BrakeGeometry(a=55.0, b=16.6, c=c_sing, d=34.5, e=60.7, f=0.005,
                         l=49.0, m=40.0, n=17.5, R=29.0)
    sin_a, cos_a = trig_arrays([0.0, math.radians(6.0)])
    fh, valid, ok = braking_force_ensemble(geom, fric, 50.0, 30.0, sin_a, cos_a,
                                           np.array([42.0, 42.0]))
    assert not ok[0] and math.isnan(fh[0]) and not valid[0]
    assert ok[1] and math.isfinite(fh[1])


@pytest.mark.parametrize("bad", [
    dict(a=-1.0), dict(f=0.0), dict(f=30.0),  # f >= R
])
def test_geometry_validation(bad):
    base = dict(a=55.0, b=16.6, c=52.7, d=34.5, e=60.7, f=0.005,
                l=49.0, m=40.0, n=17.5, R=29.0)
    with pytest.raises(ValidationError):
        BrakeGeometry(**{**base, **bad})


@pytest.mark.parametrize("bad", [dict(mu1=0.0), dict(mu2=1.0), dict(mu4=-0.1)])
def test_friction_validation(bad):
    with pytest.raises(ValidationError):
        FrictionSet(**{**dict(mu1=0.1, mu2=0.1, mu4=0.15), **bad})


@pytest.mark.parametrize("bad", [
    dict(Fs=-1.0), dict(alpha=-0.01), dict(alpha=math.pi / 2),
])
def test_load_case_validation(bad):
    with pytest.raises(ValidationError):
        LoadCase(**{**NOMINAL, **bad})

"""Static model of a cam-actuated friction safety-gear brake.

A steel body, a pivoting cam and a knurled roller clamp an elevator guide.
Force and moment balance of the three parts, together with Coulomb friction
at three contacts and a rolling-resistance law at the roller/guide contact,
determine four contact normals N1..N4, the pivot reactions Rx, Ry and the
total braking force Fh.

Two independent evaluation routes are provided:

* ``braking_force`` evaluates the closed-form solution obtained by
  eliminating the reactions by hand (N4 first, then N1, N2, N3).
* ``solve_equilibrium`` assembles the six balance equations as a dense
  6x6 linear system and solves it numerically, never touching the closed
  forms.  It exists to cross-check the first route.

Units are fixed internally: lengths in mm, forces in kN, angles in radians.
Degrees are accepted only at the outermost boundaries (config, CLI) and
converted once.  All functions are pure; everything is safe to call from
any number of threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularDenominator, SingularSystem, ValidationError

#: Closed-form denominators with magnitude below this (in their natural
#: units) are treated as singular.  Far below any physical value.
SINGULAR_TOL = 1e-9


@dataclass(frozen=True)
class BrakeGeometry:
    """Lever arms and contact dimensions, all in mm (see field docs in README)."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    l: float
    m: float
    n: float
    R: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "e", "f", "l", "m", "n", "R"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"geometry length {name} must be > 0 mm", v)
        if not self.f < self.R:
            raise ValidationError("rolling ratio requires f < R", (self.f, self.R))


@dataclass(frozen=True)
class FrictionSet:
    """Coulomb friction coefficients at the three sliding contacts."""

    mu1: float
    mu2: float
    mu4: float

    def __post_init__(self):
        for name in ("mu1", "mu2", "mu4"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and 0.0 < v < 1.0):
                raise ValidationError(f"friction coefficient {name} out of (0, 1)", v)


@dataclass(frozen=True)
class LoadCase:
    """External loads (kN) and cam angle (radians)."""

    Fg: float
    Fb: float
    Fs: float
    alpha: float

    def __post_init__(self):
        for name in ("Fg", "Fb", "Fs"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValidationError(f"load {name} must be >= 0 kN", v)
        if not (0.0 <= self.alpha < math.pi / 2):
            raise ValidationError("cam angle must lie in [0, pi/2) rad", self.alpha)

    @classmethod
    def from_degrees(cls, Fg, Fb, Fs, alpha_deg):
        return cls(Fg=Fg, Fb=Fb, Fs=Fs, alpha=math.radians(alpha_deg))


@dataclass(frozen=True)
class EquilibriumSolution:
    """Complete force state for one load case.

    ``valid`` is True only when all four normals are non-negative, i.e. the
    contacts actually press.  Negative normals are reported as-is (never
    clamped) so that optimization can probe infeasible regions.
    """

    N1: float
    N2: float
    N3: float
    N4: float
    T1: float
    T2: float
    T3: float
    T4: float
    Rx: float
    Ry: float
    Fh: float
    valid: bool


def _normals(sin_a, cos_a, Fs, geom: BrakeGeometry, fric: FrictionSet, Fg, Fb):
    """Closed-form normals, elementwise over scalars or equally-shaped arrays.

    Evaluation order N4 -> N1 -> N2 -> N3.  The caller is responsible for
    checking the two denominators; this keeps one code path shared by the
    scalar route and the vectorized ensemble route (bitwise identical
    results either way).
    """
    den4 = fric.mu4 * (geom.n + geom.l) - geom.m
    dwe = geom.d + geom.e * fric.mu2
    den1 = fric.mu1 * sin_a + cos_a + fric.mu2 * (geom.b * fric.mu1 - geom.c) / dwe
    n4 = ((Fg + Fb) * geom.l / 2 - Fs * geom.a) / den4
    n1 = (n4 - geom.a * fric.mu2 * Fs / dwe) / den1
    n2 = (geom.a * Fs + (geom.b * fric.mu1 - geom.c) * n1) / dwe
    n3 = fric.mu2 * n2 + (fric.mu1 * sin_a + cos_a) * n1
    return n1, n2, n3, n4, den1, den4


def _check_denominators(sin_a, cos_a, geom, fric):
    """Raise before any division if either closed-form denominator is singular."""
    den4 = fric.mu4 * (geom.n + geom.l) - geom.m
    if abs(den4) <= SINGULAR_TOL:
        raise SingularDenominator("mu4*(n+l) - m", den4)
    dwe = geom.d + geom.e * fric.mu2
    den1 = fric.mu1 * sin_a + cos_a + fric.mu2 * (geom.b * fric.mu1 - geom.c) / dwe
    if abs(den1) <= SINGULAR_TOL:
        raise SingularDenominator("mu1*sin(alpha) + cos(alpha) + mu2*(b*mu1 - c)/(d + e*mu2)", den1)


def normal_forces(geom: BrakeGeometry, fric: FrictionSet, load: LoadCase):
    """Return the four closed-form contact normals (kN)."""
    sin_a, cos_a = math.sin(load.alpha), math.cos(load.alpha)
    _check_denominators(sin_a, cos_a, geom, fric)
    n1, n2, n3, n4, _, _ = _normals(sin_a, cos_a, load.Fs, geom, fric, load.Fg, load.Fb)
    return n1, n2, n3, n4


def _assemble_solution(geom, fric, load, n1, n2, n3, n4) -> EquilibriumSolution:
    t1 = fric.mu1 * n1
    t2 = fric.mu2 * n2
    t3 = (geom.f / geom.R) * n3
    t4 = fric.mu4 * n4
    return EquilibriumSolution(
        N1=n1, N2=n2, N3=n3, N4=n4,
        T1=t1, T2=t2, T3=t3, T4=t4,
        Rx=n4 - load.Fs,
        Ry=t4 - (load.Fg + load.Fb) / 2,
        Fh=t1 + t2 + t3 + t4,
        valid=bool(n1 >= 0 and n2 >= 0 and n3 >= 0 and n4 >= 0),
    )


def braking_force(geom: BrakeGeometry, fric: FrictionSet, load: LoadCase) -> EquilibriumSolution:
    """Full closed-form solution including friction forces, reactions and Fh."""
    sin_a, cos_a = math.sin(load.alpha), math.cos(load.alpha)
    _check_denominators(sin_a, cos_a, geom, fric)
    n1, n2, n3, n4, _, _ = _normals(sin_a, cos_a, load.Fs, geom, fric, load.Fg, load.Fb)
    return _assemble_solution(geom, fric, load, n1, n2, n3, n4)


def solve_equilibrium(geom: BrakeGeometry, fric: FrictionSet, load: LoadCase) -> EquilibriumSolution:
    """Solve the balance equations directly as a dense 6x6 linear system.

    Unknowns are (N1, N2, N3, N4, Rx, Ry).  The six rows are the body x/y
    and moment balances, the cam-wedge x and moment balances and the roller
    x balance, with the friction laws substituted.  The roller y balance is
    intentionally not assembled: it is redundant against the rolling
    resistance law and the hand elimination never uses it.  This route makes
    no use of the closed forms and serves as an independent check on them.
    """
    sin_a, cos_a = math.sin(load.alpha), math.cos(load.alpha)
    mu1, mu2, mu4 = fric.mu1, fric.mu2, fric.mu4
    axial = cos_a + mu1 * sin_a

    mat = np.array([
        # N1          N2                        N3   N4                            Rx    Ry
        [0.0,         0.0,                      0.0, -1.0,                         1.0,  0.0],
        [0.0,         0.0,                      0.0, mu4,                          0.0, -1.0],
        [0.0,         0.0,                      0.0, geom.m - mu4 * geom.n,        0.0, -geom.l],
        [axial,       mu2,                      0.0, 0.0,                          -1.0, 0.0],
        [mu1 * geom.b - geom.c, -(geom.d + mu2 * geom.e), 0.0, 0.0,                0.0,  0.0],
        [-axial,      -mu2,                     1.0, 0.0,                          0.0,  0.0],
    ])
    rhs = np.array([
        -load.Fs,
        (load.Fg + load.Fb) / 2,
        load.Fs * geom.a,
        load.Fs,
        -load.Fs * geom.a,
        0.0,
    ])

    cond = np.linalg.cond(mat)
    if not np.isfinite(cond):
        raise SingularSystem(f"equilibrium system is rank deficient (cond={cond!r})")
    try:
        sol = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"equilibrium system is singular: {exc}") from exc

    n1, n2, n3, n4, rx, ry = (float(v) for v in sol)
    t1, t2 = mu1 * n1, mu2 * n2
    t3, t4 = (geom.f / geom.R) * n3, mu4 * n4
    return EquilibriumSolution(
        N1=n1, N2=n2, N3=n3, N4=n4,
        T1=t1, T2=t2, T3=t3, T4=t4,
        Rx=rx, Ry=ry,
        Fh=t1 + t2 + t3 + t4,
        valid=bool(n1 >= 0 and n2 >= 0 and n3 >= 0 and n4 >= 0),
    )


def trig_arrays(alpha_rad):
    """Per-element sin/cos arrays built with scalar math calls.

    Using ``math.sin``/``math.cos`` per element keeps ensemble evaluation
    bitwise identical to the scalar route regardless of array layout,
    chunking or thread count.
    """
    sin_a = np.array([math.sin(float(v)) for v in np.asarray(alpha_rad).ravel()])
    cos_a = np.array([math.cos(float(v)) for v in np.asarray(alpha_rad).ravel()])
    return sin_a, cos_a


def braking_force_ensemble(geom, fric, Fg, Fb, sin_a, cos_a, Fs):
    """Vectorized closed form over sample arrays of cam angle and spring force.

    Returns ``(fh, valid, ok)``.  ``ok[i]`` is False where a denominator is
    singular for that sample; such entries carry ``fh = nan`` and
    ``valid = False`` instead of aborting the batch.
    """
    sin_a = np.asarray(sin_a, dtype=float)
    cos_a = np.asarray(cos_a, dtype=float)
    Fs = np.asarray(Fs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        n1, n2, n3, n4, den1, den4 = _normals(sin_a, cos_a, Fs, geom, fric, Fg, Fb)
        fh = fric.mu1 * n1 + fric.mu2 * n2 + (geom.f / geom.R) * n3 + fric.mu4 * n4
        ok = np.abs(den1) > SINGULAR_TOL
        if abs(den4) <= SINGULAR_TOL:
            ok = np.zeros_like(ok)
        fh = np.where(ok, fh, np.nan)
        valid = ok & (n1 >= 0) & (n2 >= 0) & (n3 >= 0) & (n4 >= 0)
    return fh, valid, ok

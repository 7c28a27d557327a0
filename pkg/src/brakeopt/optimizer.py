"""Classical and robust design optimization over the (a, c) box.

Both problems maximize over a rectangle of the two geometry fields a and c.
The classical objective is the braking force at the nominal operating
point.  The robust objective is a convex combination of ensemble
statistics, beta1*min + beta2*max + beta3*mean + beta4/std, evaluated on a
Monte Carlo ensemble that reuses one fixed uniform matrix at every design
point (common random numbers), which makes it a deterministic function of
the design.  The robust problem additionally requires the empirical chance
constraint P{|Y| > y*} >= 1 - P_r; infeasible candidates are rejected, the
solver never returns one.

The local solver is a multi-start projected ascent with finite-difference
gradients, run in box-normalized coordinates.  Every optimization is
cross-checked against a dense grid scan whose best (feasible) cell is
returned as a certificate; the reported optimum always dominates it.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import maxent, mc_uq, mechmodel
from .errors import (
    AllStartsFailed,
    DegenerateEnsemble,
    NoFeasiblePoint,
    SingularDenominator,
    ValidationError,
)

GRID_KINDS = ("classical", "robust", "constraint")


@dataclass(frozen=True)
class DesignPoint:
    a: float
    c: float


@dataclass(frozen=True)
class DesignBox:
    a_min: float = 50.0
    a_max: float = 60.0
    c_min: float = 50.0
    c_max: float = 55.0

    def __post_init__(self):
        if not (self.a_min <= self.a_max and self.c_min <= self.c_max):
            raise ValidationError(
                "design box requires a_min <= a_max and c_min <= c_max",
                (self.a_min, self.a_max, self.c_min, self.c_max),
            )

    def contains(self, s: DesignPoint) -> bool:
        return self.a_min <= s.a <= self.a_max and self.c_min <= s.c <= self.c_max

    def unmap(self, ua: float, uc: float) -> DesignPoint:
        """Map unit-square coordinates to a design point."""
        return DesignPoint(
            a=self.a_min + ua * (self.a_max - self.a_min),
            c=self.c_min + uc * (self.c_max - self.c_min),
        )


@dataclass(frozen=True)
class RobustWeights:
    beta1: float = 0.2
    beta2: float = 0.2
    beta3: float = 0.2
    beta4: float = 0.4

    def __post_init__(self):
        betas = (self.beta1, self.beta2, self.beta3, self.beta4)
        if any(b < 0 for b in betas):
            raise ValidationError("robust weights must be >= 0", betas)
        if abs(sum(betas) - 1.0) > 1e-12:
            raise ValidationError("robust weights must sum to 1", sum(betas))


@dataclass(frozen=True)
class ConstraintSpec:
    y_star: float = 0.5
    p_r: float = 0.05

    def __post_init__(self):
        if self.y_star < 0:
            raise ValidationError("constraint level y_star must be >= 0 kN", self.y_star)
        if not 0.0 < self.p_r < 1.0:
            raise ValidationError("reference probability p_r must lie in (0, 1)", self.p_r)


@dataclass(frozen=True)
class ModelSetup:
    """Deterministic plant and the nominal operating point."""

    geom: mechmodel.BrakeGeometry
    fric: mechmodel.FrictionSet
    Fg: float
    Fb: float
    alpha_nominal_deg: float
    fs_nominal_kn: float


@dataclass(frozen=True)
class OptimizationResult:
    s_opt: DesignPoint
    objective: float
    feasible: bool
    evaluations: int
    certificate_value: float
    certificate_point: DesignPoint
    constraint_prob: float | None = None


@dataclass(frozen=True)
class GridScan:
    kind: str
    a_values: np.ndarray
    c_values: np.ndarray
    values: np.ndarray  # shape (len(a_values), len(c_values)), nan = failed cell


def _geometry_at(setup: ModelSetup, s: DesignPoint) -> mechmodel.BrakeGeometry:
    return dataclasses.replace(setup.geom, a=s.a, c=s.c)


def classical_objective(s: DesignPoint, setup: ModelSetup) -> float:
    """Braking force (kN) at the nominal loads with a, c overridden by s."""
    load = mechmodel.LoadCase.from_degrees(
        setup.Fg, setup.Fb, setup.fs_nominal_kn, setup.alpha_nominal_deg)
    return mechmodel.braking_force(_geometry_at(setup, s), setup.fric, load).Fh


@dataclass(frozen=True)
class _CrnInputs:
    """Ensemble inputs transformed once and shared across design points."""

    sin_a: np.ndarray
    cos_a: np.ndarray
    fs: np.ndarray


def _prepare_crn(input_model: maxent.InputModel, uniforms: mc_uq.UniformMatrix) -> _CrnInputs:
    u = uniforms.values
    alpha_deg = [maxent.sample_inverse_cdf(input_model.alpha_dist, v) for v in u[:, 0]]
    fs = np.array([maxent.sample_inverse_cdf(input_model.fs_dist, v) for v in u[:, 1]])
    sin_a, cos_a = mechmodel.trig_arrays([math.radians(v) for v in alpha_deg])
    return _CrnInputs(sin_a=sin_a, cos_a=cos_a, fs=fs)


def _ensemble_fh(setup: ModelSetup, crn: _CrnInputs, s: DesignPoint) -> np.ndarray:
    fh, _, _ = mechmodel.braking_force_ensemble(
        _geometry_at(setup, s), setup.fric, setup.Fg, setup.Fb, crn.sin_a, crn.cos_a, crn.fs)
    return fh


def _robust_value(weights: RobustWeights, fh: np.ndarray) -> float:
    """beta1*min + beta2*max + beta3*mean + beta4/std over the sample; nan if
    any sample failed to evaluate."""
    if not np.all(np.isfinite(fh)):
        return float("nan")
    value = (weights.beta1 * float(np.min(fh))
             + weights.beta2 * float(np.max(fh))
             + weights.beta3 * float(np.mean(fh)))
    if weights.beta4 > 0.0:
        std = float(np.std(fh, ddof=1))
        if std == 0.0:
            raise DegenerateEnsemble("ensemble std is zero while beta4 > 0")
        value += weights.beta4 / std
    return value


def _constraint_value(cspec: ConstraintSpec, fh: np.ndarray) -> float:
    # non-evaluable samples count as violations
    hits = np.count_nonzero(np.isfinite(fh) & (np.abs(fh) > cspec.y_star))
    return hits / fh.shape[0]


def robust_objective(
    s: DesignPoint,
    weights: RobustWeights,
    uniforms: mc_uq.UniformMatrix,
    input_model: maxent.InputModel,
    setup: ModelSetup,
) -> float:
    """Robust objective at one design under common random numbers.

    Bit-identical for identical (s, uniforms, model, setup).  Inside
    optimization loops prefer the cached path used by
    :func:`optimize_robust`; this entry transforms the uniforms on each call.
    """
    crn = _prepare_crn(input_model, uniforms)
    return _robust_value(weights, _ensemble_fh(setup, crn, s))


def empirical_constraint(
    s: DesignPoint,
    cspec: ConstraintSpec,
    uniforms: mc_uq.UniformMatrix,
    input_model: maxent.InputModel,
    setup: ModelSetup,
) -> float:
    """Fraction of ensemble samples with |Fh| above the constraint level."""
    crn = _prepare_crn(input_model, uniforms)
    return _constraint_value(cspec, _ensemble_fh(setup, crn, s))


def _ascend(evaluate, u0, max_iter: int = 200, step0: float = 0.25, step_min: float = 1e-8,
            fd_step: float = 1e-4):
    """Projected finite-difference ascent on the unit square.

    ``evaluate(ua, uc)`` returns the objective or None for a rejected or
    failed point.  Steps and the FD stencil are fractions of the box width;
    the search stops when the step underflows ``step_min`` or after
    ``max_iter`` iterations.  Returns (u, value) or None if even the start
    fails.
    """
    u = np.array(u0, dtype=float)
    fx = evaluate(u[0], u[1])
    if fx is None:
        return None

    step = step0
    for _ in range(max_iter):
        if step < step_min:
            break
        grad = np.zeros(2)
        for ax in range(2):
            up, um = u.copy(), u.copy()
            up[ax] = min(up[ax] + fd_step, 1.0)
            um[ax] = max(um[ax] - fd_step, 0.0)
            if up[ax] == um[ax]:
                continue
            fp = evaluate(up[0], up[1])
            fm = evaluate(um[0], um[1])
            if fp is None or fm is None:
                continue
            grad[ax] = (fp - fm) / (up[ax] - um[ax])
        norm = math.hypot(grad[0], grad[1])
        if norm == 0.0:
            step *= 0.5
            continue
        cand = np.clip(u + step * grad / norm, 0.0, 1.0)
        fc = evaluate(cand[0], cand[1])
        if fc is not None and fc > fx:
            u, fx = cand, fc
            step = min(step * 2.0, 0.5)
        else:
            step *= 0.5
    return u, fx


def _grid_axes(box: DesignBox, nx: int, ny: int):
    if nx < 2 or ny < 2:
        raise ValidationError("grid resolution must be at least 2x2", (nx, ny))
    return np.linspace(box.a_min, box.a_max, nx), np.linspace(box.c_min, box.c_max, ny)


def _grid_argmax(a_values, c_values, values):
    """Best finite cell; row-major first occurrence, i.e. lexicographic
    smallest (a, c) among ties.  None if the whole grid is nan."""
    if not np.any(np.isfinite(values)):
        return None
    flat = np.nanargmax(values)
    i, j = np.unravel_index(flat, values.shape)
    return DesignPoint(a=float(a_values[i]), c=float(c_values[j])), float(values[i, j])


def grid_scan(
    box: DesignBox,
    nx: int,
    ny: int,
    kind: str,
    setup: ModelSetup,
    input_model: maxent.InputModel | None = None,
    weights: RobustWeights | None = None,
    cspec: ConstraintSpec | None = None,
    seed: int = 0,
    nu: int = 4096,
) -> GridScan:
    """Evaluate one of the three maps on a dense row-major lattice.

    kind 'classical' needs only the setup; 'robust' and 'constraint' draw a
    single uniform matrix from (seed, nu) and reuse it at every cell.
    Failed cells are recorded as nan, never raised.
    """
    if kind not in GRID_KINDS:
        raise ValidationError(f"grid kind must be one of {GRID_KINDS}", kind)
    a_values, c_values = _grid_axes(box, nx, ny)
    values = np.full((nx, ny), np.nan)

    if kind == "classical":
        for i, a in enumerate(a_values):
            for j, c in enumerate(c_values):
                try:
                    values[i, j] = classical_objective(DesignPoint(a=float(a), c=float(c)), setup)
                except SingularDenominator:
                    pass
        return GridScan(kind=kind, a_values=a_values, c_values=c_values, values=values)

    if input_model is None:
        raise ValidationError("robust/constraint grid scan needs an input model", kind)
    crn = _prepare_crn(input_model, mc_uq.draw_uniform_matrix(seed, nu))
    weights = weights if weights is not None else RobustWeights()
    cspec = cspec if cspec is not None else ConstraintSpec()
    for i, a in enumerate(a_values):
        for j, c in enumerate(c_values):
            fh = _ensemble_fh(setup, crn, DesignPoint(a=float(a), c=float(c)))
            if kind == "constraint":
                values[i, j] = _constraint_value(cspec, fh)
            else:
                try:
                    values[i, j] = _robust_value(weights, fh)
                except DegenerateEnsemble:
                    pass
    return GridScan(kind=kind, a_values=a_values, c_values=c_values, values=values)


def _start_lattice(starts: int):
    pts = np.linspace(0.0, 1.0, starts)
    return [(ua, uc) for ua in pts for uc in pts]


def optimize_classical(
    box: DesignBox,
    setup: ModelSetup,
    grid: tuple[int, int] = (101, 51),
    starts: int = 5,
) -> OptimizationResult:
    """Maximize the nominal braking force over the box.

    Multi-start projected ascent from a starts x starts lattice, then the
    result is checked against (and never undercuts) a dense grid certificate.
    """
    evals = [0]

    def evaluate(ua, uc):
        evals[0] += 1
        try:
            return classical_objective(box.unmap(ua, uc), setup)
        except SingularDenominator:
            return None

    best = None
    for u0 in _start_lattice(starts):
        res = _ascend(evaluate, u0)
        if res is not None and (best is None or res[1] > best[1]):
            best = res
    if best is None:
        raise AllStartsFailed("every ascent start hit a singular evaluation")

    scan = grid_scan(box, grid[0], grid[1], "classical", setup)
    evals[0] += grid[0] * grid[1]
    cert = _grid_argmax(scan.a_values, scan.c_values, scan.values)
    if cert is None:
        cert_point, cert_value = box.unmap(*best[0]), best[1]
    else:
        cert_point, cert_value = cert

    if best[1] >= cert_value:
        s_opt, objective = box.unmap(*best[0]), best[1]
    else:
        s_opt, objective = cert_point, cert_value
    return OptimizationResult(
        s_opt=s_opt, objective=objective, feasible=True, evaluations=evals[0],
        certificate_value=cert_value, certificate_point=cert_point)


def optimize_robust(
    box: DesignBox,
    weights: RobustWeights,
    cspec: ConstraintSpec,
    seed: int,
    setup: ModelSetup,
    input_model: maxent.InputModel,
    nu: int = 4096,
    grid: tuple[int, int] = (101, 51),
    starts: int = 5,
) -> OptimizationResult:
    """Maximize the robust objective subject to the chance constraint.

    One uniform matrix is drawn from (seed, nu) and reused at every design
    point, so the whole optimization is a pure function of its arguments.
    Candidates violating the constraint are rejected during the ascent; the
    certificate is the best feasible cell of the dense grid.  Raises
    NoFeasiblePoint when the certificate grid contains no feasible cell.
    """
    crn = _prepare_crn(input_model, mc_uq.draw_uniform_matrix(seed, nu))
    threshold = 1.0 - cspec.p_r
    evals = [0]

    def stats_at(s: DesignPoint):
        evals[0] += 1
        fh = _ensemble_fh(setup, crn, s)
        prob = _constraint_value(cspec, fh)
        try:
            value = _robust_value(weights, fh)
        except DegenerateEnsemble:
            return float("nan"), prob
        return value, prob

    def evaluate(ua, uc):
        value, prob = stats_at(box.unmap(ua, uc))
        if prob < threshold or not math.isfinite(value):
            return None
        return value

    best = None
    for u0 in _start_lattice(starts):
        res = _ascend(evaluate, u0)
        if res is not None and (best is None or res[1] > best[1]):
            best = res

    # feasible-grid certificate, reusing the same CRN inputs
    a_values, c_values = _grid_axes(box, grid[0], grid[1])
    feasible_values = np.full((grid[0], grid[1]), np.nan)
    for i, a in enumerate(a_values):
        for j, c in enumerate(c_values):
            value, prob = stats_at(DesignPoint(a=float(a), c=float(c)))
            if prob >= threshold and math.isfinite(value):
                feasible_values[i, j] = value
    cert = _grid_argmax(a_values, c_values, feasible_values)
    if cert is None:
        raise NoFeasiblePoint(
            f"no cell of the {grid[0]}x{grid[1]} certificate grid satisfies "
            f"P(|Fh| > {cspec.y_star}) >= {threshold}")
    cert_point, cert_value = cert

    if best is not None and best[1] >= cert_value:
        s_opt, objective = box.unmap(*best[0]), best[1]
    else:
        s_opt, objective = cert_point, cert_value
    prob_at_opt = _constraint_value(cspec, _ensemble_fh(setup, crn, s_opt))
    return OptimizationResult(
        s_opt=s_opt, objective=objective, feasible=True, evaluations=evals[0],
        certificate_value=cert_value, certificate_point=cert_point,
        constraint_prob=prob_at_opt)

"""Positive supporting hyperplanes at a reference criterion vector.

The support margin LP looks for weights w on the simplex keeping every sample
point on the non-positive side of the hyperplane through the reference:

    maximize t   s.t.   sum(w) = 1,   w_i >= t,   <w, y - y_ref> <= 0  for all y

A margin t* > 0 certifies a strictly increasing linear value function that is
maximized at the reference over the sample; we then upgrade it to a strictly
concave witness v(y) = <w, y> - eps * ||y - y_ref||^2 certified on a box.
When the hard constraints are infeasible the margin is recomputed with soft
cuts, yielding a negative margin that quantifies the violation trend.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BoxTooSmall, NotSupported, NumericalBreakdown, SchemaError
from .linprog import EQ, GE, LE, lp_instance, solve_lp
from .problems import (
    AnalyticProblem,
    AxisSpec,
    GridSpec,
    RefinementSchedule,
    point_rows,
    sample_criterion_space,
)

VANISHING = "vanishing"
PERSISTENT = "persistent"


@dataclass(frozen=True)
class MarginReport:
    margin: float
    weights: tuple[float, ...] | None  # present when the margin is positive
    binding: tuple[int, ...]
    feasible: bool  # False when even a zero margin is unattainable
    y_ref: tuple[float, ...]
    sample_size: int


@dataclass(frozen=True)
class TrendReport:
    levels: tuple[int, ...]
    offsets: tuple[float, ...]
    margins: tuple[float, ...]
    verdict: str  # 'vanishing' | 'persistent'
    threshold: float
    fitted_exponent: float | None
    last: MarginReport


@dataclass(frozen=True)
class ValueFunctionWitness:
    """v(y) = <weights, y> - curvature * ||y - anchor||^2, certified on ``box``."""

    weights: tuple[float, ...]
    curvature: float
    anchor: tuple[float, ...]
    box: tuple[tuple[float, float], ...]

    def value(self, y) -> float:
        w = np.asarray(self.weights)
        a = np.asarray(self.anchor)
        yv = np.asarray(y, dtype=float)
        return float(w @ yv - self.curvature * float((yv - a) @ (yv - a)))

    def gradient(self, y) -> tuple[float, ...]:
        w = np.asarray(self.weights)
        a = np.asarray(self.anchor)
        yv = np.asarray(y, dtype=float)
        return tuple(w - 2.0 * self.curvature * (yv - a))


@dataclass(frozen=True)
class WitnessCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class WitnessVerification:
    checks: tuple[WitnessCheck, ...]
    all_passed: bool


def support_margin(cloud, y_ref, *, tol: float = 1e-8) -> MarginReport:
    """Solve the support margin LP for a sample against a reference point."""
    rows = point_rows(cloud)
    ref = tuple(float(v) for v in y_ref)
    p = len(ref)
    if len(rows[0]) != p:
        raise SchemaError(f"reference has dimension {p}, cloud has {len(rows[0])}")
    diffs = np.asarray(rows, dtype=float) - np.asarray(ref)
    out = _margin_lp(diffs, p, soft=False)
    feasible = out.status == "optimal"
    if not feasible:
        out = _margin_lp(diffs, p, soft=True)
        if out.status != "optimal":
            raise NumericalBreakdown("support margin relaxation did not solve")
    margin = float(out.value)
    weights: tuple[float, ...] | None = None
    binding: tuple[int, ...] = ()
    if feasible and margin > tol:
        w = np.asarray(out.x[:p])
        weights = tuple(float(v) for v in w)
        slack = diffs @ w
        binding = tuple(int(i) for i in np.flatnonzero(np.abs(slack) <= tol))
    return MarginReport(
        margin=margin,
        weights=weights,
        binding=binding,
        feasible=feasible,
        y_ref=ref,
        sample_size=len(rows),
    )


def _margin_lp(diffs: np.ndarray, p: int, soft: bool):
    n = p + 1  # weights plus the margin variable
    # each cut has zero right-hand side, so per-row normalization changes
    # nothing mathematically and keeps pivots well away from the tolerance
    scale = np.max(np.abs(diffs), axis=1)
    scale[scale == 0.0] = 1.0
    cuts = np.unique(diffs / scale[:, None], axis=0)  # duplicate rays are redundant
    m = cuts.shape[0]
    A = np.zeros((1 + p + m, n))
    b = np.zeros(1 + p + m)
    relations = []
    A[0, :p] = 1.0
    b[0] = 1.0
    relations.append(EQ)
    for i in range(p):
        A[1 + i, i] = 1.0
        A[1 + i, p] = -1.0
        relations.append(GE)
    A[1 + p :, :p] = cuts
    if soft:
        A[1 + p :, p] = 1.0
    relations.extend([LE] * m)
    c = np.zeros(n)
    c[p] = 1.0
    inst = lp_instance(
        c, A, b, tuple(relations), lower=np.full(n, -np.inf), upper=np.full(n, np.inf)
    )
    return solve_lp(inst)


def support_trend(
    problem: AnalyticProblem,
    y_ref,
    schedule: RefinementSchedule,
    *,
    persistent_threshold: float = 1e-3,
) -> TrendReport:
    """Margin sequence across geometric refinement toward the schedule anchor.

    Level clouds are nested, so the sequence is nonincreasing; the verdict is
    'persistent' when the final margin stays above the threshold and
    'vanishing' otherwise.
    """
    if schedule.levels < 1:
        raise SchemaError("refinement schedule needs at least one level")
    if schedule.anchor is None:
        raise SchemaError("support trend needs a decision anchor in the schedule")
    anchor = tuple(float(v) for v in schedule.anchor)
    ref = tuple(float(v) for v in y_ref)
    levels = []
    offsets = []
    margins = []
    last: MarginReport | None = None
    for k in range(1, schedule.levels + 1):
        axes = tuple(
            (AxisSpec.geometric(anchor[d], k, schedule.scale),)
            for d in range(problem.decision_dim)
        )
        cloud_k = sample_criterion_space(problem, GridSpec(axes))
        last = support_margin(cloud_k, ref)
        levels.append(k)
        offsets.append(schedule.scale * 2.0 ** (-k))
        margins.append(last.margin)
    verdict = PERSISTENT if margins[-1] >= persistent_threshold else VANISHING
    positive = [m for m in margins if m > 0]
    fitted = None
    if len(positive) == len(margins) and len(margins) >= 2:
        fitted = float(
            np.polyfit(np.log(np.asarray(offsets)), np.log(np.asarray(margins)), 1)[0]
        )
    assert last is not None
    return TrendReport(
        levels=tuple(levels),
        offsets=tuple(offsets),
        margins=tuple(margins),
        verdict=verdict,
        threshold=persistent_threshold,
        fitted_exponent=fitted,
        last=last,
    )


def build_witness(
    y_ref, weights, box, cloud, *, curvature: float | None = None
) -> ValueFunctionWitness:
    """Construct the quadratic witness from positive support weights.

    The default curvature is half the largest value keeping the gradient
    strictly positive across the box; pass ``curvature=0.0`` for the purely
    linear witness (concave but not strictly).
    """
    anchor = tuple(float(v) for v in y_ref)
    w = tuple(float(v) for v in weights)
    p = len(anchor)
    if len(w) != p:
        raise NotSupported(f"expected {p} weights, got {len(w)}")
    if any(v <= 0 for v in w):
        raise NotSupported("witness construction needs strictly positive weights")
    box_t = tuple((float(lo), float(hi)) for lo, hi in box)
    if len(box_t) != p:
        raise BoxTooSmall(f"box has {len(box_t)} dimensions, expected {p}")
    widths = [hi - lo for lo, hi in box_t]
    if any(width <= 0 for width in widths):
        raise BoxTooSmall("witness box must have positive width in every dimension")
    for i, (lo, hi) in enumerate(box_t):
        if not lo <= anchor[i] <= hi:
            raise BoxTooSmall(f"anchor coordinate {i} outside the box")
    for idx, y in enumerate(point_rows(cloud)):
        for i, (lo, hi) in enumerate(box_t):
            if not lo <= y[i] <= hi:
                raise BoxTooSmall(f"cloud point {idx} outside the box in dimension {i}")
    if curvature is None:
        curvature = 0.5 * min(w[i] / (2.0 * widths[i]) for i in range(p))
    elif curvature < 0:
        raise NotSupported("curvature must be nonnegative")
    elif curvature > 0 and any(w[i] - 2.0 * curvature * widths[i] <= 0 for i in range(p)):
        raise NotSupported("curvature too large: the witness would not be increasing on the box")
    return ValueFunctionWitness(weights=w, curvature=float(curvature), anchor=anchor, box=box_t)


def verify_witness(
    witness: ValueFunctionWitness,
    cloud,
    *,
    tie_tol: float = 1e-12,
    grid_resolution: int = 0,
) -> WitnessVerification:
    """Mechanically check the three witness properties against a sample.

    (a) strictly increasing on the box: the gradient is affine, so positivity
    at every corner suffices; (b) strict concavity is exactly curvature > 0;
    (c) the anchor strictly beats every other sample point. A positive
    ``grid_resolution`` adds a redundant gradient scan over a box grid.
    """
    checks: list[WitnessCheck] = []
    corners = itertools.product(*witness.box)
    worst_component = np.inf
    for corner in corners:
        grad = witness.gradient(corner)
        worst_component = min(worst_component, min(grad))
    checks.append(
        WitnessCheck(
            name="strictly_increasing_on_box",
            passed=bool(worst_component > 0),
            detail=f"minimum gradient component over box corners: {worst_component}",
        )
    )
    if witness.curvature > 0:
        checks.append(
            WitnessCheck(
                name="strictly_concave",
                passed=True,
                detail=f"curvature {witness.curvature} > 0",
            )
        )
    else:
        checks.append(
            WitnessCheck(name="strictly_concave", passed=False, detail="concave, not strictly")
        )
    anchor_value = witness.value(witness.anchor)
    worst_gap = np.inf
    worst_index = None
    anchor = tuple(witness.anchor)
    for idx, y in enumerate(point_rows(cloud)):
        if tuple(y) == anchor:
            continue
        gap = anchor_value - witness.value(y)
        if gap < worst_gap:
            worst_gap = gap
            worst_index = idx
    if worst_index is None:
        checks.append(
            WitnessCheck(
                name="unique_maximum_over_sample",
                passed=True,
                detail="sample contains no point other than the anchor",
            )
        )
    else:
        checks.append(
            WitnessCheck(
                name="unique_maximum_over_sample",
                passed=bool(worst_gap > tie_tol),
                detail=f"smallest value gap {worst_gap} at sample index {worst_index}",
            )
        )
    if grid_resolution > 0:
        axes = [np.linspace(lo, hi, grid_resolution) for lo, hi in witness.box]
        min_grid = np.inf
        for node in itertools.product(*axes):
            min_grid = min(min_grid, min(witness.gradient(node)))
        checks.append(
            WitnessCheck(
                name="gradient_positive_on_grid",
                passed=bool(min_grid > 0),
                detail=f"minimum gradient component over {grid_resolution}^p grid: {min_grid}",
            )
        )
    return WitnessVerification(checks=tuple(checks), all_passed=all(c.passed for c in checks))

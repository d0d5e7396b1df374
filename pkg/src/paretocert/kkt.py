"""KKT-based obstruction certificates at a reference criterion vector.

For a point with an active constraint description of the criterion space,
any concave value function v maximized there must have a supergradient of the
form sigma = sum mu_k grad g_k + sum lambda_j grad h_j with mu >= 0 (the
stationarity condition, valid under LICQ). If v is also strictly increasing,
sigma must be strictly positive. The obstruction LP maximizes the smallest
component of sigma over the normalized multiplier set

    sum mu + sum |lambda| = 1,

so a nonpositive optimum proves that no strictly increasing concave value
function attains its maximum over the described set at the reference point.
Conclusions are conditional on LICQ and on the constraints being smooth at
the point; both assumptions are embedded in the certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exprlang
from .errors import (
    DimensionError,
    InfeasiblePoint,
    LicqNotVerified,
    NoConstraintDescription,
    NumericalBreakdown,
)
from .linprog import EQ, GE, lp_instance, solve_lp
from .problems import AnalyticProblem

OBSTRUCTION = "obstruction"
NO_OBSTRUCTION = "no_obstruction"

ASSUMPTIONS = (
    "LICQ at the reference point",
    "constraint functions differentiable at the reference point",
    "value function concave and strictly increasing",
)


@dataclass(frozen=True)
class ActiveSet:
    """Active inequality indices, all equality indices, and their gradients
    (one row per active constraint, inequalities first)."""

    y_ref: tuple[float, ...]
    active_ineq: tuple[int, ...]
    eq: tuple[int, ...]
    gradients: np.ndarray
    ineq_values: tuple[float, ...]
    eq_values: tuple[float, ...]


@dataclass(frozen=True)
class LicqReport:
    rows: int
    rank: int
    singular_values: tuple[float, ...]
    holds: bool
    tol: float


@dataclass(frozen=True)
class ObstructionCertificate:
    conclusion: str  # 'obstruction' | 'no_obstruction'
    s_star: float | None
    licq: LicqReport
    sigma: tuple[float, ...]
    mu: tuple[float, ...]
    lam: tuple[float, ...]
    tol: float
    probe_direction: int | None
    probe_line: str | None
    assumptions: tuple[str, ...] = ASSUMPTIONS


def active_set(
    problem: AnalyticProblem,
    y_ref,
    *,
    tol_active: float = 1e-7,
    tol_feas: float = 1e-9,
) -> ActiveSet:
    """Identify active constraints at ``y_ref`` and evaluate their gradients."""
    if not isinstance(problem, AnalyticProblem) or not problem.has_constraints:
        raise NoConstraintDescription(
            "the problem carries no criterion-space constraint description"
        )
    ref = tuple(float(v) for v in y_ref)
    if len(ref) != problem.criterion_dim:
        raise DimensionError(
            f"point has length {len(ref)}, expected {problem.criterion_dim}"
        )
    g_vals = []
    for k, expr in enumerate(problem.ineq):
        val = exprlang.evaluate(expr, ref)
        if val > tol_feas:
            raise InfeasiblePoint(f"g[{k}]({ref}) = {val} > {tol_feas}")
        g_vals.append(val)
    h_vals = []
    for j, expr in enumerate(problem.eq):
        val = exprlang.evaluate(expr, ref)
        if abs(val) > tol_feas:
            raise InfeasiblePoint(f"h[{j}]({ref}) = {val}, not zero within {tol_feas}")
        h_vals.append(val)
    g_vals = tuple(g_vals)
    h_vals = tuple(h_vals)
    active = tuple(k for k, val in enumerate(g_vals) if abs(val) <= tol_active)
    rows = [exprlang.gradient(problem.ineq[k], ref) for k in active]
    rows += [exprlang.gradient(expr, ref) for expr in problem.eq]
    gradients = np.asarray(rows, dtype=float).reshape(len(rows), problem.criterion_dim)
    return ActiveSet(
        y_ref=ref,
        active_ineq=active,
        eq=tuple(range(len(problem.eq))),
        gradients=gradients,
        ineq_values=g_vals,
        eq_values=h_vals,
    )


def licq_check(active: ActiveSet, *, tol_rank: float = 1e-8) -> LicqReport:
    """Rank of the active gradient matrix via SVD; LICQ needs full row rank."""
    rows = active.gradients.shape[0]
    if rows == 0:
        return LicqReport(rows=0, rank=0, singular_values=(), holds=True, tol=tol_rank)
    sv = np.linalg.svd(active.gradients, compute_uv=False)
    rank = int(np.sum(sv > tol_rank))
    return LicqReport(
        rows=rows,
        rank=rank,
        singular_values=tuple(float(s) for s in sv),
        holds=rank == rows,
        tol=tol_rank,
    )


def _fmt_coord(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return repr(value)


def _probe_line(y_ref: tuple[float, ...], direction: int) -> str:
    bumped = list(y_ref)
    bumped[direction] += 1.0
    at = ",".join(_fmt_coord(v) for v in bumped)
    ref = ",".join(_fmt_coord(v) for v in y_ref)
    return f"v({at}) < v({ref}) forced: contradicts strict increase"


def obstruction_test(
    active: ActiveSet, *, licq: LicqReport | None = None, tol: float = 1e-9
) -> ObstructionCertificate:
    """Decide whether any KKT-admissible supergradient is strictly positive.

    Solves: maximize s subject to sigma_i >= s for every criterion i, with
    sigma = mu @ G_ineq + lambda @ G_eq, mu >= 0, and the multipliers
    normalized to unit total mass. The boundary optimum s* = 0 is classified
    as an obstruction because strict increase demands strict positivity.
    """
    if licq is None:
        licq = licq_check(active)
    if not licq.holds:
        raise LicqNotVerified(
            f"rank {licq.rank} of {licq.rows} rows, singular values {licq.singular_values}"
        )
    p = len(active.y_ref)
    nk = len(active.active_ineq)
    nj = len(active.eq)
    if nk + nj == 0:
        # no active constraints: the only admissible supergradient is zero
        direction = 0
        return ObstructionCertificate(
            conclusion=OBSTRUCTION,
            s_star=None,
            licq=licq,
            sigma=(0.0,) * p,
            mu=(),
            lam=(),
            tol=tol,
            probe_direction=direction,
            probe_line=_probe_line(active.y_ref, direction),
        )
    g_ineq = active.gradients[:nk]
    g_eq = active.gradients[nk:]
    nvar = nk + 2 * nj + 1  # mu, lambda+, lambda-, s
    A = np.zeros((p + 1, nvar))
    b = np.zeros(p + 1)
    relations = []
    for i in range(p):
        A[i, :nk] = g_ineq[:, i]
        A[i, nk : nk + nj] = g_eq[:, i]
        A[i, nk + nj : nk + 2 * nj] = -g_eq[:, i]
        A[i, -1] = -1.0
        relations.append(GE)
    A[p, : nk + 2 * nj] = 1.0
    b[p] = 1.0
    relations.append(EQ)
    c = np.zeros(nvar)
    c[-1] = 1.0
    lower = np.zeros(nvar)
    lower[-1] = -np.inf
    inst = lp_instance(c, A, b, tuple(relations), lower=lower, upper=np.full(nvar, np.inf))
    out = solve_lp(inst)
    if out.status != "optimal":
        raise NumericalBreakdown(f"obstruction LP terminated with status {out.status}")
    s_star = float(out.value)
    mu = tuple(float(v) for v in out.x[:nk])
    lam = tuple(float(a - bb) for a, bb in zip(out.x[nk : nk + nj], out.x[nk + nj : nk + 2 * nj]))
    sigma = np.zeros(p)
    if nk:
        sigma += np.asarray(mu) @ g_ineq
    if nj:
        sigma += np.asarray(lam) @ g_eq
    if s_star > tol:
        return ObstructionCertificate(
            conclusion=NO_OBSTRUCTION,
            s_star=s_star,
            licq=licq,
            sigma=tuple(float(v) for v in sigma),
            mu=mu,
            lam=lam,
            tol=tol,
            probe_direction=None,
            probe_line=None,
        )
    direction = None
    for i in range(p):
        best = 0.0
        if nk:
            best = max(best, float(np.max(g_ineq[:, i])))
        if nj:
            best = max(best, float(np.max(np.abs(g_eq[:, i]))))
        if best <= tol:
            direction = i
            break
    line = _probe_line(active.y_ref, direction) if direction is not None else None
    return ObstructionCertificate(
        conclusion=OBSTRUCTION,
        s_star=s_star,
        licq=licq,
        sigma=tuple(float(v) for v in sigma),
        mu=mu,
        lam=lam,
        tol=tol,
        probe_direction=direction,
        probe_line=line,
    )


def verify_certificate(
    cert: ObstructionCertificate, active: ActiveSet, *, tol: float = 1e-10
) -> tuple[bool, list[str]]:
    """Re-check a certificate from its stored multipliers and the gradients."""
    failures: list[str] = []
    nk = len(active.active_ineq)
    nj = len(active.eq)
    if cert.conclusion == NO_OBSTRUCTION:
        if any(v < -1e-12 for v in cert.mu):
            failures.append("negative inequality multiplier")
        sigma = np.zeros(len(active.y_ref))
        if nk:
            sigma += np.asarray(cert.mu) @ active.gradients[:nk]
        if nj:
            sigma += np.asarray(cert.lam) @ active.gradients[nk:]
        if np.max(np.abs(sigma - np.asarray(cert.sigma))) > tol:
            failures.append("stored supergradient does not match its multipliers")
        mass = sum(cert.mu) + sum(abs(v) for v in cert.lam)
        if abs(mass - 1.0) > 1e-8:
            failures.append(f"multiplier normalization is {mass}, not 1")
        if not min(sigma) > cert.tol:
            failures.append("supergradient is not strictly positive")
    else:
        if cert.s_star is not None and cert.s_star > cert.tol:
            failures.append("obstruction recorded with a positive optimum")
    if not cert.licq.holds:
        failures.append("certificate carries a failed LICQ report")
    return (not failures, failures)

"""Self-contained dense linear programming with verifiable certificates.

Primal simplex (two-phase, Bland's rule, lowest-index tie breaking) over
instances in the general form

    maximize c @ x   subject to   A_i x {<=, =, >=} b_i,   lower <= x <= upper

with bounds allowed to be infinite. Every outcome carries a certificate:
optimality (primal point + row duals for a complementary-slackness check),
infeasibility (Farkas row multipliers) or unboundedness (a feasible point and
an improving ray). :func:`verify_outcome` re-checks any certificate
numerically and is independent of the solution path.

Instances with many rows are solved through deterministic row activation:
start from a small prefix, solve, add the most violated rows, repeat. Dense
arithmetic is fine at the intended scale (around ten variables).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalBreakdown

LE = "<="
EQ = "="
GE = ">="

_ENTER_TOL = 1e-9
_UNBOUNDED_GUARD = 1e-6  # a no-pivot column below this reduced cost is numerical noise
_MAX_ITER = 10000


@dataclass(frozen=True)
class LpInstance:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    relations: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    @property
    def num_vars(self) -> int:
        return self.A.shape[1]


def lp_instance(c, A, b, relations, lower=None, upper=None) -> LpInstance:
    """Build a validated instance. Default bounds are 0 <= x < infinity."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(len(b), len(c))
    b = np.asarray(b, dtype=float)
    n = len(c)
    lower = np.zeros(n) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("objective, matrix and right-hand side must be finite")
    if np.any(np.isnan(lower)) or np.any(np.isnan(upper)) or np.any(lower > upper):
        raise ValueError("inconsistent variable bounds")
    relations = tuple(relations)
    if len(relations) != len(b) or any(r not in (LE, EQ, GE) for r in relations):
        raise ValueError("relations must be one of <=, =, >= per row")
    for arr in (c, A, b, lower, upper):
        arr.setflags(write=False)
    return LpInstance(c=c, A=A, b=b, relations=relations, lower=lower, upper=upper)


@dataclass(frozen=True)
class LpOutcome:
    status: str  # 'optimal' | 'infeasible' | 'unbounded'
    x: tuple[float, ...] | None = None
    value: float | None = None
    basis: tuple[int, ...] | None = None
    duals: tuple[float, ...] | None = None
    farkas: tuple[float, ...] | None = None
    ray: tuple[float, ...] | None = None


@dataclass(frozen=True)
class LpVerification:
    ok: bool
    failures: tuple[str, ...]


# ---------------------------------------------------------------------------
# standard-form conversion

class _Standardized:
    """Ax = b with x >= 0, plus the bookkeeping needed to translate back."""

    def __init__(self, inst: LpInstance):
        m, n = inst.num_rows, inst.num_vars
        col_var: list[int] = []
        col_sign: list[float] = []
        shift = np.zeros(n)
        cap_rows: list[tuple[int, float]] = []  # (structural column, cap)
        for j in range(n):
            lo, up = inst.lower[j], inst.upper[j]
            if np.isinf(lo) and np.isinf(up):
                col_var += [j, j]
                col_sign += [1.0, -1.0]
            elif not np.isinf(lo):
                shift[j] = lo
                col_var.append(j)
                col_sign.append(1.0)
                if not np.isinf(up):
                    cap_rows.append((len(col_var) - 1, up - lo))
            else:
                shift[j] = up
                col_var.append(j)
                col_sign.append(-1.0)
        ns = len(col_var)
        mt = m + len(cap_rows)
        structural = np.zeros((mt, ns))
        for t, (j, sgn) in enumerate(zip(col_var, col_sign)):
            structural[:m, t] = inst.A[:, j] * sgn
        b_std = np.concatenate([inst.b - inst.A @ shift, np.zeros(len(cap_rows))])
        relations = list(inst.relations) + [LE] * len(cap_rows)
        for r, (t, cap) in enumerate(cap_rows):
            structural[m + r, t] = 1.0
            b_std[m + r] = cap
        slack_cols = [i for i, rel in enumerate(relations) if rel != EQ]
        slacks = np.zeros((mt, len(slack_cols)))
        for s, i in enumerate(slack_cols):
            slacks[i, s] = 1.0 if relations[i] == LE else -1.0
        A_std = np.hstack([structural, slacks])
        row_sign = np.ones(mt)
        flip = b_std < 0
        A_std[flip] *= -1.0
        b_std[flip] *= -1.0
        row_sign[flip] = -1.0

        c_std = np.zeros(A_std.shape[1])
        for t, (j, sgn) in enumerate(zip(col_var, col_sign)):
            c_std[t] += inst.c[j] * sgn

        self.inst = inst
        self.A = A_std
        self.b = b_std
        self.c = c_std
        self.row_sign = row_sign
        self.row_orig = list(range(m)) + [-1] * len(cap_rows)  # -1 marks cap rows
        self.col_var = col_var
        self.col_sign = col_sign
        self.shift = shift

    def x_original(self, x_std: np.ndarray) -> np.ndarray:
        x = self.shift.copy()
        for t, (j, sgn) in enumerate(zip(self.col_var, self.col_sign)):
            x[j] += sgn * x_std[t]
        return x

    def ray_original(self, ray_std: np.ndarray) -> np.ndarray:
        ray = np.zeros(self.inst.num_vars)
        for t, (j, sgn) in enumerate(zip(self.col_var, self.col_sign)):
            ray[j] += sgn * ray_std[t]
        return ray

    def duals_original(self, y_std: np.ndarray) -> np.ndarray:
        y = np.zeros(self.inst.num_rows)
        for pos, i in enumerate(self.row_orig):
            if i >= 0:
                y[i] = self.row_sign[pos] * y_std[pos]
        return y

    def drop_rows(self, positions: list[int]) -> None:
        keep = [i for i in range(self.A.shape[0]) if i not in set(positions)]
        self.A = self.A[keep]
        self.b = self.b[keep]
        self.row_sign = self.row_sign[keep]
        self.row_orig = [self.row_orig[i] for i in keep]


# ---------------------------------------------------------------------------
# simplex core

def _solve_linear(M, rhs):
    try:
        return np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        raise NumericalBreakdown("singular basis matrix") from None


def _revised_simplex(A, b, c, basis, num_enterable, pivot_tol):
    """Run primal simplex from a feasible basis; columns >= num_enterable never enter."""
    m, n = A.shape
    basis = list(basis)
    in_basis = np.zeros(n, dtype=bool)
    in_basis[basis] = True
    for _ in range(_MAX_ITER):
        B = A[:, basis]
        x_basic = _solve_linear(B, b)
        y = _solve_linear(B.T, c[basis])
        reduced = c - y @ A
        enter = -1
        direction = None
        leave_pos = -1
        for j in range(num_enterable):
            if in_basis[j] or reduced[j] <= _ENTER_TOL:
                continue
            d = _solve_linear(B, A[:, j])
            theta = np.inf
            for i in range(m):
                if d[i] > pivot_tol:
                    theta = min(theta, max(x_basic[i], 0.0) / d[i])
            if not np.isfinite(theta):
                if reduced[j] > _UNBOUNDED_GUARD:
                    if float(np.max(d)) > pivot_tol * 1e-2:
                        # a blocking row exists but its pivot sits below
                        # tolerance; refuse to absorb that silently
                        raise NumericalBreakdown(
                            f"pivot below {pivot_tol} with no alternative in column {j}"
                        )
                    return "unbounded", basis, x_basic, y, j, d
                continue  # numerically null column; its reduced cost is noise
            # among (near-)minimal ratios take the largest pivot element for
            # conditioning, then the lowest basis index for determinism
            pos = -1
            for i in range(m):
                if d[i] > pivot_tol and max(x_basic[i], 0.0) / d[i] <= theta + 1e-12:
                    if (
                        pos < 0
                        or d[i] > d[pos] * (1.0 + 1e-12)
                        or (abs(d[i] - d[pos]) <= 1e-12 * d[pos] and basis[i] < basis[pos])
                    ):
                        pos = i
            enter, direction, leave_pos = j, d, pos
            break
        if enter < 0:
            return "optimal", basis, x_basic, y, None, None
        in_basis[basis[leave_pos]] = False
        in_basis[enter] = True
        basis[leave_pos] = enter
    raise NumericalBreakdown("simplex iteration limit exceeded")


def _solve_dense(inst: LpInstance, pivot_tol: float) -> LpOutcome:
    std = _Standardized(inst)
    m, n_cols = std.A.shape

    if m == 0:
        # bounds only; optimum sits at the bound favored by the objective
        x = np.where(inst.c > 0, inst.upper, inst.lower)
        x = np.where(inst.c == 0, np.where(np.isinf(inst.lower), np.minimum(inst.upper, 0.0), inst.lower), x)
        if np.any(np.isinf(x[inst.c > 0])) or np.any(np.isinf(x[inst.c < 0])):
            ray = np.where((inst.c > 0) & np.isinf(inst.upper), 1.0, 0.0)
            ray += np.where((inst.c < 0) & np.isinf(inst.lower), -1.0, 0.0)
            feas = np.where(np.isinf(inst.lower), np.minimum(inst.upper, 0.0), inst.lower)
            return LpOutcome(
                status="unbounded",
                x=tuple(float(v) for v in feas),
                ray=tuple(float(v) for v in ray),
            )
        return LpOutcome(
            status="optimal",
            x=tuple(float(v) for v in x),
            value=float(inst.c @ x),
            basis=(),
            duals=(),
        )

    # phase 1: minimize the artificial total
    A1 = np.hstack([std.A, np.eye(m)])
    c1 = np.concatenate([np.zeros(n_cols), -np.ones(m)])
    basis = list(range(n_cols, n_cols + m))
    status, basis, x_basic, y, _, _ = _revised_simplex(A1, std.b, c1, basis, n_cols, pivot_tol)
    if status != "optimal":
        raise NumericalBreakdown("phase 1 terminated abnormally")
    feas_tol = 1e-9 * (1.0 + float(np.abs(std.b).sum()))
    if float(c1[basis] @ x_basic) < -feas_tol:
        farkas = std.duals_original(y)
        return LpOutcome(status="infeasible", farkas=tuple(float(v) for v in farkas))

    # drive artificial variables out of the basis; fully dependent rows are dropped
    redundant: list[int] = []
    for pos in range(m):
        if basis[pos] < n_cols:
            continue
        B = A1[:, basis]
        unit = np.zeros(m)
        unit[pos] = 1.0
        binv_row = _solve_linear(B.T, unit)
        entered = False
        for j in range(n_cols):
            if j in basis:
                continue
            if abs(float(binv_row @ A1[:, j])) > pivot_tol:
                basis[pos] = j
                entered = True
                break
        if not entered:
            redundant.append(pos)
    if redundant:
        std.drop_rows(redundant)
        basis = [basis[i] for i in range(m) if i not in set(redundant)]
        m = std.A.shape[0]

    # phase 2 on the original objective
    status, basis, x_basic, y, enter, direction = _revised_simplex(
        std.A, std.b, std.c, basis, n_cols, pivot_tol
    )
    x_std = np.zeros(n_cols)
    for pos, j in enumerate(basis):
        x_std[j] = max(x_basic[pos], 0.0)
    x = std.x_original(x_std)
    if status == "unbounded":
        ray_std = np.zeros(n_cols)
        ray_std[enter] = 1.0
        for pos, j in enumerate(basis):
            ray_std[j] -= direction[pos]
        ray = std.ray_original(ray_std)
        return LpOutcome(
            status="unbounded",
            x=tuple(float(v) for v in x),
            ray=tuple(float(v) for v in ray),
        )
    duals = std.duals_original(y)
    return LpOutcome(
        status="optimal",
        x=tuple(float(v) for v in x),
        value=float(inst.c @ x),
        basis=tuple(sorted(basis)),
        duals=tuple(float(v) for v in duals),
    )


# ---------------------------------------------------------------------------
# row activation for tall instances

def _restrict(inst: LpInstance, rows: list[int]) -> LpInstance:
    return lp_instance(
        inst.c,
        inst.A[rows],
        inst.b[rows],
        tuple(inst.relations[i] for i in rows),
        inst.lower,
        inst.upper,
    )


def _row_violations(inst: LpInstance, x: np.ndarray) -> np.ndarray:
    resid = inst.A @ x - inst.b
    viol = np.zeros(inst.num_rows)
    for i, rel in enumerate(inst.relations):
        if rel == LE:
            viol[i] = resid[i]
        elif rel == GE:
            viol[i] = -resid[i]
        else:
            viol[i] = abs(resid[i])
    return viol


def _ray_blockers(inst: LpInstance, ray: np.ndarray) -> np.ndarray:
    growth = inst.A @ ray
    block = np.zeros(inst.num_rows)
    for i, rel in enumerate(inst.relations):
        if rel == LE:
            block[i] = growth[i]
        elif rel == GE:
            block[i] = -growth[i]
        else:
            block[i] = abs(growth[i])
    return block


def _scatter(values, rows: list[int], size: int) -> tuple[float, ...]:
    full = np.zeros(size)
    full[rows] = np.asarray(values)
    return tuple(float(v) for v in full)


def solve_lp(
    instance: LpInstance,
    *,
    tol: float = 1e-8,
    pivot_tol: float = 1e-12,
    activation_threshold: int = 96,
    activation_batch: int = 8,
) -> LpOutcome:
    """Solve an instance, deterministically.

    Below ``activation_threshold`` rows the dense solver runs directly;
    otherwise rows are activated in batches of the most violated (ties broken
    by row index) until the solution of the restricted instance satisfies or
    certifies everything.
    """
    m = instance.num_rows
    if m <= activation_threshold:
        return _solve_dense(instance, pivot_tol)

    active = [i for i in range(m) if instance.relations[i] == EQ]
    for i in range(m):
        if len(active) >= min(m, 32):
            break
        if instance.relations[i] != EQ:
            active.append(i)
    active = sorted(set(active))
    for _ in range(m + 8):
        sub = _restrict(instance, active)
        out = _solve_dense(sub, pivot_tol)
        if out.status == "infeasible":
            return LpOutcome(status="infeasible", farkas=_scatter(out.farkas, active, m))
        if out.status == "optimal":
            viol = _row_violations(instance, np.asarray(out.x))
        else:
            viol = _ray_blockers(instance, np.asarray(out.ray))
        viol[active] = 0.0
        worst = [i for i in np.argsort(-viol, kind="stable") if viol[i] > tol]
        if not worst:
            if out.status == "optimal":
                return LpOutcome(
                    status="optimal",
                    x=out.x,
                    value=out.value,
                    basis=out.basis,
                    duals=_scatter(out.duals, active, m),
                )
            return out
        active = sorted(set(active) | set(int(i) for i in worst[:activation_batch]))
    raise NumericalBreakdown("row activation did not converge")


# ---------------------------------------------------------------------------
# independent certificate verification

def _feasibility_failures(inst: LpInstance, x: np.ndarray, tol: float) -> list[str]:
    failures = []
    for j in range(inst.num_vars):
        scale = tol * (1.0 + abs(x[j]))
        if x[j] < inst.lower[j] - scale or x[j] > inst.upper[j] + scale:
            failures.append(f"variable {j} = {x[j]} violates bounds")
    resid = inst.A @ x - inst.b
    for i, rel in enumerate(inst.relations):
        scale = tol * (1.0 + abs(inst.b[i]))
        if rel == LE and resid[i] > scale:
            failures.append(f"row {i} violated by {resid[i]}")
        elif rel == GE and resid[i] < -scale:
            failures.append(f"row {i} violated by {-resid[i]}")
        elif rel == EQ and abs(resid[i]) > scale:
            failures.append(f"row {i} violated by {abs(resid[i])}")
    return failures


def verify_outcome(inst: LpInstance, outcome: LpOutcome, *, tol: float = 1e-8) -> LpVerification:
    """Re-check an outcome's certificate numerically, independent of the solver."""
    failures: list[str] = []
    if outcome.status == "optimal":
        x = np.asarray(outcome.x)
        y = np.asarray(outcome.duals)
        failures += _feasibility_failures(inst, x, tol)
        if abs(float(inst.c @ x) - outcome.value) > tol * (1.0 + abs(outcome.value)):
            failures.append("objective value mismatch")
        resid = inst.A @ x - inst.b
        for i, rel in enumerate(inst.relations):
            if rel == LE and y[i] < -tol:
                failures.append(f"dual {i} has the wrong sign")
            if rel == GE and y[i] > tol:
                failures.append(f"dual {i} has the wrong sign")
            if abs(y[i]) > tol and abs(resid[i]) > tol * (1.0 + abs(inst.b[i])):
                failures.append(f"complementary slackness fails on row {i}")
        reduced = inst.c - y @ inst.A
        for j in range(inst.num_vars):
            scale = tol * (1.0 + abs(x[j]))
            if reduced[j] > tol and not (
                np.isfinite(inst.upper[j]) and x[j] >= inst.upper[j] - scale
            ):
                failures.append(f"reduced cost {j} positive off its upper bound")
            if reduced[j] < -tol and not (
                np.isfinite(inst.lower[j]) and x[j] <= inst.lower[j] + scale
            ):
                failures.append(f"reduced cost {j} negative off its lower bound")
    elif outcome.status == "infeasible":
        y = np.asarray(outcome.farkas)
        for i, rel in enumerate(inst.relations):
            if rel == LE and y[i] < -tol:
                failures.append(f"farkas multiplier {i} has the wrong sign")
            if rel == GE and y[i] > tol:
                failures.append(f"farkas multiplier {i} has the wrong sign")
        d = y @ inst.A
        lower_sum = 0.0
        for j in range(inst.num_vars):
            if d[j] > tol:
                if np.isinf(inst.lower[j]):
                    failures.append(f"farkas aggregate unbounded below in variable {j}")
                else:
                    lower_sum += d[j] * inst.lower[j]
            elif d[j] < -tol:
                if np.isinf(inst.upper[j]):
                    failures.append(f"farkas aggregate unbounded below in variable {j}")
                else:
                    lower_sum += d[j] * inst.upper[j]
        rhs = float(y @ inst.b)
        if not lower_sum > rhs + tol:
            failures.append(f"farkas aggregate not violating: {lower_sum} vs {rhs}")
    elif outcome.status == "unbounded":
        x = np.asarray(outcome.x)
        ray = np.asarray(outcome.ray)
        failures += _feasibility_failures(inst, x, tol)
        growth = inst.A @ ray
        for i, rel in enumerate(inst.relations):
            if rel == LE and growth[i] > tol:
                failures.append(f"ray leaves row {i}")
            if rel == GE and growth[i] < -tol:
                failures.append(f"ray leaves row {i}")
            if rel == EQ and abs(growth[i]) > tol:
                failures.append(f"ray leaves row {i}")
        for j in range(inst.num_vars):
            if np.isfinite(inst.lower[j]) and ray[j] < -tol:
                failures.append(f"ray leaves lower bound of variable {j}")
            if np.isfinite(inst.upper[j]) and ray[j] > tol:
                failures.append(f"ray leaves upper bound of variable {j}")
        if not float(inst.c @ ray) > tol:
            failures.append("ray does not improve the objective")
    else:
        failures.append(f"unknown status {outcome.status!r}")
    return LpVerification(ok=not failures, failures=tuple(failures))

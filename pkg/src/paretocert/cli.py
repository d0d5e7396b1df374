"""Command-line front end: ingest problems, run the analysis pipeline, and
emit deterministic JSON reports (plus optional CSV extracts).

Commands: classify | support | kkt | witness | report. Exit codes: 0 ok,
2 input or schema error, 4 no conclusion (LICQ failed), 3 numerical failure.
Reports echo the full configuration and are byte-identical across runs for
fixed inputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__, geoffrion, kkt, pareto, support
from .errors import (
    AnalysisError,
    BoxTooSmall,
    DimensionError,
    DomainError,
    ExprSyntaxError,
    InfeasiblePoint,
    LicqNotVerified,
    NoConstraintDescription,
    NonDifferentiable,
    NotAGain,
    NotSupported,
    NumericalBreakdown,
    SchemaError,
    UnknownBuiltin,
)
from .problems import (
    AnalyticProblem,
    AxisSpec,
    GridSpec,
    PointCloud,
    RefinementSchedule,
    builtin,
    load_problem,
    sample_criterion_space,
)

_INPUT_ERRORS = (
    SchemaError,
    ExprSyntaxError,
    DimensionError,
    UnknownBuiltin,
    NoConstraintDescription,
    InfeasiblePoint,
    NotAGain,
    NotSupported,
    BoxTooSmall,
)
_NUMERICAL_ERRORS = (NumericalBreakdown, DomainError, NonDifferentiable)


@dataclass(frozen=True)
class Config:
    tol_feas: float = 1e-9
    tol_active: float = 1e-7
    tol_rank: float = 1e-8
    tol_lp: float = 1e-8
    tol_obstruction: float = 1e-9
    persistent_threshold: float = 1e-3
    growth_factor: float = 1e3
    tie_tol: float = 1e-12
    levels: int = 20
    grid: int = 257

    def as_dict(self) -> dict:
        return {
            "tol_feas": self.tol_feas,
            "tol_active": self.tol_active,
            "tol_rank": self.tol_rank,
            "tol_lp": self.tol_lp,
            "tol_obstruction": self.tol_obstruction,
            "persistent_threshold": self.persistent_threshold,
            "growth_factor": self.growth_factor,
            "tie_tol": self.tie_tol,
            "levels": self.levels,
            "grid": self.grid,
        }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paretocert",
        description="Efficiency classification and value-function support certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "classify": "efficiency and proper-efficiency analysis of the requested points",
        "support": "support margin trend and value-function witness at a point",
        "kkt": "LICQ check and obstruction certificate at a point",
        "witness": "build and verify a value-function witness at a point",
        "report": "full pipeline: classify, support, and kkt per point",
    }
    for name, help_text in specs.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("problem", help="problem JSON file, or builtin:<name>")
        sp.add_argument(
            "--point",
            action="append",
            default=[],
            metavar="A,B",
            help="criterion-space point (repeatable); use --point=-1,0 for negatives",
        )
        sp.add_argument(
            "--point-decision",
            action="append",
            default=[],
            metavar="X",
            help="decision-space point (repeatable)",
        )
        sp.add_argument("--levels", "--refine", dest="levels", type=int, default=20,
                        help="refinement levels for divergence and margin trends")
        sp.add_argument("--grid", type=int, default=257,
                        help="uniform sample resolution per decision dimension")
        sp.add_argument("--tol-feas", type=float, default=1e-9)
        sp.add_argument("--tol-active", type=float, default=1e-7)
        sp.add_argument("--tol-rank", type=float, default=1e-8)
        sp.add_argument("--tol-lp", type=float, default=1e-8)
        sp.add_argument("--tol-obstruction", type=float, default=1e-9)
        sp.add_argument("--persistent-threshold", type=float, default=1e-3)
        sp.add_argument("--growth-factor", type=float, default=1e3)
        sp.add_argument("--tie-tol", type=float, default=1e-12)
        sp.add_argument("--out", metavar="FILE", help="write the JSON report here instead of stdout")
        sp.add_argument("--csv", metavar="DIR", help="write CSV extracts (samples, trends) here")
    return parser


def _config_from_args(args: argparse.Namespace) -> Config:
    if args.levels < 1:
        raise SchemaError("--levels must be at least 1")
    if args.grid < 1:
        raise SchemaError("--grid must be at least 1")
    return Config(
        tol_feas=args.tol_feas,
        tol_active=args.tol_active,
        tol_rank=args.tol_rank,
        tol_lp=args.tol_lp,
        tol_obstruction=args.tol_obstruction,
        persistent_threshold=args.persistent_threshold,
        growth_factor=args.growth_factor,
        tie_tol=args.tie_tol,
        levels=args.levels,
        grid=args.grid,
    )


def _load(source: str):
    if source.startswith("builtin:"):
        return builtin(source[len("builtin:"):]), source
    path = Path(source)
    if not path.exists():
        raise SchemaError(f"problem file not found: {source}")
    return load_problem(path.read_text(encoding="utf-8"), label=source), source


def _parse_vector(text: str, expected: int, what: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise SchemaError(f"{what}: could not parse {text!r} as a comma-separated vector") from None
    if len(values) != expected:
        raise SchemaError(f"{what}: expected {expected} coordinates, got {len(values)}")
    return values


def _locate_decision(problem: AnalyticProblem, y_ref) -> tuple[float, ...]:
    """Nearest decision (by image) on a fixed fine grid; deterministic."""
    resolution = {1: 1025, 2: 65}.get(problem.decision_dim, 17)
    cloud = sample_criterion_space(problem, GridSpec.uniform(problem.decision_dim, resolution))
    target = np.asarray(y_ref, dtype=float)
    images = cloud.as_array()
    errors = np.max(np.abs(images - target), axis=1)
    return cloud.decisions[int(np.argmin(errors))]


@dataclass(frozen=True)
class _PointSpec:
    decision: tuple[float, ...] | None
    criterion: tuple[float, ...]


def _resolve_points(problem, args: argparse.Namespace) -> list[_PointSpec]:
    points: list[_PointSpec] = []
    analytic = isinstance(problem, AnalyticProblem)
    for text in args.point_decision:
        if not analytic:
            raise SchemaError("--point-decision needs an analytic problem")
        x = _parse_vector(text, problem.decision_dim, "--point-decision")
        for d, (lo, hi) in enumerate(problem.domain):
            if not lo <= x[d] <= hi:
                raise SchemaError(f"--point-decision: coordinate {d} outside [{lo}, {hi}]")
        points.append(_PointSpec(decision=x, criterion=problem.criteria_at(x)))
    for text in args.point:
        y = _parse_vector(text, problem.criterion_dim, "--point")
        decision = _locate_decision(problem, y) if analytic else None
        points.append(_PointSpec(decision=decision, criterion=y))
    if points:
        return points
    if analytic:
        # default probe set: uniform five-point grid per decision dimension
        cloud = sample_criterion_space(problem, GridSpec.uniform(problem.decision_dim, 5))
        return [
            _PointSpec(decision=d, criterion=y)
            for d, y in zip(cloud.decisions, cloud.points)
        ]
    decisions = problem.decisions or (None,) * len(problem.points)
    return [_PointSpec(decision=d, criterion=y) for d, y in zip(decisions, problem.points)]


def _analysis_cloud(problem, specs: list[_PointSpec], cfg: Config) -> PointCloud:
    if isinstance(problem, PointCloud):
        return problem
    anchors = [s.decision for s in specs if s.decision is not None]
    axes = []
    for d in range(problem.decision_dim):
        group = [AxisSpec.uniform(cfg.grid)]
        for anchor in anchors:
            group.append(AxisSpec.geometric(anchor[d], cfg.levels))
        axes.append(tuple(group))
    return sample_criterion_space(problem, GridSpec(tuple(axes)), tol_feas=cfg.tol_feas)


# ---------------------------------------------------------------------------
# record builders

def _efficiency_record(cloud: PointCloud, spec: _PointSpec) -> bool:
    return not any(pareto.dominates(y, spec.criterion) for y in cloud.points)


def _proper_dict(report: geoffrion.ProperEfficiencyReport) -> dict:
    out = {
        "status": report.status,
        "m_hat": report.m_hat,
        "worst": None,
        "dominating_index": report.dominating_index,
    }
    if report.worst is not None:
        out["worst"] = {
            "point_index": report.worst.point_index,
            "gain_index": report.worst.gain_index,
            "loss_index": report.worst.loss_index,
            "ratio": report.worst.ratio,
        }
    return out


def _divergence_dict(evidence: geoffrion.DivergenceEvidence) -> dict:
    return {
        "levels": list(evidence.levels),
        "offsets": list(evidence.offsets),
        "ratios": list(evidence.ratios),
        "growth": evidence.growth,
        "fitted_exponent": evidence.fitted_exponent,
    }


def _margin_dict(report: support.MarginReport) -> dict:
    return {
        "margin": report.margin,
        "weights": list(report.weights) if report.weights is not None else None,
        "binding": list(report.binding),
        "feasible": report.feasible,
        "sample_size": report.sample_size,
    }


def _trend_dict(trend: support.TrendReport) -> dict:
    return {
        "levels": list(trend.levels),
        "offsets": list(trend.offsets),
        "margins": list(trend.margins),
        "verdict": trend.verdict,
        "threshold": trend.threshold,
        "fitted_exponent": trend.fitted_exponent,
    }


def _witness_dict(witness: support.ValueFunctionWitness, verification: support.WitnessVerification) -> dict:
    return {
        "weights": list(witness.weights),
        "curvature": witness.curvature,
        "anchor": list(witness.anchor),
        "box": [list(pair) for pair in witness.box],
        "verification": {
            "all_passed": verification.all_passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in verification.checks
            ],
        },
    }


def _kkt_dicts(problem, spec: _PointSpec, cfg: Config) -> dict:
    active = kkt.active_set(
        problem, spec.criterion, tol_active=cfg.tol_active, tol_feas=cfg.tol_feas
    )
    licq = kkt.licq_check(active, tol_rank=cfg.tol_rank)
    payload = {
        "active_inequalities": list(active.active_ineq),
        "equalities": list(active.eq),
        "gradients": [[float(v) for v in row] for row in active.gradients],
        "licq": {
            "rows": licq.rows,
            "rank": licq.rank,
            "singular_values": list(licq.singular_values),
            "holds": licq.holds,
        },
    }
    cert = kkt.obstruction_test(active, licq=licq, tol=cfg.tol_obstruction)
    payload["certificate"] = {
        "conclusion": cert.conclusion,
        "s_star": cert.s_star,
        "sigma": list(cert.sigma),
        "mu": list(cert.mu),
        "lambda": list(cert.lam),
        "probe_direction": cert.probe_direction,
        "probe_line": cert.probe_line,
        "assumptions": list(cert.assumptions),
    }
    return payload


def _classify_record(problem, cloud, spec: _PointSpec, cfg: Config) -> dict:
    record: dict = {
        "decision": list(spec.decision) if spec.decision is not None else None,
        "criterion": list(spec.criterion),
        "efficient": _efficiency_record(cloud, spec),
    }
    report = geoffrion.proper_efficiency_report(cloud, spec.criterion)
    divergence = None
    if isinstance(problem, AnalyticProblem) and spec.decision is not None:
        evidence = geoffrion.divergence_probe(
            problem,
            spec.decision,
            RefinementSchedule(levels=cfg.levels),
            growth_factor=cfg.growth_factor,
        )
        report = geoffrion.combine_with_divergence(report, evidence)
        divergence = _divergence_dict(evidence)
    record["proper_efficiency"] = _proper_dict(report)
    record["divergence"] = divergence
    return record


def _support_record(problem, cloud, spec: _PointSpec, cfg: Config) -> dict:
    margin = support.support_margin(cloud, spec.criterion, tol=cfg.tol_lp)
    record: dict = {"margin": _margin_dict(margin), "trend": None, "witness": None}
    supported = margin.weights is not None
    if isinstance(problem, AnalyticProblem) and spec.decision is not None:
        trend = support.support_trend(
            problem,
            spec.criterion,
            RefinementSchedule(levels=cfg.levels, anchor=spec.decision),
            persistent_threshold=cfg.persistent_threshold,
        )
        record["trend"] = _trend_dict(trend)
        supported = trend.verdict == support.PERSISTENT
    if supported:
        record["witness"] = _build_witness_dict(problem, spec, cfg)
    return record


def _witness_cloud(problem, spec: _PointSpec, cfg: Config) -> PointCloud:
    # points closer than about 2^-12 to the anchor would shrink the quadratic
    # tie-break below the 1e-12 uniqueness tolerance, so the witness sample
    # caps its refinement depth (margins and trends keep the full depth)
    capped = replace(cfg, levels=min(cfg.levels, 12))
    return _analysis_cloud(problem, [spec], capped)


def _build_witness_dict(problem, spec: _PointSpec, cfg: Config) -> dict | None:
    cloud = _witness_cloud(problem, spec, cfg)
    margin = support.support_margin(cloud, spec.criterion, tol=cfg.tol_lp)
    if margin.weights is None:
        return None
    box = _witness_box(cloud, spec.criterion)
    witness = support.build_witness(spec.criterion, margin.weights, box, cloud)
    verification = support.verify_witness(witness, cloud, tie_tol=cfg.tie_tol)
    out = _witness_dict(witness, verification)
    out["sample_size"] = len(cloud)
    return out


def _witness_box(cloud: PointCloud, y_ref) -> tuple[tuple[float, float], ...]:
    pts = np.vstack([cloud.as_array(), np.asarray(y_ref, dtype=float)])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    pad = 0.05 * np.maximum(hi - lo, 1.0)
    return tuple((float(l - p), float(h + p)) for l, h, p in zip(lo, hi, pad))


def _problem_dict(problem, source: str) -> dict:
    if isinstance(problem, AnalyticProblem):
        return {
            "type": "analytic",
            "source": source,
            "digest": problem.digest(),
            "decision_dim": problem.decision_dim,
            "criterion_dim": problem.criterion_dim,
            "has_constraints": problem.has_constraints,
        }
    return {
        "type": "cloud",
        "source": source,
        "digest": problem.digest(),
        "criterion_dim": problem.criterion_dim,
        "size": len(problem),
    }


# ---------------------------------------------------------------------------
# commands

def _cmd_classify(problem, source, specs, cfg: Config) -> dict:
    cloud = _analysis_cloud(problem, specs, cfg)
    records = [_classify_record(problem, cloud, spec, cfg) for spec in specs]
    return _payload("classify", problem, source, cfg, records, cloud)


def _cmd_support(problem, source, specs, cfg: Config) -> dict:
    cloud = _analysis_cloud(problem, specs, cfg)
    records = []
    for spec in specs:
        record = {
            "decision": list(spec.decision) if spec.decision is not None else None,
            "criterion": list(spec.criterion),
        }
        record.update(_support_record(problem, cloud, spec, cfg))
        records.append(record)
    return _payload("support", problem, source, cfg, records, cloud)


def _cmd_kkt(problem, source, specs, cfg: Config) -> dict:
    records = []
    for spec in specs:
        record = {
            "decision": list(spec.decision) if spec.decision is not None else None,
            "criterion": list(spec.criterion),
        }
        record.update(_kkt_dicts(problem, spec, cfg))
        records.append(record)
    return _payload("kkt", problem, source, cfg, records, None)


def _cmd_witness(problem, source, specs, cfg: Config) -> dict:
    cloud = None
    records = []
    for spec in specs:
        cloud = _witness_cloud(problem, spec, cfg)
        margin = support.support_margin(cloud, spec.criterion, tol=cfg.tol_lp)
        if margin.weights is None:
            raise NotSupported(
                f"no positive support at {spec.criterion}: margin {margin.margin}"
            )
        box = _witness_box(cloud, spec.criterion)
        witness = support.build_witness(spec.criterion, margin.weights, box, cloud)
        verification = support.verify_witness(witness, cloud, tie_tol=cfg.tie_tol)
        records.append(
            {
                "decision": list(spec.decision) if spec.decision is not None else None,
                "criterion": list(spec.criterion),
                "margin": _margin_dict(margin),
                "witness": _witness_dict(witness, verification),
            }
        )
    return _payload("witness", problem, source, cfg, records, cloud)


def _cmd_report(problem, source, specs, cfg: Config) -> dict:
    cloud = _analysis_cloud(problem, specs, cfg)
    records = []
    for spec in specs:
        record = _classify_record(problem, cloud, spec, cfg)
        record["support"] = _support_record(problem, cloud, spec, cfg)
        try:
            record["kkt"] = _kkt_dicts(problem, spec, cfg)
        except (NoConstraintDescription, InfeasiblePoint) as exc:
            record["kkt"] = {"error": str(exc)}
        except LicqNotVerified as exc:
            record["kkt"] = {"error": f"no conclusion: {exc}", "licq_failed": True}
        records.append(record)
    return _payload("report", problem, source, cfg, records, cloud)


def _payload(command, problem, source, cfg: Config, records, cloud) -> dict:
    payload = {
        "tool": {"name": "paretocert", "version": __version__},
        "command": command,
        "config": cfg.as_dict(),
        "problem": _problem_dict(problem, source),
        "points": records,
    }
    if cloud is not None:
        payload["sample"] = {"size": len(cloud), "provenance": cloud.provenance}
    return payload


# ---------------------------------------------------------------------------
# CSV extracts

def _write_csv(directory: str, payload: dict, cloud: PointCloud | None) -> None:
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    if cloud is not None:
        with (out_dir / "sample_points.csv").open("w", newline="") as handle:
            writer = csv.writer(handle)
            p = cloud.criterion_dim
            dec_width = len(cloud.decisions[0]) if cloud.decisions else 0
            writer.writerow(
                [f"x{d}" for d in range(dec_width)] + [f"y{i}" for i in range(p)]
            )
            for idx, point in enumerate(cloud.points):
                decision = cloud.decisions[idx] if cloud.decisions else ()
                writer.writerow([repr(v) for v in decision] + [repr(v) for v in point])
    for idx, record in enumerate(payload.get("points", [])):
        divergence = record.get("divergence")
        if divergence:
            with (out_dir / f"divergence_point{idx}.csv").open("w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(["level", "offset", "ratio"])
                for row in zip(divergence["levels"], divergence["offsets"], divergence["ratios"]):
                    writer.writerow([row[0], repr(row[1]), repr(row[2])])
        trend = (record.get("support") or {}).get("trend") or record.get("trend")
        if trend:
            with (out_dir / f"margin_point{idx}.csv").open("w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(["level", "offset", "margin"])
                for row in zip(trend["levels"], trend["offsets"], trend["margins"]):
                    writer.writerow([row[0], repr(row[1]), repr(row[2])])


# ---------------------------------------------------------------------------
# entry point

_COMMANDS = {
    "classify": _cmd_classify,
    "support": _cmd_support,
    "kkt": _cmd_kkt,
    "witness": _cmd_witness,
    "report": _cmd_report,
}


def _json_default(value):
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    raise TypeError(f"not serializable: {type(value).__name__}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        problem, source = _load(args.problem)
        specs = _resolve_points(problem, args)
        payload = _COMMANDS[args.command](problem, source, specs, cfg)
    except LicqNotVerified as exc:
        print(f"no conclusion: {exc}", file=sys.stderr)
        return 4
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except AnalysisError as exc:  # any stragglers count as input problems
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.csv:
        cloud = None
        if "sample" in payload and args.command != "kkt":
            # rebuild the cloud for the extract; sampling is deterministic
            cloud = _analysis_cloud(problem, specs, cfg)
        _write_csv(args.csv, payload, cloud)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

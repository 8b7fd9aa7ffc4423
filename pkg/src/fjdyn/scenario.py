"""Scenario files, trajectory CSV and the JSON analysis report.

Scenario schema (JSON object)::

    {
      "W": [[...], ...],            # n x n row-stochastic, W[i][j] = weight i gives j
      "xi": [...],                  # susceptibilities in [0, 1]
      "x0": [...],                  # initial opinions (first issue for sequences)
      "mode": "single" | "sequence" | "bounded",      # default "single"
      "confidence": {"d": 1.0, "h": 0.1},             # required for "bounded"
      "budgets": {"max_iter": 100000, "max_issues": 10000},
      "tolerances": {"step_tol": 1e-10, "consensus_tol": 1e-6, "cluster_tol": 1e-6},
      "seed": 0                                        # optional, recorded only
    }
"""
from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import bounded, graph, issues, single
from .oracles import eigenvalues_dense
from .errors import (
    GainOutOfRange,
    NetworkError,
    NonStochasticRow,
    OutOfRangeEntry,
    ParseError,
    PreconditionViolated,
    SingularSystem,
    ValidationError,
)

MODES = ("single", "sequence", "bounded")
TOP_KEYS = {"W", "xi", "x0", "mode", "confidence", "budgets", "tolerances", "seed"}
BUDGET_DEFAULTS = {"max_iter": single.DEFAULT_MAX_ITER, "max_issues": issues.DEFAULT_MAX_ISSUES}
TOL_DEFAULTS = {
    "step_tol": single.DEFAULT_TOL,
    "consensus_tol": issues.DEFAULT_CONSENSUS_TOL,
    "cluster_tol": issues.DEFAULT_CLUSTER_TOL,
}


@dataclass(frozen=True)
class Budgets:
    max_iter: int = single.DEFAULT_MAX_ITER
    max_issues: int = issues.DEFAULT_MAX_ISSUES


@dataclass(frozen=True)
class Tolerances:
    step_tol: float = single.DEFAULT_TOL
    consensus_tol: float = issues.DEFAULT_CONSENSUS_TOL
    cluster_tol: float = issues.DEFAULT_CLUSTER_TOL


@dataclass(frozen=True)
class Scenario:
    network: graph.InfluenceNetwork
    x0: np.ndarray
    mode: str = "single"
    confidence: Optional[bounded.ConfidenceConfig] = None
    budgets: Budgets = Budgets()
    tolerances: Tolerances = Tolerances()
    seed: Optional[int] = None

    def with_overrides(self, tol=None, max_iter=None, max_issues=None) -> "Scenario":
        tols, buds = self.tolerances, self.budgets
        if tol is not None:
            if not tol > 0:
                raise ValidationError("--tol", "must be positive")
            tols = replace(tols, step_tol=float(tol))
        if max_iter is not None:
            if max_iter < 1:
                raise ValidationError("--max-iter", "must be at least 1")
            buds = replace(buds, max_iter=int(max_iter))
        if max_issues is not None:
            if max_issues < 1:
                raise ValidationError("--max-issues", "must be at least 1")
            buds = replace(buds, max_issues=int(max_issues))
        return replace(self, tolerances=tols, budgets=buds)


# --------------------------------------------------------------------------
# loading


def _number(value, field):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(field, f"expected a number, got {value!r}")
    if not np.isfinite(value):
        raise ValidationError(field, "must be finite")
    return float(value)


def _vector(value, field, n=None):
    if not isinstance(value, list):
        raise ValidationError(field, "expected a list of numbers")
    out = [_number(v, f"{field}[{i}]") for i, v in enumerate(value)]
    if n is not None and len(out) != n:
        raise ValidationError(field, f"expected length {n}, got {len(out)}")
    return out


def _block(doc, key, defaults, kind):
    raw = doc.get(key, {})
    if not isinstance(raw, dict):
        raise ValidationError(key, "expected an object")
    unknown = set(raw) - set(defaults)
    if unknown:
        raise ValidationError(f"{key}.{sorted(unknown)[0]}", "unknown field")
    out = {}
    for name, default in defaults.items():
        field = f"{key}.{name}"
        v = raw.get(name, default)
        if kind is int:
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ValidationError(field, f"expected a positive integer, got {v!r}")
        else:
            v = _number(v, field)
            if not v > 0:
                raise ValidationError(field, "must be positive")
        out[name] = v
    return out


def scenario_from_dict(doc) -> Scenario:
    if not isinstance(doc, dict):
        raise ValidationError("$", "scenario must be a JSON object")
    unknown = set(doc) - TOP_KEYS
    if unknown:
        raise ValidationError(sorted(unknown)[0], "unknown field")
    for key in ("W", "xi", "x0"):
        if key not in doc:
            raise ValidationError(key, "missing required field")
    W = doc["W"]
    if not isinstance(W, list) or not W:
        raise ValidationError("W", "expected a non-empty list of rows")
    n = len(W)
    rows = [_vector(r, f"W[{i}]", n) for i, r in enumerate(W)]
    xi = _vector(doc["xi"], "xi", n)
    x0 = _vector(doc["x0"], "x0", n)
    try:
        net = graph.build_network(rows, xi)
    except NonStochasticRow as exc:
        raise ValidationError(f"W[{exc.row}]", f"row sums to {exc.total!r}, not 1") from exc
    except OutOfRangeEntry as exc:
        raise ValidationError(exc.where, f"value {exc.value!r} outside [0, 1]") from exc
    except NetworkError as exc:
        raise ValidationError("W", str(exc)) from exc

    mode = doc.get("mode", "single")
    if mode not in MODES:
        raise ValidationError("mode", f"expected one of {', '.join(MODES)}, got {mode!r}")

    cfg = None
    if "confidence" in doc and doc["confidence"] is not None:
        raw = doc["confidence"]
        if not isinstance(raw, dict) or set(raw) != {"d", "h"}:
            raise ValidationError("confidence", "expected an object with exactly d and h")
        d = _number(raw["d"], "confidence.d")
        h = _number(raw["h"], "confidence.h")
        if not d > 0:
            raise ValidationError("confidence.d", "must be positive")
        try:
            cfg = bounded.ConfidenceConfig(d, h)
            cfg.validate_for(n)
        except GainOutOfRange as exc:
            raise ValidationError("confidence.h", str(exc)) from exc
    if mode == "bounded" and cfg is None:
        raise ValidationError("confidence", "required when mode is bounded")

    budgets = Budgets(**_block(doc, "budgets", BUDGET_DEFAULTS, int))
    tols = Tolerances(**_block(doc, "tolerances", TOL_DEFAULTS, float))
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ValidationError("seed", f"expected an integer, got {seed!r}")
    x0 = np.array(x0)
    x0.setflags(write=False)
    return Scenario(net, x0, mode, cfg, budgets, tols, seed)


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc
    return scenario_from_dict(doc)


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(str(path), exc.strerror or str(exc)) from exc
    return parse_scenario(text)


def scenario_to_dict(sc: Scenario) -> dict:
    doc = {
        "W": sc.network.W.tolist(),
        "xi": sc.network.xi.tolist(),
        "x0": sc.x0.tolist(),
        "mode": sc.mode,
        "budgets": {"max_iter": sc.budgets.max_iter, "max_issues": sc.budgets.max_issues},
        "tolerances": {
            "step_tol": sc.tolerances.step_tol,
            "consensus_tol": sc.tolerances.consensus_tol,
            "cluster_tol": sc.tolerances.cluster_tol,
        },
    }
    if sc.confidence is not None:
        doc["confidence"] = {"d": sc.confidence.d, "h": sc.confidence.h}
    if sc.seed is not None:
        doc["seed"] = sc.seed
    return doc


# --------------------------------------------------------------------------
# writing


def _atomic_write(path, write):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v) -> str:
    return format(float(v), ".17g")


def trajectory_rows(run):
    """(issue, k, vector) rows for a single-issue trajectory or an issue sequence.

    Issue sequences are written as the initial opinions of each recorded
    issue, i.e. ``k = 0`` rows.
    """
    if run is None:
        return []
    if isinstance(run, bounded.BoundedRunResult):
        run = run.result
    if isinstance(run, single.Trajectory):
        return [(s.issue, s.time, s.x) for s in run.states]
    if isinstance(run, issues.IssueSequenceResult):
        return [(s, 0, x) for s, x in run.initial_opinions_per_issue]
    raise TypeError(f"cannot serialise {type(run).__name__}")


def write_trajectory(run, path, n: Optional[int] = None, format: str = "csv"):
    if format != "csv":
        raise ValueError(f"unsupported trajectory format {format!r}")
    rows = trajectory_rows(run)
    if n is None:
        n = len(rows[0][2]) if rows else 0

    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["issue", "k"] + [f"agent_{i}" for i in range(n)])
        for issue, k, x in rows:
            w.writerow([issue, k] + [_fmt(v) for v in x])

    _atomic_write(path, write)


def read_trajectory(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [(int(r[0]), int(r[1]), np.array([float(v) for v in r[2:]])) for r in reader]
    return header, rows


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(report: dict, path):
    text = dumps_report(report)
    _atomic_write(path, lambda fh: fh.write(text))


# --------------------------------------------------------------------------
# analysis


def not_applicable(reason: str) -> dict:
    return {"applicable": False, "note": f"not applicable ({reason})"}


def _sets(sets):
    return [sorted(int(v) for v in s) for s in sets]


def _complex_list(zs):
    return [[float(z.real), float(z.imag)] for z in zs]


def _summary(result: issues.IssueSequenceResult) -> dict:
    out = {
        "issues_run": result.issues_run,
        "settled": result.settled,
        "outcome": result.outcome.kind,
        "per_issue": [{"issue": s, "spread": sp, "mean": m}
                      for s, (sp, m) in enumerate(zip(result.spreads, result.means))],
    }
    if result.outcome.kind == "consensus":
        out["consensus_value"] = result.outcome.value
    elif result.outcome.kind == "clusters":
        out["clusters"] = [{"agents": sorted(a), "value": v} for a, v in result.outcome.clusters]
    return out


def trajectory_summary(traj: single.Trajectory) -> dict:
    return {
        "status": traj.status,
        "converged": traj.converged,
        "iterations": traj.iterations,
        "final": traj.final.tolist(),
    }


def run_scenario(sc: Scenario, record_full: bool = False):
    """Run the dynamics named by ``sc.mode``; returns the raw result object."""
    net, tols, buds = sc.network, sc.tolerances, sc.budgets
    if sc.mode == "single":
        return single.simulate_single_issue(net, sc.x0, tol=tols.step_tol, max_iter=buds.max_iter,
                                            record_full=record_full)
    if sc.mode == "sequence":
        return issues.simulate_issue_sequence(net, sc.x0, max_issues=buds.max_issues,
                                              consensus_tol=tols.consensus_tol,
                                              cluster_tol=tols.cluster_tol, record_full=record_full)
    return bounded.simulate_bc_sequence(net, sc.x0, sc.confidence, max_issues=buds.max_issues,
                                        consensus_tol=tols.consensus_tol,
                                        cluster_tol=tols.cluster_tol, record_full=record_full)


def run_summary(result) -> dict:
    if isinstance(result, single.Trajectory):
        return trajectory_summary(result)
    if isinstance(result, bounded.BoundedRunResult):
        out = _summary(result.result)
        out["edge_preservation"] = result.preservation_ok
        out["lost_edges"] = [[s, list(e)] for s, e in result.lost_edges]
        return out
    return _summary(result)


def analyze(sc: Scenario) -> dict:
    """Full verdict report; every entry either holds a witness or says why it is skipped."""
    net = sc.network
    part = net.partition
    scc = graph.scc_decompose(net)
    a1 = graph.check_assumption1(net, scc)
    a2 = graph.check_assumption2(net, scc)
    spectral = single.check_convergence_spectral(net)
    eig = eigenvalues_dense(net.XiW)
    rep = {
        "n": net.n,
        "mode": sc.mode,
        "seed": sc.seed,
        "tolerances": {"step_tol": sc.tolerances.step_tol,
                       "consensus_tol": sc.tolerances.consensus_tol,
                       "cluster_tol": sc.tolerances.cluster_tol},
        "partition": {"fully_stubborn": sorted(part.v_f), "partially_stubborn": sorted(part.v_p),
                      "non_stubborn": sorted(part.v_n)},
        "scc": {
            "components": _sets(scc.components),
            "independent": list(scc.is_independent),
            "periods": list(scc.component_period),
        },
        "assumption1": {"holds": a1.holds, "violating_isccs": _sets(a1.violating_isccs)},
        "assumption2": {"holds": a2.holds, "violating_isccs": _sets(a2.violating_isccs)},
        "spectral": {
            "eigenvalues": _complex_list(eig.eigenvalues),
            "spectral_radius": eig.spectral_radius,
            "unit_circle_eigenvalues": _complex_list(eig.unit_circle_eigenvalues),
            "converges": spectral.converges,
            "agrees_with_assumption1": spectral.converges == a1.holds,
        },
    }

    psi = None
    if a2.holds or a1.holds:
        psi = single.limit_influence_matrix(net, tol=sc.tolerances.step_tol)
        rep["psi"] = {
            "method": psi.method,
            "matrix": psi.psi.tolist(),
            "predicted_zero_columns": sorted(single.predicted_zero_columns(net)),
        }
        if a2.holds:
            rep["psi"]["support_match"] = bool(
                np.array_equal(psi.support, issues.predicted_psi_support(net)))
        else:
            rep["psi"]["support_match"] = not_applicable("assumption2 failed")
    else:
        rep["psi"] = not_applicable("assumption1 and assumption2 failed")

    if not a2.holds:
        rep["theorem2"] = not_applicable("assumption2 failed")
        rep["corollary1"] = not_applicable("assumption2 failed")
    elif part.v_f:
        rep["theorem2"] = not_applicable("fully stubborn agents present")
        rep["corollary1"] = not_applicable("fully stubborn agents present")
    else:
        t2 = issues.check_theorem2(net)
        c1 = issues.check_corollary1(net)
        rep["theorem2"] = {"applicable": True, "consensus": t2.consensus, "root_agent": t2.root_agent}
        rep["corollary1"] = {"applicable": True, "clusters": c1.clusters, "isccs": _sets(c1.isccs)}

    if sc.confidence is None:
        rep["assumption3"] = not_applicable("no confidence block")
        rep["theorem3"] = not_applicable("no confidence block")
    elif not a2.holds:
        rep["assumption3"] = not_applicable("assumption2 failed")
        rep["theorem3"] = not_applicable("assumption2 failed")
    else:
        y0 = psi.psi @ sc.x0
        a3 = bounded.check_assumption3(net, psi, y0, sc.confidence)
        rep["assumption3"] = {
            "holds": a3.holds,
            "violations": [list(v) for v in a3.violations],
            "first_settled_opinions": y0.tolist(),
            "near_ties": [list(p) for p in bounded.near_ties(y0, sc.confidence.d)],
            "gain_warnings": sc.confidence.warnings(net.n),
            "note": ("clause (i) asymmetry: for a fully stubborn i the Psi-neighbours of j "
                     "need only neighbour i, not j; checked as stated, not symmetrised"),
        }
        if a3.holds:
            t3 = bounded.check_theorem3(net, psi, y0, sc.confidence)
            rep["theorem3"] = {"applicable": True, "consensus": t3.consensus,
                               "failed_conditions": list(t3.failed_conditions),
                               "root_agent": t3.root_agent}
        else:
            rep["theorem3"] = not_applicable("assumption3 failed")

    try:
        rep["outcome"] = run_summary(run_scenario(sc))
    except (SingularSystem, PreconditionViolated) as exc:
        rep["outcome"] = not_applicable(str(exc))
    return rep

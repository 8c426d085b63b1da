"""Result bundles on disk and the textual DAG report."""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .estimands import AnalyticEstimand, decompose
from .graph import classify_path, enumerate_paths, instrument_violations, is_backdoor_admissible
from .montecarlo import McSummary, run_experiment
from .scenario import Scenario

COEF_PREFIXES = ("intercept", "coef:", "controlled:")
COV_PREFIX = "cov:"


def _analytic_dict(est: AnalyticEstimand | None) -> dict | None:
    if est is None:
        return None
    r = est.regression
    return {
        "method": r.method,
        "outcome": r.outcome,
        "regressors": list(r.regressors),
        "instrument": r.instrument,
        "treatment": r.treatment,
        "intercept": est.intercept,
        "coefficients": dict(est.coefficients),
        "slope": est.slope,
    }


def _decomposition_dict(est: AnalyticEstimand | None) -> dict | None:
    if est is None or est.decomposition is None:
        return None
    d = est.decomposition
    return {"tau": d.tau, "bias": d.bias, "beta": d.beta, "delta": d.delta}


def result_bundle(scenario: Scenario, mc: McSummary, source: str, timestamp: bool = True) -> dict:
    meta = {
        "source": source,
        "seed": scenario.master_seed,
        "n": scenario.n,
        "replications": scenario.replications,
        "successful_replications": mc.replication_count,
        "failures": mc.failures,
        "timestamp": datetime.now(timezone.utc).isoformat() if timestamp else None,
        "version": __version__,
    }
    return {
        "meta": meta,
        "analytic": _analytic_dict(mc.analytic_reference),
        "decomposition": _decomposition_dict(mc.analytic_reference),
        "mc": {name: s.to_dict() for name, s in mc.statistics.items()},
    }


def _write_hist(path: Path, mc: McSummary, keep) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["statistic", "bin_left", "bin_right", "count"])
        for name, s in mc.statistics.items():
            if not keep(name):
                continue
            for lo, hi, c in zip(s.bin_edges[:-1], s.bin_edges[1:], s.bin_counts):
                w.writerow([name, repr(float(lo)), repr(float(hi)), int(c)])


def _analytic_value(name: str, est: AnalyticEstimand | None):
    if est is None:
        return ""
    if name == "intercept":
        return repr(est.intercept)
    if name.startswith("coef:"):
        return repr(est.coefficients[name[5:]])
    if name.startswith("cov:resid:"):
        return "0.0"
    return ""


def write_outputs(out_dir: Path, bundle: dict, mc: McSummary) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "summary.json").write_text(json.dumps(bundle, indent=2) + "\n")
    _write_hist(out_dir / "coef_hist.csv", mc, lambda k: k.startswith(COEF_PREFIXES))
    _write_hist(out_dir / "cov_hist.csv", mc, lambda k: k.startswith(COV_PREFIX))
    with (out_dir / "diagnostics.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["statistic", "count", "mean", "sd", "q2.5", "q50", "q97.5", "analytic"])
        for name, s in mc.statistics.items():
            q = s.quantiles
            w.writerow(
                [name, s.count, repr(s.mean), repr(s.sd), repr(q[2.5]), repr(q[50.0]), repr(q[97.5]),
                 _analytic_value(name, mc.analytic_reference)]
            )


def run(scenario: Scenario, output_dir: str | Path, *, source: str = "", workers: int = 1, timestamp: bool = True) -> dict:
    """Run the Monte Carlo pipeline and write the result bundle; returns it."""
    mc = run_experiment(scenario, workers=workers)
    bundle = result_bundle(scenario, mc, source or (scenario.name or ""), timestamp)
    write_outputs(Path(output_dir), bundle, mc)
    return bundle


def explain(scenario: Scenario) -> str:
    """Paths between treatment and outcome, admissibility, and the bias split."""
    spec = scenario.regression
    model = scenario.model
    lines = []
    if spec.method == "first_difference":
        x = spec.panel_pairs[spec.treatment][1]
        y = spec.panel_pairs[spec.outcome][1]
        controls = [spec.panel_pairs[r][1] for r in spec.regressors if r != spec.treatment]
        lines.append(f"first differences of {spec.outcome} on {', '.join(spec.regressors)}; "
                     f"paths shown for period-2 levels {x} -> {y}")
    else:
        x, y = spec.treatment, spec.outcome
        controls = [r for r in spec.regressors if r != spec.treatment]
    lines.append(f"treatment {x}, outcome {y}, conditioning set {{{', '.join(controls)}}}")
    lines.append("paths:")
    for path in enumerate_paths(model, x, y):
        pc = classify_path(model, path, controls)
        lines.append(f"  {path}    [{pc.kind}, {'open' if pc.open else 'blocked'}]")
    try:
        ok = is_backdoor_admissible(model, x, y, controls)
        lines.append(f"backdoor admissible: {'yes' if ok else 'no'}")
    except Exception as exc:  # descendant in the set etc.
        lines.append(f"backdoor admissible: not applicable ({exc})")

    if spec.method == "tsls":
        z = spec.instrument
        lines.append(f"instrument {z}:")
        bad = instrument_violations(model, z, x, y, controls)
        if bad:
            for path in bad:
                lines.append(f"  {path}    [open, bypasses {x}: instrument invalid]")
        else:
            lines.append("  every open path to the outcome runs through the treatment")
        ok_z = is_backdoor_admissible(model, z, y, controls) if z not in model.children(y) else False
        lines.append(f"  no backdoor into {z}: {'yes' if ok_z else 'no'} "
                     "(this alone does not make it a valid instrument)")

    est = decompose(model, spec, scenario.latent)
    d = est.decomposition
    lines.append(f"analytic {spec.method} slope on {spec.treatment}: {est.slope:.10g}")
    lines.append(f"  tau (causal) = {d.tau:.10g}")
    lines.append(f"  bias         = {d.bias:.10g}"
                 + (f"  (latent {scenario.latent}: beta = {d.beta:.10g}, delta = {d.delta:.10g})"
                    if d.beta is not None else ""))
    return "\n".join(lines)

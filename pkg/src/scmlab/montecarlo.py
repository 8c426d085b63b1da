"""Monte Carlo replication harness.

Replication ``r`` draws from the stream ``(master_seed, r)`` only, so the
summary is bit-identical whatever the worker count: results are collected in
replication order before any reduction.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySample, NumericError, ReplicationFailure, UnsupportedTransform
from .estimands import AnalyticEstimand, decompose
from .estimators import first_difference, ols_fit, residual_diagnostics, tsls_fit
from .rng import Stream
from .scenario import Scenario
from .scm import Dataset, sample

N_BINS = 50
MAX_FAILURE_SHARE = 0.01
QUANTILES = (2.5, 50.0, 97.5)


@dataclass(frozen=True, eq=False)
class Summary:
    count: int
    mean: float
    sd: float
    sd_defined: bool
    quantiles: dict[float, float]
    bin_edges: np.ndarray
    bin_counts: np.ndarray

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "sd": self.sd,
            "sd_defined": self.sd_defined,
            "quantiles": {f"{q:g}": v for q, v in self.quantiles.items()},
            "histogram": {"edges": self.bin_edges.tolist(), "counts": self.bin_counts.tolist()},
        }


def summarize(samples: Sequence[float], bins: int = N_BINS) -> Summary:
    """Mean, unbiased sd, interpolated quantiles and an equal-width histogram.

    With a single observation the sd is undefined; it is reported as 0 and
    ``sd_defined`` is False.
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size == 0:
        raise EmptySample("cannot summarise an empty sample")
    sd_defined = x.size > 1
    constant = x.min() == x.max()  # avoid roundoff in the mean and sd
    counts, edges = np.histogram(x, bins=bins, range=(x.min(), x.max()))
    return Summary(
        count=int(x.size),
        mean=float(x[0]) if constant else float(x.mean()),
        sd=0.0 if constant or not sd_defined else float(x.std(ddof=1)),
        sd_defined=sd_defined,
        quantiles={q: float(np.percentile(x, q)) for q in QUANTILES},
        bin_edges=edges,
        bin_counts=counts,
    )


@dataclass(frozen=True, eq=False)
class McSummary:
    statistics: dict[str, Summary]
    analytic_reference: AnalyticEstimand | None
    replication_count: int
    failures: int
    draws: dict[str, np.ndarray] = field(repr=False, default_factory=dict)

    def __getitem__(self, name: str) -> Summary:
        return self.statistics[name]


# statistic names
def coef_key(name: str) -> str:
    return f"coef:{name}"


def controlled_key(name: str) -> str:
    return f"controlled:coef:{name}"


def resid_cov_key(probe: str) -> str:
    return f"cov:resid:{probe}"


def noise_cov_key(probe: str) -> str:
    return f"cov:noise:{probe}"


def arm_key(probe: str, arm: int) -> str:
    return f"arm_mean:resid:{probe}={arm}"


def _structural_noise(scenario: Scenario, data: Dataset, outcome: str) -> np.ndarray:
    eq = scenario.model.equation(outcome)
    fitted = eq.intercept + sum(c * data[p] for p, c in eq.terms)
    return data[outcome] - fitted


def replicate(scenario: Scenario, r: int) -> dict[str, float]:
    """One replication: sample, fit, and record every tracked statistic."""
    spec = scenario.regression
    data = sample(scenario.model, scenario.n, Stream(scenario.master_seed, r))
    if spec.method == "first_difference":
        pairs = spec.panel_pairs
        data = first_difference(data, pairs)
        y1, y2 = pairs[spec.outcome]
        noise = _structural_noise(scenario, data, y2) - _structural_noise(scenario, data, y1)
    else:
        noise = _structural_noise(scenario, data, spec.outcome)

    if spec.method == "tsls":
        fit = tsls_fit(data, spec.outcome, spec.regressors[0], spec.instrument)
    else:
        fit = ols_fit(data, spec.outcome, spec.regressors)

    out = {"intercept": fit.intercept}
    out.update({coef_key(k): v for k, v in fit.coefficients.items()})
    if scenario.latent not in spec.regressors:
        controlled = ols_fit(data, spec.outcome, [*spec.regressors, scenario.latent])
        out[controlled_key(spec.treatment)] = controlled.coefficients[spec.treatment]

    diag = residual_diagnostics(fit, data, scenario.diagnostics_probes)
    for probe, c in diag.covariances.items():
        out[resid_cov_key(probe)] = c
        x = data[probe]
        out[noise_cov_key(probe)] = float((noise - noise.mean()) @ (x - x.mean()) / (x.size - 1))
    for probe, arms in diag.arm_means.items():
        for arm, m in arms.items():
            out[arm_key(probe, arm)] = m
            out[f"arm_mean:noise:{probe}={arm}"] = float(noise[data[probe] == arm].mean()) if math.isfinite(m) else m
    return out


def _run_chunk(scenario: Scenario, reps: range) -> list[dict[str, float] | None]:
    results = []
    for r in reps:
        try:
            results.append(replicate(scenario, r))
        except NumericError:
            results.append(None)
    return results


def _chunks(total: int, workers: int) -> list[range]:
    size = max(1, math.ceil(total / (workers * 4)))
    return [range(s, min(s + size, total + 1)) for s in range(1, total + 1, size)]


def run_experiment(scenario: Scenario, workers: int = 1) -> McSummary:
    """Run every replication and summarise the sampling distributions.

    Replications whose fit raises a numeric error are counted; more than 1%
    failures aborts with :class:`ReplicationFailure`.
    """
    R = scenario.replications
    chunks = _chunks(R, max(1, workers))
    if workers <= 1:
        parts = [_run_chunk(scenario, c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _run_chunk(scenario, c), chunks))
    records = [rec for part in parts for rec in part]

    failures = sum(rec is None for rec in records)
    if failures > MAX_FAILURE_SHARE * R:
        raise ReplicationFailure(f"{failures} of {R} replications failed")
    ok = [rec for rec in records if rec is not None]
    if not ok:
        raise ReplicationFailure("every replication failed")

    names = list(ok[0])
    draws = {k: np.array([rec.get(k, np.nan) for rec in ok]) for k in names}
    stats = {k: summarize(v[np.isfinite(v)]) for k, v in draws.items() if np.isfinite(v).any()}
    try:
        analytic = decompose(scenario.model, scenario.regression, scenario.latent)
    except UnsupportedTransform:
        analytic = None
    return McSummary(stats, analytic, len(ok), failures, draws)

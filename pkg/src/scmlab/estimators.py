"""Finite-sample OLS, just-identified 2SLS and first differencing."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InsufficientObservations, SingularDesign, UnknownVariable, WeakInstrument
from .estimands import SINGULAR_RTOL, WEAK_IV_RTOL
from .scm import Dataset


@dataclass(frozen=True, eq=False)
class RegressionFit:
    method: str
    outcome: str
    intercept: float
    coefficients: Mapping[str, float]
    residuals: np.ndarray
    instrument: str | None = None

    @property
    def n(self) -> int:
        return self.residuals.size


@dataclass(frozen=True)
class ResidualDiagnostics:
    """Sample ``Cov(residual, probe)`` per probe, plus per-arm residual means
    for probes that are 0/1 in the data."""

    covariances: Mapping[str, float]
    arm_means: Mapping[str, Mapping[int, float]] = field(default_factory=dict)


def ols_fit(dataset: Dataset, outcome: str, regressors: Sequence[str]) -> RegressionFit:
    """Least squares with intercept via QR of the centred design."""
    regressors = list(regressors)
    y = dataset[outcome]
    X = dataset.matrix(regressors)
    n, k = X.shape
    if n <= k + 1:
        raise InsufficientObservations(f"{n} rows cannot identify {k} slopes and an intercept")
    xbar = X.mean(axis=0)
    ybar = y.mean()
    q, r = np.linalg.qr(X - xbar)
    s = np.linalg.svd(r, compute_uv=False)
    if s[0] == 0.0 or s[-1] < SINGULAR_RTOL * s[0]:
        raise SingularDesign(f"design on {regressors} is rank deficient")
    coef = solve_triangular(r, q.T @ (y - ybar))
    intercept = ybar - xbar @ coef
    resid = y - intercept - X @ coef
    # one step of iterative refinement: the first solve's roundoff is
    # systematic across samples and would otherwise bias averaged residuals
    ebar = resid.mean()
    step = solve_triangular(r, q.T @ (resid - ebar))
    coef = coef + step
    intercept = float(intercept + ebar - xbar @ step)
    resid = y - intercept - X @ coef
    return RegressionFit("ols", outcome, intercept, dict(zip(regressors, coef.tolist())), resid)


def tsls_fit(dataset: Dataset, outcome: str, treatment: str, instrument: str) -> RegressionFit:
    """Just-identified IV: slope ``Cov(Z, Y) / Cov(Z, D)``."""
    y, d, z = dataset[outcome], dataset[treatment], dataset[instrument]
    if y.size < 3:
        raise InsufficientObservations("2SLS needs at least three rows")
    zc = z - z.mean()
    dc = d - d.mean()
    szd = zc @ dc
    if abs(szd) < WEAK_IV_RTOL * np.sqrt((zc @ zc) * (dc @ dc)) or szd == 0.0:
        raise WeakInstrument(f"sample Cov({instrument}, {treatment}) is numerically zero")
    slope = float(zc @ (y - y.mean()) / szd)
    intercept = float(y.mean() - slope * d.mean())
    resid = y - intercept - slope * d
    return RegressionFit("tsls", outcome, intercept, {treatment: slope}, resid, instrument=instrument)


def first_difference(dataset: Dataset, pairs: Mapping[str, tuple[str, str]]) -> Dataset:
    """Add ``name = second - first`` for each ``name: (first, second)``."""
    new = {}
    for name, (first, second) in pairs.items():
        new[name] = dataset[second] - dataset[first]
    return dataset.with_columns(new)


def fd_fit(dataset: Dataset, pairs: Mapping[str, tuple[str, str]], outcome: str, regressors: Sequence[str]) -> RegressionFit:
    diffed = first_difference(dataset, pairs)
    fit = ols_fit(diffed, outcome, regressors)
    return RegressionFit("first_difference", fit.outcome, fit.intercept, fit.coefficients, fit.residuals)


def _is_binary(x: np.ndarray) -> bool:
    return bool(np.all((x == 0.0) | (x == 1.0)))


def residual_diagnostics(fit: RegressionFit, dataset: Dataset, probe_variables: Iterable[str]) -> ResidualDiagnostics:
    e = fit.residuals
    if e.size != dataset.n:
        raise ValueError("residuals and dataset differ in length")
    covs: dict[str, float] = {}
    arms: dict[str, dict[int, float]] = {}
    ec = e - e.mean()
    for name in probe_variables:
        if name not in dataset:
            raise UnknownVariable(f"dataset has no column {name!r}")
        x = dataset[name]
        covs[name] = float(ec @ (x - x.mean()) / (e.size - 1))
        if _is_binary(x):
            arms[name] = {
                arm: float(e[x == arm].mean()) if np.any(x == arm) else float("nan") for arm in (0, 1)
            }
    return ResidualDiagnostics(covs, arms)

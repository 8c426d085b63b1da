"""Population regression estimands computed from a model's implied moments.

Every variable of a linear model is an affine function of independent
"innovations" (noise terms, the Gaussian source block, and the outputs of
threshold equations). :func:`implied_moments` tracks that representation,
so first and second moments are exact, and differences such as
``Y2 - Y1`` keep their exact cancellations.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegenerateArm,
    NumericError,
    LatentNotInOutcomeEquation,
    SingularDesign,
    UnsupportedTransform,
    ValidationError,
    WeakInstrument,
)
from .graph import as_dag
from .regression import RegressionSpec, diff_name
from .scm import ScmModel, is_gaussian

SINGULAR_RTOL = 1e-10
WEAK_IV_RTOL = 1e-8
DECOMPOSITION_RTOL = 1e-9


def normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


# --------------------------------------------------------------------------
# Moments


@dataclass(frozen=True, eq=False)
class ImpliedMoments:
    """Exact means and covariances of a model's variables.

    ``variable = constant + loadings @ innovations``, where the innovations
    have mean ``innovation_mean`` and covariance ``innovation_cov``.
    """

    variables: tuple[str, ...]
    constant: np.ndarray
    loadings: np.ndarray
    innovation_mean: np.ndarray
    innovation_cov: np.ndarray

    @property
    def mean(self) -> dict[str, float]:
        m = self.constant + self.loadings @ self.innovation_mean
        return dict(zip(self.variables, m.tolist()))

    @property
    def covariance(self) -> np.ndarray:
        return self.loadings @ self.innovation_cov @ self.loadings.T

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise ValidationError(f"no moments for {name!r}") from None

    def cov(self, a: str, b: str) -> float:
        la, lb = self.loadings[self.index(a)], self.loadings[self.index(b)]
        return float(la @ self.innovation_cov @ lb)

    def var(self, a: str) -> float:
        return self.cov(a, a)

    def cov_block(self, rows: Sequence[str], cols: Sequence[str]) -> np.ndarray:
        lr = self.loadings[[self.index(v) for v in rows]]
        lc = self.loadings[[self.index(v) for v in cols]]
        return lr @ self.innovation_cov @ lc.T

    def derive(self, combos: Mapping[str, Mapping[str, float]]) -> ImpliedMoments:
        """Append linear combinations, e.g. ``{"dY": {"Y2": 1, "Y1": -1}}``."""
        const = list(self.constant)
        rows = list(self.loadings)
        for name, weights in combos.items():
            c = 0.0
            row = np.zeros(self.loadings.shape[1])
            for v, w in weights.items():
                i = self.index(v)
                c += w * self.constant[i]
                row = row + w * self.loadings[i]
            const.append(c)
            rows.append(row)
        return replace(
            self,
            variables=self.variables + tuple(combos),
            constant=np.array(const),
            loadings=np.array(rows).reshape(len(rows), -1),
        )


def implied_moments(model: ScmModel) -> ImpliedMoments:
    """Exact first and second moments by forward substitution.

    Threshold equations are supported when their linear part is Gaussian;
    the indicator's covariance with Gaussian innovations follows from
    ``E[(W - EW) 1{L > c}] = Cov(W, L) phi(z) / sd(L)``.
    """
    block = model.exogenous
    n_block = len(block.names) if block else 0
    kmax = n_block + 2 * len(model.equations)
    mean = np.zeros(kmax)
    cov = np.zeros((kmax, kmax))
    gaussian = np.zeros(kmax, dtype=bool)
    k = 0
    load: dict[str, np.ndarray] = {}
    const: dict[str, float] = {}

    def new_innovation(m: float, v: float, is_gauss: bool) -> np.ndarray:
        nonlocal k
        mean[k], cov[k, k], gaussian[k] = m, v, is_gauss
        e = np.zeros(kmax)
        e[k] = 1.0
        k += 1
        return e

    if block:
        mean[:n_block] = block.mean
        cov[:n_block, :n_block] = block.covariance
        gaussian[:n_block] = True
        for j, v in enumerate(block.names):
            load[v] = np.eye(kmax)[j]
            const[v] = 0.0
        k = n_block

    for v in model.variables:
        eq = model.equation(v)
        if eq is None:
            continue
        row = new_innovation(eq.noise.mean, eq.noise.var, is_gaussian(eq.noise))
        c = eq.intercept
        for p, coef in eq.terms:
            row = row + coef * load[p]
            c += coef * const[p]
        if eq.threshold is None:
            load[v], const[v] = row, c
            continue
        used = row != 0
        if np.any(used & ~gaussian):
            raise UnsupportedTransform(
                f"threshold equation for {v!r} has a non-Gaussian linear part; "
                "use simulation moments instead"
            )
        m_lin = c + row @ mean
        sd = math.sqrt(max(float(row @ cov @ row), 0.0))
        if sd == 0.0:
            load[v], const[v] = np.zeros(kmax), float(m_lin > eq.threshold)
            continue
        z = (eq.threshold - m_lin) / sd
        p = normal_cdf(-z)
        cross = (cov @ row) * (normal_pdf(z) / sd)
        e = new_innovation(p, p * (1.0 - p), False)
        j = k - 1
        cov[j, :j] = cross[:j]
        cov[:j, j] = cross[:j]
        load[v], const[v] = e, 0.0

    names = model.variables
    return ImpliedMoments(
        variables=names,
        constant=np.array([const[v] for v in names]),
        loadings=np.array([load[v][:k] for v in names]).reshape(len(names), k),
        innovation_mean=mean[:k].copy(),
        innovation_cov=cov[:k, :k].copy(),
    )


def threshold_treatment_moments(rho: float, cutoff: float) -> dict[str, float]:
    """Conditional means of ``U`` by arm for ``D = 1[X > cutoff]``.

    ``(X, U)`` is standard bivariate normal with correlation ``rho``;
    ``delta`` is the slope of ``U`` on ``D``.
    """
    if not abs(rho) <= 1:
        raise ValidationError(f"correlation must lie in [-1, 1], got {rho}")
    lower = normal_cdf(cutoff)
    upper = normal_cdf(-cutoff)
    if lower <= 0.0 or upper <= 0.0:
        raise DegenerateArm(f"cutoff {cutoff} leaves one treatment arm empty")
    dens = normal_pdf(cutoff)
    e1 = rho * dens / upper
    e0 = -rho * dens / lower
    return {"E_U_given_D0": e0, "E_U_given_D1": e1, "delta": e1 - e0}


# --------------------------------------------------------------------------
# Estimands


@dataclass(frozen=True)
class Decomposition:
    """Treatment coefficient = ``tau`` (causal) + ``bias``.

    ``beta`` and ``delta`` are the latent's outcome coefficient and its
    projection slope on the treatment (IV: divided by the first stage).
    """

    tau: float
    bias: float
    beta: float | None = None
    delta: float | None = None


@dataclass(frozen=True)
class AnalyticEstimand:
    regression: RegressionSpec
    intercept: float
    coefficients: Mapping[str, float]
    decomposition: Decomposition | None = None

    @property
    def method(self) -> str:
        return self.regression.method

    @property
    def treatment(self) -> str:
        return self.regression.treatment

    @property
    def slope(self) -> float:
        return self.coefficients[self.treatment]

    def with_decomposition(self, d: Decomposition) -> AnalyticEstimand:
        return replace(self, decomposition=d)


def _solve_normal_equations(sxx: np.ndarray, sxy: np.ndarray) -> np.ndarray:
    s = np.linalg.svd(sxx, compute_uv=False)
    if s.size == 0 or s[0] == 0.0 or s[-1] < SINGULAR_RTOL * s[0]:
        raise SingularDesign("regressor covariance block is singular")
    return np.linalg.solve(sxx, sxy)


def ols_estimand(
    moments: ImpliedMoments, outcome: str, regressors: Sequence[str], *, spec: RegressionSpec | None = None
) -> AnalyticEstimand:
    """Population OLS of ``outcome`` on ``regressors`` with an intercept."""
    regressors = tuple(regressors)
    sxx = moments.cov_block(regressors, regressors)
    sxy = moments.cov_block(regressors, [outcome])[:, 0]
    coef = _solve_normal_equations(sxx, sxy)
    mean = moments.mean
    intercept = mean[outcome] - float(coef @ np.array([mean[v] for v in regressors]))
    spec = spec or RegressionSpec("ols", outcome, regressors)
    return AnalyticEstimand(spec, intercept, dict(zip(regressors, coef.tolist())))


def iv_estimand(moments: ImpliedMoments, outcome: str, treatment: str, instrument: str) -> AnalyticEstimand:
    """Population just-identified IV: ``Cov(Z, Y) / Cov(Z, D)``."""
    czd = moments.cov(instrument, treatment)
    scale = math.sqrt(max(moments.var(instrument), 0.0) * max(moments.var(treatment), 0.0))
    if scale == 0.0 or abs(czd) < WEAK_IV_RTOL * scale:
        raise WeakInstrument(f"Cov({instrument}, {treatment}) is numerically zero")
    slope = moments.cov(instrument, outcome) / czd
    mean = moments.mean
    spec = RegressionSpec("tsls", outcome, (treatment,), instrument=instrument)
    return AnalyticEstimand(spec, mean[outcome] - slope * mean[treatment], {treatment: slope})


def _as_moments(model_or_moments) -> ImpliedMoments:
    if isinstance(model_or_moments, ImpliedMoments):
        return model_or_moments
    return implied_moments(model_or_moments)


def panel_moments(moments: ImpliedMoments, pairs: Mapping[str, tuple[str, str]]) -> ImpliedMoments:
    return moments.derive({name: {b: 1.0, a: -1.0} for name, (a, b) in pairs.items()})


def fd_estimand(
    two_period_model,
    outcome_pair: tuple[str, str],
    treatment_pair: tuple[str, str],
    *,
    spec: RegressionSpec | None = None,
) -> AnalyticEstimand:
    """Population OLS of the outcome's first difference on the treatment's.

    Pairs are ``(period 1, period 2)``. Anything entering both periods with
    the same loading (a unit fixed effect) cancels exactly.
    """
    if spec is None:
        dy, dd = diff_name(*outcome_pair), diff_name(*treatment_pair)
        spec = RegressionSpec(
            "first_difference", dy, (dd,), panel_pairs={dy: tuple(outcome_pair), dd: tuple(treatment_pair)}
        )
    moments = panel_moments(_as_moments(two_period_model), spec.panel_pairs)
    return ols_estimand(moments, spec.outcome, spec.regressors, spec=spec)


def estimand_for(model: ScmModel, spec: RegressionSpec, moments: ImpliedMoments | None = None) -> AnalyticEstimand:
    """Analytic estimand matching a regression specification."""
    moments = moments or implied_moments(model)
    if spec.method == "ols":
        return ols_estimand(moments, spec.outcome, spec.regressors, spec=spec)
    if spec.method == "tsls":
        est = iv_estimand(moments, spec.outcome, spec.regressors[0], spec.instrument)
        return replace(est, regression=spec)
    return fd_estimand(moments, None, None, spec=spec)


# --------------------------------------------------------------------------
# Decomposition


def _outcome_terms(model: ScmModel, outcome: str) -> dict[str, float]:
    eq = model.equation(outcome)
    if eq is None or eq.threshold is not None:
        raise ValidationError(f"outcome {outcome!r} needs a linear structural equation")
    return eq.coefficients


def bias_decomposition(
    model: ScmModel,
    estimand: AnalyticEstimand,
    treatment: str | None = None,
    latent: str | tuple[str, str] | None = None,
    *,
    moments: ImpliedMoments | None = None,
) -> Decomposition:
    """Split the treatment coefficient into the causal effect and omitted-variable bias.

    ``tau`` is read off the outcome equation; ``bias`` projects the outcome's
    omitted parents onto the regressors (onto the instrument for IV, onto the
    differenced regressors for first differences). For the first-difference
    method ``treatment`` and ``latent`` name model variables as
    ``(period 1, period 2)`` pairs, or the declared pair names.
    """
    spec = estimand.regression
    moments = moments or implied_moments(model)
    treatment = treatment or spec.treatment

    if spec.method == "first_difference":
        return _fd_decomposition(model, estimand, treatment, latent, moments)

    coeffs = _outcome_terms(model, spec.outcome)
    if latent is None or latent not in coeffs:
        raise LatentNotInOutcomeEquation(f"latent {latent!r} does not enter the equation for {spec.outcome!r}")
    _check_not_downstream(model, spec.outcome, [*spec.regressors, *([spec.instrument] if spec.instrument else [])])
    tau = coeffs.get(treatment, 0.0)
    beta = coeffs[latent]

    if spec.method == "ols":
        omitted = {p: c for p, c in coeffs.items() if p not in spec.regressors}
        m = moments.derive({"__omitted": omitted, "__latent": {latent: 1.0}})
        regs = list(spec.regressors)
        sxx = m.cov_block(regs, regs)
        proj = _solve_normal_equations(sxx, m.cov_block(regs, ["__omitted", "__latent"]))
        j = regs.index(treatment)
        bias = float(proj[j, 0])
        delta = float(proj[j, 1]) if latent not in spec.regressors else 0.0
    else:
        z = spec.instrument
        omitted = {p: c for p, c in coeffs.items() if p != treatment}
        m = moments.derive({"__omitted": omitted})
        first_stage = m.cov(z, treatment)
        bias = m.cov(z, "__omitted") / first_stage
        delta = m.cov(z, latent) / first_stage
    return _checked(estimand, Decomposition(tau, bias, beta, delta))


def _fd_decomposition(model, estimand, treatment, latent, moments) -> Decomposition:
    spec = estimand.regression
    pairs = spec.panel_pairs
    y1, y2 = pairs[spec.outcome]
    d_pair = pairs.get(treatment, treatment)
    u_pair = pairs.get(latent, latent) if isinstance(latent, str) else latent
    if not isinstance(d_pair, tuple) or not isinstance(u_pair, tuple):
        raise ValidationError("first-difference decomposition needs (period 1, period 2) pairs")
    c1, c2 = _outcome_terms(model, y1), _outcome_terms(model, y2)
    if u_pair[0] not in c1 or u_pair[1] not in c2:
        raise LatentNotInOutcomeEquation(f"latent pair {u_pair!r} does not enter both outcome equations")
    regs = [pairs[r] for r in spec.regressors]
    _check_not_downstream(model, y1, [v for pr in regs for v in pr])
    _check_not_downstream(model, y2, [v for pr in regs for v in pr])
    tau = c2.get(d_pair[1], 0.0)
    if c1.get(d_pair[0], 0.0) != tau:
        raise ValidationError("treatment effect differs between periods")
    beta = c2[u_pair[1]]
    omitted: dict[str, float] = {}
    for coeffs, sign, own_regs in ((c2, 1.0, {b for _, b in regs}), (c1, -1.0, {a for a, _ in regs})):
        for p, c in coeffs.items():
            if p not in own_regs:
                omitted[p] = omitted.get(p, 0.0) + sign * c
    m = panel_moments(moments, pairs).derive({"__omitted": omitted, "__latent": {u_pair[1]: 1.0, u_pair[0]: -1.0}})
    names = list(spec.regressors)
    proj = _solve_normal_equations(m.cov_block(names, names), m.cov_block(names, ["__omitted", "__latent"]))
    j = names.index(spec.treatment if treatment not in names else treatment)
    return _checked(estimand, Decomposition(tau, float(proj[j, 0]), beta, float(proj[j, 1])))


def _check_not_downstream(model: ScmModel, outcome: str, regressors) -> None:
    below = as_dag(model).descendants(outcome)
    bad = sorted(set(regressors) & below)
    if bad:
        raise ValidationError(f"regressors {bad} are descendants of the outcome {outcome!r}")


def _checked(estimand: AnalyticEstimand, d: Decomposition) -> Decomposition:
    coef = estimand.slope
    if abs(coef - (d.tau + d.bias)) > DECOMPOSITION_RTOL * max(1.0, abs(coef)):
        raise NumericError(
            f"decomposition mismatch: coefficient {coef!r} vs tau + bias {d.tau + d.bias!r}"
        )
    return d


def decompose(model: ScmModel, spec: RegressionSpec, latent) -> AnalyticEstimand:
    """Analytic estimand for ``spec`` with its decomposition attached."""
    moments = implied_moments(model)
    est = estimand_for(model, spec, moments)
    return est.with_decomposition(bias_decomposition(model, est, spec.treatment, latent, moments=moments))

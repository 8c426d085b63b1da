"""Scenarios and the built-in presets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .errors import UnknownPreset, ValidationError
from .regression import RegressionSpec
from .scm import (
    Degenerate,
    ExogenousBlock,
    Gaussian,
    ScaledChiSquared,
    ScmModel,
    StructuralEquation as Eq,
    build_model,
)

DEFAULT_SEED = 20240101


@dataclass(frozen=True, eq=False)
class Scenario:
    model: ScmModel
    regression: RegressionSpec
    latent: str
    n: int = 1000
    replications: int = 10000
    master_seed: int = DEFAULT_SEED
    diagnostics_probes: tuple[str, ...] = ()
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "diagnostics_probes", tuple(self.diagnostics_probes))
        if self.n < 10:
            raise ValidationError("scenario sample size must be at least 10")
        if self.replications < 1:
            raise ValidationError("scenario needs at least one replication")
        self.model.check(*sorted(self.regression.model_variables()))
        if self.regression.method == "first_difference":
            for pair in self.regression.panel_pairs.values():
                self.model.check(*pair)
            latent_vars = self.regression.panel_pairs.get(self.latent, (self.latent,))
            self.model.check(*latent_vars)
            probe_space = set(self.model.variables) | set(self.regression.panel_pairs)
        else:
            self.model.check(self.latent)
            probe_space = set(self.model.variables)
        for p in self.diagnostics_probes:
            if p not in probe_space:
                raise ValidationError(f"diagnostic probe {p!r} is not a model variable")

    def with_overrides(self, **kw) -> Scenario:
        fields = dict(
            model=self.model,
            regression=self.regression,
            latent=self.latent,
            n=self.n,
            replications=self.replications,
            master_seed=self.master_seed,
            diagnostics_probes=self.diagnostics_probes,
            name=self.name,
        )
        fields.update({k: v for k, v in kw.items() if v is not None})
        return Scenario(**fields)


def chi2_noise(scale: float = 1000.0) -> ScaledChiSquared:
    """``(chi2_1 - 1) * scale``: mean zero, variance ``2 * scale**2``."""
    return ScaledChiSquared(df=1, scale=scale, shift=-scale)


def continuous(alpha=5000.0, tau=100.0, beta=1000.0, mean_d=12.0, cov=((4.0, 1.0), (1.0, 1.0))) -> Scenario:
    model = build_model(
        [Eq("Y", alpha, {"D": tau, "U": beta}, chi2_noise())],
        ExogenousBlock(("D", "U"), (mean_d, 0.0), cov),
    )
    return Scenario(model, RegressionSpec("ols", "Y", ("D",)), "U", diagnostics_probes=("D",), name="cont")


def continuous_covariate(rho=0.5, alpha=0.0, tau=1.0, phi=1.0, beta=1.0, noise_variance=1.0) -> Scenario:
    cov = [[1.0, rho, rho], [rho, 1.0, rho], [rho, rho, 1.0]]
    model = build_model(
        [Eq("Y", alpha, {"D": tau, "X": phi, "U": beta}, Gaussian(0.0, noise_variance))],
        ExogenousBlock(("D", "X", "U"), (0.0, 0.0, 0.0), cov),
    )
    return Scenario(
        model, RegressionSpec("ols", "Y", ("D", "X")), "U", diagnostics_probes=("D", "X"), name="cont-x"
    )


def binary(alpha=5000.0, tau=2000.0, beta=1000.0, rho=0.5, cutoff=0.0) -> Scenario:
    model = build_model(
        [
            Eq("D", 0.0, {"X": 1.0}, Degenerate(0.0), threshold=cutoff),
            Eq("Y", alpha, {"D": tau, "U": beta}, chi2_noise()),
        ],
        ExogenousBlock(("X", "U"), (0.0, 0.0), [[1.0, rho], [rho, 1.0]]),
    )
    return Scenario(model, RegressionSpec("ols", "Y", ("D",)), "U", diagnostics_probes=("D",), name="binary")


def invalid_iv(alpha=0.0, tau=2.0, beta=0.8, pi=1.0, mu=0.0, delta=1.0) -> Scenario:
    model = build_model(
        [
            Eq("Z", 0.0, {}, Gaussian()),
            Eq("D", 0.0, {"Z": pi}, Gaussian()),
            Eq("U", mu, {"Z": delta}, Gaussian()),
            Eq("Y", alpha, {"D": tau, "U": beta}, Gaussian()),
        ]
    )
    spec = RegressionSpec("tsls", "Y", ("D",), instrument="Z")
    return Scenario(model, spec, "U", diagnostics_probes=("Z", "D"), name="iv-invalid")


def panel(tau=1.0, beta=1.0, confounding=1.0, fe_variance=1.0, fe_loading=1.0) -> Scenario:
    """Two-period panel with unit fixed effect ``A`` and confounder ``U_t``.

    ``D_t = fe_loading * A + confounding * U_t + e_t`` with unit-variance
    ``U_t`` and ``e_t``, so the slope of ``dU`` on ``dD`` is
    ``confounding / (1 + confounding**2)`` (1/2 by default).
    """
    eqs = [Eq("A", 0.0, {}, Gaussian(0.0, fe_variance))]
    for t in ("1", "2"):
        eqs += [
            Eq("U" + t, 0.0, {}, Gaussian()),
            Eq("D" + t, 0.0, {"A": fe_loading, "U" + t: confounding}, Gaussian()),
        ]
    for t in ("1", "2"):
        eqs.append(Eq("Y" + t, 0.0, {"A": 1.0, "D" + t: tau, "U" + t: beta}, Gaussian()))
    pairs = {"dY": ("Y1", "Y2"), "dD": ("D1", "D2"), "dU": ("U1", "U2")}
    spec = RegressionSpec("first_difference", "dY", ("dD",), panel_pairs=pairs)
    return Scenario(build_model(eqs), spec, "dU", diagnostics_probes=("dD",), name="panel")


@dataclass(frozen=True)
class Preset:
    name: str
    build: Callable[..., Scenario]
    provenance: str
    description: str = field(default="")


PRESETS: dict[str, Preset] = {
    p.name: p
    for p in [
        Preset(
            "cont",
            continuous,
            "Monte Carlo design: continuous treatment",
            "Y = 5000 + 100 D + 1000 U + v, (D, U) bivariate normal; E[Y|D] = 2000 + 350 D",
        ),
        Preset(
            "cont-x",
            continuous_covariate,
            "Monte Carlo design: continuous treatment with an exogenous control",
            "Y = D + X + U + v, (D, X, U) equicorrelated (rho = 1/2); slope on D = 4/3",
        ),
        Preset(
            "binary",
            binary,
            "Monte Carlo design: binary treatment by thresholding",
            "D = 1[X > 0], Y = 5000 + 2000 D + 1000 U + v; E[Y|D] ~ 4601 + 2798 D",
        ),
        Preset(
            "iv-invalid",
            invalid_iv,
            "Monte Carlo design: instrument acting through the confounder",
            "D = Z + eta, U = Z + xi, Y = 2 D + 0.8 U + v; 2SLS estimand 2.8",
        ),
        Preset(
            "panel",
            panel,
            "analytic panel argument: two-period first differences",
            "Y_t = A + D_t + U_t + v_t, D_t = A + U_t + e_t; first-difference estimand 1.5",
        ),
    ]
}


def preset(name: str, **params) -> Scenario:
    try:
        entry = PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return entry.build(**params)

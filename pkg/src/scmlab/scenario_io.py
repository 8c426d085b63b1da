"""Reading and writing scenario files.

Scenario files are TOML. The grammar (all tables optional unless noted):

.. code-block:: toml

    name = "cont"                 # optional label
    latent = "U"                  # required

    [variables]                   # parentless variables, shorthand
    A = { distribution = "gaussian", mean = 0.0, variance = 1.0 }

    [exogenous_block]             # jointly Gaussian sources
    names = ["D", "U"]
    mean = [12.0, 0.0]
    covariance = [[4.0, 1.0], [1.0, 1.0]]

    [[equations]]                 # one table per structural equation
    target = "Y"
    intercept = 5000.0
    terms = { D = 100.0, U = 1000.0 }
    noise = { distribution = "chi2", df = 1, scale = 1000.0, shift = -1000.0 }
    threshold = 0.0               # optional: target = 1[linear part > threshold]

    [regression]                  # required
    method = "ols"                # ols | tsls | first_difference
    outcome = "Y"
    regressors = ["D"]
    instrument = "Z"              # tsls only
    treatment = "D"               # optional, defaults to the first regressor
    panel_pairs = { dY = ["Y1", "Y2"] }   # first_difference only

    [mc]
    n = 1000
    replications = 10000
    seed = 42

    [diagnostics]
    probes = ["D"]

Noise distributions: ``gaussian`` (mean, variance), ``chi2`` (df, scale,
shift; value = scale * chi2(df) + shift) and ``degenerate`` (value).
"""

from __future__ import annotations

import math
import re
from pathlib import Path

import tomli_w

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import LabError, ParseError, ValidationError
from .regression import RegressionSpec
from .scenario import PRESETS, Scenario, preset
from .scm import Degenerate, ExogenousBlock, Gaussian, ScaledChiSquared, StructuralEquation, build_model

TOP_KEYS = {"name", "latent", "variables", "exogenous_block", "equations", "regression", "mc", "diagnostics"}
NOISE_KINDS = {
    "gaussian": (Gaussian, {"mean", "variance"}),
    "chi2": (ScaledChiSquared, {"df", "scale", "shift"}),
    "degenerate": (Degenerate, {"value"}),
}


def _reject_unknown(table: dict, allowed: set[str], where: str) -> None:
    extra = sorted(set(table) - allowed)
    if extra:
        raise ValidationError(f"{where}: unknown key(s) {', '.join(extra)}")


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValidationError(f"{where}: expected a number, got {x!r}")
    if not math.isfinite(x):
        raise ValidationError(f"{where}: numbers must be finite")
    return float(x)


def _integer(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ValidationError(f"{where}: expected an integer, got {x!r}")
    return x


def _noise(table, where: str):
    if not isinstance(table, dict):
        raise ValidationError(f"{where}: noise must be a table")
    table = dict(table)
    kind = table.pop("distribution", None)
    if kind not in NOISE_KINDS:
        raise ValidationError(f"{where}: distribution must be one of {', '.join(NOISE_KINDS)}")
    cls, allowed = NOISE_KINDS[kind]
    _reject_unknown(table, allowed, where)
    args = {}
    for k, v in table.items():
        args[k] = _integer(v, f"{where}.{k}") if k == "df" else _number(v, f"{where}.{k}")
    return cls(**args)


def scenario_from_dict(doc: dict) -> Scenario:
    _reject_unknown(doc, TOP_KEYS, "scenario")
    equations = []
    for name, dist in doc.get("variables", {}).items():
        equations.append(StructuralEquation(name, 0.0, (), _noise(dist, f"variables.{name}")))
    for i, eq in enumerate(doc.get("equations", [])):
        where = f"equations[{i}]"
        _reject_unknown(eq, {"target", "intercept", "terms", "noise", "threshold"}, where)
        if "target" not in eq:
            raise ValidationError(f"{where}: missing target")
        terms = {p: _number(c, f"{where}.terms.{p}") for p, c in eq.get("terms", {}).items()}
        noise = _noise(eq["noise"], f"{where}.noise") if "noise" in eq else Degenerate(0.0)
        threshold = _number(eq["threshold"], f"{where}.threshold") if "threshold" in eq else None
        equations.append(
            StructuralEquation(eq["target"], _number(eq.get("intercept", 0.0), f"{where}.intercept"), terms, noise, threshold)
        )
    block = None
    if "exogenous_block" in doc:
        b = doc["exogenous_block"]
        _reject_unknown(b, {"names", "mean", "covariance"}, "exogenous_block")
        mean = [_number(x, "exogenous_block.mean") for x in b.get("mean", [])]
        cov = [[_number(x, "exogenous_block.covariance") for x in row] for row in b.get("covariance", [])]
        block = ExogenousBlock(tuple(b.get("names", ())), mean, cov)
    model = build_model(equations, block)

    if "regression" not in doc:
        raise ValidationError("scenario: missing [regression] table")
    reg = doc["regression"]
    _reject_unknown(reg, {"method", "outcome", "regressors", "instrument", "treatment", "panel_pairs"}, "regression")
    spec = RegressionSpec(
        method=reg.get("method", "ols"),
        outcome=reg.get("outcome"),
        regressors=tuple(reg.get("regressors", ())),
        instrument=reg.get("instrument"),
        panel_pairs={k: tuple(v) for k, v in reg.get("panel_pairs", {}).items()},
        treatment=reg.get("treatment"),
    )
    mc = doc.get("mc", {})
    _reject_unknown(mc, {"n", "replications", "seed"}, "mc")
    diag = doc.get("diagnostics", {})
    _reject_unknown(diag, {"probes"}, "diagnostics")
    if "latent" not in doc:
        raise ValidationError("scenario: missing latent")
    kw = {}
    for key, field in (("n", "n"), ("replications", "replications"), ("seed", "master_seed")):
        if key in mc:
            kw[field] = _integer(mc[key], f"mc.{key}")
    return Scenario(
        model, spec, doc["latent"], diagnostics_probes=tuple(diag.get("probes", ())), name=doc.get("name"), **kw
    )


_LOCATION = re.compile(r"\(at line (\d+), column (\d+)\)")


def _end_of(text: str) -> tuple[int, int]:
    lines = text.split("\n")
    return len(lines), len(lines[-1]) + 1


def parse_scenario(text: str) -> Scenario:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        msg = getattr(exc, "msg", None) or _LOCATION.sub("", str(exc)).strip()
        line, col = getattr(exc, "lineno", None), getattr(exc, "colno", None)
        if line is None:
            m = _LOCATION.search(str(exc))
            line, col = (int(m.group(1)), int(m.group(2))) if m else _end_of(text)
        raise ParseError(msg, line, col) from None
    try:
        return scenario_from_dict(doc)
    except LabError:
        raise
    except (TypeError, AttributeError, ValueError) as exc:
        raise ValidationError(f"malformed scenario: {exc}") from None


def load_scenario(source: str | Path) -> Scenario:
    """Load a built-in preset by name, or a scenario file by path."""
    if isinstance(source, str) and source in PRESETS:
        return preset(source)
    text = Path(source).read_text(encoding="utf-8")
    return parse_scenario(text)


def _noise_dict(noise) -> dict:
    if isinstance(noise, Gaussian):
        return {"distribution": "gaussian", "mean": noise.mean, "variance": noise.variance}
    if isinstance(noise, ScaledChiSquared):
        return {"distribution": "chi2", "df": int(noise.df), "scale": noise.scale, "shift": noise.shift}
    return {"distribution": "degenerate", "value": noise.value}


def scenario_to_dict(s: Scenario) -> dict:
    doc: dict = {}
    if s.name:
        doc["name"] = s.name
    doc["latent"] = s.latent
    if s.model.exogenous is not None:
        b = s.model.exogenous
        doc["exogenous_block"] = {
            "names": list(b.names),
            "mean": b.mean.tolist(),
            "covariance": b.covariance.tolist(),
        }
    eqs = []
    for eq in s.model.equations:
        e = {"target": eq.target, "intercept": eq.intercept, "terms": dict(eq.terms), "noise": _noise_dict(eq.noise)}
        if eq.threshold is not None:
            e["threshold"] = eq.threshold
        eqs.append(e)
    doc["equations"] = eqs
    r = s.regression
    reg = {"method": r.method, "outcome": r.outcome, "regressors": list(r.regressors), "treatment": r.treatment}
    if r.instrument is not None:
        reg["instrument"] = r.instrument
    if r.panel_pairs:
        reg["panel_pairs"] = {k: list(v) for k, v in r.panel_pairs.items()}
    doc["regression"] = reg
    doc["mc"] = {"n": s.n, "replications": s.replications, "seed": s.master_seed}
    doc["diagnostics"] = {"probes": list(s.diagnostics_probes)}
    return doc


def dump_scenario(s: Scenario) -> str:
    return tomli_w.dumps(scenario_to_dict(s))

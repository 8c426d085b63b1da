from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Literal

from .errors import ValidationError

Method = Literal["ols", "tsls", "first_difference"]
METHODS = ("ols", "tsls", "first_difference")


def diff_name(first: str, second: str) -> str:
    """Default column name for ``second - first``."""
    return f"{second}-{first}"


@dataclass(frozen=True)
class RegressionSpec:
    """Which regression to run.

    For ``first_difference`` the outcome and regressors name differenced
    columns declared in ``panel_pairs`` (name -> (period 1, period 2)).
    ``treatment`` is the regressor whose coefficient is decomposed; it
    defaults to the first regressor.
    """

    method: Method
    outcome: str
    regressors: tuple[str, ...]
    instrument: str | None = None
    panel_pairs: Mapping[str, tuple[str, str]] = field(default_factory=dict)
    treatment: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "regressors", tuple(self.regressors))
        object.__setattr__(
            self, "panel_pairs", {k: (str(a), str(b)) for k, (a, b) in dict(self.panel_pairs).items()}
        )
        if self.method not in METHODS:
            raise ValidationError(f"unknown regression method {self.method!r}")
        if not self.regressors:
            raise ValidationError("a regression needs at least one regressor")
        if len(set(self.regressors)) != len(self.regressors):
            raise ValidationError("regressors must be distinct")
        if self.method == "tsls":
            if self.instrument is None:
                raise ValidationError("tsls needs an instrument")
            if len(self.regressors) != 1:
                raise ValidationError("tsls is just-identified: exactly one regressor")
        elif self.instrument is not None:
            raise ValidationError(f"method {self.method!r} takes no instrument")
        if self.method == "first_difference":
            for name in (self.outcome, *self.regressors):
                if name not in self.panel_pairs:
                    raise ValidationError(f"{name!r} is not a declared panel pair")
        if self.treatment is None:
            object.__setattr__(self, "treatment", self.regressors[0])
        elif self.treatment not in self.regressors:
            raise ValidationError("treatment must be one of the regressors")

    def model_variables(self) -> set[str]:
        """Model variables the regression reads."""
        if self.method == "first_difference":
            return {v for name in (self.outcome, *self.regressors) for v in self.panel_pairs[name]}
        out = {self.outcome, *self.regressors}
        if self.instrument is not None:
            out.add(self.instrument)
        return out

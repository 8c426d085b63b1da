"""Linear structural causal models with additive noise.

A model is a list of structural equations

    target = intercept + sum(coef * parent) + noise        (identity)
    target = 1[intercept + sum(coef * parent) + noise > c]  (threshold)

plus an optional block of jointly Gaussian source variables. Models are
immutable; :func:`intervene` returns a modified copy.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .errors import (
    CyclicGraph,
    DuplicateDefinition,
    MissingNoiseDraw,
    NonPsdCovariance,
    UnknownParent,
    UnknownVariable,
    ValidationError,
)
from .rng import Stream

SYMMETRY_TOL = 1e-10
EIGEN_FLOOR = -1e-10
MAX_VARIABLES = 32


# --------------------------------------------------------------------------
# Noise laws


@dataclass(frozen=True)
class Gaussian:
    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if not self.variance >= 0:
            raise ValidationError(f"gaussian variance must be >= 0, got {self.variance}")

    @property
    def var(self) -> float:
        return float(self.variance)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.mean + np.sqrt(self.variance) * rng.standard_normal(n)


@dataclass(frozen=True)
class ScaledChiSquared:
    """``scale * chi2(df) + shift``; ``(chi2_1 - 1) * 1000`` is scale=1000, shift=-1000."""

    df: int = 1
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if int(self.df) != self.df or self.df < 1:
            raise ValidationError(f"chi-squared df must be a positive integer, got {self.df}")

    @property
    def mean(self) -> float:
        return self.scale * self.df + self.shift

    @property
    def var(self) -> float:
        return 2.0 * self.df * self.scale**2

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        z = rng.standard_normal((n, int(self.df)))
        return self.scale * np.square(z).sum(axis=1) + self.shift


@dataclass(frozen=True)
class Degenerate:
    value: float = 0.0

    @property
    def mean(self) -> float:
        return self.value

    @property
    def var(self) -> float:
        return 0.0

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, float(self.value))


NoiseDistribution = Union[Gaussian, ScaledChiSquared, Degenerate]


def is_gaussian(noise: NoiseDistribution) -> bool:
    """Gaussian in the wide sense: degenerate laws count as zero-variance normals."""
    return isinstance(noise, (Gaussian, Degenerate))


# --------------------------------------------------------------------------
# Equations and the exogenous block


@dataclass(frozen=True)
class StructuralEquation:
    target: str
    intercept: float = 0.0
    terms: tuple[tuple[str, float], ...] = ()
    noise: NoiseDistribution = field(default_factory=Degenerate)
    threshold: float | None = None

    def __post_init__(self):
        terms = self.terms.items() if isinstance(self.terms, Mapping) else self.terms
        terms = tuple((str(p), float(c)) for p, c in terms)
        parents = [p for p, _ in terms]
        if len(set(parents)) != len(parents):
            raise DuplicateDefinition(f"equation for {self.target!r} lists a parent twice")
        if self.target in parents:
            raise CyclicGraph(f"{self.target!r} appears in its own equation")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def parents(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self.terms)

    @property
    def coefficients(self) -> dict[str, float]:
        return dict(self.terms)

    def evaluate(self, values: Mapping[str, np.ndarray], noise) -> np.ndarray:
        out = self.intercept + np.asarray(noise, dtype=float)
        for parent, coef in self.terms:
            out = out + coef * values[parent]
        if self.threshold is not None:
            # ties map to 0
            out = (out > self.threshold).astype(float)
        return out


@dataclass(frozen=True, eq=False)
class ExogenousBlock:
    """Jointly Gaussian source variables ``N(mean, covariance)``."""

    names: tuple[str, ...]
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.covariance, dtype=float)
        k = len(names)
        if len(set(names)) != k:
            raise DuplicateDefinition("exogenous block lists a variable twice")
        if mean.shape != (k,) or cov.shape != (k, k):
            raise ValidationError("exogenous block mean/covariance do not match its names")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValidationError("exogenous block contains non-finite numbers")
        scale = max(1.0, float(np.abs(cov).max(initial=0.0)))
        if np.abs(cov - cov.T).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise NonPsdCovariance("exogenous covariance is not symmetric")
        cov = (cov + cov.T) / 2
        eig = np.linalg.eigvalsh(cov) if k else np.zeros(0)
        if eig.size and eig.min() < EIGEN_FLOOR * scale:
            raise NonPsdCovariance(
                f"exogenous covariance is not positive semi-definite (min eigenvalue {eig.min():.6g})"
            )
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "_factor", _psd_cholesky(cov))

    @property
    def factor(self) -> np.ndarray:
        """Lower-triangular ``L`` with ``L @ L.T == covariance``."""
        return self._factor

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        z = rng.standard_normal((n, len(self.names)))
        return self.mean + z @ self.factor.T

    def marginal(self, keep: Iterable[str]) -> ExogenousBlock | None:
        wanted = set(keep)
        keep = [v for v in self.names if v in wanted]
        if not keep:
            return None
        idx = [self.names.index(v) for v in keep]
        return ExogenousBlock(tuple(keep), self.mean[idx], self.covariance[np.ix_(idx, idx)])

    def __eq__(self, other):
        return (
            isinstance(other, ExogenousBlock)
            and self.names == other.names
            and np.array_equal(self.mean, other.mean)
            and np.array_equal(self.covariance, other.covariance)
        )

    __hash__ = None


def _psd_cholesky(cov: np.ndarray) -> np.ndarray:
    # Cholesky with non-positive pivots clamped to zero, so singular PSD
    # matrices (perfectly correlated sources) are still factorised.
    k = cov.shape[0]
    L = np.zeros_like(cov)
    for j in range(k):
        d = cov[j, j] - L[j, :j] @ L[j, :j]
        if d <= 1e-14 * max(1.0, abs(cov[j, j])):
            continue
        L[j, j] = np.sqrt(d)
        for i in range(j + 1, k):
            L[i, j] = (cov[i, j] - L[i, :j] @ L[j, :j]) / L[j, j]
    return L


# --------------------------------------------------------------------------
# Model


@dataclass(frozen=True, eq=False)
class ScmModel:
    """Validated structural causal model.

    Use :func:`build_model` (or the constructor directly); both validate the
    graph and cache a topological order.
    """

    equations: tuple[StructuralEquation, ...]
    exogenous: ExogenousBlock | None = None

    def __post_init__(self):
        eqs = tuple(self.equations)
        object.__setattr__(self, "equations", eqs)
        declared = list(self.exogenous.names) if self.exogenous else []
        for eq in eqs:
            declared.append(eq.target)
        seen = set()
        for name in declared:
            if name in seen:
                raise DuplicateDefinition(f"variable {name!r} is defined more than once")
            seen.add(name)
        if len(declared) > MAX_VARIABLES:
            raise ValidationError(f"models are limited to {MAX_VARIABLES} variables")
        for eq in eqs:
            for p in eq.parents:
                if p not in seen:
                    raise UnknownParent(f"equation for {eq.target!r} refers to unknown {p!r}")
        object.__setattr__(self, "_declared", tuple(declared))
        object.__setattr__(self, "_by_target", {eq.target: eq for eq in eqs})
        object.__setattr__(self, "_order", _kahn(declared, {eq.target: eq.parents for eq in eqs}))

    @property
    def variables(self) -> tuple[str, ...]:
        """Variables in topological order."""
        return self._order

    @property
    def declared(self) -> tuple[str, ...]:
        return self._declared

    def __contains__(self, name: str) -> bool:
        return name in self._declared

    def equation(self, name: str) -> StructuralEquation | None:
        """The structural equation for ``name``, or None for exogenous-block variables."""
        self.check(name)
        return self._by_target.get(name)

    def parents(self, name: str) -> tuple[str, ...]:
        eq = self.equation(name)
        return eq.parents if eq is not None else ()

    def children(self, name: str) -> tuple[str, ...]:
        self.check(name)
        return tuple(v for v in self._order if name in self.parents(v))

    def edges(self) -> list[tuple[str, str]]:
        return [(p, v) for v in self._order for p in self.parents(v)]

    def check(self, *names: str) -> None:
        for name in names:
            if name not in self._declared:
                raise UnknownVariable(f"unknown variable {name!r}")

    def in_block(self, name: str) -> bool:
        return self.exogenous is not None and name in self.exogenous.names

    def __eq__(self, other):
        return (
            isinstance(other, ScmModel)
            and self.equations == other.equations
            and self.exogenous == other.exogenous
        )

    __hash__ = None


def _kahn(declared: list[str], parents: Mapping[str, tuple[str, ...]]) -> tuple[str, ...]:
    remaining = {v: set(parents.get(v, ())) for v in declared}
    order: list[str] = []
    while remaining:
        ready = next((v for v in declared if v in remaining and not remaining[v]), None)
        if ready is None:
            cyc = ", ".join(sorted(remaining))
            raise CyclicGraph(f"the parent graph has a cycle among {{{cyc}}}")
        order.append(ready)
        del remaining[ready]
        for deps in remaining.values():
            deps.discard(ready)
    return tuple(order)


def build_model(
    equations: Iterable[StructuralEquation],
    exogenous_block: ExogenousBlock | tuple | None = None,
) -> ScmModel:
    """Validate equations and an optional Gaussian block into a model.

    ``exogenous_block`` may be an :class:`ExogenousBlock` or a
    ``(names, mean, covariance)`` triple.
    """
    if exogenous_block is not None and not isinstance(exogenous_block, ExogenousBlock):
        exogenous_block = ExogenousBlock(*exogenous_block)
    return ScmModel(tuple(equations), exogenous_block)


def topological_order(model: ScmModel) -> list[str]:
    return list(model.variables)


# --------------------------------------------------------------------------
# Sampling


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column-oriented sample; columns are read-only float64 arrays."""

    columns: Mapping[str, np.ndarray]

    def __post_init__(self):
        cols = {}
        n = None
        for name, col in self.columns.items():
            arr = np.array(col, dtype=np.float64).reshape(-1)
            if n is None:
                n = arr.size
            elif arr.size != n:
                raise ValidationError("dataset columns differ in length")
            arr.setflags(write=False)
            cols[str(name)] = arr
        if not n:
            raise ValidationError("a dataset needs at least one row")
        object.__setattr__(self, "columns", cols)

    @property
    def n(self) -> int:
        return next(iter(self.columns.values())).size

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise UnknownVariable(f"dataset has no column {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    def matrix(self, names: Iterable[str]) -> np.ndarray:
        names = list(names)
        if not names:
            return np.empty((self.n, 0))
        return np.column_stack([self[v] for v in names])

    def with_columns(self, extra: Mapping[str, np.ndarray]) -> Dataset:
        return Dataset({**self.columns, **extra})

    def take(self, rows) -> Dataset:
        return Dataset({k: v[rows] for k, v in self.columns.items()})


def draw_noise(model: ScmModel, n: int, stream: Stream) -> dict[str, np.ndarray]:
    """Draw every exogenous input for ``n`` units.

    Returns one array per variable: the realised value for exogenous-block
    variables, the additive noise term for equation variables.
    """
    if n < 1:
        raise ValidationError("sample size must be >= 1")
    draws: dict[str, np.ndarray] = {}
    order = model.variables
    if model.exogenous is not None:
        names = model.exogenous.names
        slot = min(order.index(v) for v in names)
        values = model.exogenous.draw(stream.generator(slot), n)
        for j, v in enumerate(names):
            draws[v] = values[:, j]
    for i, v in enumerate(order):
        eq = model.equation(v)
        if eq is not None:
            draws[v] = eq.noise.draw(stream.generator(i), n)
    return draws


def evaluate(
    model: ScmModel,
    draws: Mapping[str, np.ndarray],
    overrides: Mapping[str, float | np.ndarray] | None = None,
) -> dict[str, np.ndarray]:
    """Push exogenous draws through the equations in topological order.

    ``overrides`` pins variables to fixed values (a do-intervention that
    reuses the same draws for everything else).
    """
    overrides = dict(overrides or {})
    values: dict[str, np.ndarray] = {}
    for v in model.variables:
        if v in overrides:
            values[v] = np.asarray(overrides[v], dtype=float)
            continue
        if v not in draws:
            raise MissingNoiseDraw(f"no noise draw supplied for {v!r}")
        eq = model.equation(v)
        values[v] = np.asarray(draws[v], dtype=float) if eq is None else eq.evaluate(values, draws[v])
    return values


def sample(model: ScmModel, n: int, stream: Stream | int) -> Dataset:
    """Draw ``n`` i.i.d. units; a pure function of ``(model, n, stream)``."""
    if isinstance(stream, (int, np.integer)):
        stream = Stream(int(stream))
    values = evaluate(model, draw_noise(model, n, stream))
    return Dataset({v: np.broadcast_to(values[v], (n,)) for v in model.variables})


# --------------------------------------------------------------------------
# Interventions and potential outcomes


def intervene(model: ScmModel, variable: str, value: float) -> ScmModel:
    """do(variable = value): cut the variable's inputs and pin it."""
    model.check(variable)
    pinned = StructuralEquation(variable, 0.0, (), Degenerate(float(value)))
    block = model.exogenous
    equations = list(model.equations)
    if model.in_block(variable):
        block = block.marginal(v for v in block.names if v != variable)
        equations.insert(0, pinned)
    else:
        equations = [pinned if eq.target == variable else eq for eq in equations]
    return ScmModel(tuple(equations), block)


def potential_outcome(
    model: ScmModel,
    unit_noise_draws: Mapping[str, float],
    treatment_variable: str,
    d: float,
    outcome: str | None = None,
):
    """Outcome the unit would realise under ``treatment_variable = d``.

    ``unit_noise_draws`` is in the format of :func:`draw_noise` (scalars or
    arrays). ``outcome`` defaults to the last variable in topological order.
    """
    model.check(treatment_variable)
    outcome = model.variables[-1] if outcome is None else outcome
    model.check(outcome)
    values = evaluate(model, unit_noise_draws, {treatment_variable: d})
    out = values[outcome]
    return float(out) if np.ndim(out) == 0 else out


def with_equation(model: ScmModel, equation: StructuralEquation) -> ScmModel:
    """Copy of ``model`` with the equation for ``equation.target`` replaced."""
    model.check(equation.target)
    if model.in_block(equation.target):
        raise ValidationError(f"{equation.target!r} is defined by the exogenous block")
    return replace(
        model,
        equations=tuple(equation if eq.target == equation.target else eq for eq in model.equations),
    )

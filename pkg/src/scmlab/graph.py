"""Paths, d-separation and the backdoor criterion on a model's DAG."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from typing import Literal, Union

from .errors import DescendantInConditioningSet, UnknownVariable, ValidationError
from .scm import ScmModel

FORWARD = "forward"
BACKWARD = "backward"

PathKind = Literal["causal", "backdoor", "blocked_by_collider"]


@dataclass(frozen=True)
class Dag:
    """Bare directed graph; ``parents`` maps every node to its parent tuple."""

    nodes: tuple[str, ...]
    parents: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        kids: dict[str, list[str]] = {v: [] for v in self.nodes}
        for v in self.nodes:
            for p in self.parents[v]:
                kids[p].append(v)
        object.__setattr__(self, "_children", {v: tuple(c) for v, c in kids.items()})

    @classmethod
    def from_edges(cls, nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> Dag:
        nodes = tuple(nodes)
        parents: dict[str, list[str]] = {v: [] for v in nodes}
        for a, b in edges:
            parents[b].append(a)
        return cls(nodes, {v: tuple(ps) for v, ps in parents.items()})

    @classmethod
    def from_model(cls, model: ScmModel) -> Dag:
        """The model's parent graph.

        Each correlated pair of exogenous-block variables ``a``, ``b`` gets an
        unobserved common parent named ``[a~b]``.
        """
        parents = {v: list(model.parents(v)) for v in model.variables}
        latent: list[str] = []
        block = model.exogenous
        if block is not None:
            for i, a in enumerate(block.names):
                for j in range(i + 1, len(block.names)):
                    if block.covariance[i, j] != 0.0:
                        b = block.names[j]
                        node = common_cause_name(a, b)
                        latent.append(node)
                        parents[node] = []
                        parents[a].append(node)
                        parents[b].append(node)
        return cls(tuple(latent) + model.variables, {v: tuple(ps) for v, ps in parents.items()})

    def children(self, v: str) -> tuple[str, ...]:
        return self._children[v]

    def descendants(self, v: str) -> set[str]:
        """Strict descendants of ``v`` (DFS over child links)."""
        seen: set[str] = set()
        stack = list(self.children(v))
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(self.children(u))
        return seen

    def ancestors(self, vs: Iterable[str]) -> set[str]:
        """Ancestors of ``vs``, including ``vs`` themselves."""
        seen: set[str] = set()
        stack = list(vs)
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(self.parents[u])
        return seen

    def check(self, *names: str) -> None:
        for name in names:
            if name not in self.parents:
                raise UnknownVariable(f"unknown variable {name!r}")


GraphLike = Union[ScmModel, Dag]


def common_cause_name(a: str, b: str) -> str:
    return f"[{a}~{b}]"


def as_dag(graph: GraphLike) -> Dag:
    return graph if isinstance(graph, Dag) else Dag.from_model(graph)


@dataclass(frozen=True)
class DagPath:
    nodes: tuple[str, ...]
    edge_directions: tuple[str, ...]

    def __str__(self) -> str:
        out = self.nodes[0]
        for node, direction in zip(self.nodes[1:], self.edge_directions):
            out += (" -> " if direction == FORWARD else " <- ") + node
        return out

    def colliders(self) -> list[str]:
        d = self.edge_directions
        return [
            self.nodes[i]
            for i in range(1, len(self.nodes) - 1)
            if d[i - 1] == FORWARD and d[i] == BACKWARD
        ]


@dataclass(frozen=True)
class PathClass:
    kind: PathKind
    open: bool


def enumerate_paths(graph: GraphLike, x: str, y: str) -> list[DagPath]:
    """All simple paths between ``x`` and ``y`` ignoring edge direction.

    Sorted lexicographically by node sequence.
    """
    dag = as_dag(graph)
    dag.check(x, y)
    if x == y:
        raise ValidationError("path endpoints must differ")
    neighbours = {v: sorted(set(dag.parents[v]) | set(dag.children(v))) for v in dag.nodes}
    found: list[DagPath] = []

    def extend(nodes: list[str], dirs: list[str]) -> None:
        last = nodes[-1]
        if last == y:
            found.append(DagPath(tuple(nodes), tuple(dirs)))
            return
        for nxt in neighbours[last]:
            if nxt in nodes:
                continue
            direction = FORWARD if last in dag.parents[nxt] else BACKWARD
            extend(nodes + [nxt], dirs + [direction])

    extend([x], [])
    return sorted(found, key=lambda p: p.nodes)


def path_is_open(graph: GraphLike, path: DagPath, conditioning_set: Iterable[str]) -> bool:
    dag = as_dag(graph)
    z = set(conditioning_set)
    d = path.edge_directions
    for i in range(1, len(path.nodes) - 1):
        node = path.nodes[i]
        if d[i - 1] == FORWARD and d[i] == BACKWARD:
            if node not in z and not (dag.descendants(node) & z):
                return False
        elif node in z:
            return False
    return True


def classify_path(graph: GraphLike, path: DagPath, conditioning_set: Iterable[str] = ()) -> PathClass:
    """Label a path and report whether it is open given the conditioning set."""
    if all(d == FORWARD for d in path.edge_directions):
        kind = "causal"
    elif path.colliders():
        kind = "blocked_by_collider"
    else:
        kind = "backdoor"
    return PathClass(kind, path_is_open(graph, path, conditioning_set))


def d_separated(graph: GraphLike, xs: Iterable[str], ys: Iterable[str], z: Iterable[str]) -> bool:
    """Reachability ("Bayes ball") test of ``xs`` _||_ ``ys`` | ``z``."""
    dag = as_dag(graph)
    xs, ys, z = set(xs), set(ys), set(z)
    dag.check(*xs, *ys, *z)
    return not _connected(dag, xs, ys, z)


def _connected(dag: Dag, xs: set[str], ys: set[str], z: set[str], cut: str | None = None) -> bool:
    # edges out of ``cut`` are ignored (the backdoor graph)
    parents = dag.parents
    children = dag._children
    # colliders with a conditioned descendant-or-self are open
    opens_colliders = dag.ancestors(z)
    # state (node, arrived_from_child); from_child means the step was node <- child
    visited: set[tuple[str, bool]] = set()
    stack = [(x, True) for x in xs]
    while stack:
        state = stack.pop()
        if state in visited:
            continue
        visited.add(state)
        node, from_child = state
        if node in ys and node not in z:
            return True
        kids = () if node == cut else children[node]
        if from_child:
            if node in z:
                continue
            stack.extend((p, True) for p in parents[node] if p != cut)
            stack.extend((c, False) for c in kids)
        else:
            if node not in z:
                stack.extend((c, False) for c in kids)
            if node in opens_colliders:
                stack.extend((p, True) for p in parents[node] if p != cut)
    return False


def backdoor_graph(graph: GraphLike, x: str) -> Dag:
    """The graph with every edge out of ``x`` removed."""
    dag = as_dag(graph)
    return Dag(dag.nodes, {v: tuple(p for p in ps if p != x) for v, ps in dag.parents.items()})


def is_backdoor_admissible(graph: GraphLike, x: str, y: str, conditioning_set: Iterable[str] = ()) -> bool:
    """Backdoor criterion: does the set block every path entering ``x``?

    The set must exclude ``x``, ``y`` and descendants of ``x``; violations
    raise rather than returning False.
    """
    dag = as_dag(graph)
    z = set(conditioning_set)
    dag.check(x, y, *z)
    if x == y:
        raise ValidationError("treatment and outcome must differ")
    if {x, y} & z:
        raise ValidationError("the conditioning set may not contain the treatment or outcome")
    bad = dag.descendants(x) & z
    if bad:
        raise DescendantInConditioningSet(
            f"conditioning set contains descendants of {x!r}: {sorted(bad)}"
        )
    return not _connected(dag, {x}, {y}, z, cut=x)


def instrument_violations(
    graph: GraphLike, instrument: str, treatment: str, outcome: str, conditioning_set: Iterable[str] = ()
) -> list[DagPath]:
    """Open instrument-outcome paths that do not run ``Z -> ... -> D -> ... -> Y``.

    An empty list means the instrument is graphically valid: every open
    connection to the outcome is carried by the treatment.
    """
    dag = as_dag(graph)
    z = set(conditioning_set)
    bad = []
    for path in enumerate_paths(dag, instrument, outcome):
        pc = classify_path(dag, path, z)
        if not pc.open:
            continue
        if pc.kind == "causal" and treatment in path.nodes:
            continue
        bad.append(path)
    return bad

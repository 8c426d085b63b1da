"""Independent reference computations used by the tests.

Nothing here imports the code under test beyond plain data containers.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from scipy import integrate, stats


# ---------------------------------------------------------------- graphs


def closure(n: int, edges: set[tuple[int, int]]) -> list[set[int]]:
    """Strict descendants of every node by Floyd-Warshall reachability."""
    reach = [[(i, j) in edges for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    return [{j for j in range(n) if reach[i][j]} for i in range(n)]


def all_paths(n: int, edges: set[tuple[int, int]], x: int, y: int) -> list[tuple[int, ...]]:
    """Every simple undirected path from x to y, by permuting intermediates."""
    adjacent = lambda a, b: (a, b) in edges or (b, a) in edges  # noqa: E731
    others = [v for v in range(n) if v not in (x, y)]
    out = []
    for k in range(len(others) + 1):
        for mid in itertools.permutations(others, k):
            seq = (x, *mid, y)
            if all(adjacent(a, b) for a, b in zip(seq, seq[1:])):
                out.append(seq)
    return out


def path_open(edges, desc, path, z: set[int]) -> bool:
    for i in range(1, len(path) - 1):
        a, b, c = path[i - 1], path[i], path[i + 1]
        collider = (a, b) in edges and (c, b) in edges
        if collider:
            if b not in z and not (desc[b] & z):
                return False
        elif b in z:
            return False
    return True


def backdoor_paths(n, edges, x, y) -> list[tuple[int, ...]]:
    """Paths from x to y whose first edge points into x."""
    nbr = [{b for a, b in edges if a == v} | {a for a, b in edges if b == v} for v in range(n)]
    out = []

    def walk(path):
        last = path[-1]
        if last == y:
            out.append(tuple(path))
            return
        for v in nbr[last]:
            if v not in path:
                walk(path + [v])

    for p in nbr[x]:
        if (p, x) in edges:
            walk([x, p])
    return out


def backdoor_admissible_bruteforce(n, edges, x, y, z, *, desc=None, paths=None) -> bool:
    """Backdoor criterion checked path by path."""
    desc = closure(n, edges) if desc is None else desc
    paths = backdoor_paths(n, edges, x, y) if paths is None else paths
    return not any(path_open(edges, desc, p, z) for p in paths)


def compile_paths(n, edges, paths):
    """Precompile each path's blocking rule to bitmasks.

    Returns ``any_open(zmask) -> bool``. A path is open iff no conditioned
    non-collider lies on it and every collider has a conditioned
    descendant-or-self.
    """
    desc = closure(n, edges)
    rules = []
    for path in paths:
        plain, colliders = 0, []
        for i in range(1, len(path) - 1):
            a, b, c = path[i - 1], path[i], path[i + 1]
            if (a, b) in edges and (c, b) in edges:
                colliders.append(sum(1 << v for v in desc[b] | {b}))
            else:
                plain |= 1 << b
        rules.append((plain, colliders))

    def any_open(zmask: int) -> bool:
        for plain, colliders in rules:
            if not plain & zmask and all(cm & zmask for cm in colliders):
                return True
        return False

    return any_open


def compiled_backdoor_checker(n, edges, x, y):
    """``admissible(zmask)``: no backdoor path from x to y is open."""
    any_open = compile_paths(n, edges, backdoor_paths(n, edges, x, y))
    return lambda zmask: not any_open(zmask)


def compiled_separation_checker(n, edges, x, y):
    """``separated(zmask)``: every path between x and y is blocked."""
    any_open = compile_paths(n, edges, all_paths(n, edges, x, y))
    return lambda zmask: not any_open(zmask)


def upper_triangular_dags(n: int):
    """Every DAG whose edges respect the order 0 < 1 < ... < n-1.

    Each DAG on n nodes is isomorphic to at least one of these.
    """
    slots = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for mask in range(1 << len(slots)):
        yield {slots[k] for k in range(len(slots)) if mask >> k & 1}


def all_labelled_dags(n: int):
    """Every acyclic orientation of every edge subset on n labelled nodes."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for choice in itertools.product((None, 0, 1), repeat=len(pairs)):
        edges = set()
        for (i, j), c in zip(pairs, choice):
            if c == 0:
                edges.add((i, j))
            elif c == 1:
                edges.add((j, i))
        desc = closure(n, edges)
        if all(i not in desc[i] for i in range(n)):
            yield edges


# ---------------------------------------------------------------- moments


def solve_fractions(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Exact Gauss-Jordan elimination over the rationals."""
    k = len(b)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(k):
        piv = next(r for r in range(col, k) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        for r in range(k):
            if r != col:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][k] / m[i][i] for i in range(k)]


def conditional_mean_u_given_x_above(rho: float, c: float) -> float:
    """E[U | X > c] for standard bivariate normal (X, U), by 2-D quadrature."""
    num, _ = integrate.dblquad(
        lambda u, x: u * stats.multivariate_normal.pdf([x, u], cov=[[1, rho], [rho, 1]]),
        c, 12, -12, 12, epsabs=1e-12, epsrel=1e-12,
    )
    return num / stats.norm.sf(c)


def sample_moment_se(data: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Sample mean/covariance and their standard errors from the data itself."""
    n = data.shape[0]
    mean = data.mean(axis=0)
    centred = data - mean
    mean_se = centred.std(axis=0, ddof=1) / np.sqrt(n)
    k = data.shape[1]
    cov = np.empty((k, k))
    cov_se = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            prod = centred[:, i] * centred[:, j]
            cov[i, j] = cov[j, i] = prod.mean()
            cov_se[i, j] = cov_se[j, i] = prod.std(ddof=1) / np.sqrt(n)
    return mean, mean_se, cov, cov_se

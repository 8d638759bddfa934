"""Slow, independent truth sources used to check the fast paths.

Nothing here touches the bit-matrix kernels.  Paths are enumerated one by
one and equivalence classes come from trying every orientation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator

import numpy as np

from .graph import Graph, GraphKind, require_dag, _same_p

MAX_ORACLE_NODES = 12
MAX_ORACLE_PATHS = 1_000_000
MAX_CONDITION = 1e12


class OracleCapExceeded(RuntimeError):
    """The brute-force oracle refuses inputs beyond its size caps."""


class NumericalError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# plain-set graph helpers


def _edge(g: Graph, a: int, b: int) -> bool:
    return bool(g.rows[a] >> b & 1)


def _directed(g: Graph, a: int, b: int) -> bool:
    return _edge(g, a, b) and not _edge(g, b, a)


def _desc_or_self(g: Graph, v: int) -> set[int]:
    out = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        for w in range(g.p):
            if _directed(g, u, w) and w not in out:
                out.add(w)
                stack.append(w)
    return out


def _check_cap(g: Graph) -> None:
    if g.p > MAX_ORACLE_NODES:
        raise OracleCapExceeded(f"oracle handles at most {MAX_ORACLE_NODES} nodes, got {g.p}")


def simple_paths(g: Graph, i: int, j: int) -> Iterator[list[int]]:
    """Every simple path between ``i`` and ``j`` in the skeleton of ``g``."""
    _check_cap(g)
    count = 0
    path = [i]
    on = {i}

    def rec(v):
        nonlocal count
        for w in range(g.p):
            if w in on or not (_edge(g, v, w) or _edge(g, w, v)):
                continue
            if w == j:
                count += 1
                if count > MAX_ORACLE_PATHS:
                    raise OracleCapExceeded(f"more than {MAX_ORACLE_PATHS} paths")
                yield path + [j]
                continue
            path.append(w)
            on.add(w)
            yield from rec(w)
            path.pop()
            on.remove(w)

    yield from rec(i)


def is_directed_path(g: Graph, path: list[int]) -> bool:
    return all(_directed(g, a, b) for a, b in zip(path, path[1:]))


def is_blocked(g: Graph, path: list[int], s: set[int]) -> bool:
    """Blocking of a DAG path by ``s``: a conditioned non-collider, or a
    collider with neither itself nor a descendant conditioned on."""
    for a, k, b in zip(path, path[1:], path[2:]):
        collider = _directed(g, a, k) and _directed(g, b, k)
        if collider:
            if not (_desc_or_self(g, k) & s):
                return True
        elif k in s:
            return True
    return False


def d_separated_bruteforce(g: Graph, a: Iterable[int], b: Iterable[int], s: Iterable[int]) -> bool:
    s = set(s)
    return all(is_blocked(g, path, s) for x in a for y in b for path in simple_paths(g, x, y))


def non_directed_reach_bruteforce(g: Graph, i: int, z: Iterable[int]) -> set[int]:
    """Targets with an unblocked path from ``i`` that is not directed."""
    z = set(z)
    out = set()
    for j in range(g.p):
        if j == i:
            continue
        for path in simple_paths(g, i, j):
            if not is_directed_path(g, path) and not is_blocked(g, path, z):
                out.add(j)
                break
    return out


def satisfies_star_bruteforce(g: Graph, i: int, j: int, z: Iterable[int]) -> bool:
    require_dag(g)
    z = set(z)
    if i == j or i in z or j in z:
        raise ValueError("need i != j and i, j outside the adjustment set")
    forbidden: set[int] = set()
    for path in simple_paths(g, i, j):
        if is_directed_path(g, path):
            for w in path[1:]:
                forbidden |= _desc_or_self(g, w)
        elif not is_blocked(g, path, z):
            return False
    return not (forbidden & z)


def sid_bruteforce(g: Graph, h: Graph) -> int:
    require_dag(g)
    require_dag(h)
    _same_p(g, h)
    _check_cap(g)
    total = 0
    for i in range(g.p):
        pa_h = {k for k in range(h.p) if _directed(h, k, i)}
        for j in range(g.p):
            if j == i:
                continue
            if j in pa_h:
                total += j in _desc_or_self(g, i)
            else:
                total += not satisfies_star_bruteforce(g, i, j, pa_h)
    return total


# ---------------------------------------------------------------------------
# brute-force equivalence classes


def all_dags(p: int) -> Iterator[Graph]:
    """Every labelled DAG on ``p`` nodes (25 for p=3, 543 for p=4)."""
    pairs = [(a, b) for a in range(p) for b in range(a + 1, p)]
    for states in product((0, 1, 2), repeat=len(pairs)):
        rows = [0] * p
        for (a, b), s in zip(pairs, states):
            if s == 1:
                rows[a] |= 1 << b
            elif s == 2:
                rows[b] |= 1 << a
        if _acyclic(p, rows):
            yield Graph(p, rows, GraphKind.DAG)


def _acyclic(p: int, rows: list[int]) -> bool:
    state = [0] * p

    def visit(v) -> bool:
        state[v] = 1
        for w in range(p):
            if rows[v] >> w & 1:
                if state[w] == 1 or (state[w] == 0 and not visit(w)):
                    return False
        state[v] = 2
        return True

    return all(state[v] or visit(v) for v in range(p))


def _vstructs(g: Graph) -> set[tuple[int, int, int]]:
    out = set()
    for b in range(g.p):
        pa = [a for a in range(g.p) if _directed(g, a, b)]
        for x in pa:
            for y in pa:
                if x < y and not (_edge(g, x, y) or _edge(g, y, x)):
                    out.add((x, b, y))
    return out


def _orientations(c: Graph) -> Iterator[Graph]:
    """Acyclic orientations of the undirected edges of ``c``."""
    _check_cap(c)
    und = c.undirected_edges()
    for bits in product((0, 1), repeat=len(und)):
        rows = list(c.rows)
        for (a, b), flip in zip(und, bits):
            if flip:
                rows[a] &= ~(1 << b)
            else:
                rows[b] &= ~(1 << a)
        if _acyclic(c.p, rows):
            yield Graph(c.p, rows, GraphKind.DAG)


def class_members(c: Graph) -> list[Graph]:
    """All DAGs with the skeleton and v-structures of ``c`` that keep its
    directed edges (the consistent extensions of ``c``)."""
    target = _vstructs(c)
    return [g for g in _orientations(c) if _vstructs(g) == target]


def cpdag_bruteforce(g: Graph) -> Graph:
    """Completed PDAG of ``g`` by intersecting all Markov-equivalent DAGs."""
    require_dag(g)
    skeleton = Graph(g.p, [r | c for r, c in zip(g.rows, g.cols)], GraphKind.PDAG)
    target = _vstructs(g)
    rows = [0] * g.p
    for m in _orientations(skeleton):
        if _vstructs(m) == target:
            for a in range(g.p):
                rows[a] |= m.rows[a]
    # unchecked: validating as a CPDAG would consult the fast Meek-rule path
    return Graph._unchecked(g.p, rows, GraphKind.CPDAG)


def all_cpdags(p: int) -> list[Graph]:
    seen = {}
    for g in all_dags(p):
        c = cpdag_bruteforce(g)
        seen.setdefault(c.rows, c)
    return list(seen.values())


# ---------------------------------------------------------------------------
# linear Gaussian structural equation models


@dataclass(frozen=True, eq=False)
class LinearSem:
    """``X_j = sum_k B[j, k] X_k + N_j`` with independent Gaussian noise."""

    graph: Graph
    B: np.ndarray
    noise_var: np.ndarray

    def __post_init__(self):
        require_dag(self.graph)
        B = np.asarray(self.B, dtype=float)
        nv = np.asarray(self.noise_var, dtype=float)
        p = self.graph.p
        if B.shape != (p, p) or nv.shape != (p,):
            raise ValueError("coefficient matrix / noise variances have the wrong shape")
        support = self.graph.to_array().T.astype(bool)  # B[j, k] != 0 only for k -> j
        if np.any((B != 0) & ~support):
            raise ValueError("coefficient on a pair that is not an edge")
        if np.any(B[support] == 0):
            raise ValueError("edge with zero coefficient")
        if np.any(nv <= 0):
            raise ValueError("noise variances must be positive")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "noise_var", nv)


def sem_covariance(sem: LinearSem) -> np.ndarray:
    """``(I - B)^-1 D (I - B)^-T`` with ``D`` the diagonal noise covariance."""
    p = sem.graph.p
    ib = np.eye(p) - sem.B
    try:
        a = np.linalg.solve(ib, np.diag(np.sqrt(sem.noise_var)))
    except np.linalg.LinAlgError as e:  # pragma: no cover - impossible for DAG support
        raise NumericalError("I - B is singular") from e
    sigma = a @ a.T
    return (sigma + sigma.T) / 2


def causal_effect(sigma: np.ndarray, i: int, j: int, z: Iterable[int]) -> float:
    """First coefficient of the regression of ``X_j`` on ``(X_i, X_Z)``."""
    z = sorted(z)
    if i == j or i in z or j in z:
        raise ValueError("need i != j and i, j outside the adjustment set")
    idx = [i] + z
    s2 = sigma[np.ix_(idx, idx)]
    s1 = sigma[j, idx]
    cond = np.linalg.cond(s2)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise NumericalError(f"adjustment covariance is ill-conditioned (condition number {cond:.3g})")
    e1 = np.zeros(len(idx))
    e1[0] = 1.0
    return float(s1 @ np.linalg.solve(s2, e1))


def effect_table(sigma: np.ndarray, g: Graph) -> np.ndarray:
    """Effects predicted by ``g`` under parent adjustment; zero where the
    target is a parent of the intervened node.  Diagonal is zero."""
    p = g.p
    out = np.zeros((p, p))
    for i in range(p):
        pa = [k for k in range(p) if g.pa[i] >> k & 1]
        for j in range(p):
            if j != i and j not in pa:
                out[i, j] = causal_effect(sigma, i, j, pa)
    return out


def count_effect_mismatches(sem: LinearSem, g: Graph, h: Graph, tol: float = 1e-8) -> int:
    """Ordered pairs where the effects predicted by ``g`` and ``h`` differ by more than ``tol``."""
    if sem.graph != g:
        raise ValueError("the SEM is not defined on the true graph")
    require_dag(h)
    _same_p(g, h)
    sigma = sem_covariance(sem)
    diff = np.abs(effect_table(sigma, g) - effect_table(sigma, h))
    np.fill_diagonal(diff, 0.0)
    return int((diff > tol).sum())

"""Distances between two DAGs: SHD, SID, symmetrized SID and DNE."""

from __future__ import annotations

from enum import IntEnum
from fractions import Fraction

import numpy as np

from .adjustment import causal_descendant_violations, non_directed_reach
from .bitmatrix import iter_bits
from .graph import Graph, ancestors_bits, path_matrix, require_dag, _same_p


class Verdict(IntEnum):
    CORRECT = 0
    FALSE = 1
    SELF = 2
    EXCLUDED = 3


class SidReport:
    """Per-pair verdicts of an intervention-distance computation.

    ``verdicts[i, j]`` says whether the intervention distribution from ``i``
    to ``j`` is inferred correctly, falsely, or was excluded (not
    identifiable in a true CPDAG).
    """

    def __init__(self, verdicts: np.ndarray, source_order=None):
        self.verdicts = np.asarray(verdicts, dtype=np.int8)
        self.verdicts.setflags(write=False)
        p = self.verdicts.shape[0]
        self.source_order = tuple(source_order if source_order is not None else range(p))
        self.total = int((self.verdicts == Verdict.FALSE).sum())

    @property
    def p(self) -> int:
        return self.verdicts.shape[0]

    def false_pairs(self) -> list[tuple[int, int]]:
        return [tuple(map(int, ij)) for ij in np.argwhere(self.verdicts == Verdict.FALSE)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SidReport):
            return NotImplemented
        return np.array_equal(self.verdicts, other.verdicts)

    def __repr__(self) -> str:
        return f"SidReport(total={self.total}, p={self.p})"


class TruthContext:
    """Per-true-DAG data reused across many estimated parent sets."""

    def __init__(self, g: Graph):
        require_dag(g, "true graph")
        self.g = g
        self.closure = path_matrix(g)
        self._cache: dict[tuple[int, int], int] = {}

    def false_row(self, i: int, pa_est: int, shortcuts: bool = True) -> int:
        """Bitset of targets ``j`` falsely inferred when ``i`` is adjusted
        for the estimated parent set ``pa_est``."""
        key = (i, pa_est)
        if shortcuts and key in self._cache:
            return self._cache[key]
        g = self.g
        rows = self.closure.rows
        others = ((1 << g.p) - 1) & ~(1 << i)
        if shortcuts and pa_est == g.pa[i]:
            out = 0
        else:
            # estimate predicts no effect where the truth has one
            out = pa_est & rows[i] & others
            rest = others & ~pa_est
            if rest:
                bad = causal_descendant_violations(g, rows, i, pa_est)
                if not shortcuts or rest & ~bad:
                    bad |= non_directed_reach(g, i, pa_est, ancestors_bits(g, pa_est))
                out |= rest & bad
        if shortcuts:
            self._cache[key] = out
        return out


def sid(g: Graph, h: Graph, shortcuts: bool = True) -> SidReport:
    """Structural intervention distance of the estimate ``h`` to the truth ``g``."""
    require_dag(g, "true graph")
    require_dag(h, "estimated graph")
    _same_p(g, h)
    ctx = TruthContext(g)
    v = np.zeros((g.p, g.p), dtype=np.int8)
    for i in range(g.p):
        for j in iter_bits(ctx.false_row(i, h.pa[i], shortcuts)):
            v[i, j] = Verdict.FALSE
        v[i, i] = Verdict.SELF
    return SidReport(v)


def sid_symmetric(g: Graph, h: Graph) -> Fraction:
    return Fraction(sid(g, h).total + sid(h, g).total, 2)


def shd(g: Graph, h: Graph) -> int:
    """Number of node pairs whose edge type differs between ``g`` and ``h``."""
    _same_p(g, h)
    total = 0
    for i in range(g.p):
        diff = (g.rows[i] ^ h.rows[i]) | (g.cols[i] ^ h.cols[i])
        total += (diff >> (i + 1)).bit_count()
    return total


def dne(g: Graph, h: Graph) -> int:
    """Absolute difference in edge counts; undirected edges count once."""
    _same_p(g, h)
    return abs(g.n_edges() - h.n_edges())

"""SID when the truth or the estimate is a Markov equivalence class.

Estimated CPDAGs are scored per chain component: every local DAG extension
of a component is scored on the component's nodes, and the best and worst
sums over components give the lower and upper bound.  A parent set only
depends on how its own component is oriented, so the bounds are attained by
actual members of the class.

When the estimate is not a completed PDAG, or a component exceeds the
extension cap, each affected node is scored over every subset of its
undirected neighbours instead ("per-node" bounds, not necessarily attained
by a single DAG).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .bitmatrix import bits_of, iter_bits
from .distances import SidReport, TruthContext, Verdict
from .graph import (
    DEFAULT_EXTENSION_CAP,
    Graph,
    GraphKind,
    KindError,
    _same_p,
    chain_components,
    consistent_extension,
    enumerate_extensions,
    is_cpdag,
    require_dag,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComponentBounds:
    nodes: frozenset[int]
    min_sum: int
    max_sum: int
    extension_count: int
    per_node: bool = False


@dataclass(frozen=True)
class SidBounds:
    lower: int
    upper: int
    per_component: tuple[ComponentBounds, ...] = ()
    fixed: int = 0
    attained: bool = True
    warnings: tuple[str, ...] = field(default=())

    @property
    def label(self) -> str:
        return "attained bounds" if self.attained else "per-node bounds"


def _subsets(bits: int):
    members = list(iter_bits(bits))
    for r in range(len(members) + 1):
        for combo in combinations(members, r):
            yield bits_of(combo)


def _count(ctx: TruthContext, i: int, pa: int, mask: list[int] | None) -> int:
    row = ctx.false_row(i, pa)
    if mask is not None:
        row &= mask[i]
    return row.bit_count()


def _bounds(
    ctx: TruthContext,
    est: Graph,
    mask: list[int] | None,
    cap: int,
    force_per_node: bool,
) -> SidBounds:
    fixed = 0
    comps: list[ComponentBounds] = []
    warnings: list[str] = []
    for comp in chain_components(est):
        if len(comp) == 1:
            (i,) = comp
            fixed += _count(ctx, i, est.pa[i], mask)
            continue
        if force_per_node or len(comp) > cap:
            if not force_per_node:
                warnings.append(
                    f"chain component of size {len(comp)} exceeds cap {cap}; using per-node bounds"
                )
            lo = hi = 0
            n_cand = 1
            for i in sorted(comp):
                scores = [_count(ctx, i, est.pa[i] | s, mask) for s in _subsets(est.und[i])]
                lo += min(scores)
                hi += max(scores)
                n_cand *= len(scores)
            comps.append(ComponentBounds(comp, lo, hi, n_cand, per_node=True))
            continue
        sums = []
        for ext in enumerate_extensions(est, comp, cap):
            sums.append(sum(_count(ctx, i, ext.pa[i], mask) for i in comp))
        comps.append(ComponentBounds(comp, min(sums), max(sums), len(sums)))
    if force_per_node:
        warnings.insert(0, "estimate is not a completed PDAG; using per-node bounds")
    for w in warnings:
        log.warning(w)
    return SidBounds(
        lower=fixed + sum(c.min_sum for c in comps),
        upper=fixed + sum(c.max_sum for c in comps),
        per_component=tuple(comps),
        fixed=fixed,
        attained=not any(c.per_node for c in comps),
        warnings=tuple(warnings),
    )


def _estimate_mode(est: Graph, fallback: bool) -> bool:
    """Return True when per-node fallback scoring is required."""
    if est.kind is GraphKind.CPDAG or est.is_directed():
        return False
    if is_cpdag(est):
        return False
    if not fallback:
        raise KindError("estimated graph is not a completed PDAG")
    return True


def sid_dag_cpdag(
    g: Graph, c: Graph, cap: int = DEFAULT_EXTENSION_CAP, fallback: bool = True
) -> SidBounds:
    """Lower and upper SID of the class ``c`` to the true DAG ``g``."""
    require_dag(g, "true graph")
    _same_p(g, c)
    return _bounds(TruthContext(g), c, None, cap, _estimate_mode(c, fallback))


def sid_dag_pdag_fallback(g: Graph, pd: Graph) -> SidBounds:
    """Per-node bounds: each node tries every subset of its undirected
    neighbours as additional parents."""
    require_dag(g, "true graph")
    _same_p(g, pd)
    return _bounds(TruthContext(g), pd, None, DEFAULT_EXTENSION_CAP, True)


def non_identifiable_bits(c: Graph) -> list[int]:
    """Row ``i``: targets reachable from ``i`` by a possibly directed path
    that starts with an undirected edge."""
    out = []
    for i in range(c.p):
        keep = ~(1 << i)
        seen = c.und[i]
        frontier = seen
        while frontier:
            nxt = 0
            for v in iter_bits(frontier):
                nxt |= c.rows[v]
            frontier = nxt & keep & ~seen
            seen |= frontier
        out.append(seen)
    return out


def _mask_bits(c: Graph) -> list[int]:
    full = (1 << c.p) - 1
    return [full & ~n & ~(1 << i) for i, n in enumerate(non_identifiable_bits(c))]


def identifiability_mask(c: Graph) -> np.ndarray:
    """Boolean p x p matrix; entry (i, j) is True iff the intervention
    distribution from ``i`` to ``j`` is identifiable in ``c``."""
    m = np.zeros((c.p, c.p), dtype=bool)
    for i, row in enumerate(_mask_bits(c)):
        for j in iter_bits(row):
            m[i, j] = True
    return m


def _truth_cpdag(c: Graph) -> tuple[TruthContext, list[int]]:
    if c.is_directed():
        return TruthContext(c.with_kind(GraphKind.DAG)), _mask_bits(c)
    if c.kind is not GraphKind.CPDAG and not is_cpdag(c):
        raise KindError("true graph is not a completed PDAG")
    return TruthContext(consistent_extension(c)), _mask_bits(c)


def sid_cpdag_dag(c: Graph, h: Graph) -> SidReport:
    """SID of the DAG ``h`` to the true class ``c``, counted over the
    pairs whose intervention distribution is identifiable in ``c``."""
    require_dag(h, "estimated graph")
    _same_p(c, h)
    ctx, mask = _truth_cpdag(c)
    v = np.full((c.p, c.p), Verdict.EXCLUDED, dtype=np.int8)
    for i in range(c.p):
        false = ctx.false_row(i, h.pa[i])
        for j in iter_bits(mask[i]):
            v[i, j] = Verdict.FALSE if false >> j & 1 else Verdict.CORRECT
        v[i, i] = Verdict.SELF
    return SidReport(v)


def sid_cpdag_cpdag(
    c: Graph, d: Graph, cap: int = DEFAULT_EXTENSION_CAP, fallback: bool = True
) -> SidBounds:
    """Bounds of :func:`sid_cpdag_dag` over the members of the class ``d``."""
    _same_p(c, d)
    ctx, mask = _truth_cpdag(c)
    return _bounds(ctx, d, mask, cap, _estimate_mode(d, fallback))

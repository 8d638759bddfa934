"""Graphical test of whether a node set is a valid adjustment set.

For a DAG ``g``, an intervened node ``i``, a target ``j`` and a candidate set
``Z`` the condition has two parts:

1. no member of ``Z`` is a descendant (or equal to) a node ``W != i`` that
   lies on a directed path from ``i`` to ``j``;
2. ``Z`` blocks every path from ``i`` to ``j`` that is not directed from
   ``i`` to ``j``.

Part 1 is read off the reflexive path matrix.  Part 2 uses a reachability
sweep over (node, arrival) states; see :func:`reachable_on_non_directed_path`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .bitmatrix import BitMatrix, bits_of, iter_bits
from .graph import Graph, ancestors_bits, path_matrix, require_dag


class ViolatedPart(str, Enum):
    DESCENDANT = "part1-descendant-of-causal-node"
    NON_DIRECTED = "part2-unblocked-nondirected-path"


@dataclass(frozen=True)
class StarVerdict:
    satisfied: bool
    violated_part: ViolatedPart | None = None

    def __bool__(self) -> bool:
        return self.satisfied


def causal_descendant_violations(g: Graph, closure_rows, i: int, z_bits: int) -> int:
    """Targets ``j`` for which part 1 fails, as a bitset.

    A node on a directed path from ``i`` to ``j`` (other than ``i``) lies
    below some child ``c`` of ``i`` with ``j`` reachable from ``c``; so part 1
    fails for every ``j`` reachable from a child that also reaches ``Z``.
    """
    bad = 0
    for c in iter_bits(g.ch[i]):
        if closure_rows[c] & z_bits:
            bad |= closure_rows[c]
    return bad & ~(1 << i)


def non_directed_reach(g: Graph, i: int, z_bits: int, opened: int) -> int:
    """Bitset version of :func:`reachable_on_non_directed_path`.

    ``opened`` must be the ancestors of ``Z`` (including ``Z``): the
    colliders that conditioning on ``Z`` unblocks.
    """
    keep = ~(1 << i)
    # Directed runs out of i that avoid Z in their interior.  A collider at
    # the end of such a run (entered head-first, left towards a parent) is
    # where a path stops being directed.
    fwd = 0
    frontier = g.ch[i]
    while frontier:
        fwd |= frontier
        nxt = 0
        for v in iter_bits(frontier & ~z_bits):
            nxt |= g.ch[v]
        frontier = nxt & ~fwd

    tail = g.pa[i]  # states entered against an edge (from a child)
    for k in iter_bits(fwd & opened):
        tail |= g.pa[k]
    tail &= keep
    head = 0
    seen_tail = seen_head = 0
    while tail or head:
        seen_tail |= tail
        seen_head |= head
        nt = nh = 0
        for v in iter_bits(tail & ~z_bits):
            nt |= g.pa[v]
            nh |= g.ch[v]
        for v in iter_bits(head):
            if not z_bits >> v & 1:
                nh |= g.ch[v]
            if opened >> v & 1:
                nt |= g.pa[v]
        tail = nt & keep & ~seen_tail
        head = nh & keep & ~seen_head
    return (seen_tail | seen_head) & keep


def reachable_on_non_directed_path(
    g: Graph,
    i: int,
    z: Iterable[int],
    closure: BitMatrix | None = None,
    closure_blocked: BitMatrix | None = None,
) -> frozenset[int]:
    """Nodes reachable from ``i`` by a ``Z``-open walk that is not directed.

    Walks never return to ``i``.  The result contains every ``j`` with an
    unblocked non-directed path from ``i``; it can also contain a ``j`` whose
    only such walks loop back onto a directed ``i``-``j`` path, but then a node
    of that directed path has a descendant in ``Z`` and part 1 already fails.
    Hence ``part1 and j not in result`` decides the adjustment condition
    exactly.

    ``closure`` and ``closure_blocked`` are accepted for callers that already
    hold the path matrices; only the ancestor set of ``Z`` is derived from
    ``closure``.
    """
    require_dag(g)
    z_bits = bits_of(z)
    if z_bits >> i & 1:
        raise ValueError("the intervened node cannot be in the adjustment set")
    if closure is not None:
        opened = 0
        for v, row in enumerate(closure.rows):
            if row & z_bits:
                opened |= 1 << v
    else:
        opened = ancestors_bits(g, z_bits)
    return frozenset(iter_bits(non_directed_reach(g, i, z_bits, opened)))


def satisfies_star(g: Graph, i: int, j: int, z: Iterable[int], closure: BitMatrix | None = None) -> StarVerdict:
    """Check the adjustment condition for the effect of ``i`` on ``j``."""
    require_dag(g)
    z_bits = bits_of(z)
    if i == j:
        raise ValueError("i and j must differ")
    if not (0 <= i < g.p and 0 <= j < g.p):
        raise ValueError("node out of range")
    if z_bits >> i & 1 or z_bits >> j & 1:
        raise ValueError("adjustment set must not contain i or j")
    if z_bits >> g.p:
        raise ValueError("adjustment set has nodes outside the graph")
    rows = (closure or path_matrix(g)).rows
    if causal_descendant_violations(g, rows, i, z_bits) >> j & 1:
        return StarVerdict(False, ViolatedPart.DESCENDANT)
    if non_directed_reach(g, i, z_bits, ancestors_bits(g, z_bits)) >> j & 1:
        return StarVerdict(False, ViolatedPart.NON_DIRECTED)
    return StarVerdict(True)

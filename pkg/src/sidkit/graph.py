"""Graph representation and structural primitives.

A :class:`Graph` stores a dense adjacency bit-matrix: ``rows[i]`` has bit ``j``
set iff ``(i, j)`` is an edge.  An undirected edge ``i - j`` is encoded by both
``(i, j)`` and ``(j, i)``.  Nodes are integer ids ``0 .. p-1``; text formats
may carry string labels that are mapped to ids in first-appearance order.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .bitmatrix import BitMatrix, bits_of, iter_bits

DEFAULT_EXTENSION_CAP = 8


class GraphKind(str, Enum):
    DAG = "dag"
    PDAG = "pdag"
    CPDAG = "cpdag"


class GraphError(ValueError):
    """Base class for malformed or invalid graphs."""


class ParseError(GraphError):
    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class GraphValidationError(GraphError):
    def __init__(self, message: str, nodes: Iterable[int] = ()):
        self.nodes = tuple(sorted(nodes))
        if self.nodes:
            message = f"{message} (nodes {', '.join(map(str, self.nodes))})"
        super().__init__(message)


class DimensionError(ValueError):
    """Two graphs that must share a node set do not."""


class KindError(ValueError):
    """A graph of the wrong kind was passed to an operation."""


class ExtensionCapExceeded(GraphError):
    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"chain component of size {size} exceeds extension cap {cap}")


@dataclass(frozen=True, eq=False)
class Graph:
    """Directed / partially directed graph over nodes ``0 .. p-1``.

    Instances are validated against their declared ``kind`` on construction
    and are immutable afterwards.
    """

    p: int
    rows: tuple[int, ...]
    kind: GraphKind = GraphKind.DAG
    labels: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        object.__setattr__(self, "kind", GraphKind(self.kind))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != self.p:
                raise GraphValidationError(f"expected {self.p} labels, got {len(self.labels)}")
        _validate(self)

    @classmethod
    def _unchecked(cls, p: int, rows: Sequence[int], kind: GraphKind = GraphKind.PDAG) -> "Graph":
        g = object.__new__(cls)
        object.__setattr__(g, "p", p)
        object.__setattr__(g, "rows", tuple(rows))
        object.__setattr__(g, "kind", GraphKind(kind))
        object.__setattr__(g, "labels", None)
        return g

    # construction helpers

    @classmethod
    def empty(cls, p: int, kind: GraphKind = GraphKind.DAG) -> "Graph":
        return cls(p, (0,) * p, kind)

    @classmethod
    def from_edges(
        cls,
        p: int,
        directed: Iterable[tuple[int, int]] = (),
        undirected: Iterable[tuple[int, int]] = (),
        kind: GraphKind = GraphKind.DAG,
    ) -> "Graph":
        rows = [0] * p
        for a, b in directed:
            rows[a] |= 1 << b
        for a, b in undirected:
            rows[a] |= 1 << b
            rows[b] |= 1 << a
        return cls(p, rows, kind)

    @classmethod
    def from_array(cls, a, kind: GraphKind = GraphKind.DAG) -> "Graph":
        m = BitMatrix.from_array(a)
        return cls(m.p, m.rows, kind)

    def to_array(self) -> np.ndarray:
        return BitMatrix(self.p, self.rows).to_array().astype(np.int8)

    def with_kind(self, kind: GraphKind) -> "Graph":
        return Graph(self.p, self.rows, kind, self.labels)

    # equality ignores labels

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.p == other.p and self.rows == other.rows and self.kind == other.kind

    def __hash__(self) -> int:
        return hash((self.p, self.rows, self.kind))

    def __repr__(self) -> str:
        parts = [f"{a}->{b}" for a, b in self.directed_edges()]
        parts += [f"{a}--{b}" for a, b in self.undirected_edges()]
        return f"Graph(p={self.p}, kind={self.kind.value}, [{', '.join(parts)}])"

    # per-node bitsets

    @cached_property
    def cols(self) -> tuple[int, ...]:
        cols = [0] * self.p
        for i, r in enumerate(self.rows):
            for j in iter_bits(r):
                cols[j] |= 1 << i
        return tuple(cols)

    @cached_property
    def und(self) -> tuple[int, ...]:
        """Undirected neighbours of each node."""
        return tuple(r & c for r, c in zip(self.rows, self.cols))

    @cached_property
    def ch(self) -> tuple[int, ...]:
        """Children via strictly directed edges."""
        return tuple(r & ~c for r, c in zip(self.rows, self.cols))

    @cached_property
    def pa(self) -> tuple[int, ...]:
        """Parents via strictly directed edges."""
        return tuple(c & ~r for r, c in zip(self.rows, self.cols))

    @cached_property
    def adj(self) -> tuple[int, ...]:
        return tuple(r | c for r, c in zip(self.rows, self.cols))

    def parents(self, i: int) -> frozenset[int]:
        return frozenset(iter_bits(self.pa[i]))

    def children(self, i: int) -> frozenset[int]:
        return frozenset(iter_bits(self.ch[i]))

    def neighbors(self, i: int) -> frozenset[int]:
        return frozenset(iter_bits(self.und[i]))

    def directed_edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.p) for j in iter_bits(self.ch[i])]

    def undirected_edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.p) for j in iter_bits(self.und[i]) if i < j]

    def n_edges(self) -> int:
        """Size of the skeleton; an undirected edge counts once."""
        return sum(r.bit_count() for r in self.adj) // 2

    def is_directed(self) -> bool:
        return not any(self.und)

    def is_subgraph_of(self, other: "Graph") -> bool:
        _same_p(self, other)
        return all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)


def _same_p(g: Graph, h: Graph) -> None:
    if g.p != h.p:
        raise DimensionError(f"graphs have different node counts: {g.p} vs {h.p}")


def require_dag(g: Graph, what: str = "graph") -> None:
    if g.kind is not GraphKind.DAG:
        if g.is_directed():
            return
        raise KindError(f"{what} must be a DAG, got {g.kind.value}")


# ---------------------------------------------------------------------------
# validation


def _directed_cycle_nodes(p: int, ch: Sequence[int]) -> int:
    """Bitset of nodes left over by Kahn's algorithm (empty iff acyclic)."""
    indeg = [0] * p
    for i in range(p):
        for j in iter_bits(ch[i]):
            indeg[j] += 1
    queue = deque(i for i in range(p) if indeg[i] == 0)
    seen = 0
    while queue:
        v = queue.popleft()
        seen |= 1 << v
        for w in iter_bits(ch[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return ((1 << p) - 1) & ~seen


def topological_order(g: Graph) -> list[int]:
    indeg = [c.bit_count() for c in g.pa]
    queue = deque(i for i in range(g.p) if indeg[i] == 0)
    order = []
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in iter_bits(g.ch[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    if len(order) != g.p:
        raise GraphValidationError("directed cycle", set(range(g.p)) - set(order))
    return order


def _validate(g: Graph) -> None:
    if g.p < 0:
        raise GraphValidationError("negative node count")
    if len(g.rows) != g.p:
        raise GraphValidationError(f"expected {g.p} adjacency rows, got {len(g.rows)}")
    full = (1 << g.p) - 1
    for i, r in enumerate(g.rows):
        if r < 0 or r & ~full:
            raise GraphValidationError("edge to a node outside the graph", [i])
        if r >> i & 1:
            raise GraphValidationError("self-loop", [i])
    if g.kind is GraphKind.DAG:
        bad = [i for i in range(g.p) if g.und[i]]
        if bad:
            raise GraphValidationError("undirected edge in a DAG", bad)
    cyc = _directed_cycle_nodes(g.p, g.ch)
    if cyc:
        raise GraphValidationError("directed cycle", iter_bits(cyc))
    if g.kind is GraphKind.CPDAG:
        problem = cpdag_problem(g)
        if problem is not None:
            raise problem


def cpdag_problem(g: Graph) -> GraphValidationError | None:
    """Return why ``g`` is not a completed PDAG, or None if it is one."""
    comps = chain_components(g)
    comp_of = [0] * g.p
    for k, c in enumerate(comps):
        for v in c:
            comp_of[v] = k
    for a, b in g.directed_edges():
        if comp_of[a] == comp_of[b]:
            return GraphValidationError("semi-directed cycle inside a chain component", [a, b])
    cch = [0] * len(comps)
    for a, b in g.directed_edges():
        cch[comp_of[a]] |= 1 << comp_of[b]
    if _directed_cycle_nodes(len(comps), cch):
        return GraphValidationError("semi-directed cycle between chain components")
    for c in comps:
        if len(c) > 2 and not is_chordal(g, c):
            return GraphValidationError("chain component is not chordal", c)
    ext = consistent_extension(g)
    if _directed_cycle_nodes(g.p, ext.ch):
        return GraphValidationError("no acyclic extension")
    completed = cpdag_of(ext)
    if completed.rows != g.rows:
        diff = [i for i in range(g.p) if completed.rows[i] != g.rows[i]]
        return GraphValidationError("graph is not the completed PDAG of its class", diff)
    return None


def is_cpdag(g: Graph) -> bool:
    try:
        if _directed_cycle_nodes(g.p, g.ch):
            return False
        return cpdag_problem(g) is None
    except GraphError:
        return False


# ---------------------------------------------------------------------------
# text formats

_HEADER = re.compile(r"^\s*p\s*=\s*(\d+)\s*$")
_EDGE = re.compile(r"^\s*(\S+)\s*(->|--)\s*(\S+)\s*$")
_NODE = re.compile(r"^\s*node\s+(\S+)\s*$")
_TOKEN = re.compile(r"[^,\s]+")


def parse_graph(text: str, format: str = "adj-matrix", kind: GraphKind | str = GraphKind.DAG) -> Graph:
    """Parse ``text`` as an adjacency matrix or an edge list and validate it.

    Raises :class:`ParseError` for malformed text (with line and column) and
    :class:`GraphValidationError` when the declared kind's invariants fail.
    """
    kind = GraphKind(kind)
    if format == "adj-matrix":
        p, rows = _parse_matrix(text)
        return Graph(p, rows, kind)
    if format == "edge-list":
        labels, rows = _parse_edge_list(text)
        return Graph(len(labels), rows, kind, tuple(labels))
    raise ValueError(f"unknown graph format {format!r}")


def _content_lines(text: str):
    for n, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            yield n, line


def _parse_matrix(text: str) -> tuple[int, list[int]]:
    lines = list(_content_lines(text))
    declared = None
    if lines and (m := _HEADER.match(lines[0][1])):
        declared = int(m.group(1))
        lines = lines[1:]
    rows: list[int] = []
    width = declared
    for n, line in lines:
        tokens = list(_TOKEN.finditer(line))
        if width is None:
            width = len(tokens)
        if len(tokens) != width:
            raise ParseError(f"expected {width} entries, found {len(tokens)}", n)
        r = 0
        for j, tok in enumerate(tokens):
            if tok.group() == "1":
                r |= 1 << j
            elif tok.group() != "0":
                raise ParseError(f"entry {tok.group()!r} is not 0 or 1", n, tok.start() + 1)
        rows.append(r)
    p = width or 0
    if len(rows) != p:
        last = lines[-1][0] + 1 if lines else 1
        raise ParseError(f"expected {p} rows, found {len(rows)}", last)
    return p, rows


def _parse_edge_list(text: str) -> tuple[list[str], list[int]]:
    ids: dict[str, int] = {}
    edges: dict[tuple[int, int], str] = {}

    def node(name: str) -> int:
        if name not in ids:
            ids[name] = len(ids)
        return ids[name]

    for n, line in _content_lines(text):
        if m := _NODE.match(line):
            node(m.group(1))
            continue
        m = _EDGE.match(line)
        if not m:
            col = len(line) - len(line.lstrip()) + 1
            raise ParseError("expected 'a -> b', 'a -- b' or 'node a'", n, col)
        a, op, b = node(m.group(1)), m.group(2), node(m.group(3))
        key = (min(a, b), max(a, b))
        code = "--" if op == "--" else ("->" if a < b else "<-")
        if key in edges and edges[key] != code:
            raise ParseError(f"conflicting edges between {m.group(1)} and {m.group(3)}", n, m.start(2) + 1)
        edges[key] = code
    rows = [0] * len(ids)
    for (a, b), code in edges.items():
        if code in ("->", "--"):
            rows[a] |= 1 << b
        if code in ("<-", "--"):
            rows[b] |= 1 << a
    return list(ids), rows


def serialize_graph(g: Graph, format: str = "adj-matrix") -> str:
    if format == "adj-matrix":
        return "".join(
            " ".join("1" if r >> j & 1 else "0" for j in range(g.p)) + "\n" for r in g.rows
        )
    if format == "edge-list":
        out = [f"node {g.label(i)}\n" for i in range(g.p)]
        out += [f"{g.label(a)} -> {g.label(b)}\n" for a, b in g.directed_edges()]
        out += [f"{g.label(a)} -- {g.label(b)}\n" for a, b in g.undirected_edges()]
        return "".join(out)
    raise ValueError(f"unknown graph format {format!r}")


# ---------------------------------------------------------------------------
# reachability


def path_matrix(g: Graph) -> BitMatrix:
    """Reflexive-transitive closure of the directed part of ``g``.

    Entry (i, j) is set iff i == j or a directed path i -> ... -> j exists.
    Undirected edges are ignored.
    """
    return BitMatrix(g.p, g.ch).closure()


def descendants_bits(g: Graph, i: int) -> int:
    """Strict descendants of ``i`` as a bitset (BFS over directed edges)."""
    seen = 0
    frontier = g.ch[i]
    while frontier:
        seen |= frontier
        nxt = 0
        for v in iter_bits(frontier):
            nxt |= g.ch[v]
        frontier = nxt & ~seen
    return seen


def ancestors_bits(g: Graph, nodes: int) -> int:
    """Ancestors of the node set ``nodes`` (a bitset), including the nodes."""
    seen = nodes
    frontier = nodes
    while frontier:
        nxt = 0
        for v in iter_bits(frontier):
            nxt |= g.pa[v]
        frontier = nxt & ~seen
        seen |= frontier
    return seen


def relatives(g: Graph, i: int, which: str) -> frozenset[int]:
    """Parents, children, descendants, ancestors or non-descendants of ``i``.

    Descendants and ancestors exclude ``i``; so do non-descendants.
    """
    if not 0 <= i < g.p:
        raise IndexError(f"node {i} out of range for p={g.p}")
    if which == "parents":
        return g.parents(i)
    if which == "children":
        return g.children(i)
    require_dag(g)
    if which == "descendants":
        bits = descendants_bits(g, i)
    elif which == "ancestors":
        bits = ancestors_bits(g, 1 << i) & ~(1 << i)
    elif which == "non-descendants":
        bits = ((1 << g.p) - 1) & ~descendants_bits(g, i) & ~(1 << i)
    else:
        raise ValueError(f"unknown relation {which!r}")
    return frozenset(iter_bits(bits))


def d_separated(g: Graph, a: Iterable[int], b: Iterable[int], s: Iterable[int] = ()) -> bool:
    """True iff every path between ``a`` and ``b`` is blocked by ``s``.

    Uses the two-direction reachability sweep ("Bayes ball"): a node entered
    from a child may continue anywhere unless conditioned on; a node entered
    from a parent continues to its children unless conditioned on, and to its
    parents only if it is an ancestor of ``s``.
    """
    require_dag(g)
    a_bits, b_bits, s_bits = bits_of(a), bits_of(b), bits_of(s)
    if a_bits & b_bits or a_bits & s_bits or b_bits & s_bits:
        raise ValueError("node sets must be pairwise disjoint")
    return not (active_reach(g, a_bits, s_bits) & b_bits)


def active_reach(g: Graph, sources: int, s_bits: int) -> int:
    """Nodes connected to ``sources`` by a path that ``s_bits`` does not block."""
    opened = ancestors_bits(g, s_bits)
    up, down = sources, 0  # up: entered from a child, down: entered from a parent
    seen_up, seen_down = 0, 0
    reach = 0
    while up or down:
        seen_up |= up
        seen_down |= down
        reach |= (up | down) & ~s_bits
        nu, nd = 0, 0
        for v in iter_bits(up & ~s_bits):
            nu |= g.pa[v]
            nd |= g.ch[v]
        for v in iter_bits(down):
            if not s_bits >> v & 1:
                nd |= g.ch[v]
            if opened >> v & 1:
                nu |= g.pa[v]
        up = nu & ~seen_up
        down = nd & ~seen_down
    return reach & ~sources


# ---------------------------------------------------------------------------
# chain components, chordality, extensions


def chain_components(g: Graph) -> list[frozenset[int]]:
    """Maximal node sets connected by undirected edges, ordered by smallest id."""
    left = (1 << g.p) - 1
    comps = []
    while left:
        start = left & -left
        comp = start
        frontier = start
        while frontier:
            nxt = 0
            for v in iter_bits(frontier):
                nxt |= g.und[v]
            frontier = nxt & ~comp
            comp |= frontier
        left &= ~comp
        comps.append(frozenset(iter_bits(comp)))
    return comps


def mcs_order(nbrs: dict[int, int]) -> list[int]:
    """Maximum cardinality search over an undirected graph given as bitsets."""
    weight = {v: 0 for v in nbrs}
    order = []
    numbered = 0
    while weight:
        v = max(weight, key=lambda u: (weight[u], -u))
        del weight[v]
        order.append(v)
        numbered |= 1 << v
        for w in iter_bits(nbrs[v] & ~numbered):
            weight[w] += 1
    return order


def is_chordal(g: Graph, component: Iterable[int]) -> bool:
    """Perfect-elimination test on the undirected subgraph induced by ``component``."""
    comp = bits_of(component)
    nbrs = {v: g.und[v] & comp for v in iter_bits(comp)}
    order = mcs_order(nbrs)
    pos = {v: k for k, v in enumerate(order)}
    for v in order:
        earlier = [w for w in iter_bits(nbrs[v]) if pos[w] < pos[v]]
        if len(earlier) < 2:
            continue
        u = max(earlier, key=pos.__getitem__)
        rest = bits_of(w for w in earlier if w != u)
        if rest & ~nbrs[u]:
            return False
    return True


def consistent_extension(g: Graph) -> Graph:
    """Orient every chain component along a maximum cardinality search order.

    For a completed PDAG this yields a member of its Markov equivalence class.
    """
    rows = list(g.rows)
    for comp in chain_components(g):
        if len(comp) < 2:
            continue
        cb = bits_of(comp)
        order = mcs_order({v: g.und[v] & cb for v in comp})
        pos = {v: k for k, v in enumerate(order)}
        for v in comp:
            for w in iter_bits(g.und[v] & cb):
                if pos[v] > pos[w]:
                    rows[v] &= ~(1 << w)
    return Graph._unchecked(g.p, rows, GraphKind.DAG)


def enumerate_extensions(g: Graph, component: Iterable[int], cap: int = DEFAULT_EXTENSION_CAP) -> list[Graph]:
    """All orientations of ``component``'s undirected edges that are acyclic
    and create no new v-structure; other components stay as they are."""
    comp = sorted(component)
    if len(comp) > cap:
        raise ExtensionCapExceeded(len(comp), cap)
    cb = bits_of(comp)
    edges = [(a, b) for a in comp for b in iter_bits(g.und[a] & cb) if a < b]
    rows = list(g.rows)
    skel = g.adj
    directed_pa = [g.pa[v] for v in range(g.p)]
    ch = list(g.ch)
    out: list[Graph] = []

    def reaches(src: int, dst: int) -> bool:
        seen = 1 << src
        frontier = seen
        while frontier:
            if frontier >> dst & 1:
                return True
            nxt = 0
            for v in iter_bits(frontier):
                nxt |= ch[v]
            frontier = nxt & ~seen
            seen |= frontier
        return False

    def rec(k: int) -> None:
        if k == len(edges):
            kind = GraphKind.DAG if not any(r & c for r, c in zip(rows, _cols(rows))) else GraphKind.PDAG
            out.append(Graph._unchecked(g.p, rows, kind))
            return
        a, b = edges[k]
        for u, v in ((a, b), (b, a)):
            # u -> v must not meet a non-adjacent parent of v, nor close a cycle
            if directed_pa[v] & ~skel[u] & ~(1 << u):
                continue
            if reaches(v, u):
                continue
            rows[v] &= ~(1 << u)
            directed_pa[v] |= 1 << u
            ch[u] |= 1 << v
            rec(k + 1)
            rows[v] |= 1 << u
            directed_pa[v] &= ~(1 << u)
            ch[u] &= ~(1 << v)

    rec(0)
    return out


def _cols(rows: Sequence[int]) -> list[int]:
    cols = [0] * len(rows)
    for i, r in enumerate(rows):
        for j in iter_bits(r):
            cols[j] |= 1 << i
    return cols


def v_structures(g: Graph) -> set[tuple[int, int, int]]:
    """Triples (a, b, c), a < c, with a -> b <- c and a, c non-adjacent."""
    out = set()
    for b in range(g.p):
        for a, c in combinations(iter_bits(g.pa[b]), 2):
            if not g.adj[a] >> c & 1:
                out.add((a, b, c))
    return out


def cpdag_of(g: Graph) -> Graph:
    """Completed PDAG of the Markov equivalence class of the DAG ``g``.

    Keeps the v-structures and closes the orientation under Meek's rules 1-3.
    """
    require_dag(g)
    p = g.p
    rows = list(g.adj)
    for a, b, c in v_structures(g):
        rows[b] &= ~(1 << a)
        rows[b] &= ~(1 << c)
    changed = True
    while changed:
        changed = False
        cols = _cols(rows)
        und = [r & c for r, c in zip(rows, cols)]
        pa = [c & ~r for r, c in zip(rows, cols)]
        ch = [r & ~c for r, c in zip(rows, cols)]
        adj = [r | c for r, c in zip(rows, cols)]
        for b in range(p):
            for c in iter_bits(und[b]):
                # rule 1: a -> b - c with a, c non-adjacent
                if pa[b] & ~adj[c] & ~(1 << c):
                    rows[c] &= ~(1 << b)
                    changed = True
                    break
                # rule 2: b -> x -> c with b - c
                if any(ch[x] >> c & 1 for x in iter_bits(ch[b])):
                    rows[c] &= ~(1 << b)
                    changed = True
                    break
                # rule 3: b - x, b - y, x -> c <- y, x and y non-adjacent
                cand = [x for x in iter_bits(und[b] & pa[c])]
                if any(not adj[x] >> y & 1 for x, y in combinations(cand, 2)):
                    rows[c] &= ~(1 << b)
                    changed = True
                    break
            if changed:
                break
    return Graph._unchecked(p, rows, GraphKind.CPDAG)


def is_consistent_extension(c: Graph, g: Graph) -> bool:
    """True iff the DAG ``g`` belongs to the class represented by ``c``."""
    _same_p(c, g)
    if not g.is_directed() or _directed_cycle_nodes(g.p, g.ch):
        return False
    if c.adj != g.adj:
        return False
    if any(c.ch[i] & ~g.ch[i] for i in range(c.p)):
        return False
    return v_structures(g) == v_structures(c)

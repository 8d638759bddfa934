from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sidkit import (
    Graph,
    GraphKind,
    GraphValidationError,
    ParseError,
    chain_components,
    cpdag_of,
    d_separated,
    enumerate_extensions,
    is_chordal,
    is_consistent_extension,
    parse_graph,
    path_matrix,
    relatives,
    serialize_graph,
)
from sidkit.graph import ExtensionCapExceeded, consistent_extension, is_cpdag, topological_order
from sidkit.oracle import _desc_or_self, _orientations, _vstructs, all_cpdags, all_dags, class_members, cpdag_bruteforce, d_separated_bruteforce

from conftest import B, P, W, X, X1, X2, Y, Y1, Y2, Y3, dag, random_dags


def und(p, edges, kind=GraphKind.PDAG):
    return Graph.from_edges(p, undirected=edges, kind=kind)


# parsing and serialization


def test_parse_single_edge():
    g = parse_graph("0 1\n0 0")
    assert g.kind is GraphKind.DAG
    assert g.directed_edges() == [(0, 1)]


def test_parse_rejects_undirected_edge_in_dag():
    with pytest.raises(GraphValidationError) as e:
        parse_graph("0 1\n1 0")
    assert set(e.value.nodes) == {0, 1}


def test_parse_same_text_as_pdag_is_fine():
    g = parse_graph("0 1\n1 0", kind="pdag")
    assert g.undirected_edges() == [(0, 1)]


def test_parse_header_commas_and_comments():
    text = "# a comment\np=3\n0,1,0\n\n0, 0, 1\n0 0 0\n"
    assert parse_graph(text).directed_edges() == [(0, 1), (1, 2)]


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("0 1\n0 2\n", 2, 3),
        ("0 1 0\n0 0\n0 0 0\n", 2, 1),
        ("0 1\n", 2, 1),
    ],
)
def test_parse_errors_carry_position(text, line, column):
    with pytest.raises(ParseError) as e:
        parse_graph(text)
    assert (e.value.line, e.value.column) == (line, column)


def test_cycle_names_nodes():
    with pytest.raises(GraphValidationError) as e:
        parse_graph("0 1 0\n0 0 1\n1 0 0")
    assert set(e.value.nodes) == {0, 1, 2}


def test_edge_list_format():
    text = "node iso\na -> b\nb -- c\n# comment\n"
    g = parse_graph(text, "edge-list", "pdag")
    assert g.labels == ("iso", "a", "b", "c")
    assert g.directed_edges() == [(1, 2)]
    assert g.undirected_edges() == [(2, 3)]


def test_edge_list_conflict():
    with pytest.raises(ParseError) as e:
        parse_graph("a -> b\nb -> a\n", "edge-list")
    assert e.value.line == 2


def test_edge_list_garbage():
    with pytest.raises(ParseError) as e:
        parse_graph("a => b\n", "edge-list")
    assert e.value.line == 1


def test_fanraph_round_trips(fan):
    text = serialize_graph(fan)
    assert text.splitlines()[0] == "0 1 1 1 1"
    assert text.endswith("\n")
    assert parse_graph(text) == fan
    assert fan.n_edges() == 7


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["adj-matrix", "edge-list"]))
def test_round_trip_all_kinds(seed, fmt):
    (g,) = random_dags(1, [6], seed)
    for h in (g, cpdag_of(g)):
        kind = h.kind
        back = parse_graph(serialize_graph(h, fmt), fmt, kind)
        assert back == h and back.kind is kind


# relatives and closures


def test_relatives_example(fan):
    assert relatives(fan, X1, "descendants") == {X2, Y1, Y2, Y3}
    assert relatives(fan, Y2, "descendants") == frozenset()
    assert relatives(fan, Y2, "parents") == {X1, X2}
    assert relatives(fan, X2, "non-descendants") == {X1}


def test_relatives_chain():
    g = dag(3, [(0, 1), (1, 2)])
    assert relatives(g, 2, "ancestors") == {0, 1}
    assert relatives(g, 0, "children") == {1}
    assert relatives(g, 1, "non-descendants") == {0}


def test_path_matrix_examples(fan):
    c = path_matrix(dag(3, [(0, 1), (1, 2)]))
    assert c[0, 2] and not c[2, 0]
    assert all(c[i, i] for i in range(3))
    assert path_matrix(Graph.empty(4)).to_array().tolist() == np.eye(4, dtype=int).tolist()
    e = path_matrix(fan).to_array()
    assert e[X1].tolist() == [1] * 5
    assert e[Y2].tolist() == [0, 0, 0, 1, 0]


def test_path_matrix_matches_dfs():
    for g in random_dags(60, [4, 7, 10], seed=11):
        c = path_matrix(g)
        assert c.square() == c
        for i in range(g.p):
            assert set(j for j in range(g.p) if c[i, j]) == _desc_or_self(g, i)


def test_topological_order_respects_edges():
    for g in random_dags(20, [8], seed=5):
        pos = {v: k for k, v in enumerate(topological_order(g))}
        assert all(pos[a] < pos[b] for a, b in g.directed_edges())


# d-separation


def test_d_separation_fig(fig):
    # X -> B -> Y stays open whatever is conditioned on below B
    assert not d_separated(fig, [X], [Y], [W])
    assert not d_separated(fig, [X], [Y], [P])
    assert d_separated(fig, [X], [Y], [P, B])


def test_d_separation_small():
    collider = dag(3, [(0, 1), (2, 1)])
    assert d_separated(collider, [0], [2], [])
    assert not d_separated(collider, [0], [2], [1])
    chain = dag(3, [(0, 1), (1, 2)])
    assert d_separated(chain, [0], [2], [1])
    assert not d_separated(chain, [0], [2], [])


def test_d_separation_rejects_overlap():
    with pytest.raises(ValueError):
        d_separated(dag(3, [(0, 1)]), [0], [0, 1], [])


def _disjoint_triples(p):
    nodes = range(p)
    for a in nodes:
        for b in nodes:
            if a < b:
                rest = [v for v in nodes if v not in (a, b)]
                for r in range(len(rest) + 1):
                    for s in combinations(rest, r):
                        yield [a], [b], list(s)


def test_d_separation_matches_path_enumeration_p4():
    for g in all_dags(4):
        for a, b, s in _disjoint_triples(4):
            assert d_separated(g, a, b, s) == d_separated_bruteforce(g, a, b, s)


def test_d_separation_matches_path_enumeration_p5():
    triples = list(_disjoint_triples(5))
    for g in random_dags(60, [5], seed=2):
        for a, b, s in triples:
            assert d_separated(g, a, b, s) == d_separated_bruteforce(g, a, b, s)


# chain components and chordality


def test_chain_components_examples(fan):
    assert chain_components(fan) == [frozenset([v]) for v in range(5)]
    assert chain_components(und(3, [(0, 1), (1, 2)])) == [frozenset({0, 1, 2})]
    p = 6
    chain = dag(p, [(k, k + 1) for k in range(p - 1)])
    assert chain_components(cpdag_of(chain)) == [frozenset(range(p))]


def test_chain_components_partition():
    for g in random_dags(40, [5, 8], seed=9):
        c = cpdag_of(g)
        comps = chain_components(c)
        assert sorted(v for comp in comps for v in comp) == list(range(g.p))
        where = {v: k for k, comp in enumerate(comps) for v in comp}
        for a, b in c.undirected_edges():
            assert where[a] == where[b]


def _has_chordless_cycle(g, comp):
    """Brute force: some induced subgraph on >= 4 nodes is a single cycle."""
    comp = sorted(comp)
    for r in range(4, len(comp) + 1):
        for sub in combinations(comp, r):
            deg = [sum(1 for w in sub if g.und[v] >> w & 1) for v in sub]
            if all(d == 2 for d in deg):
                seen, stack = {sub[0]}, [sub[0]]
                while stack:
                    v = stack.pop()
                    for w in sub:
                        if g.und[v] >> w & 1 and w not in seen:
                            seen.add(w)
                            stack.append(w)
                if len(seen) == r:
                    return True
    return False


def test_chordality_examples():
    square = und(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert not is_chordal(square, range(4))
    assert is_chordal(und(3, [(0, 1), (1, 2), (0, 2)]), range(3))
    tree = und(7, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)])
    assert is_chordal(tree, range(7))


def test_chordality_matches_brute_force():
    rng = np.random.default_rng(4)
    for _ in range(300):
        p = int(rng.integers(4, 8))
        edges = [(a, b) for a in range(p) for b in range(a + 1, p) if rng.random() < 0.5]
        g = und(p, edges)
        for comp in chain_components(g):
            assert is_chordal(g, comp) == (not _has_chordless_cycle(g, comp))


# extensions and completed PDAGs


def test_extension_counts():
    assert len(enumerate_extensions(und(2, [(0, 1)]), [0, 1])) == 2
    assert len(enumerate_extensions(und(3, [(0, 1), (1, 2)]), [0, 1, 2])) == 3
    assert len(enumerate_extensions(und(3, [(0, 1), (1, 2), (0, 2)]), [0, 1, 2])) == 6


def test_extension_cap():
    clique = und(9, [(a, b) for a in range(9) for b in range(a + 1, 9)])
    with pytest.raises(ExtensionCapExceeded):
        enumerate_extensions(clique, range(9))
    assert len(enumerate_extensions(und(4, [(0, 1), (1, 2), (2, 3)]), range(4), cap=4)) == 4


def test_extensions_match_brute_force():
    for p in (3, 4):
        for c in all_cpdags(p):
            partial = [c]
            for comp in chain_components(c):
                step = []
                for g in partial:
                    exts = enumerate_extensions(g, comp)
                    assert len(set(exts)) == len(exts)
                    for x in exts:
                        assert not any(x.und[v] for v in comp)
                    step += exts
                partial = step
            # orienting every component in turn yields exactly the class
            assert {x.rows for x in partial} == {m.rows for m in class_members(c)}


def test_extension_component_restricted_to_larger_pdag():
    # 0 -> 1 - 2 would be closed by Meek rule 1; build a component next to fixed edges
    g = Graph.from_edges(4, directed=[(0, 1), (0, 2)], undirected=[(1, 2), (2, 3), (1, 3)], kind=GraphKind.PDAG)
    for x in enumerate_extensions(g, [1, 2, 3]):
        assert x.is_directed()
        assert _vstructs(x) == set()
    members = {m.rows for m in _orientations(g) if _vstructs(m) == set()}
    assert {x.rows for x in enumerate_extensions(g, [1, 2, 3])} == members


def test_cpdag_matches_brute_force():
    for p in (2, 3, 4):
        for g in all_dags(p):
            c = cpdag_of(g)
            assert c.rows == cpdag_bruteforce(g).rows
            assert is_cpdag(c)
            assert is_consistent_extension(c, g)
            assert is_consistent_extension(c, consistent_extension(c))


def test_cpdag_validation():
    assert is_cpdag(und(3, [(0, 1), (1, 2)]))
    with pytest.raises(GraphValidationError):
        und(4, [(0, 1), (1, 2), (2, 3), (3, 0)], kind=GraphKind.CPDAG)
    # directed edge that no Meek rule would force
    with pytest.raises(GraphValidationError):
        Graph.from_edges(2, directed=[(0, 1)], kind=GraphKind.CPDAG)
    # a v-structure is a valid completed PDAG
    Graph.from_edges(3, directed=[(0, 1), (2, 1)], kind=GraphKind.CPDAG)


def test_is_consistent_extension_examples():
    c = und(2, [(0, 1)], kind=GraphKind.CPDAG)
    assert is_consistent_extension(c, dag(2, [(0, 1)]))
    assert is_consistent_extension(c, dag(2, [(1, 0)]))
    v = Graph.from_edges(3, directed=[(0, 1), (2, 1)], kind=GraphKind.CPDAG)
    assert is_consistent_extension(v, dag(3, [(0, 1), (2, 1)]))
    assert not is_consistent_extension(v, dag(3, [(1, 0), (2, 1)]))


def test_equality_ignores_labels():
    a = parse_graph("a -> b\n", "edge-list")
    b = parse_graph("0 1\n0 0\n")
    assert a == b and hash(a) == hash(b)

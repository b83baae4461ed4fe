import io
import itertools

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hamdecomp.errors import ContractError, DomainError, ParseError
from hamdecomp.graph import (BiPartition, Decomposition, Digraph, Graph, babai, babai_partition, bestposs,
                             bestposs_degree, complete, cut_parity_check, degree_threshold, edges_between,
                             format_decomposition, format_graph, format_partition, g_crit, g_crit_partition,
                             generate, is_D_balanced, parse_decomposition, parse_graph, parse_partition,
                             read_graph, two_cliques, two_cliques_minus_ham, write_graph)

from .strategies import bipartitions, random_regular, regular_graphs


# ---------------------------------------------------------------- data model

def test_graph_rejects_loops_and_range():
    with pytest.raises(DomainError):
        Graph(3, [(1, 1)])
    with pytest.raises(DomainError):
        Graph(3, [(0, 3)])


def test_graph_collapses_duplicate_edges():
    G = Graph(3, [(0, 1), (1, 0), (1, 2)])
    assert G.m == 2
    assert G.degrees() == [1, 2, 1]


def test_oriented_digraph_forbids_antiparallel_pair():
    Digraph(3, [(0, 1), (1, 0)])
    with pytest.raises(DomainError):
        Digraph(3, [(0, 1), (1, 0)], oriented=True)


def test_bipartition_overlap_rejected():
    with pytest.raises(DomainError):
        BiPartition(frozenset({0, 1}), frozenset({1}), frozenset({2}))


# ---------------------------------------------------------------- statistics

@pytest.mark.parametrize("n,expected", [(12, 5), (13, 6), (14, 7)])
def test_degree_threshold_values(n, expected):
    assert degree_threshold(n) == expected


def test_degree_threshold_domain():
    with pytest.raises(DomainError):
        degree_threshold(2)


def test_edges_between_examples():
    K4 = complete(4)
    assert edges_between(K4, {0, 1}, {2, 3}) == 4
    assert edges_between(K4, set(), {0, 1, 2}) == 0
    assert edges_between(K4, {0, 1, 2}, {0, 1, 2}) == 3
    with pytest.raises(DomainError):
        edges_between(K4, {0}, {7})


def test_edges_between_babai_matches_networkx_count():
    G, P = babai(1), babai_partition(1)
    expected = nx.cut_size(G.to_networkx(), P.A_prime, P.B_prime)
    assert expected == len(P.A_prime) * len(P.B_prime) == 24
    assert edges_between(G, P.A_prime, P.B_prime) == expected


def test_is_D_balanced_examples():
    K4 = complete(4)
    assert is_D_balanced(K4, BiPartition.from_sides({0, 1, 2}, {3}), 3)
    assert is_D_balanced(Graph(4), BiPartition.from_sides({0, 1}, {2, 3}), 0)


@given(regular_graphs(), st.data())
def test_regular_graph_is_balanced_for_equal_cores(gd, data):
    G, d = gd
    n = G.n
    A_prime = set(data.draw(st.lists(st.integers(0, n - 1), unique=True)))
    B_prime = set(range(n)) - A_prime
    k = min(len(A_prime), len(B_prime))
    A = set(sorted(A_prime)[:k])
    B = set(sorted(B_prime)[:k])
    P = BiPartition(frozenset(A), frozenset(A_prime - A), frozenset(B), frozenset(B_prime - B))
    assert is_D_balanced(G, P, d)


@given(regular_graphs(), st.data())
def test_cut_lower_bound(gd, data):
    G, d = gd
    B_prime = set(data.draw(st.lists(st.integers(0, G.n - 1), unique=True, min_size=1)))
    A_prime = set(range(G.n)) - B_prime
    b = len(B_prime)
    assert edges_between(G, A_prime, B_prime) >= (d - b + 1) * b


def test_cut_parity_examples():
    K4 = complete(4)
    assert cut_parity_check(K4, BiPartition.from_sides({0, 1}, {2, 3}), 3)
    pet = Graph.from_networkx(nx.petersen_graph())
    P = BiPartition.from_sides(range(5), range(5, 10))
    assert edges_between(pet, P.A_prime, P.B_prime) % 2 == 1
    assert cut_parity_check(pet, P, 3)
    K5 = complete(5)
    for r in range(6):
        for A in itertools.combinations(range(5), r):
            assert cut_parity_check(K5, BiPartition.from_sides(A, set(range(5)) - set(A)), 4)


def test_cut_parity_requires_regular():
    G = Graph(3, [(0, 1)])
    with pytest.raises(ContractError):
        cut_parity_check(G, BiPartition.from_sides({0}, {1, 2}), 1)


@given(regular_graphs(), st.data())
def test_cut_parity_law(gd, data):
    G, d = gd
    assert cut_parity_check(G, data.draw(bipartitions(G.n)), d)


# ---------------------------------------------------------------- generators

def test_babai_one():
    G = babai(1)
    assert G.n == 10 and G.min_degree() == 5


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_babai_min_degree(k):
    assert babai(k).min_degree() == (8 * k + 2) // 2


def test_two_cliques_eight():
    G = two_cliques(8)
    assert G.regular_degree() == 3 and not G.is_connected()


def test_g_crit_nine():
    G, P = g_crit(9), g_crit_partition(9)
    assert G.regular_degree() == 4
    cross = sum(1 for u, v in G.to_networkx().edges if (u in P.A_prime) != (v in P.A_prime))
    assert cross == 4
    assert edges_between(G, P.A_prime, P.B_prime) == 4


@pytest.mark.parametrize("n", [8, 10, 14, 18])
def test_two_cliques_minus_ham_regular(n):
    G = two_cliques_minus_ham(n)
    assert G.regular_degree() == n // 2 - 2
    assert len(G.components()) == 2


@pytest.mark.parametrize("n", range(6, 31))
def test_bestposs_disconnected_and_regular(n):
    G = bestposs(n)
    assert not G.is_connected()
    assert G.regular_degree() == bestposs_degree(n)


@pytest.mark.parametrize("family,params", [("babai", (0,)), ("g_crit", (11,)), ("g_crit", (8,)),
                                           ("two_cliques", (1,)), ("nope", (3,)), ("complete", (3, 4))])
def test_generate_bad_params(family, params):
    with pytest.raises(DomainError):
        generate(family, *params)


# ---------------------------------------------------------------- text formats

def test_parse_path_graph():
    G = parse_graph("3 2\n0 1\n1 2\n")
    assert G.n == 3 and G.sorted_edges() == [(0, 1), (1, 2)]


def test_parse_empty_graph():
    G = parse_graph("0 0\n")
    assert G.n == 0 and G.m == 0


def test_complete_round_trip_byte_identical():
    text = format_graph(complete(5))
    buf = io.StringIO()
    write_graph(read_graph(io.StringIO(text)), buf)
    assert buf.getvalue() == text


@pytest.mark.parametrize("text,line", [("3 2\n0 1\n", None), ("3 1\n0 x\n", 2), ("3 1\n0 5\n", 2), ("a b\n", 1)])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as info:
        parse_graph(text)
    if line is not None:
        assert info.value.line == line


def test_partition_round_trip():
    P = g_crit_partition(9)
    assert parse_partition(format_partition(P)) == P


def test_decomposition_round_trip():
    K5 = complete(5)
    D = Decomposition(K5, [(0, 1, 2, 3, 4), (0, 2, 4, 1, 3)], [], complete=True)
    text = format_decomposition(D)
    again = parse_decomposition(text, K5)
    assert format_decomposition(again) == text
    assert again.complete


def test_decomposition_cycles_canonical():
    D = Decomposition(complete(4), [(2, 1, 0, 3)])
    assert D.cycles == [(0, 1, 2, 3)]


@given(regular_graphs(n_max=12))
def test_graph_round_trip_property(gd):
    G, _ = gd
    assert parse_graph(format_graph(G)) == G


def test_random_regular_helper_is_seeded():
    assert random_regular(10, 3, 4) == random_regular(10, 3, 4)

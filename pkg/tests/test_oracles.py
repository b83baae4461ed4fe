import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamdecomp.classic import reg_even, walecki
from hamdecomp.config import DEFAULT_CONFIG
from hamdecomp.errors import DomainError, ResourceError
from hamdecomp.graph import (BiPartition, Decomposition, Graph, babai, complete, cycle, degree_threshold, g_crit,
                             g_crit_partition, generate, two_cliques)
from hamdecomp.oracles import (OracleTimeout, brute_degree_capped_max, brute_ham_decomposition,
                               brute_one_factorization, max_ham_packing, reg_even_oracle, verify_decomposition)
from hamdecomp.structure import capped_max_edges

from .strategies import random_graph, random_regular


def _petersen() -> Graph:
    return Graph.from_networkx(nx.petersen_graph())


# ---------------------------------------------------------------- verifier

def test_verify_walecki_five():
    cert = verify_decomposition(complete(5), walecki(5))
    assert cert.ok and cert.complete and str(cert) == "OK"


def test_verify_duplicate_cycle():
    c = (0, 1, 2, 3, 4)
    cert = verify_decomposition(complete(5), Decomposition(complete(5), [c, c]))
    assert not cert.ok and cert.rule == "disjoint" and cert.witness == "0-1"
    assert str(cert) == "FAIL disjoint 0-1"


def test_verify_missing_edge_breaks_completeness():
    G = g_crit(9)
    # any edge-disjoint parts that leave an edge uncovered but claim completeness
    D = Decomposition(G, [], [], complete=True)
    cert = verify_decomposition(G, D)
    assert not cert.ok and cert.rule == "complete"
    u, v = (int(x) for x in cert.witness.split("-"))
    assert G.has_edge(u, v)


def test_verify_rejects_foreign_edge_and_short_cycle():
    C4 = cycle(4)
    assert verify_decomposition(C4, Decomposition(C4, [(0, 2, 1, 3)])).rule == "host"
    assert verify_decomposition(C4, Decomposition(C4, [(0, 1, 2)])).rule == "hamiltonian"
    assert verify_decomposition(C4, Decomposition(C4, [], [{(0, 1)}])).rule == "perfect"


def test_verify_flags_unclaimed_completeness():
    C4 = cycle(4)
    cert = verify_decomposition(C4, Decomposition(C4, [(0, 1, 2, 3)], complete=False))
    assert not cert.ok and cert.rule == "complete"


# ---------------------------------------------------------------- 1-factorizations

def test_one_factorization_k4():
    D = brute_one_factorization(complete(4))
    assert D is not None and len(D.matchings) == 3
    assert verify_decomposition(complete(4), D).ok


def test_petersen_has_no_one_factorization():
    assert brute_one_factorization(_petersen()) is None


def test_two_cliques_eight_one_factorization():
    G = two_cliques(8)
    D = brute_one_factorization(G)
    assert D is not None and len(D.matchings) == 3
    assert verify_decomposition(G, D).ok


def test_one_factorization_preconditions():
    with pytest.raises(DomainError):
        brute_one_factorization(Graph(4, [(0, 1)]))
    with pytest.raises(DomainError):
        brute_one_factorization(complete(5))
    with pytest.raises(ResourceError):
        brute_one_factorization(complete(16))


# ---------------------------------------------------------------- Hamilton cycles

def test_ham_decomposition_k5():
    D = brute_ham_decomposition(complete(5))
    assert D is not None and len(D.cycles) == 2
    assert verify_decomposition(complete(5), D).ok


def test_babai_one_packing():
    k, cycles = max_ham_packing(babai(1))
    assert k == 1 == (10 - 2) // 8
    assert verify_decomposition(babai(1), Decomposition(babai(1), cycles)).ok


def test_six_cycle():
    k, _ = max_ham_packing(cycle(6))
    assert k == 1
    D = brute_ham_decomposition(cycle(6))
    assert D is not None and D.cycles == [(0, 1, 2, 3, 4, 5)]


def test_petersen_is_not_hamiltonian():
    assert max_ham_packing(_petersen())[0] == 0
    assert brute_ham_decomposition(_petersen()) is None


def test_hamilton_caps():
    with pytest.raises(ResourceError):
        brute_ham_decomposition(complete(13))
    with pytest.raises(ResourceError):
        max_ham_packing(complete(11))


# ---------------------------------------------------------------- capped subgraphs

def test_capped_matching_of_four_edges():
    G = Graph(8, [(0, 1), (2, 3), (4, 5), (6, 7)])
    assert brute_degree_capped_max(G, 1) == 4


def test_capped_k33():
    G = Graph.from_networkx(nx.complete_bipartite_graph(3, 3))
    assert brute_degree_capped_max(G, 1) == 3
    assert brute_degree_capped_max(G, 3) == 9


def test_capped_g_crit_cross_graph():
    G, P = g_crit(9), g_crit_partition(9)
    cross = Graph(G.n, G.cross_edges(P.A_prime, P.B_prime))
    expected = len(nx.max_weight_matching(cross.to_networkx(), maxcardinality=True))
    assert brute_degree_capped_max(cross, 1) == expected == 3


def test_capped_cap_and_domain():
    with pytest.raises(DomainError):
        brute_degree_capped_max(cycle(4), -1)
    with pytest.raises(ResourceError):
        brute_degree_capped_max(complete(8), 2)


@settings(max_examples=40)
@given(st.integers(4, 9), st.floats(0.2, 0.8), st.integers(0, 10_000), st.integers(0, 3))
def test_capped_agrees_with_flow(n, p, seed, b):
    G = random_graph(n, p, seed)
    if G.m > DEFAULT_CONFIG.capped_max_cap:
        return
    P = BiPartition.from_sides(range(n // 2), range(n // 2, n))
    cross = Graph(n, G.cross_edges(P.A_prime, P.B_prime))
    assert capped_max_edges(G, P, b)[0] == brute_degree_capped_max(cross, b)


# ---------------------------------------------------------------- regular even subgraphs

@pytest.mark.parametrize("G,expected", [(babai(1), 2), (complete(5), 4), (cycle(7), 2)])
def test_reg_even_oracle_examples(G, expected):
    assert reg_even_oracle(G) == expected


def test_reg_even_oracle_cap():
    with pytest.raises(ResourceError):
        reg_even_oracle(complete(13))


CORPUS = [("complete", (n,)) for n in range(3, 13)] + [("cycle", (n,)) for n in range(3, 13)] + \
    [("two_cliques", (n,)) for n in range(4, 13)] + [("g_crit", (9,)), ("babai", (1,))] + \
    [("two_cliques_minus_ham", (n,)) for n in (8, 10, 12)] + [("bestposs", (n,)) for n in range(6, 13)]


@pytest.mark.parametrize("family,params", CORPUS)
def test_reg_even_matches_oracle_on_families(family, params):
    G = generate(family, *params)
    assert reg_even(G) == reg_even_oracle(G)


def test_deadline_cancels_search():
    with pytest.raises(OracleTimeout):
        max_ham_packing(complete(10), deadline=0.0)


# ---------------------------------------------------------------- consistency sweep

def _sweep_instances(count=50):
    out, seed = [], 0
    sizes = (8, 10, 12)
    while len(out) < count:
        n = sizes[len(out) % 3]
        lo = degree_threshold(n)
        D = lo + seed % (n - lo)
        if (n * D) % 2 == 0 and D < n:
            out.append((n, D, seed))
        seed += 1
    return out


@pytest.mark.parametrize("n,D,seed", _sweep_instances())
def test_dense_regular_graphs_are_class_one(n, D, seed):
    G = random_regular(n, D, seed)
    F = brute_one_factorization(G)
    assert F is not None and verify_decomposition(G, F).ok

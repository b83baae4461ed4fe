import itertools
import math
import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hamdecomp.classic import reg_even_witness
from hamdecomp.config import DEFAULT_CONFIG
from hamdecomp.errors import ContractError, ResourceError, ToleranceError
from hamdecomp.graph import (BiPartition, Graph, babai, complete, complete_bipartite, cycle, edges_between, g_crit,
                             g_crit_partition, two_cliques, two_cliques_minus_ham)
from hamdecomp.oracles import brute_degree_capped_max
from hamdecomp.structure import (SchemePartition, build_framework, build_weak_framework, capped_max_edges,
                                 check_framework, check_scheme, check_weak_framework, classify, criticality,
                                 eps_bipartite, eps_close_two_cliques, is_eps_regular, is_robust_expander,
                                 is_sparse_superregular, is_superregular, localized_slices, random_equipartition,
                                 scheme_partition, sparse_split)

from .strategies import random_graph


def _min_bisection(G, score):
    n = G.n
    return min(score(set(A)) for A in itertools.combinations(range(n), n // 2))


# ---------------------------------------------------------------- closeness

def test_two_cliques_witness_is_a_clique():
    w = eps_close_two_cliques(two_cliques(12), 0.01)
    assert w is not None and w.value == 0
    assert w.A in (frozenset(range(6)), frozenset(range(6, 12)))


def test_complete_bipartite_not_close_to_two_cliques():
    G = complete_bipartite(6)
    g = G.to_networkx()
    best = _min_bisection(G, lambda A: nx.cut_size(g, A))
    assert best > 0.01 * 144
    assert eps_close_two_cliques(G, 0.01) is None


def test_two_cliques_minus_ham_close():
    G = two_cliques_minus_ham(14)
    g = G.to_networkx()
    assert _min_bisection(G, lambda A: nx.cut_size(g, A)) <= 0.1 * 196
    w = eps_close_two_cliques(G, 0.1)
    assert w is not None and nx.cut_size(g, w.A) <= 0.1 * 196


def test_complete_bipartite_is_bipartite_witness():
    w = eps_bipartite(complete_bipartite(5), 0.001)
    assert w.A in (frozenset(range(5)), frozenset(range(5, 10)))


def test_k10_not_eps_bipartite():
    G = complete(10)
    best = _min_bisection(G, lambda A: max(edges_between(G, A, A), edges_between(G, set(range(10)) - A,
                                                                               set(range(10)) - A)))
    assert best > 0.05 * 100
    assert eps_bipartite(G, 0.05) is None


def test_babai_eps_bipartite_threshold():
    # a floor(n/2) bisection cannot separate the 4-vertex empty class exactly
    G = babai(1)
    V = set(range(10))
    best = _min_bisection(G, lambda A: max(edges_between(G, A, A), edges_between(G, V - A, V - A)))
    assert best == 4
    assert eps_bipartite(G, 0.02) is None
    w = eps_bipartite(G, 0.04)
    assert w is not None
    assert max(edges_between(G, w.A, w.A), edges_between(G, V - w.A, V - w.A)) <= 4


# ---------------------------------------------------------------- expansion

def test_complete_graph_is_expander():
    assert is_robust_expander(complete(10), 0.1, 0.3).is_expander


def test_two_cliques_not_expander():
    v = is_robust_expander(two_cliques(12), 0.05, 0.3)
    assert not v.is_expander and v.exhaustive and v.witness is not None


def _robust_expander_oracle(G, nu, tau):
    n = G.n
    for k in range(math.ceil(tau * n), math.floor((1 - tau) * n) + 1):
        for S in itertools.combinations(range(n), k):
            S = set(S)
            rn = [v for v in range(n) if sum(1 for w in G.adj[v] if w in S) >= nu * n]
            if len(rn) < k + nu * n:
                return False
    return True


def test_cycle_not_expander_matches_oracle():
    G = cycle(12)
    assert _robust_expander_oracle(G, 0.1, 0.3) is False
    v = is_robust_expander(G, 0.1, 0.3)
    assert not v.is_expander and v.witness is not None


def test_expander_exact_cap():
    with pytest.raises(ResourceError):
        is_robust_expander(complete(23), 0.1, 0.3)


@pytest.mark.parametrize("seed", range(6))
def test_expander_matches_oracle_on_random(seed):
    G = random_graph(9, 0.4 + 0.1 * (seed % 4), seed)
    assert is_robust_expander(G, 0.15, 0.3).is_expander == _robust_expander_oracle(G, 0.15, 0.3)


# ---------------------------------------------------------------- classification

def test_classify_examples():
    assert classify(complete_bipartite(8)).kind == "NearBipartite"
    assert classify(two_cliques(16)).kind == "TwoCliques"
    assert classify(complete(16)).kind == "RobustExpander"


@pytest.mark.parametrize("n", range(8, 25, 2))
def test_classify_families(n):
    assert classify(two_cliques(n)).kind == "TwoCliques"
    assert classify(complete_bipartite(n // 2)).kind == "NearBipartite"


def test_classify_rejects_sparse_input():
    with pytest.raises(ContractError):
        classify(cycle(10))


# ---------------------------------------------------------------- criticality

def test_g_crit_nine_critical():
    rep = criticality(g_crit(9), g_crit_partition(9), 4)
    assert rep.is_critical
    assert rep.max_cross_degree == 2
    assert rep.capped_max_edges == 3
    assert 1 <= len(rep.heavy) <= 3


def test_two_cliques_with_matching_not_critical():
    G = two_cliques(12).with_edges([(i, i + 6) for i in range(6)])
    P = BiPartition.from_sides(range(6), range(6, 12))
    rep = criticality(G, P, 6)
    assert rep.max_cross_degree == 1 and not rep.is_critical


def test_empty_cross_not_critical():
    rep = criticality(two_cliques(8), BiPartition.from_sides(range(4), range(4, 8)), 3)
    assert rep.max_cross_degree == 0 and not rep.is_critical


@pytest.mark.parametrize("n,D", [(9, 4), (17, 8)])
def test_g_crit_cross_edge_bound(n, D):
    G, P = g_crit(n), g_crit_partition(n)
    rep = criticality(G, P, D)
    assert rep.is_critical
    assert 10 * edges_between(G, P.A_prime, P.B_prime) <= 17 * D + 50


@given(st.integers(0, 10_000), st.integers(4, 12), st.floats(0.2, 0.8), st.integers(1, 3))
def test_capped_max_matches_exhaustive(seed, n, p, cap):
    rng = random.Random(seed)
    side = rng.sample(range(n), n // 2)
    P = BiPartition.from_sides(side, set(range(n)) - set(side))
    G = random_graph(n, p, seed)
    cross = Graph(n, G.cross_edges(P.A_prime, P.B_prime))
    if cross.m > DEFAULT_CONFIG.capped_max_cap:
        cross = Graph(n, sorted(cross.edges)[:DEFAULT_CONFIG.capped_max_cap])
        G = cross
    value, chosen = capped_max_edges(G, P, cap)
    assert value == brute_degree_capped_max(cross, cap)
    assert Graph(n, chosen).max_degree() <= cap


# ---------------------------------------------------------------- frameworks

def test_framework_two_cliques_sixteen():
    G = two_cliques(16)
    W = build_framework(G, K=2)
    assert not W.partition.A0 and not W.partition.B0
    assert check_framework(G, W.partition, W.eps0, 2) == []


def test_framework_two_cliques_minus_ham():
    G = two_cliques_minus_ham(18)
    W = build_framework(G, eps0=0.35, K=3)
    assert check_framework(G, W.partition, 0.35, 3) == []


def test_framework_g_crit():
    G = g_crit(9)
    W = build_framework(G, K=1)
    assert frozenset({8}) in (W.partition.A0, W.partition.B0)
    assert check_framework(G, W.partition, W.eps0, 1) == []


@pytest.mark.parametrize("G,K,eps0", [(two_cliques(16), 2, 0.2), (two_cliques_minus_ham(18), 3, 0.35),
                                      (g_crit(9), 1, 0.2), (g_crit(17), 1, 0.2)])
def test_framework_moves_never_increase_cut(G, K, eps0):
    W = build_framework(G, eps0, K)
    h = W.cut_history
    assert all(b <= a for a, b in zip(h, h[1:]))


def test_weak_framework_complete_bipartite():
    G = complete_bipartite(8)
    W = build_weak_framework(G, G, 0.01, 0.3, 1, 8)
    assert not W.partition.A0 and not W.partition.B0
    assert check_weak_framework(G, G, W.partition, W.eps0, 0.3, 1, 8) == []


def test_weak_framework_babai():
    F = babai(1)
    r, witness = reg_even_witness(F)
    G = Graph(F.n, witness)
    W = build_weak_framework(F, G, 0.04, 0.3, 1, r)
    assert check_weak_framework(F, G, W.partition, W.eps0, 0.3, 1, r) == []


def test_weak_framework_needs_bipartite_like_input():
    G = two_cliques(12)
    with pytest.raises(ContractError):
        build_weak_framework(G, G, 0.01, 0.3, 1, 5)


# ---------------------------------------------------------------- equipartitions and schemes

def test_equipartition_clique_in_complete_graph():
    G = complete(120)
    U = range(60)
    eq = random_equipartition(G, G, U, 3, seed=1)
    assert sorted(len(p) for p in eq.parts) == [20, 20, 20]
    eps1 = DEFAULT_CONFIG.eps1
    for v in (0, 59, 60, 119):
        for part in eq.parts:
            assert abs(G.degree_into(v, part) - G.degree_into(v, U) / 3) <= eps1 * 120 / 3
    assert eq.deviations["iii"] <= DEFAULT_CONFIG.eps2


def test_equipartition_k1_identity():
    G = two_cliques(10)
    eq = random_equipartition(G, G, range(5), 1)
    assert eq.parts == (frozenset(range(5)),)
    assert all(v == 0 for v in eq.deviations.values())


def test_scheme_two_cliques_24():
    G = two_cliques(24)
    W = build_framework(G, K=2)
    S = scheme_partition(G, W, 6, seed=0)
    assert S.K == 2 and S.m == 6
    assert check_scheme(G, S, DEFAULT_CONFIG.eps1, DEFAULT_CONFIG.eps2) == []


def test_scheme_k1_trivial():
    G = two_cliques(12)
    W = build_framework(G, K=1)
    S = scheme_partition(G, W)
    assert S.A_clusters == (W.partition.A,) and S.B_clusters == (W.partition.B,)


def test_scheme_tiny_tolerance_fails():
    G = two_cliques_minus_ham(18)
    W = build_framework(G, eps0=0.35, K=3)
    tight = DEFAULT_CONFIG.with_overrides(eps1=1e-9, eps2=1e-9, retry_budget=5)
    with pytest.raises(ToleranceError):
        scheme_partition(G, W, config=tight)


# ---------------------------------------------------------------- slices

def _slice_scheme():
    A = (frozenset({0, 1}), frozenset({2, 3}))
    B = (frozenset({4, 5}), frozenset({6, 7}))
    return SchemePartition(A, B, frozenset({8}), frozenset(), 0.2)


def test_slices_single_exceptional_vertex():
    S = _slice_scheme()
    G = Graph(9, [(8, v) for v in range(4)])
    slices = localized_slices(G, S, seed=0, eps=1.0)
    assert len(slices) == 4
    assert all(len(H) == 1 for H, _ in slices.values())


def test_slices_empty():
    slices = localized_slices(Graph(9), _slice_scheme(), seed=0)
    assert len(slices) == 4
    assert all(not H and not Hp for H, Hp in slices.values())


def test_slices_reproducible_and_partition():
    G = two_cliques(24)
    W = build_framework(G, K=2)
    S = scheme_partition(G, W, 6, seed=0)
    rng = random.Random(0)
    extra = [(u, v) for u in range(24) for v in range(u + 1, 24) if rng.random() < 0.2]
    Gd = G.with_edges(extra)
    A, B = S.A, S.B
    diamond = Graph(24, [e for e in Gd.edges if not ({*e} <= A or {*e} <= B)])
    try:
        first = localized_slices(diamond, S, seed=3, eps=1.0)
    except ToleranceError:
        pytest.skip("instance outside slice tolerance")
    second = localized_slices(diamond, S, seed=3, eps=1.0)
    assert first == second
    parts = [e for pair in first.values() for part in pair for e in part]
    assert len(parts) == len(set(parts))
    assert set(parts) <= diamond.edges


# ---------------------------------------------------------------- regularity

def test_complete_pair_superregular_at_zero():
    G = complete_bipartite(6)
    assert is_superregular(G, range(6), range(6, 12), 0, 1).ok


def test_isolated_vertex_breaks_superregularity():
    G = complete_bipartite(6).without_edges([(0, v) for v in range(6, 12)])
    v = is_superregular(G, range(6), range(6, 12), 0.2, 1)
    assert not v.ok and v.rule == "degree"


def _eps_regular_oracle(M, eps):
    m1, m2 = M.shape
    a, b = math.ceil(eps * m1 - 1e-12), math.ceil(eps * m2 - 1e-12)
    d = M.mean()
    for k in range(max(a, 1), m1 + 1):
        for rows in itertools.combinations(range(m1), k):
            cols = np.sort(M[list(rows)].sum(axis=0))
            for t in range(max(b, 1), m2 + 1):
                lo = cols[:t].sum() / (k * t)
                hi = cols[-t:].sum() / (k * t)
                if abs(lo - d) >= eps and abs(lo - d) > 0 or abs(hi - d) >= eps and abs(hi - d) > 0:
                    return False
    return True


@pytest.mark.parametrize("seed,eps", [(0, 0.4), (1, 0.4), (2, 0.25), (3, 0.5)])
def test_eps_regular_matches_exhaustive(seed, eps):
    m = 12 if eps >= 0.4 else 8
    rng = random.Random(seed)
    edges = [(i, m + j) for i in range(m) for j in range(m) if rng.random() < 0.5]
    G = Graph(2 * m, edges)
    M = np.zeros((m, m), dtype=int)
    for i, j in edges:
        M[i, j - m] = 1
    assert is_eps_regular(G, list(range(m)), list(range(m, 2 * m)), eps).ok == _eps_regular_oracle(M, eps)


def test_sparse_superregular_rules():
    G = complete_bipartite(6)
    X, Y = range(6), range(6, 12)
    assert is_sparse_superregular(G, X, Y, 0.3, 1, 0.5, 1).ok
    assert is_sparse_superregular(G, X, Y, 0.3, 1, 0.5, 0.5).rule == "Reg3"
    sparse = Graph(12, [(i, 6 + i) for i in range(6)])
    assert is_sparse_superregular(sparse, X, Y, 0.3, 1 / 6, 0.5, 1).rule == "Reg4"


def test_sparse_split_verified():
    m = 10
    G = complete_bipartite(m)
    X, Y = list(range(m)), list(range(m, 2 * m))
    H, rest = sparse_split(G, X, Y, 0.25, 0.9, seed=2)
    assert H.edges | rest.edges == G.edges and not H.edges & rest.edges
    assert is_sparse_superregular(H, X, Y, 0.9, 0.5, 0.25, 0.75).ok

"""Flow and matching primitives built on networkx.

These are infrastructure only: callers validate every result they get back.
"""

from __future__ import annotations

from typing import Hashable, Iterable, Mapping, Sequence

import networkx as nx

from .graph import Edge, Graph, norm_edge


def capped_bipartite_subgraph(
    left: Iterable[Hashable],
    right: Iterable[Hashable],
    edges: Iterable[tuple[Hashable, Hashable]],
    cap_left: Mapping[Hashable, int],
    cap_right: Mapping[Hashable, int],
) -> tuple[int, list[tuple[Hashable, Hashable]]]:
    """Maximum edge set with per-vertex degree caps, via an integral max flow.

    ``edges`` are (left, right) pairs. Returns the optimum and one optimal set.
    """
    net = nx.DiGraph()
    s, t = ("src",), ("snk",)
    net.add_node(s)
    net.add_node(t)
    for u in left:
        net.add_edge(s, ("L", u), capacity=int(cap_left[u]))
    for v in right:
        net.add_edge(("R", v), t, capacity=int(cap_right[v]))
    pairs = list(edges)
    for u, v in pairs:
        net.add_edge(("L", u), ("R", v), capacity=1)
    value, flow = nx.maximum_flow(net, s, t)
    chosen = [(u, v) for u, v in pairs if flow[("L", u)][("R", v)] > 0]
    return int(value), chosen


def bipartite_perfect_matching(
    left: Sequence[Hashable], right: Sequence[Hashable], edges: Iterable[tuple[Hashable, Hashable]]
) -> dict | None:
    """Perfect matching left -> right, or None when none exists."""
    if len(left) != len(right):
        return None
    g = nx.Graph()
    g.add_nodes_from(("L", u) for u in left)
    g.add_nodes_from(("R", v) for v in right)
    g.add_edges_from((("L", u), ("R", v)) for u, v in edges)
    match = nx.bipartite.hopcroft_karp_matching(g, top_nodes=[("L", u) for u in left])
    out = {u: match[("L", u)][1] for u in left if ("L", u) in match}
    return out if len(out) == len(left) else None


def maximum_matching(G: Graph) -> set[Edge]:
    g = G.to_networkx()
    return {norm_edge(u, v) for u, v in nx.max_weight_matching(g, maxcardinality=True)}


def perfect_matching(G: Graph) -> set[Edge] | None:
    if G.n % 2:
        return None
    m = maximum_matching(G)
    return m if 2 * len(m) == G.n else None


def f_factor(G: Graph, f: Sequence[int]) -> set[Edge] | None:
    """Spanning subgraph with degree exactly f(v) at every v, or None.

    Tutte's gadget: each vertex v becomes d(v) outer copies (one per incident
    edge) plus d(v) - f(v) inner copies joined to all its outer copies; the two
    outer copies of each edge are joined. Perfect matchings of the gadget
    correspond to f-factors of G.
    """
    for v in range(G.n):
        if not 0 <= f[v] <= G.degree(v):
            return None
    if sum(f) % 2:
        return None
    g = nx.Graph()
    for v in range(G.n):
        for w in G.adj[v]:
            g.add_node(("o", v, w))
        for j in range(G.degree(v) - f[v]):
            for w in G.adj[v]:
                g.add_edge(("i", v, j), ("o", v, w))
    for u, v in G.edges:
        g.add_edge(("o", u, v), ("o", v, u))
    if g.number_of_nodes() == 0:
        return set()
    mate = nx.max_weight_matching(g, maxcardinality=True)
    if 2 * len(mate) != g.number_of_nodes():
        return None
    chosen = set()
    for x, y in mate:
        if x[0] == "o" and y[0] == "o":
            chosen.add(norm_edge(x[1], y[1]))
    return chosen

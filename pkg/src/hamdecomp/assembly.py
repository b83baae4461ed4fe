"""Approximate decomposition at desk scale.

Cluster cycles are blown up into cyclic systems, ordered fictive matchings are
extended into locally balanced path sequences, those are completed to
1-factors, and the 1-factors are merged into Hamilton cycles that traverse the
matchings in their prescribed order.  Splicing the exceptional systems back in
yields Hamilton cycles of the host graph.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from . import _flow
from ._search import directed_hamilton_cycle
from .classic import bipartite_ham_decompose, regular_bipartite_subgraph, walecki
from .config import DEFAULT_CONFIG, ToleranceConfig
from .errors import ConstructionError, ContractError, DomainError, InfeasibleError, ToleranceError
from .exceptional import (
    ExceptionalSystem,
    fictive,
    fictive_bipartite,
    is_consistent,
    splice,
    splice_bipartite,
    split_two_cycles,
    validate_bes,
    validate_es,
)
from .graph import Decomposition, Digraph, Edge, Graph, norm_edge
from .oracles import verify_decomposition
from .structure import SchemePartition

Arc = tuple[int, int]


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class OrderedMatching:
    """Vertex-disjoint directed edges f_1, ..., f_l in a fixed order."""

    arcs: tuple[Arc, ...] = ()

    def __post_init__(self):
        arcs = tuple((int(u), int(v)) for u, v in self.arcs)
        seen: set[int] = set()
        for u, v in arcs:
            if u == v or u in seen or v in seen:
                raise DomainError(f"arc {u}->{v} breaks the matching property")
            seen.update((u, v))
        object.__setattr__(self, "arcs", arcs)

    def __len__(self) -> int:
        return len(self.arcs)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for a in self.arcs for v in a)


@dataclass(frozen=True)
class CyclicSystem:
    """A digraph winding around the directed cycle ``clusters[0] -> clusters[1] -> ...``."""

    G: Digraph
    clusters: tuple[frozenset[int], ...]
    mu: float = 0.0
    eps: float = 1.0
    names: tuple[str, ...] = ()

    @property
    def k(self) -> int:
        return len(self.clusters)

    @property
    def m(self) -> int:
        return len(self.clusters[0]) if self.clusters else 0

    @cached_property
    def vertices(self) -> frozenset[int]:
        return frozenset().union(*self.clusters)

    @cached_property
    def position(self) -> dict[int, int]:
        return {v: i for i, c in enumerate(self.clusters) for v in c}

    def pair_arcs(self, i: int) -> set[Arc]:
        return {a for a in self.G.arcs if self.position[a[0]] == i}

    def winds(self, arcs: Iterable[Arc]) -> Arc | None:
        """First arc that does not go from some cluster to the next one, or None."""
        pos, k = self.position, self.k
        for u, v in arcs:
            if u not in pos or v not in pos or pos[v] != (pos[u] + 1) % k:
                return (u, v)
        return None

    def violations(self) -> list[str]:
        bad = []
        sizes = {len(c) for c in self.clusters}
        if self.k < 3 or len(sizes) != 1 or sum(len(c) for c in self.clusters) != len(self.vertices):
            bad.append("Sys1")
        if self.winds(self.G.arcs) is not None:
            bad.append("Sys2")
            return bad
        m = self.m
        lo, hi = (1 - self.mu - self.eps) * m - 1e-9, (1 - self.mu + self.eps) * m + 1e-9
        for v in self.vertices:
            if not lo <= self.G.out_degree(v) <= hi or not lo <= self.G.in_degree(v) <= hi:
                bad.append("Sys2")
                break
        return bad


@dataclass(frozen=True)
class BalancedExtension:
    sequences: tuple[frozenset[Arc], ...]
    matchings: tuple[OrderedMatching, ...]
    targets: tuple[int, ...]
    eps: float
    ell: int

    def violations(self, clusters: Sequence[frozenset[int]]) -> list[str]:
        """Violated rules among (BE1)-(BE3) with respect to the cluster cycle."""
        k = len(clusters)
        m = len(clusters[0])
        V = frozenset().union(*clusters)
        bad = []
        extra: set[Arc] = set()
        ok1 = len(self.sequences) == len(self.matchings) == len(self.targets)
        for PS, M in zip(self.sequences, self.matchings):
            if not is_path_sequence(PS) or any(v not in V for a in PS for v in a) \
                    or not is_locally_balanced(PS, clusters):
                ok1 = False
                continue
            rest = set(PS) - set(M.arcs)
            if rest & extra:
                ok1 = False
            extra |= rest
        if not ok1:
            bad.append("BE1")
            return bad
        cap = self.ell * m / k + 1e-9
        per_target = [0] * k
        for PS, M, t in zip(self.sequences, self.matchings, self.targets):
            per_target[t] += 1
            if not is_extension(PS, M, clusters[t]):
                bad.append("BE2")
                break
        if max(per_target, default=0) > cap and "BE2" not in bad:
            bad.append("BE2")
        touch = [0] * k
        for PS in self.sequences:
            verts = {v for a in PS for v in a}
            for i, c in enumerate(clusters):
                inter = len(verts & c)
                if inter > self.eps * m + 1e-9:
                    bad.append("BE3")
                if inter:
                    touch[i] += 1
        if max(touch, default=0) > cap:
            bad.append("BE3")
        return list(dict.fromkeys(bad))


@dataclass(frozen=True)
class SystemBundle:
    """One cyclic system with its reserve and the matchings routed through it."""

    system: CyclicSystem
    side: str
    index: int
    reserve: Graph
    assigned: tuple[int, ...] = ()
    matchings: tuple[OrderedMatching, ...] = ()
    targets: tuple[int, ...] = ()


@dataclass(frozen=True)
class MergeResult:
    cycle: tuple[int, ...]
    reserve_used: frozenset[Arc]
    pairs: tuple[int, ...]

    @property
    def arcs(self) -> frozenset[Arc]:
        c = self.cycle
        return frozenset((c[i], c[(i + 1) % len(c)]) for i in range(len(c)))


# ---------------------------------------------------------------- path sequences

def _succ_pred(arcs: Iterable[Arc]) -> tuple[dict[int, int], dict[int, int]] | None:
    succ: dict[int, int] = {}
    pred: dict[int, int] = {}
    for u, v in arcs:
        if u in succ or v in pred:
            return None
        succ[u] = v
        pred[v] = u
    return succ, pred


def is_path_sequence(arcs: Iterable[Arc]) -> bool:
    """Vertex-disjoint directed paths: in- and out-degrees at most one and no cycle."""
    sp = _succ_pred(arcs)
    if sp is None:
        return False
    succ, pred = sp
    # every vertex on a path is reachable from a source; leftovers lie on cycles
    reached = set()
    for start in succ:
        if start in pred:
            continue
        v = start
        reached.add(v)
        while v in succ:
            v = succ[v]
            reached.add(v)
    return all(u in reached for u in succ)


def is_locally_balanced(arcs: Iterable[Arc], clusters: Sequence[frozenset[int]]) -> bool:
    """For each cycle edge V_i V_{i+1}: arcs leaving V_i equal arcs entering V_{i+1}."""
    k = len(clusters)
    pos = {v: i for i, c in enumerate(clusters) for v in c}
    out_c, in_c = [0] * k, [0] * k
    for u, v in arcs:
        if u not in pos or v not in pos:
            raise DomainError(f"arc {u}->{v} leaves the clustered vertex set")
        out_c[pos[u]] += 1
        in_c[(pos[v] - 1) % k] += 1
    return out_c == in_c


def final_vertices(PS: Iterable[Arc], M: OrderedMatching) -> list[int]:
    """End vertex of the path of PS through each edge of M, in the order of M."""
    sp = _succ_pred(PS)
    if sp is None:
        raise DomainError("not a path sequence")
    succ = sp[0]
    out = []
    for u, v in M.arcs:
        if succ.get(u) != v:
            raise ContractError(f"matching edge {u}->{v} is not in the path sequence")
        x = v
        while x in succ:
            x = succ[x]
        out.append(x)
    return out


def is_extension(PS: Iterable[Arc], M: OrderedMatching, cluster: Iterable[int]) -> bool:
    """Each edge of M lies on its own path of PS and that path ends in ``cluster``."""
    PS = set(PS)
    if not set(M.arcs) <= PS or not is_path_sequence(PS):
        return False
    ends = final_vertices(PS, M)
    return len(set(ends)) == len(ends) and set(ends) <= set(cluster)


def fictive_matching(J: ExceptionalSystem, side: str) -> OrderedMatching:
    """The oriented, ordered fictive matching of J on side "A", "B" or "AB" (bipartite)."""
    if side == "AB":
        return OrderedMatching(fictive_bipartite(J).J_star)
    F = fictive(J)
    ell = F.ell
    if side == "A":
        lead = [(F.xs[2 * i], F.xs[2 * i + 1]) for i in range(ell)]
        return OrderedMatching(tuple(lead) + tuple(F.J_A[ell:]))
    if side == "B":
        lead = [(F.ys[2 * i + 1], F.ys[(2 * i + 2) % (2 * ell)]) for i in range(ell)]
        return OrderedMatching(tuple(lead) + tuple(F.J_B[ell:]))
    raise DomainError("side must be 'A', 'B' or 'AB'")


def visits_in_order(cycle: Sequence[int], order: Sequence[int]) -> bool:
    """Whether the directed cycle meets ``order`` in this cyclic order."""
    if len(order) <= 2:
        return all(v in cycle for v in order)
    pos = {v: i for i, v in enumerate(cycle)}
    if any(v not in pos for v in order):
        return False
    p0, k = pos[order[0]], len(cycle)
    rel = [(pos[v] - p0) % k for v in order]
    return all(a < b for a, b in zip(rel, rel[1:]))


# ---------------------------------------------------------------- cyclic systems

def _perfect_matchings_of_regular(X: Sequence[int], Y: Sequence[int], edges: set[Edge],
                                  rng: random.Random) -> list[set[Edge]]:
    """Split a regular bipartite edge set between X and Y into perfect matchings."""
    left, right = list(X), list(Y)
    rest = set(edges)
    out = []
    while rest:
        rng.shuffle(left)
        pairs = [(u, v) if u in X else (v, u) for u, v in rest]
        rng.shuffle(pairs)
        match = _flow.bipartite_perfect_matching(left, right, pairs)
        if match is None:
            raise ConstructionError("regular bipartite piece has no perfect matching", stage="reserve")
        pm = {norm_edge(u, v) for u, v in match.items()}
        out.append(pm)
        rest -= pm
    return out


def _regular_piece(G: Graph, X: Sequence[int], Y: Sequence[int], d: int,
                   rng: random.Random) -> list[set[Edge]]:
    """d edge-disjoint perfect matchings of G[X, Y] via the flow extractor."""
    X, Y = sorted(X), sorted(Y)
    m = len(X)
    if d == 0:
        return []
    label = {v: i for i, v in enumerate(X + Y)}
    back = X + Y
    local = Graph(2 * m, [(label[u], label[v]) for u, v in G.cross_edges(X, Y)])
    from fractions import Fraction

    sub = regular_bipartite_subgraph(local, range(m), range(m, 2 * m), 0, Fraction(m - d, m))
    edges = {norm_edge(back[u], back[v]) for u, v in sub.edges}
    return _perfect_matchings_of_regular(set(X), Y, edges, rng)


def _locality_groups(systems: Sequence[ExceptionalSystem], width: int) -> dict[tuple, list[int]]:
    groups: dict[tuple, list[int]] = {}
    for t, J in enumerate(systems):
        if J.locality is None or len(J.locality) < width:
            raise ContractError(f"exceptional system #{t} carries no locality of width {width}")
        groups.setdefault(tuple(J.locality[:width]), []).append(t)
    return groups


def build_cyclic_systems(G: Graph, S: SchemePartition, mode: str = "two_cliques",
                         systems: Sequence[ExceptionalSystem] = (),
                         config: ToleranceConfig = DEFAULT_CONFIG, seed: int = 0) -> list[SystemBundle]:
    """Blow up a Hamilton decomposition of the cluster graph into cyclic systems.

    Two-cliques mode returns (K-1)/2 systems on A followed by (K-1)/2 on B;
    bipartite mode returns K/2 systems on A + B.  Each bundle carries the
    reserve graph set aside for balanced extensions and the fictive
    matchings of the exceptional systems routed through it.
    """
    K, n = S.K, G.n
    r = config.reserve_degree if mode == "two_cliques" else config.reserve_degree_bip
    rng = random.Random(seed)
    if mode == "two_cliques":
        if K < 3 or K % 2 == 0:
            raise DomainError(f"two-cliques systems need an odd K >= 3, got {K}")
        cluster_cycles = [list(c) for c in walecki(K).cycles]
        count = (K - 1) // 2
        sides = [("A", S.A_clusters), ("B", S.B_clusters)]
    elif mode == "bipartite":
        if K < 2 or K % 2:
            raise DomainError(f"bipartite systems need an even K >= 2, got {K}")
        cluster_cycles = [list(c) for c in bipartite_ham_decompose(K).cycles]
        count = K // 2
        sides = [("AB", S.A_clusters + S.B_clusters)]
    else:
        raise DomainError("mode must be 'two_cliques' or 'bipartite'")

    # on-demand reserves only work when every cluster pair lies on the one cycle
    if r == 0 and count > 1:
        r = 1 if mode == "two_cliques" else 2
    bundles = []
    for side, clusters in sides:
        if mode == "two_cliques":
            pairs = [(i, i2) for i in range(K) for i2 in range(i + 1, K)]
        else:
            pairs = [(i, K + i2) for i in range(K) for i2 in range(K)]
        reserves: list[set[Edge]] = [set() for _ in range(count)]
        taken: set[Edge] = set()
        for i, i2 in pairs:
            if r == 0:
                continue
            pms = _regular_piece(G, clusters[i], clusters[i2], count * r, rng)
            for j in range(count):
                for pm in pms[j * r:(j + 1) * r]:
                    reserves[j] |= pm
            taken |= set().union(*pms) if pms else set()
        for j in range(count):
            order = cluster_cycles[j]
            arcs = []
            for t in range(len(order)):
                a, b = order[t], order[(t + 1) % len(order)]
                for u, v in G.cross_edges(clusters[a], clusters[b]):
                    if norm_edge(u, v) in taken:
                        continue
                    arcs.append((u, v) if u in clusters[a] else (v, u))
            names = tuple(f"{'AB'[c // K] if mode == 'bipartite' else side}{c % K}" for c in order)
            sysj = CyclicSystem(Digraph(n, arcs, oriented=True), tuple(clusters[c] for c in order),
                                0.0, config.system_eps, names)
            bad = sysj.violations()
            if bad:
                raise ToleranceError(f"cyclic system {side}{j} violates {bad}", stage="build_cyclic_systems",
                                     witness=(side, j, bad))
            # degree 0 means the reserve is drawn on demand from the system's own edges
            reserve = reserves[j] if r else {norm_edge(u, v) for u, v in arcs}
            bundles.append(SystemBundle(sysj, side, j, Graph(n, reserve)))

    if not systems:
        return bundles
    # partition the exceptional systems over the cluster cycles, as evenly as possible per locality
    width = 2 if mode == "two_cliques" else 4
    share: dict[int, list[int]] = {j: [] for j in range(count)}
    for key, idxs in sorted(_locality_groups(systems, width).items()):
        for pos, t in enumerate(idxs):
            share[pos % count].append(t)
    out = []
    for b in bundles:
        order = cluster_cycles[b.index]
        mats, targets = [], []
        for t in share[b.index]:
            J = systems[t]
            mats.append(fictive_matching(J, b.side))
            if b.side == "B":
                home = J.locality[1]
            else:
                home = J.locality[0]
            targets.append(order.index(home))
        out.append(SystemBundle(b.system, b.side, b.index, b.reserve, tuple(share[b.index]),
                                tuple(mats), tuple(targets)))
    return out


# ---------------------------------------------------------------- balanced extensions

def _take_reserve_edge(reserve: set[Edge], src: Iterable[int], dst: set[int], busy: set[int],
                       rng: random.Random, extend: bool = False) -> Arc | None:
    # extend=True continues an existing path from its end, so the tail may already be busy
    options = [(u, v) for u in src if extend or u not in busy for v in dst
               if v not in busy and norm_edge(u, v) in reserve]
    if not options:
        return None
    u, v = rng.choice(sorted(options))
    reserve.discard(norm_edge(u, v))
    busy.update((u, v))
    return (u, v)


def balanced_extension(matchings: Sequence[OrderedMatching], clusters: Sequence[frozenset[int]],
                       H: Graph, mode: str = "two_cliques", targets: Sequence[int] | None = None,
                       seed: int = 0) -> tuple[Digraph, BalancedExtension]:
    """Extend each ordered matching by reserve edges into a locally balanced path sequence.

    ``targets[s]`` is the position (in cycle order) of the cluster where the
    paths through M_s must end.  In two-cliques mode every M_s lies inside
    that cluster; in bipartite mode each B-end first gets a reserve edge back
    into the target cluster.  A non-winding arc from position p to q is then
    balanced by a reserve arc from position q-1 to p+1.
    """
    k = len(clusters)
    if k < 3:
        raise DomainError("the cluster cycle needs at least three clusters")
    m = len(clusters[0])
    pos = {v: i for i, c in enumerate(clusters) for v in c}
    if targets is None:
        targets = [pos[M.arcs[0][0]] if M.arcs else 0 for M in matchings]
    if len(targets) != len(matchings):
        raise DomainError("one target cluster per matching is required")
    rng = random.Random(seed)
    reserve = set(H.edges)
    oriented: set[Arc] = set()
    sequences = []
    for s, (M, t) in enumerate(zip(matchings, targets)):
        if any(v not in pos for v in M.vertices):
            raise ContractError(f"matching #{s} leaves the clustered vertex set")
        ps: list[Arc] = list(M.arcs)
        busy = set(M.vertices)
        if mode == "two_cliques":
            if not M.vertices <= clusters[t]:
                raise ContractError(f"matching #{s} is not inside its target cluster")
        elif mode == "bipartite":
            home = set(clusters[t])
            for x, y in M.arcs:
                arc = _take_reserve_edge(reserve, [y], home, busy, rng, extend=True)
                if arc is None:
                    raise InfeasibleError(f"reserve exhausted extending {x}->{y} into cluster {t}",
                                          stage="balanced_extension", witness=(s, x, y))
                ps.append(arc)
        else:
            raise DomainError("mode must be 'two_cliques' or 'bipartite'")
        for u, v in list(ps):
            p, q = pos[u], pos[v]
            if q == (p + 1) % k:
                continue
            arc = _take_reserve_edge(reserve, sorted(clusters[(q - 1) % k]), set(clusters[(p + 1) % k]), busy, rng)
            if arc is None:
                raise InfeasibleError(f"reserve exhausted balancing {u}->{v}", stage="balanced_extension",
                                      witness=(s, u, v))
            ps.append(arc)
        oriented.update(ps[len(M.arcs):])
        sequences.append(frozenset(ps))
    rest = [e for e in sorted(H.edges) if e not in {norm_edge(*a) for a in oriented}]
    H_dir = Digraph(H.n, list(oriented) + rest, oriented=True)

    sizes = [len(M) for M in matchings]
    if mode == "two_cliques":
        eps, ell = 2 * max(sizes, default=0) / m, 3
    else:
        n_clustered = k * m
        eps, ell = 12 * (k // 2) * max(sizes, default=0) / n_clustered, 12
    BE = BalancedExtension(tuple(sequences), tuple(matchings), tuple(targets), eps, ell)
    bad = BE.violations(clusters)
    if bad:
        raise ToleranceError(f"balanced extension violates {bad}", stage="balanced_extension", witness=bad)
    return H_dir, BE


# ---------------------------------------------------------------- 1-factors

def _random_perfect_matching(left: Sequence[int], right: Sequence[int], arcs: set[Arc],
                             rng: random.Random) -> set[Arc] | None:
    L, R = list(left), list(right)
    rng.shuffle(L)
    rng.shuffle(R)
    Ls, Rs = set(L), set(R)
    cand = [a for a in arcs if a[0] in Ls and a[1] in Rs]
    rng.shuffle(cand)
    match = _flow.bipartite_perfect_matching(L, R, cand)
    return None if match is None else set(match.items())


def extend_to_one_factors(sys: CyclicSystem, sequences: Sequence[Iterable[Arc]], seed: int = 0,
                          config: ToleranceConfig = DEFAULT_CONFIG) -> list[Digraph]:
    """Complete each locally balanced path sequence to a directed 1-factor on the system.

    Pair by pair, sequences that start an arc in V_i get their own perfect
    matching in G[V_i - tails, V_{i+1} - heads]; the untouched ones share a
    regular subgraph of the leftover pair, split into perfect matchings.
    """
    clusters, k = sys.clusters, sys.k
    if sys.winds(sys.G.arcs) is not None:
        raise ContractError("the system digraph does not wind around its cluster cycle")
    seqs = [frozenset(PS) for PS in sequences]
    for s, PS in enumerate(seqs):
        if not is_path_sequence(PS) or not is_locally_balanced(PS, clusters):
            raise ContractError(f"sequence #{s} is not a locally balanced path sequence")
    tails = [{u for u, _ in PS} for PS in seqs]
    heads = [{v for _, v in PS} for PS in seqs]
    chosen = [set(PS) for PS in seqs]
    rng = random.Random(seed)
    for i in range(k):
        X, Y = clusters[i], clusters[(i + 1) % k]
        avail = sys.pair_arcs(i)
        touched = [s for s in range(len(seqs)) if tails[s] & X]
        untouched = [s for s in range(len(seqs)) if not tails[s] & X]
        for s in touched:
            match = _random_perfect_matching(sorted(X - tails[s]), sorted(Y - heads[s]), avail, rng)
            if match is None:
                raise InfeasibleError(f"Hall's condition fails between clusters {i} and {(i + 1) % k} "
                                      f"for sequence #{s}", stage="extend_to_one_factors", witness=(i, s))
            avail -= match
            for s2 in (s,):
                chosen[s2] |= match
        if untouched:
            t = len(untouched)
            left, right = sorted(X), sorted(Y)
            value, sub = _flow.capped_bipartite_subgraph(left, right, sorted(avail),
                                                         {x: t for x in left}, {y: t for y in right})
            if value < t * len(left):
                raise InfeasibleError(f"no {t}-regular subgraph between clusters {i} and {(i + 1) % k}",
                                      stage="extend_to_one_factors", witness=(i, t))
            pool = set(sub)
            for s in untouched:
                match = _random_perfect_matching(left, right, pool, rng)
                if match is None:
                    raise ConstructionError("regular pair without a perfect matching",
                                            stage="extend_to_one_factors")
                pool -= match
                avail -= match
                chosen[s] |= match
    out = []
    for s, arcs in enumerate(chosen):
        F = Digraph(sys.G.n, arcs)
        if any(F.out_degree(v) != 1 or F.in_degree(v) != 1 for v in sys.vertices):
            raise ConstructionError(f"1-factor #{s} is not 1-regular", stage="extend_to_one_factors")
        out.append(F)
    return out


# ---------------------------------------------------------------- merging

def _cycles_of(succ: Mapping[int, int]) -> list[list[int]]:
    seen: set[int] = set()
    out = []
    for v in sorted(succ):
        if v in seen:
            continue
        cyc = [v]
        seen.add(v)
        x = succ[v]
        while x != v:
            cyc.append(x)
            seen.add(x)
            x = succ[x]
        out.append(cyc)
    return out


def _reroute(succ: dict[int, int], V1: set[int], reserve: set[Arc], markers: Sequence[int],
             deadline: float, seed: int) -> dict[int, int] | None:
    """Replace the arcs leaving V1 by reserve arcs so that all touched cycles become one.

    Each segment of the 1-factor from a vertex w in V2 = succ(V1) up to the
    first vertex g(w) of V1 is contracted to w; reserve arcs g(w) -> w' give
    the auxiliary digraph, whose Hamilton cycle (through the markers' segments
    in order) prescribes the new arcs.
    """
    V2 = {succ[u] for u in V1}
    g: dict[int, int] = {}
    seg_of: dict[int, int] = {}
    for w in V2:
        x = w
        while x not in V1:
            x = succ[x]
        g[w] = x
        seg_of[x] = w
    if len(V2) == 1:
        (w,) = V2
        return {g[w]: w} if (g[w], w) in reserve or succ[g[w]] == w else None
    out = {w: [w2 for w2 in V2 if w2 != w and (g[w], w2) in reserve] for w in V2}
    order = [seg_of[x] for x in markers]
    cyc = directed_hamilton_cycle(sorted(V2), out, order, deadline=deadline, seed=seed)
    if cyc is None:
        return None
    return {g[cyc[t]]: cyc[(t + 1) % len(cyc)] for t in range(len(cyc))}


def merge_to_hamilton(F: Digraph | Iterable[Arc], sys: CyclicSystem, H: Digraph | Iterable[Arc],
                      M: OrderedMatching = OrderedMatching(), PS: Iterable[Arc] = (),
                      config: ToleranceConfig = DEFAULT_CONFIG, seed: int = 0) -> MergeResult:
    """Turn a 1-factor into one directed Hamilton cycle on the system's vertices.

    Cycles are merged at the first cluster pair V_i V_{i+1} whose free part
    V_i - tails(PS) meets at least two of them, by swapping the 1-factor's
    arcs there for reserve arcs from H.  If the final vertices of the paths
    through M are then out of order, the pair holding them is rerouted once
    more with those vertices as ordered markers.
    """
    arcs = set(F.arcs) if isinstance(F, Digraph) else {tuple(a) for a in F}
    reserve_all = set(H.arcs) if isinstance(H, Digraph) else {tuple(a) for a in H}
    V = sys.vertices
    sp = _succ_pred(arcs)
    if sp is None or set(sp[0]) != V or set(sp[1]) != V:
        raise DomainError("F is not a 1-regular digraph on the system's vertex set")
    succ = dict(sp[0])
    ps = set(PS) | set(M.arcs)
    if not ps <= arcs:
        raise ContractError("the path sequence is not contained in F")
    if sys.winds(arcs - ps) is not None:
        raise ContractError(f"F - PS does not wind around the cluster cycle at {sys.winds(arcs - ps)}")
    tails = {u for u, _ in ps}
    pos, k = sys.position, sys.k
    reserve = {a for a in reserve_all if sys.winds([a]) is None}
    by_pair: dict[int, set[Arc]] = {i: set() for i in range(k)}
    for a in reserve:
        by_pair[pos[a[0]]].add(a)
    markers = final_vertices(ps, M) if M.arcs else []
    used: set[Arc] = set()
    pairs: list[int] = []
    deadline = config.hamilton_deadline

    cycles = _cycles_of(succ)
    while len(cycles) > 1:
        where = {v: c for c, cyc in enumerate(cycles) for v in cyc}
        for i in range(k):
            V1 = set(sys.clusters[i]) - tails
            if len({where[u] for u in V1}) < 2:
                continue
            new = _reroute(succ, V1, by_pair[i] - used, (), deadline, seed + i)
            if new is None:
                continue
            for u, w in new.items():
                if succ[u] != w:
                    used.add((u, w))
                succ[u] = w
            pairs.append(i)
            break
        else:
            raise InfeasibleError(f"no cluster pair merges the remaining {len(cycles)} cycles",
                                  stage="merge_to_hamilton", witness=len(cycles))
        cycles = _cycles_of(succ)

    start = min(V)
    cycle = [start]
    while succ[cycle[-1]] != start:
        cycle.append(succ[cycle[-1]])
    if markers and not visits_in_order(cycle, markers):
        homes = {pos[x] for x in markers}
        if len(homes) != 1 or set(markers) & tails:
            raise ContractError("marker vertices must share one cluster and start no path-sequence arc")
        (i,) = homes
        V1 = set(sys.clusters[i]) - tails
        new = _reroute(succ, V1, (by_pair[i] - used) | {(u, succ[u]) for u in V1}, markers,
                       deadline, seed + k)
        if new is None:
            raise InfeasibleError("no reserve matching puts the markers in order",
                                  stage="merge_to_hamilton", witness=tuple(markers))
        for u, w in new.items():
            if succ[u] != w and (u, w) not in arcs:
                used.add((u, w))
            succ[u] = w
        pairs.append(i)
        cycle = [start]
        while succ[cycle[-1]] != start:
            cycle.append(succ[cycle[-1]])
    if len(cycle) != len(V):
        raise ConstructionError("merged cycle misses vertices", stage="merge_to_hamilton")
    result = MergeResult(tuple(cycle), frozenset(used), tuple(pairs))
    if not result.arcs <= arcs | reserve:
        raise ConstructionError("merged cycle uses arcs outside F and the reserve", stage="merge_to_hamilton")
    if markers and not visits_in_order(cycle, markers):
        raise ConstructionError("markers out of order after rerouting", stage="merge_to_hamilton")
    return result


# ---------------------------------------------------------------- end-to-end demo

@dataclass(frozen=True)
class DemoPiece:
    system: ExceptionalSystem
    graph: Graph
    cycle: tuple[int, ...] | None = None
    matchings: tuple[frozenset[Edge], frozenset[Edge]] | None = None


@dataclass
class DemoResult:
    pieces: list[DemoPiece] = field(default_factory=list)
    trace: list[dict] = field(default_factory=list)

    @property
    def subgraphs(self) -> list[Graph]:
        return [p.graph for p in self.pieces]

    def decomposition(self, G: Graph) -> Decomposition:
        cycles = [p.cycle for p in self.pieces if p.cycle is not None]
        matchings = [m for p in self.pieces if p.matchings is not None for m in p.matchings]
        return Decomposition(G, cycles, matchings, complete=False)


def _cycle_order(H: Graph) -> tuple[int, ...]:
    start = min(v for v in range(H.n) if H.degree(v))
    order = [start]
    prev, cur = None, start
    while True:
        nxt = min(w for w in H.adj[cur] if w != prev) if prev is None else \
            next(w for w in H.adj[cur] if w != prev)
        if nxt == start:
            return tuple(order)
        order.append(nxt)
        prev, cur = cur, nxt


def _route_bundle(bundle: SystemBundle, mode: str, config: ToleranceConfig, seed: int,
                  trace: list[dict]) -> list[tuple[int, ...]]:
    sysb = bundle.system
    last: Exception | None = None
    inner = max(1, config.retry_budget // 10)
    # greedy routing can strand later sequences, so a failure restarts the whole bundle
    for outer in range(10):
        try:
            _, BE = balanced_extension(bundle.matchings, sysb.clusters, bundle.reserve, mode,
                                       bundle.targets, seed + outer)
        except InfeasibleError as exc:
            last = exc
            continue
        # an on-demand reserve shares edges with the system; drop the ones the extension used
        used = {norm_edge(*a) for PS in BE.sequences for a in PS}
        remaining = {a for a in sysb.G.arcs if norm_edge(*a) not in used}
        notes = [{"stage": "balanced_extension", "system": f"{bundle.side}{bundle.index}",
                  "seed": seed + outer, "sequences": len(BE.sequences), "eps": round(BE.eps, 4)}]
        cycles = []
        try:
            for s, (PS, M) in enumerate(zip(BE.sequences, BE.matchings)):
                for attempt in range(inner):
                    rest = CyclicSystem(Digraph(sysb.G.n, remaining, oriented=True), sysb.clusters,
                                        sysb.mu, sysb.eps)
                    salt = seed + 7919 * (outer * inner + attempt) + s
                    try:
                        (F,) = extend_to_one_factors(rest, [PS], seed=salt, config=config)
                        spare = remaining - (set(F.arcs) - PS)
                        res = merge_to_hamilton(F, rest, spare, M, PS, config, seed=salt)
                    except InfeasibleError as exc:
                        last = exc
                        continue
                    break
                else:
                    raise last
                remaining -= res.arcs - PS
                notes.append({"stage": "merge_to_hamilton", "system": f"{bundle.side}{bundle.index}",
                              "sequence": s, "restart": outer, "attempts": attempt + 1, "pairs": list(res.pairs)})
                cycles.append(res.cycle)
        except InfeasibleError as exc:
            last = exc
            continue
        trace.extend(notes)
        return cycles
    raise InfeasibleError(f"system {bundle.side}{bundle.index} not routed: {last}", stage="merge_to_hamilton")


def approx_decompose_demo(G: Graph, S: SchemePartition, systems: Sequence[ExceptionalSystem],
                          mode: str = "two_cliques", config: ToleranceConfig = DEFAULT_CONFIG,
                          seed: int = 0) -> DemoResult:
    """Edge-disjoint spanning subgraphs H_s of G, one per exceptional system J_s, with J_s in H_s.

    A Hamilton system (HES or balanced) yields a Hamilton cycle, a matching
    system yields two perfect matchings.  Every output is verified.
    """
    result = DemoResult()
    if not systems:
        return result
    P = S.bipartition()
    for t, J in enumerate(systems):
        if J.partition != P:
            raise ContractError(f"exceptional system #{t} uses a different partition")
        if not J.edges <= G.edges:
            raise ContractError(f"exceptional system #{t} is not a subgraph of G")
        if mode == "two_cliques":
            rep = validate_es(J, S)
            if not rep.ok:
                raise ContractError(f"exceptional system #{t} violates {rep.violations}")
            if rep.kind == "MES" and (len(P.A_prime) % 2 or len(P.B_prime) % 2):
                raise ContractError("matching systems need |A'| and |B'| even")
        elif mode == "bipartite":
            if J.locality is None or len(J.locality) != 4:
                raise ContractError(f"balanced system #{t} needs an (i1, i2, i3, i4) locality")
            bad = validate_bes(J, S, tuple(J.locality))
            if bad:
                raise ContractError(f"balanced system #{t} violates {list(bad)}")
        else:
            raise DomainError("mode must be 'two_cliques' or 'bipartite'")
    for a, J1 in enumerate(systems):
        for J2 in systems[a + 1:]:
            if J1.edges & J2.edges:
                raise ContractError("exceptional systems must be edge-disjoint")

    bundles = build_cyclic_systems(G, S, mode, systems, config, seed)
    result.trace.append({"stage": "build_cyclic_systems", "seed": seed, "systems": len(bundles),
                         "deviation": config.system_eps})
    routed: dict[tuple[int, str], tuple[int, ...]] = {}
    for b_idx, bundle in enumerate(bundles):
        cycles = _route_bundle(bundle, mode, config, seed + 1000 * b_idx, result.trace)
        for t, cyc in zip(bundle.assigned, cycles):
            routed[t, bundle.side] = cyc

    for t, J in enumerate(systems):
        if mode == "two_cliques":
            C_A, C_B = routed[t, "A"], routed[t, "B"]
            F = fictive(J)
            if not is_consistent(C_A, F, "A") or not is_consistent(C_B, F, "B"):
                raise ConstructionError(f"routed cycles inconsistent with system #{t}", stage="splice")
            H = splice(C_A, C_B, J)
            kind = validate_es(J).kind
        else:
            H = splice_bipartite(routed[t, "AB"], J, G)
            kind = "HES"
        if kind == "HES":
            piece = DemoPiece(J, H, cycle=_cycle_order(H))
        else:
            piece = DemoPiece(J, H, matchings=split_two_cycles(H))
        result.pieces.append(piece)
        result.trace.append({"stage": "splice", "system": t, "kind": kind})

    cert = verify_decomposition(G, result.decomposition(G))
    if not cert.ok:
        raise ConstructionError(f"demo output fails verification: {cert}", stage="verify")
    for p in result.pieces:
        if not p.system.edges <= p.graph.edges:
            raise ConstructionError("an output misses its exceptional system", stage="verify")
    result.trace.append({"stage": "verify", "certificate": str(cert)})
    return result


# ---------------------------------------------------------------- shipped instances

def demo_instance(mode: str) -> tuple[Graph, SchemePartition, list[ExceptionalSystem]]:
    """Small instances on which the demo pipeline runs end to end.

    "two_cliques": n = 20, K = 3, two cliques on 0..9 and 10..19 plus four
    cross edges at the exceptional vertices 9 and 19, with two localized
    Hamilton exceptional systems.
    "bipartite": n = 20, K = 2, K_{10,10} with one balanced exceptional system.
    """
    if mode == "two_cliques":
        A = [frozenset(range(3 * i, 3 * i + 3)) for i in range(3)]
        B = [frozenset(range(10 + 3 * i, 13 + 3 * i)) for i in range(3)]
        S = SchemePartition(tuple(A), tuple(B), frozenset({9}), frozenset({19}), 0.2)
        edges = [(u, v) for u in range(10) for v in range(u + 1, 10)]
        edges += [(u, v) for u in range(10, 20) for v in range(u + 1, 20)]
        edges += [(9, 10), (9, 13), (1, 19), (4, 19)]
        G = Graph(20, edges)
        P = S.bipartition()
        J1 = ExceptionalSystem.from_edges(P, [(0, 9), (9, 10), (1, 19), (19, 11)], 0.2, (0, 0))
        J2 = ExceptionalSystem.from_edges(P, [(3, 9), (9, 13), (4, 19), (19, 14)], 0.2, (1, 1))
        return G, S, [J1, J2]
    if mode == "bipartite":
        A = [frozenset(range(0, 4)), frozenset(range(4, 8))]
        B = [frozenset(range(10, 14)), frozenset(range(14, 18))]
        S = SchemePartition(tuple(A), tuple(B), frozenset({8, 9}), frozenset({18, 19}), 0.3)
        G = Graph(20, [(u, v) for u in range(10) for v in range(10, 20)])
        P = S.bipartition()
        J = ExceptionalSystem.from_edges(
            P, [(10, 8), (8, 18), (18, 4), (14, 9), (9, 19), (19, 5)], 0.3, (0, 1, 0, 1))
        return G, S, [J]
    raise DomainError("mode must be 'two_cliques' or 'bipartite'")

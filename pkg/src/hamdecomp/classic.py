"""Classical decompositions and the flow-based regular subgraph extractor."""

from __future__ import annotations

import time
from fractions import Fraction
from typing import Iterable, Sequence

import networkx as nx

from . import _flow
from ._search import dirac_cycle
from .errors import ConstructionError, ContractError, DomainError, InfeasibleError, ResourceError
from .graph import Decomposition, Edge, Graph, cycle_edges, norm_edge

Matching = frozenset


# ---------------------------------------------------------------- Hamilton decompositions

def walecki(n: int) -> Decomposition:
    """Zig-zag Hamilton decomposition of K_n for odd n, hub vertex n-1."""
    if n < 3 or n % 2 == 0:
        raise DomainError(f"walecki needs odd n >= 3, got {n}")
    ring = n - 1
    hub = n - 1
    cycles = []
    for i in range(ring // 2):
        path = [i]
        for step in range(1, ring // 2 + 1):
            path.append((i + step) % ring)
            if len(path) < ring:
                path.append((i - step) % ring)
        cycles.append([hub] + path)
    return Decomposition(_complete(n), cycles, [], complete=True)


def _complete(n: int) -> Graph:
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def bipartite_ham_decompose(K: int) -> Decomposition:
    """K/2 Hamilton cycles of K_{K,K} (classes 0..K-1 and K..2K-1).

    Cycle j uses the "difference" matchings a_i b_{i+2j} and a_i b_{i+2j+1};
    two differences that differ by one generate a single cycle.
    """
    if K < 2 or K % 2:
        raise DomainError(f"bipartite_ham_decompose needs even K >= 2, got {K}")
    host = Graph(2 * K, [(a, K + b) for a in range(K) for b in range(K)])
    cycles = []
    for j in range(K // 2):
        d0, d1 = 2 * j, 2 * j + 1
        seq, a = [], 0
        for _ in range(K):
            seq += [a, K + (a + d0) % K]
            a = (a + d0 - d1) % K
        cycles.append(seq)
    return Decomposition(host, cycles, [], complete=True)


# ---------------------------------------------------------------- 2-factors

def petersen_two_factor(G: Graph) -> Graph:
    """A 2-factor of a regular graph of positive even degree.

    Each component is oriented along an Euler circuit from its smallest
    vertex; a perfect matching of the out/in double cover picks one arc out
    of and one arc into every vertex.
    """
    d = G.regular_degree()
    if d is None or d == 0 or d % 2:
        raise DomainError("petersen_two_factor needs a regular graph of positive even degree")
    g = G.to_networkx()
    arcs = []
    for comp in G.components():
        arcs += list(nx.eulerian_circuit(g.subgraph(comp), source=comp[0]))
    match = _flow.bipartite_perfect_matching(list(range(G.n)), list(range(G.n)), arcs)
    if match is None:
        raise ConstructionError("double cover has no perfect matching", stage="petersen")
    return Graph(G.n, [(u, w) for u, w in match.items()])


def two_factorization(G: Graph) -> list[Graph]:
    """Split a 2r-regular graph into r edge-disjoint 2-factors."""
    out, rest = [], G
    while rest.m:
        f = petersen_two_factor(rest)
        out.append(f)
        rest = rest.without_edges(f.edges)
    return out


# ---------------------------------------------------------------- edge colouring

class _Colouring:
    """Proper partial edge colouring with per-vertex colour maps."""

    def __init__(self, n: int):
        self.at: list[dict[int, int]] = [dict() for _ in range(n)]
        self.colour: dict[Edge, int] = {}

    def free(self, v: int, c: int) -> bool:
        return c not in self.at[v]

    def set(self, u: int, v: int, c: int) -> None:
        self.colour[norm_edge(u, v)] = c
        self.at[u][c] = v
        self.at[v][c] = u

    def clear(self, u: int, v: int) -> int:
        c = self.colour.pop(norm_edge(u, v))
        del self.at[u][c]
        del self.at[v][c]
        return c

    def get(self, u: int, v: int) -> int | None:
        return self.colour.get(norm_edge(u, v))

    def swap_path(self, start: int, c: int, d: int) -> list[int]:
        """Swap colours c and d along the maximal c/d path leaving ``start`` by colour c."""
        path = [start]
        cur, want = start, c
        edges = []
        while want in self.at[cur]:
            nxt = self.at[cur][want]
            edges.append((cur, nxt, want))
            path.append(nxt)
            cur, want = nxt, (d if want == c else c)
            if cur == start:
                break
        for u, v, _ in edges:
            self.clear(u, v)
        for u, v, col in edges:
            self.set(u, v, d if col == c else c)
        return path


def _misra_gries(G: Graph) -> _Colouring:
    """Proper edge colouring with colours 0..Δ, lowest-index choices throughout."""
    palette = range(G.max_degree() + 1)
    col = _Colouring(G.n)
    for u, v in G.sorted_edges():
        fan = [v]
        in_fan = {v}
        grown = True
        while grown:
            grown = False
            for w in G.adj[u]:
                c = col.get(u, w)
                if w in in_fan or c is None:
                    continue
                if col.free(fan[-1], c):
                    fan.append(w)
                    in_fan.add(w)
                    grown = True
                    break
        c = next(x for x in palette if col.free(u, x))
        d = next(x for x in palette if col.free(fan[-1], x))
        if not col.free(u, d):
            col.swap_path(u, d, c)
        # longest prefix that is still a fan, stopping at the first vertex with d free
        idx = None
        for i, w in enumerate(fan):
            if i > 0:
                cw = col.get(u, w)
                if cw is None or not col.free(fan[i - 1], cw):
                    break
            if col.free(w, d):
                idx = i
                break
        if idx is None:
            raise ConstructionError(f"no rotatable fan at edge {u}-{v}", stage="edge-colouring")
        shifted = [col.get(u, fan[i + 1]) for i in range(idx)]
        for i in range(1, idx + 1):
            col.clear(u, fan[i])
        for i in range(idx):
            col.set(u, fan[i], shifted[i])
        col.set(u, fan[idx], d)
    return col


def _drop_colour(G: Graph, col: _Colouring, k: int) -> bool:
    """Try to move every edge of colours >= k into colours < k with Kempe swaps."""
    for e in sorted(e for e, c in col.colour.items() if c >= k):
        u, v = e
        col.clear(u, v)
        placed = False
        for a in range(k):
            if col.free(u, a) and col.free(v, a):
                col.set(u, v, a)
                placed = True
                break
        if not placed:
            for a in (x for x in range(k) if col.free(u, x)):
                for b in (x for x in range(k) if col.free(v, x)):
                    path = col.swap_path(v, a, b)
                    if path[-1] != u and col.free(u, a) and col.free(v, a):
                        col.set(u, v, a)
                        placed = True
                        break
                    col.swap_path(v, b, a)
                if placed:
                    break
        if not placed:
            return False
    return True


def _exact_colouring(G: Graph, k: int, deadline: float = 10.0) -> _Colouring | None:
    """Backtracking k-edge-colouring, most constrained edge first."""
    stop = time.monotonic() + deadline
    col = _Colouring(G.n)
    edges = G.sorted_edges()
    steps = [0]

    def pick() -> Edge | None:
        best, key = None, None
        for e in edges:
            if e in col.colour:
                continue
            used = len(set(col.at[e[0]]) | set(col.at[e[1]]))
            kk = (-used, e)
            if key is None or kk < key:
                best, key = e, kk
        return best

    def rec() -> bool:
        steps[0] += 1
        if steps[0] % 1024 == 0 and time.monotonic() > stop:
            raise ResourceError(f"exact {k}-edge-colouring exceeded {deadline}s")
        e = pick()
        if e is None:
            return True
        u, v = e
        top = max(col.colour.values(), default=-1)
        for c in range(min(k, top + 2)):  # colours are interchangeable beyond the used ones
            if col.free(u, c) and col.free(v, c):
                col.set(u, v, c)
                if rec():
                    return True
                col.clear(u, v)
        return False

    return col if rec() else None


def _classes(col: _Colouring, m: int) -> list[set[Edge]]:
    parts: list[set[Edge]] = [set() for _ in range(m)]
    for e, c in col.colour.items():
        parts[c].add(e)
    return parts


def _rebalance(parts: list[set[Edge]]) -> None:
    """Equalize class sizes to within one by swapping colours on alternating paths."""
    while True:
        big = max(range(len(parts)), key=lambda i: (len(parts[i]), -i))
        small = min(range(len(parts)), key=lambda i: (len(parts[i]), i))
        if len(parts[big]) - len(parts[small]) <= 1:
            return
        sub = nx.Graph()
        sub.add_edges_from(parts[big] | parts[small])
        for comp in sorted(nx.connected_components(sub), key=min):
            es = {norm_edge(*e) for e in sub.subgraph(comp).edges()}
            nb = len(es & parts[big])
            if nb > len(es) - nb:
                moved_big = es & parts[big]
                moved_small = es & parts[small]
                parts[big] -= moved_big
                parts[small] -= moved_small
                parts[big] |= moved_small
                parts[small] |= moved_big
                break
        else:
            raise ConstructionError("no alternating path with surplus found", stage="rebalance")


def matching_decomposition(G: Graph, m: int) -> list[Matching]:
    """m edge-disjoint matchings partitioning E(G) with sizes pairwise within one."""
    if m < 0:
        raise DomainError("number of matchings must be non-negative")
    delta = G.max_degree()
    if G.m == 0:
        return [frozenset() for _ in range(m)]
    if m < delta:
        raise InfeasibleError(f"m={m} below maximum degree {delta}", stage="matching_decomposition")
    col = _misra_gries(G)
    if m == delta and not _drop_colour(G, col, m):
        col = _exact_colouring(G, m)
        if col is None:
            raise InfeasibleError(f"chromatic index exceeds m={m}", stage="matching_decomposition")
    parts = _classes(col, max(m, delta + 1))
    if len(parts) > m:
        assert all(not p for p in parts[m:])
        parts = parts[:m]
    _rebalance(parts)
    return [frozenset(p) for p in parts]


def even_matchings(H: Graph, t: int) -> list[Matching]:
    """t non-empty even matchings partitioning E(H), each of size at most 3e(H)/t.

    Starts from a balanced decomposition into max(Δ, floor(2t/3), 1) matchings,
    then repairs odd matchings pairwise: M - e, M' - e' and {e, e'} for
    disjoint e in M, e' in M'.
    """
    e = H.m
    if t < 1:
        raise DomainError("t must be positive")
    if e % 2 or e < 2 * t:
        raise InfeasibleError(f"need e(H) even and >= 2t, got e={e}, t={t}", stage="even_matchings")
    k = max(H.max_degree(), (2 * t) // 3, 1)
    mats = [set(m) for m in matching_decomposition(H, k)]
    even = [m for m in mats if m and len(m) % 2 == 0]
    odd = [m for m in mats if len(m) % 2]
    while odd:
        first = odd.pop(0)
        for j, other in enumerate(odd):
            pair = next(((x, y) for x in sorted(first) for y in sorted(other) if not set(x) & set(y)), None)
            if pair is not None:
                break
        else:
            raise InfeasibleError("odd matchings cannot be paired by disjoint edges", stage="even_matchings")
        odd.pop(j)
        x, y = pair
        for rest in (first - {x}, other - {y}, {x, y}):
            if rest:
                even.append(rest)
    even.sort(key=lambda m: (-len(m), sorted(m)))
    while len(even) < t:
        big = even.pop(0)
        if len(big) < 4:
            raise InfeasibleError("cannot split further into even parts", stage="even_matchings")
        head = set(sorted(big)[:2])
        even += [head, big - head]
        even.sort(key=lambda m: (-len(m), sorted(m)))
    if len(even) > t:
        raise InfeasibleError(f"repair produced {len(even)} > t={t} parts", stage="even_matchings")
    limit = Fraction(3 * e, t)
    if any(len(m) > limit for m in even):
        raise InfeasibleError("a part exceeds 3e(H)/t edges", stage="even_matchings")
    return [frozenset(m) for m in even]


# ---------------------------------------------------------------- flow extraction

def _fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x))


def regular_bipartite_subgraph(
    G: Graph, A: Sequence[int], B: Sequence[int], mu, rho
) -> Graph:
    """Spanning (1-mu-rho)m-regular subgraph of a bipartite graph with classes A, B of size m.

    Source -> A with capacity r, unit capacities on edges, B -> sink with
    capacity r; an integral flow of value r*m selects the subgraph.
    """
    m = len(A)
    if len(B) != m or set(A) & set(B) or set(A) | set(B) != set(range(G.n)):
        raise DomainError("classes must partition the vertex set into two sets of equal size")
    side = set(A)
    if any((u in side) == (v in side) for u, v in G.edges):
        raise DomainError("graph is not bipartite with respect to the given classes")
    target = (1 - _fraction(mu) - _fraction(rho)) * m
    if target.denominator != 1 or target < 0:
        raise DomainError(f"(1-mu-rho)m = {target} is not a non-negative integer")
    r = int(target)
    pairs = [(u, v) if u in side else (v, u) for u, v in G.edges]
    value, chosen = _flow.capped_bipartite_subgraph(
        A, B, pairs, {a: r for a in A}, {b: r for b in B})
    if value < r * m:
        raise InfeasibleError(f"flow value {value} < {r * m}: degree hypotheses violated", stage="regular_bipartite_subgraph")
    return Graph(G.n, chosen)


# ---------------------------------------------------------------- Hamilton cycles and matchings

def dirac_hamilton(G: Graph, seed: int = 0) -> list[int]:
    if G.n < 3 or 2 * G.min_degree() < G.n:
        raise ContractError(f"dirac_hamilton needs n >= 3 and minimum degree >= n/2 "
                            f"(n={G.n}, min degree {G.min_degree()})")
    cycle = dirac_cycle(G, seed)
    if sorted(cycle) != list(range(G.n)) or any(e not in G.edges for e in cycle_edges(cycle)):
        raise ConstructionError("rotation-extension produced an invalid cycle", stage="dirac_hamilton")
    return cycle


def regular_perfect_matching(G: Graph) -> frozenset[Edge]:
    D = G.regular_degree()
    if G.n % 2 or D is None or D < 2 * -(-G.n // 4) - 1:
        raise ContractError("regular_perfect_matching needs even n and a D-regular graph "
                            "with D >= 2*ceil(n/4) - 1")
    pm = _flow.perfect_matching(G)
    if pm is None:
        raise ConstructionError("no perfect matching found", stage="regular_perfect_matching")
    return frozenset(pm)


# ---------------------------------------------------------------- reg_even

def regular_factor(G: Graph, r: int) -> set[Edge] | None:
    """Edges of a spanning r-regular subgraph, or None when none exists."""
    return _flow.f_factor(G, [r] * G.n)


def reg_even_witness(G: Graph) -> tuple[int, set[Edge]]:
    """Largest even r with a spanning r-regular subgraph, plus that subgraph.

    Even-regular factors nest, so binary search over even r below the
    maximum degree is exact.
    """
    lo, hi = 0, G.max_degree() // 2  # in units of 2
    witness: set[Edge] = set()
    while lo < hi:
        mid = (lo + hi + 1) // 2
        f = regular_factor(G, 2 * mid)
        if f is None:
            hi = mid - 1
        else:
            lo, witness = mid, f
    if lo and not witness:
        witness = regular_factor(G, 2 * lo) or set()
    return 2 * lo, witness


def reg_even(G: Graph) -> int:
    return reg_even_witness(G)[0]


# ---------------------------------------------------------------- split trick

def split_into_path_systems(G: Graph, A0: Iterable[int], D: int) -> list[frozenset[Edge]]:
    """D/2 edge-disjoint path systems covering E(G), sizes within one, internal vertices in A0."""
    A0 = set(A0)
    if D % 2 or D < 2:
        raise DomainError(f"D must be a positive even integer, got {D}")
    half = D // 2 - 1
    if G.max_degree() > D - 2:
        raise DomainError(f"maximum degree {G.max_degree()} exceeds D-2={D - 2}")
    for x in range(G.n):
        if x not in A0 and G.degree(x) > half:
            raise DomainError(f"vertex {x} outside A0 has degree {G.degree(x)} > D/2-1={half}")
    inner = G.induced_edges(A0)
    if any(sum(1 for e in inner if x in e) > half for x in A0):
        raise DomainError(f"G[A0] has a vertex of degree above D/2-1={half}")
    # maximal G1 with G[A0] ⊆ G1 and Δ(G1) ≤ D/2-1; A0-A edges left over form G2
    g1 = {e for e in G.edges if (e[0] in A0) == (e[1] in A0)}
    load = [0] * G.n
    for u, v in g1:
        load[u] += 1
        load[v] += 1
    g2 = []
    for u, v in G.sorted_edges():
        if (u in A0) == (v in A0):
            continue
        if load[u] < half and load[v] < half:
            g1.add((u, v))
            load[u] += 1
            load[v] += 1
        else:
            g2.append((u, v))
    copy = {a: G.n + i for i, a in enumerate(sorted(A0))}
    back = {c: a for a, c in copy.items()}
    aux_edges = list(g1)
    for u, v in g2:
        a, x = (u, v) if u in A0 else (v, u)
        aux_edges.append((copy[a], x))
    aux = Graph(G.n + len(copy), aux_edges)
    parts = matching_decomposition(aux, D // 2)
    return [frozenset(norm_edge(back.get(u, u), back.get(v, v)) for u, v in p) for p in parts]

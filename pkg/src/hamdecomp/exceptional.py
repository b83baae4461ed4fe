"""Exceptional systems and their fictive-edge replacements.

An exceptional system is a path system covering the exceptional vertices
V0 = A0 + B0. Each nontrivial path is replaced by a fictive edge between its
endpoints, and cycles through the fictive edges on A and B can be spliced back
into global Hamilton cycles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, TextIO

from . import _flow
from ._search import hamilton_cycle_with
from .classic import matching_decomposition
from .config import DEFAULT_CONFIG, ToleranceConfig
from .errors import ContractError, DomainError, InfeasibleError, ParseError
from .graph import BiPartition, Edge, Graph, cycle_edges, edges_between, is_D_balanced, norm_edge
from .structure import Framework, SchemePartition


# ---------------------------------------------------------------- path systems

def paths_from_edges(edges: Iterable[Sequence[int]]) -> list[tuple[int, ...]]:
    """Split a path system into its nontrivial paths, each oriented from its smaller endpoint."""
    es = {norm_edge(*e) for e in edges}
    adj: dict[int, list[int]] = {}
    for u, v in es:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    if any(len(nb) > 2 for nb in adj.values()):
        bad = min(v for v, nb in adj.items() if len(nb) > 2)
        raise DomainError(f"vertex {bad} has degree above 2, not a path system")
    seen: set[int] = set()
    paths = []
    for start in sorted(adj):
        if start in seen or len(adj[start]) != 1:
            continue
        path = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [w for w in adj[cur] if w != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            path.append(cur)
            seen.add(cur)
        paths.append(tuple(path))
    if seen != set(adj):
        raise DomainError("edge set contains a cycle, not a path system")
    return sorted(paths)


def path_edges(path: Sequence[int]) -> list[Edge]:
    return [norm_edge(path[i], path[i + 1]) for i in range(len(path) - 1)]


@dataclass(frozen=True)
class PathSystem:
    paths: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, edges: Iterable[Sequence[int]]) -> PathSystem:
        return cls(tuple(paths_from_edges(edges)))

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset(e for p in self.paths for e in path_edges(p))

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)


def two_balanced_by_edges(Q: Iterable[Sequence[int]], P: BiPartition) -> bool:
    """Balance equation e_Q(A') - e_Q(B') = |A0| - |B0| together with degree 2 at every V0 vertex."""
    es = {norm_edge(*e) for e in Q}
    inside_a = sum(1 for u, v in es if u in P.A_prime and v in P.A_prime)
    inside_b = sum(1 for u, v in es if u in P.B_prime and v in P.B_prime)
    if inside_a - inside_b != P.a - P.b:
        return False
    return all(sum(1 for e in es if v in e) == 2 for v in P.V0)


def two_balanced_by_endpoints(Q: Iterable[Sequence[int]], P: BiPartition) -> bool:
    """Endpoint count: as many A-endpoints of nontrivial paths as B-endpoints (requires an A0B0-path system)."""
    paths = paths_from_edges(Q)
    ends = [v for p in paths for v in (p[0], p[-1])]
    return sum(1 for v in ends if v in P.A) == sum(1 for v in ends if v in P.B)


def is_A0B0_path_system(Q: Iterable[Sequence[int]], P: BiPartition) -> bool:
    try:
        paths = paths_from_edges(Q)
    except DomainError:
        return False
    internal = {v for p in paths for v in p[1:-1]}
    ends = {v for p in paths for v in (p[0], p[-1])}
    return P.V0 <= internal and not (internal & (P.A | P.B)) and ends <= (P.A | P.B)


# ---------------------------------------------------------------- exceptional systems

@dataclass(frozen=True)
class ExceptionalSystem:
    partition: BiPartition
    paths: tuple[tuple[int, ...], ...]
    eps0: float = 0.2
    kind: str | None = None  # "HES" or "MES"; filled in by validation
    locality: tuple[int, ...] | None = None

    @classmethod
    def from_edges(cls, P: BiPartition, edges: Iterable[Sequence[int]], eps0: float = 0.2,
                   locality: tuple[int, ...] | None = None) -> ExceptionalSystem:
        J = cls(P, tuple(paths_from_edges(edges)), eps0, None, None)
        rep = validate_es(J)
        return cls(P, J.paths, eps0, rep.kind, locality)

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset(e for p in self.paths for e in path_edges(p))

    @property
    def n(self) -> int:
        return len(self.partition.A_prime | self.partition.B_prime)

    def ab_paths(self) -> list[tuple[int, ...]]:
        A, B = self.partition.A, self.partition.B
        return [p for p in self.paths if (p[0] in A and p[-1] in B) or (p[0] in B and p[-1] in A)]


@dataclass(frozen=True)
class ESReport:
    kind: str | None
    violations: tuple[str, ...]
    ab_paths: int

    @property
    def ok(self) -> bool:
        return not self.violations and self.kind is not None


def _cover_violations(paths: Sequence[Sequence[int]], P: BiPartition) -> list[str]:
    bad = []
    deg: dict[int, int] = {}
    for p in paths:
        for v in p:
            deg[v] = deg.get(v, 0) + (2 if v not in (p[0], p[-1]) else 1)
    allv = P.A_prime | P.B_prime
    if any(v not in allv for v in deg):
        bad.append("EC1")
    if any(deg.get(v, 0) != 2 for v in P.V0) or any(d > 1 for v, d in deg.items() if v not in P.V0):
        bad.append("EC2")
    for p in paths:
        for u, v in path_edges(p):
            if (u in P.A and v in P.A) or (u in P.B and v in P.B):
                bad.append("EC3")
                break
        else:
            continue
        break
    return bad


def validate_es(J: ExceptionalSystem, scheme: SchemePartition | None = None) -> ESReport:
    """Report every violated rule and the kind (HES takes precedence when both apply)."""
    P = J.partition
    bad: list[str] = []
    try:
        paths = paths_from_edges(J.edges)
    except DomainError:
        return ESReport(None, ("EC1",), 0)
    bad += _cover_violations(paths, P)
    n = J.n
    ab = len(J.ab_paths())
    cross = sum(1 for u, v in J.edges if (u in P.A_prime) != (v in P.A_prime))
    kind = None
    if ab > 0 and ab % 2 == 0:
        kind = "HES"
    elif cross == 0:
        kind = "MES"
    else:
        bad.append("ES2")
    if ab > math.sqrt(J.eps0) * n:
        bad.append("ES3")
    # locality is only checkable against a scheme
    if J.locality is not None and scheme is not None:
        i, j = J.locality[:2]
        allowed = P.V0 | scheme.A_clusters[i] | scheme.B_clusters[j]
        if any(v not in allowed for p in paths for v in p):
            bad.append("local")
    return ESReport(kind, tuple(dict.fromkeys(bad)), ab)


def validate_bes(J: ExceptionalSystem, scheme: SchemePartition, indices: tuple[int, int, int, int]) -> tuple[str, ...]:
    """Violated balanced-system rules (BES1)-(BES4) for an (i1, i2, i3, i4)-localized system."""
    i1, i2, i3, i4 = indices
    P = scheme.bipartition()
    A1, A2 = scheme.A_clusters[i1], scheme.A_clusters[i2]
    B3, B4 = scheme.B_clusters[i3], scheme.B_clusters[i4]
    allowed = P.V0 | A1 | A2 | B3 | B4
    bad = []
    try:
        paths = paths_from_edges(J.edges)
    except DomainError:
        return ("BES1",)
    internal = {v for p in paths for v in p[1:-1]}
    verts = {v for p in paths for v in p}
    deg = {v: sum(1 for e in J.edges if v in e) for v in verts}
    if not P.V0 <= internal or any(v not in allowed for v in verts) or \
            any(deg[v] > 1 for v in verts - P.V0):
        bad.append("BES1")
    for u, v in J.edges:
        if u in P.V0 or v in P.V0:
            continue
        if not ((u in A1 and v in A2) or (u in A2 and v in A1) or (u in B3 and v in B4) or (u in B4 and v in B3)):
            bad.append("BES2")
            break
    covered = {v for e in J.edges for v in e}
    if len(covered & P.A) != len(covered & P.B):
        bad.append("BES3")
    if len(J.edges) > J.eps0 * J.n:
        bad.append("BES4")
    return tuple(bad)


# ---------------------------------------------------------------- fictive edges

@dataclass(frozen=True)
class FictiveSystem:
    """J*_AB plus the ordered fictive matchings.

    Two-cliques mode fills ``J_A``/``J_B`` and the endpoint sequences ``xs``/``ys``.
    Bipartite mode fills ``J_star`` with edges (x_i, y_i) in traversal order.
    """

    J_AB: frozenset[Edge]
    xs: tuple[int, ...] = ()
    ys: tuple[int, ...] = ()
    J_A: tuple[Edge, ...] = ()
    J_B: tuple[Edge, ...] = ()
    bipartite: bool = False
    J_star: tuple[tuple[int, int], ...] = ()

    @property
    def ell(self) -> int:
        return len(self.xs) // 2

    def edges(self) -> list[Edge]:
        if self.bipartite:
            return [norm_edge(*e) for e in self.J_star]
        return list(self.J_A) + list(self.J_B)


def fictive(J: ExceptionalSystem) -> FictiveSystem:
    rep = validate_es(J)
    if not rep.ok:
        raise ContractError(f"not a valid exceptional system: {rep.violations or 'no kind'}")
    P = J.partition
    jab = frozenset(norm_edge(p[0], p[-1]) for p in J.paths)
    pairs = []
    for u, v in jab:
        if u in P.A and v in P.B:
            pairs.append((u, v))
        elif u in P.B and v in P.A:
            pairs.append((v, u))
    pairs.sort()
    xs = tuple(x for x, _ in pairs)
    ys = tuple(y for _, y in pairs)
    ell = len(pairs) // 2
    inside_a = sorted(e for e in jab if e[0] in P.A and e[1] in P.A)
    inside_b = sorted(e for e in jab if e[0] in P.B and e[1] in P.B)
    J_A = [norm_edge(xs[2 * i], xs[2 * i + 1]) for i in range(ell)] + inside_a
    # pairs y_{2i} y_{2i+1} with indices mod 2l; zero-based that is ys[2i+1], ys[(2i+2) mod 2l]
    J_B = [norm_edge(ys[2 * i + 1], ys[(2 * i + 2) % (2 * ell)]) for i in range(ell)] + inside_b
    return FictiveSystem(jab, xs, ys, tuple(J_A), tuple(J_B))


def fictive_bipartite(J: ExceptionalSystem) -> FictiveSystem:
    """J* = {x_i y_i}: paired A-edges and B-edges of J*_AB first, then its AB-edges."""
    P = J.partition
    try:
        paths = paths_from_edges(J.edges)
    except DomainError as exc:
        raise ContractError(str(exc)) from None
    jab = frozenset(norm_edge(p[0], p[-1]) for p in paths)
    in_a = sorted(e for e in jab if e[0] in P.A and e[1] in P.A)
    in_b = sorted(e for e in jab if e[0] in P.B and e[1] in P.B)
    if len(in_a) != len(in_b):
        raise ContractError("J covers different numbers of A and B vertices")
    star: list[tuple[int, int]] = []
    for (x1, x2), (y1, y2) in zip(in_a, in_b):
        star += [(x1, y1), (x2, y2)]
    cross = sorted((u, v) if u in P.A else (v, u) for u, v in jab if (u in P.A) != (v in P.A))
    star += cross
    return FictiveSystem(jab, bipartite=True, J_star=tuple(star))


# ---------------------------------------------------------------- consistency

@dataclass(frozen=True)
class Consistency:
    ok: bool
    missing: Edge | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _visits_in_order(cycle: Sequence[int], order: Sequence[int]) -> bool:
    if len(order) <= 2:
        return all(v in cycle for v in order)
    k = len(cycle)
    pos = {v: i for i, v in enumerate(cycle)}
    if any(v not in pos for v in order):
        return False
    p0 = pos[order[0]]
    fwd = [(pos[v] - p0) % k for v in order]
    bwd = [(p0 - pos[v]) % k for v in order]
    return all(a < b for a, b in zip(fwd, fwd[1:])) or all(a < b for a, b in zip(bwd, bwd[1:]))


def _contains(cycle: Sequence[int], edges: Iterable[Edge]) -> Edge | None:
    have = set(cycle_edges(cycle))
    for e in edges:
        if norm_edge(*e) not in have:
            return norm_edge(*e)
    return None


def is_consistent(C: Sequence[int], F: FictiveSystem, side: str) -> Consistency:
    """Whether a cycle contains the side's fictive edges and visits their endpoints in the prescribed order."""
    if F.bipartite:
        missing = _contains(C, F.edges())
        if missing is not None:
            return Consistency(False, missing, "fictive edge missing")
        order = [v for e in F.J_star for v in e]
        return Consistency(_visits_in_order(C, order), None, "" if _visits_in_order(C, order) else "order")
    if side == "A":
        edges, order = F.J_A, list(F.xs)
    elif side == "B":
        edges, order = F.J_B, list(F.ys[1:]) + list(F.ys[:1])
    else:
        raise DomainError("side must be 'A' or 'B'")
    missing = _contains(C, edges)
    if missing is not None:
        return Consistency(False, missing, "fictive edge missing")
    if not _visits_in_order(C, order):
        return Consistency(False, None, "order")
    return Consistency(True)


# ---------------------------------------------------------------- splicing

def _is_hamilton_cycle(G: Graph) -> bool:
    return G.m == G.n and all(G.degree(v) == 2 for v in range(G.n)) and G.is_connected()


def splice(C_A: Sequence[int], C_B: Sequence[int], J: ExceptionalSystem) -> Graph:
    """C_A + C_B - J* + J: a Hamilton cycle on V for HES, two cycles on A' and B' for MES."""
    F = fictive(J)
    P = J.partition
    if set(C_A) != set(P.A) or len(C_A) != len(P.A):
        raise ContractError("C_A must be a Hamilton cycle on A")
    if set(C_B) != set(P.B) or len(C_B) != len(P.B):
        raise ContractError("C_B must be a Hamilton cycle on B")
    for C, side in ((C_A, "A"), (C_B, "B")):
        c = is_consistent(C, F, side)
        if not c:
            raise ContractError(f"C_{side} is not consistent with J*_{side}: {c.reason} {c.missing or ''}".strip())
    edges = (set(cycle_edges(C_A)) | set(cycle_edges(C_B))) - set(F.edges())
    edges |= J.edges
    out = Graph(J.n, edges)
    if J.kind == "HES" or validate_es(J).kind == "HES":
        if not _is_hamilton_cycle(out):
            raise AssertionError("splice produced a non-Hamilton graph from consistent cycles")
    return out


def splice_bipartite(D: Sequence[int], J: ExceptionalSystem, G: Graph | None = None) -> Graph:
    """D - J* + J for a Hamilton cycle D on A + B consistent with the bipartite J*."""
    F = fictive_bipartite(J)
    P = J.partition
    if set(D) != set(P.A | P.B) or len(D) != len(P.A | P.B):
        raise ContractError("D must be a Hamilton cycle on A + B")
    c = is_consistent(D, F, "AB")
    if not c:
        raise ContractError(f"D is not consistent with J*: {c.reason} {c.missing or ''}".strip())
    edges = (set(cycle_edges(D)) - set(F.edges())) | J.edges
    out = Graph(J.n, edges)
    if not _is_hamilton_cycle(out):
        raise AssertionError("bipartite splice produced a non-Hamilton graph")
    return out


def split_two_cycles(H: Graph) -> tuple[frozenset[Edge], frozenset[Edge]]:
    """Two perfect matchings from a union of even cycles, alternating from each cycle's minimum vertex."""
    m1: set[Edge] = set()
    m2: set[Edge] = set()
    for comp in H.components():
        if len(comp) < 3:
            raise DomainError("component is not a cycle")
        start = min(comp)
        order = [start]
        prev, cur = None, start
        while True:
            nxt = min(w for w in H.adj[cur] if w != prev) if prev is None else \
                next(w for w in H.adj[cur] if w != prev)
            if nxt == start:
                break
            order.append(nxt)
            prev, cur = cur, nxt
        if len(order) % 2:
            raise DomainError(f"odd cycle through {start}")
        for i, e in enumerate(cycle_edges(order)):
            (m1 if i % 2 == 0 else m2).add(e)
    return frozenset(m1), frozenset(m2)


# ---------------------------------------------------------------- candidates

def candidate_violations(F: Iterable[Sequence[int]], P: BiPartition, eps0) -> tuple[str | None, list[str]]:
    """Kind ("HESC"/"MESC") and violated rules (ESC1)-(ESC4) of an exceptional system candidate."""
    es = {norm_edge(*e) for e in F}
    bad = []
    try:
        paths = paths_from_edges(es)
    except DomainError:
        return None, ["ESC1"]
    if any((u in P.A and v in P.A) or (u in P.B and v in P.B) for u, v in es):
        bad.append("ESC1")
    deg: dict[int, int] = {}
    for u, v in es:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    if any(deg.get(v, 0) > 2 for v in P.V0) or any(d != 1 for v, d in deg.items() if v not in P.V0):
        bad.append("ESC2")
    n = len(P.A_prime | P.B_prime)
    cross = sum(1 for u, v in es if (u in P.A_prime) != (v in P.A_prime))
    if cross > math.sqrt(float(eps0)) * n / 2:
        bad.append("ESC3")
    connections = sum(1 for p in paths if (p[0] in P.A_prime) != (p[-1] in P.A_prime))
    kind = "HESC" if connections > 0 and connections % 2 == 0 else ("MESC" if cross == 0 else None)
    if kind is None:
        bad.append("ESC4")
    return kind, bad


def extend_candidate(F: Iterable[Sequence[int]], G: Graph, P: BiPartition, eps0=0.2) -> ExceptionalSystem:
    """Top up each exceptional vertex to degree 2 with fresh A0A- and B0B-edges of G."""
    es = {norm_edge(*e) for e in F}
    kind, bad = candidate_violations(es, P, eps0)
    if bad:
        raise ContractError(f"not an exceptional system candidate: {bad}")
    used = {v for e in es for v in e}
    added: set[Edge] = set()
    for X0, X in ((P.A0, P.A), (P.B0, P.B)):
        need = {v: 2 - sum(1 for e in es if v in e) for v in sorted(X0)}
        need = {v: k for v, k in need.items() if k > 0}
        if not need:
            continue
        fresh = sorted(set(X) - used)
        pairs = [(v, u) for v in need for u in fresh if G.has_edge(v, u)]
        value, chosen = _flow.capped_bipartite_subgraph(
            list(need), fresh, pairs, need, {u: 1 for u in fresh})
        if value < sum(need.values()):
            short = [v for v in need if sum(1 for a, _ in chosen if a == v) < need[v]]
            raise InfeasibleError(f"exceptional vertices {short} lack fresh neighbours",
                                  stage="extend_candidate", witness=short)
        added |= {norm_edge(v, u) for v, u in chosen}
    J = ExceptionalSystem.from_edges(P, es | added, eps0)
    expect = "HES" if kind == "HESC" else "MES"
    if J.kind != expect:
        raise AssertionError(f"extension of a {kind} became {J.kind}")
    return J


# ---------------------------------------------------------------- covering A0B0 edges

@dataclass(frozen=True)
class CoverResult:
    cycles: tuple[tuple[int, ...], ...]
    path_systems: tuple[frozenset[Edge], ...]
    F_residual: Graph
    G_residual: Graph
    framework: Framework


def _top_up(P: BiPartition, G: Graph, Q: set[Edge], taken: set[Edge]) -> set[Edge]:
    """Join each A0 vertex to B and each B0 vertex to A until V0 degrees are 2, with distinct fresh endpoints."""
    used = {v for e in Q for v in e}
    out = set(Q)
    for X0, Y in ((P.A0, P.B), (P.B0, P.A)):
        need = {v: 2 - sum(1 for e in Q if v in e) for v in sorted(X0)}
        need = {v: k for v, k in need.items() if k > 0}
        if not need:
            continue
        fresh = sorted(set(Y) - used)
        pairs = [(v, u) for v in need for u in fresh
                 if G.has_edge(v, u) and norm_edge(v, u) not in taken]
        value, chosen = _flow.capped_bipartite_subgraph(list(need), fresh, pairs, need, {u: 1 for u in fresh})
        if value < sum(need.values()):
            raise InfeasibleError("not enough fresh edges to complete the path system",
                                  stage="cover_A0B0", witness=sorted(out))
        for v, u in chosen:
            out.add(norm_edge(v, u))
            used.add(u)
    return out


def cover_A0B0(F: Graph, G: Graph, W: Framework, config: ToleranceConfig = DEFAULT_CONFIG,
               seed: int = 0) -> CoverResult:
    """Edge-disjoint Hamilton cycles of F covering E(G[A0, B0]); the rest of each cycle uses AB-edges."""
    P = W.partition
    n = G.n
    if not G.edges <= F.edges:
        raise ContractError("G must be a subgraph of F")
    core = Graph(n, G.cross_edges(P.A0, P.B0))
    if core.m == 0:
        return CoverResult((), (), F, G, W)
    first = matching_decomposition(core, core.max_degree())
    diff = P.a - P.b
    big_side = P.A_prime if diff >= 0 else P.B_prime
    need = abs(diff)
    extras: list[frozenset[Edge]] = [frozenset()] * len(first)
    if need:
        inner = Graph(n, G.induced_edges(big_side))
        pool = [m for m in matching_decomposition(inner, inner.max_degree() + 1) if len(m) >= need]
        if len(pool) < len(first):
            raise InfeasibleError(f"only {len(pool)} internal matchings of size {need}", stage="cover_A0B0")
        extras = [frozenset(sorted(m)[:need]) for m in pool[: len(first)]]
    reserved = set().union(*first, *extras)
    cycles, systems = [], []
    F_cur, G_cur = F, G
    AB = set(G.cross_edges(P.A, P.B)) | set(F.cross_edges(P.A, P.B))
    for idx, (m1, m2) in enumerate(zip(first, extras)):
        base = set(m1) | set(m2)
        taken = (reserved - base) | {e for c in cycles for e in cycle_edges(c)}
        Q = _top_up(P, G_cur, base, taken)
        if not (is_A0B0_path_system(Q, P) and two_balanced_by_edges(Q, P)):
            raise AssertionError("path system is not 2-balanced")
        host = Graph(n, Q | {e for e in F_cur.cross_edges(P.A, P.B) if e in AB})
        cyc = hamilton_cycle_with(host, Q, deadline=config.hamilton_deadline, seed=seed + idx)
        if cyc is None:
            raise InfeasibleError("no Hamilton cycle extends the path system",
                                  stage="cover_A0B0", witness=sorted(Q))
        used = set(cycle_edges(cyc))
        cycles.append(tuple(cyc))
        systems.append(frozenset(Q))
        F_cur = F_cur.without_edges(used)
        G_cur = G_cur.without_edges(used & G_cur.edges)
    union = Graph(n, {e for c in cycles for e in cycle_edges(c)} & G.edges)
    if not is_D_balanced(union, P, 2 * len(cycles)):
        raise AssertionError("cover cycles are not balanced")
    return CoverResult(tuple(cycles), tuple(systems), F_cur, G_cur, W)


# ---------------------------------------------------------------- integer assignment

def assign_degrees(a: Sequence[int], c: Sequence[int], eta, lower: Fraction | None = None) -> list[list[int]]:
    """Entries in {0, 1, 2} with row sums a_i and column totals 4 (first eta*r columns) or 2.

    ``lower`` is the lower bound on a_i as a fraction of r (default 31/60).
    """
    q, r = len(a), len(c)
    eta = Fraction(str(eta)) if not isinstance(eta, Fraction) else eta
    lower = DEFAULT_CONFIG.matrix_lower if lower is None else Fraction(lower)
    if not 1 <= q <= 3:
        raise DomainError(f"need 1 <= q <= 3, got q={q}")
    if r < 1 or not 0 <= eta < 1 or (eta * r).denominator != 1:
        raise DomainError("need r >= 1, 0 <= eta < 1 and eta*r integral")
    if any(x not in (0, 1, 2) for x in c):
        raise DomainError("c_j must lie in {0, 1, 2}")
    if any(c[j] < c[j + 1] for j in range(r - 1)) or c[-1] < c[0] - 1:
        raise DomainError("(i) violated: c must be non-increasing with c_r >= c_1 - 1")
    if sum(a) + sum(c) != 2 * (1 + eta) * r:
        raise DomainError(f"(ii) violated: sum(a) + sum(c) = {sum(a) + sum(c)} != 2(1+eta)r = {2 * (1 + eta) * r}")
    for i, ai in enumerate(a):
        upper = Fraction(31 * r, 30) if i == 2 else r
        if not lower * r <= ai <= upper:
            raise DomainError(f"(iii) violated: a_{i + 1} = {ai} outside [{lower * r}, {upper}]")
    k = int(eta * r)
    cur = list(c)
    rows = []
    for i, ai in enumerate(a):
        row = [0] * r
        total = sum(cur)
        if total >= 2 * r:
            left = ai
            for j in range(r):
                row[j] = min(2, 4 - cur[j], left)
                left -= row[j]
        elif total >= 2 * r - ai:
            r_prime = max((j + 1 for j in range(r) if cur[j] == 2), default=0)
            for j in range(r_prime, r):
                row[j] = 1
            left = ai - (r - r_prime)
            for j in range(r_prime):
                row[j] = min(2, left)
                left -= row[j]
            if left:
                raise AssertionError("case 2 could not place all units")
        else:
            for _ in range(ai):
                low = min(cur[j] + row[j] for j in range(r))
                j = next(j for j in range(r) if cur[j] + row[j] == low)
                row[j] += 1
        for j in range(r):
            cur[j] += row[j]
        rows.append(row)
    _check_assignment(a, c, k, rows)
    return rows


def _check_assignment(a, c, k, rows) -> None:
    r = len(c)
    for i, row in enumerate(rows):
        assert sum(row) == a[i] and all(x in (0, 1, 2) for x in row), "row sum"
    for j in range(r):
        tot = c[j] + sum(row[j] for row in rows)
        assert tot == (4 if j < k else 2), f"column {j} total {tot}"
        assert sum(1 for row in rows if row[j] == 1) >= 2 - c[j], f"column {j} lacks unit entries"


def assignment_violations(a, c, eta, rows) -> list[str]:
    """Independent check of conclusions (a)-(c)."""
    r = len(c)
    k = int(Fraction(str(eta)) * r) if not isinstance(eta, Fraction) else int(eta * r)
    bad = []
    if len(rows) != len(a) or any(len(row) != r for row in rows) or \
            any(x not in (0, 1, 2) for row in rows for x in row):
        return ["shape"]
    if any(sum(row) != a[i] for i, row in enumerate(rows)):
        bad.append("a")
    if any(c[j] + sum(row[j] for row in rows) != (4 if j < k else 2) for j in range(r)):
        bad.append("b")
    if any(sum(1 for row in rows if row[j] == 1) < 2 - c[j] for j in range(r)):
        bad.append("c")
    return bad


# ---------------------------------------------------------------- text format

def format_es(J: ExceptionalSystem) -> str:
    kind = J.kind or validate_es(J).kind or "none"
    out = [f"ES kind={kind} eps0={J.eps0}"]
    out += ["P: " + " ".join(map(str, p)) for p in J.paths]
    return "\n".join(out) + "\n"


def parse_es(source: str | TextIO, P: BiPartition) -> ExceptionalSystem:
    text = source if isinstance(source, str) else source.read()
    lines = [(i, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines(), start=1)]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines or not lines[0][1].startswith("ES"):
        raise ParseError("expected header 'ES kind=... eps0=...'", lines[0][0] if lines else 1)
    fields = dict(tok.split("=", 1) for tok in lines[0][1].split()[1:] if "=" in tok)
    try:
        eps0 = float(fields.get("eps0", DEFAULT_CONFIG.eps0))
    except ValueError:
        raise ParseError("bad eps0", lines[0][0]) from None
    edges: list[Edge] = []
    for i, ln in lines[1:]:
        if not ln.startswith("P:"):
            raise ParseError("path lines must start with 'P:'", i)
        try:
            vs = [int(t) for t in ln[2:].split()]
        except ValueError:
            raise ParseError("path vertices must be integers", i) from None
        if len(vs) < 2:
            raise ParseError("a path needs at least two vertices", i)
        edges += path_edges(vs)
    J = ExceptionalSystem(P, tuple(paths_from_edges(edges)), eps0)
    claimed = fields.get("kind")
    actual = validate_es(J).kind
    if claimed not in (None, "none") and claimed != actual:
        raise ParseError(f"header claims kind={claimed} but the paths form {actual}", lines[0][0])
    return ExceptionalSystem(P, J.paths, eps0, actual)


def random_consistent_cycle(vertices: Iterable[int], F: FictiveSystem, side: str, seed: int = 0) -> list[int]:
    """A random Hamilton cycle on ``vertices`` that is consistent with the fictive edges of ``side``."""
    import random

    rng = random.Random(seed)
    if F.bipartite:
        ordered = [tuple(e) for e in F.J_star]
        loose_edges: list[Edge] = []
    elif side == "A":
        ordered = [(F.xs[2 * i], F.xs[2 * i + 1]) for i in range(F.ell)]
        loose_edges = [e for e in F.J_A if e not in {norm_edge(*p) for p in ordered}]
    else:
        ys = list(F.ys[1:]) + list(F.ys[:1])
        ordered = [(ys[2 * i], ys[2 * i + 1]) for i in range(F.ell)]
        loose_edges = [e for e in F.J_B if e not in {norm_edge(*p) for p in ordered}]
    in_blocks = {v for b in ordered for v in b} | {v for e in loose_edges for v in e}
    loose = [tuple(e) if rng.random() < 0.5 else tuple(reversed(e)) for e in loose_edges]
    loose += [(v,) for v in vertices if v not in in_blocks]
    rng.shuffle(loose)
    # interleave the free blocks between the ordered ones at random cut points
    slots = len(ordered) + 1
    cuts = sorted(rng.randint(0, len(loose)) for _ in range(slots - 1))
    bounds = [0] + cuts + [len(loose)]
    seq: list[int] = []
    for i in range(slots):
        for blk in loose[bounds[i]:bounds[i + 1]]:
            seq.extend(blk)
        if i < len(ordered):
            seq.extend(ordered[i])
    return seq

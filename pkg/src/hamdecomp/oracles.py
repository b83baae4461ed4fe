"""Independent verification and exhaustive ground truth.

Nothing here imports the constructive modules: the searches use their own
plain backtracking so that agreement with the main code paths is evidence
rather than a tautology.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Iterator

from .config import DEFAULT_CONFIG, ToleranceConfig
from .errors import DomainError, ResourceError
from .graph import Decomposition, Edge, Graph, cycle_edges, norm_edge


class OracleTimeout(ResourceError):
    pass


class _Deadline:
    def __init__(self, seconds: float | None):
        self.stop = None if seconds is None else time.monotonic() + seconds
        self.count = 0

    def check(self) -> None:
        self.count += 1
        if self.stop is not None and self.count % 1024 == 0 and time.monotonic() > self.stop:
            raise OracleTimeout("exhaustive search cancelled at its deadline")


def _cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise ResourceError(f"{what}: size {n} exceeds the configured cap {cap}")


# ---------------------------------------------------------------- verification

@dataclass(frozen=True)
class Certificate:
    ok: bool
    rule: str = ""
    witness: str = ""
    complete: bool = False

    def __str__(self) -> str:
        return "OK" if self.ok else f"FAIL {self.rule} {self.witness}"


def verify_decomposition(G: Graph, D: Decomposition) -> Certificate:
    """Check every part against G and report the first violation."""
    n = G.n
    seen: dict[Edge, int] = {}
    parts: list[list[Edge]] = []
    for idx, cyc in enumerate(D.cycles):
        if len(cyc) != n or n < 3 or len(set(cyc)) != n or any(not 0 <= v < n for v in cyc):
            return Certificate(False, "hamiltonian", f"cycle#{idx}")
        parts.append(cycle_edges(cyc))
    for idx, m in enumerate(D.matchings):
        covered = [v for e in m for v in e]
        if len(covered) != n or set(covered) != set(range(n)):
            return Certificate(False, "perfect", f"matching#{idx}")
        parts.append(sorted(m))
    for idx, part in enumerate(parts):
        for e in part:
            if e not in G.edges:
                return Certificate(False, "host", f"{e[0]}-{e[1]}")
            if e in seen:
                return Certificate(False, "disjoint", f"{e[0]}-{e[1]}")
            seen[e] = idx
    complete = len(seen) == G.m
    if D.complete and not complete:
        u, v = min(G.edges - seen.keys())
        return Certificate(False, "complete", f"{u}-{v}")
    if complete and not D.complete:
        return Certificate(False, "complete", "flag-no-but-covered")
    return Certificate(True, complete=complete)


# ---------------------------------------------------------------- 1-factorization

def _perfect_matchings(n: int, nbrs: list[set[int]], first: Edge, clock: _Deadline) -> Iterator[list[Edge]]:
    """All perfect matchings of the graph given by nbrs that contain ``first``."""
    matched = [False] * n
    chosen: list[Edge] = [first]
    matched[first[0]] = matched[first[1]] = True

    def rec() -> Iterator[list[Edge]]:
        clock.check()
        try:
            v = matched.index(False)
        except ValueError:
            yield list(chosen)
            return
        matched[v] = True
        for w in sorted(nbrs[v]):
            if not matched[w]:
                matched[w] = True
                chosen.append((v, w))
                yield from rec()
                chosen.pop()
                matched[w] = False
        matched[v] = False

    yield from rec()


def _two_regular_all_even(n: int, nbrs: list[set[int]]) -> bool:
    seen = [False] * n
    for s in range(n):
        if seen[s]:
            continue
        size, stack = 0, [s]
        seen[s] = True
        while stack:
            v = stack.pop()
            size += 1
            for w in nbrs[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        if size % 2:
            return False
    return True


def brute_one_factorization(
    G: Graph, config: ToleranceConfig = DEFAULT_CONFIG, deadline: float | None = None
) -> Decomposition | None:
    """Exact search: one perfect matching at a time, each containing vertex 0's lowest free edge.

    Returns None only after exhausting the search space.
    """
    n = G.n
    D = G.regular_degree()
    if D is None:
        raise DomainError("brute_one_factorization needs a regular graph")
    if n % 2:
        raise DomainError("brute_one_factorization needs an even number of vertices")
    _cap(n, config.one_factor_cap, "brute_one_factorization")
    if n == 0 or D == 0:
        return Decomposition(G, [], [], complete=True)
    clock = _Deadline(deadline)
    nbrs = [set(a) for a in G.adj]
    found: list[list[Edge]] = []

    def rec(deg: int) -> bool:
        if deg == 0:
            return True
        if deg == 2 and not _two_regular_all_even(n, nbrs):
            return False
        w = min(nbrs[0])
        for pm in _perfect_matchings(n, nbrs, (0, w), clock):
            for u, v in pm:
                nbrs[u].discard(v)
                nbrs[v].discard(u)
            found.append(pm)
            if rec(deg - 1):
                return True
            found.pop()
            for u, v in pm:
                nbrs[u].add(v)
                nbrs[v].add(u)
        return False

    if not rec(D):
        return None
    return Decomposition(G, [], [frozenset(norm_edge(*e) for e in pm) for pm in found], complete=True)


# ---------------------------------------------------------------- Hamilton cycles

def _hamilton_cycles_through(
    n: int, nbrs: list[set[int]], first: Edge, clock: _Deadline
) -> Iterator[list[int]]:
    """Every Hamilton cycle containing edge ``first``; each reported once as a vertex list."""
    s, t = first
    path = [s, t]
    on = [False] * n
    on[s] = on[t] = True

    def rec() -> Iterator[list[int]]:
        clock.check()
        v = path[-1]
        if len(path) == n:
            if s in nbrs[v] and (n > 2):
                yield list(path)
            return
        for w in sorted(nbrs[v]):
            if on[w]:
                continue
            on[w] = True
            path.append(w)
            yield from rec()
            path.pop()
            on[w] = False

    if n >= 3 and t in nbrs[s]:
        yield from rec()


def brute_ham_decomposition(
    G: Graph, config: ToleranceConfig = DEFAULT_CONFIG, deadline: float | None = None
) -> Decomposition | None:
    """Hamilton cycles (plus one perfect matching when the degree is odd) partitioning E(G)."""
    n = G.n
    _cap(n, config.ham_decomp_cap, "brute_ham_decomposition")
    D = G.regular_degree()
    if D is None or n < 3 or D == 0:
        return None
    clock = _Deadline(deadline)
    nbrs = [set(a) for a in G.adj]
    found: list[list[int]] = []

    def rec(deg: int) -> bool:
        if deg == 0:
            return True
        if deg == 1:
            return all(len(nbrs[v]) == 1 for v in range(n))
        w = min(nbrs[0])
        for cyc in _hamilton_cycles_through(n, nbrs, (0, w), clock):
            es = cycle_edges(cyc)
            for u, v in es:
                nbrs[u].discard(v)
                nbrs[v].discard(u)
            found.append(cyc)
            if rec(deg - 2):
                return True
            found.pop()
            for u, v in es:
                nbrs[u].add(v)
                nbrs[v].add(u)
        return False

    if not rec(D):
        return None
    matchings = []
    if D % 2:
        matchings.append(frozenset(norm_edge(v, next(iter(nbrs[v]))) for v in range(n)))
    return Decomposition(G, [tuple(c) for c in found], matchings, complete=True)


def max_ham_packing(
    G: Graph, config: ToleranceConfig = DEFAULT_CONFIG, deadline: float | None = None
) -> tuple[int, list[tuple[int, ...]]]:
    """Maximum number of edge-disjoint Hamilton cycles, with a witness packing."""
    n = G.n
    _cap(n, config.packing_cap, "max_ham_packing")
    if n < 3:
        return 0, []
    clock = _Deadline(deadline)
    nbrs = [set(a) for a in G.adj]
    index = {e: i for i, e in enumerate(G.sorted_edges())}
    # every Hamilton cycle passes vertex 0; enumerate them once each
    cycles: list[tuple[int, int, tuple[int, ...]]] = []
    for w in sorted(nbrs[0]):
        for cyc in _hamilton_cycles_through(n, nbrs, (0, w), clock):
            if cyc[-1] < w:  # reported from the other direction already
                continue
            mask = 0
            for e in cycle_edges(cyc):
                mask |= 1 << index[e]
            cycles.append((mask, w, tuple(cyc)))
    best: list[list[int]] = [[]]
    ub = G.min_degree() // 2

    def rec(start: int, used: int, chosen: list[int]) -> bool:
        clock.check()
        if len(chosen) > len(best[0]):
            best[0] = list(chosen)
            if len(chosen) == ub:
                return True
        for i in range(start, len(cycles)):
            mask = cycles[i][0]
            if mask & used:
                continue
            chosen.append(i)
            if rec(i + 1, used | mask, chosen):
                return True
            chosen.pop()
        return False

    rec(0, 0, [])
    return len(best[0]), [cycles[i][2] for i in best[0]]


# ---------------------------------------------------------------- capped subgraphs

def brute_degree_capped_max(
    G: Graph, b: int, config: ToleranceConfig = DEFAULT_CONFIG, deadline: float | None = None
) -> int:
    """Largest edge count of a subgraph with maximum degree at most b (branch and bound)."""
    _cap(G.m, config.capped_max_cap, "brute_degree_capped_max")
    if b < 0:
        raise DomainError("degree cap must be non-negative")
    clock = _Deadline(deadline)
    edges = G.sorted_edges()
    load = [0] * G.n
    rest = G.degrees()
    best = [0]

    def bound(cur: int) -> int:
        slack = sum(min(b - load[v], rest[v]) for v in range(G.n))
        return cur + slack // 2

    def rec(i: int, cur: int) -> None:
        clock.check()
        if cur > best[0]:
            best[0] = cur
        if i == len(edges) or bound(cur) <= best[0]:
            return
        u, v = edges[i]
        rest[u] -= 1
        rest[v] -= 1
        if load[u] < b and load[v] < b:
            load[u] += 1
            load[v] += 1
            rec(i + 1, cur + 1)
            load[u] -= 1
            load[v] -= 1
        rec(i + 1, cur)
        rest[u] += 1
        rest[v] += 1

    rec(0, 0)
    return best[0]


# ---------------------------------------------------------------- reg_even

def _has_regular_factor(G: Graph, r: int, clock: _Deadline) -> list[Edge] | None:
    """Spanning r-regular subgraph by vertex-wise choice of incident edges."""
    n = G.n
    if r == 0:
        return []
    if G.min_degree() < r or (n * r) % 2:
        return None
    state: dict[Edge, bool] = {}
    have = [0] * n
    open_ = [G.degree(v) for v in range(n)]

    def feasible(v: int) -> bool:
        return have[v] <= r <= have[v] + open_[v]

    def rec() -> bool:
        clock.check()
        # most constrained vertex still short of r
        pick, best_key = -1, None
        for v in range(n):
            if have[v] < r:
                key = (open_[v] - (r - have[v]), v)
                if best_key is None or key < best_key:
                    pick, best_key = v, key
        if pick < 0:
            return True
        v = pick
        free = [w for w in G.adj[v] if norm_edge(v, w) not in state]
        need = r - have[v]
        for take in itertools.combinations(free, need):
            chosen = set(take)
            touched = []
            ok = True
            for w in free:
                e = norm_edge(v, w)
                state[e] = w in chosen
                touched.append(e)
                open_[v] -= 1
                open_[w] -= 1
                if w in chosen:
                    have[v] += 1
                    have[w] += 1
                if not feasible(w):
                    ok = False
            if ok and rec():
                return True
            for e in touched:
                w = e[0] if e[1] == v else e[1]
                if state[e]:
                    have[v] -= 1
                    have[w] -= 1
                open_[v] += 1
                open_[w] += 1
                del state[e]
        return False

    return [e for e, on in state.items() if on] if rec() else None


def reg_even_oracle(
    G: Graph, config: ToleranceConfig = DEFAULT_CONFIG, deadline: float | None = None
) -> int:
    """Largest even r with a spanning r-regular subgraph, by ascending exhaustive search."""
    _cap(G.n, config.reg_even_oracle_cap, "reg_even_oracle")
    clock = _Deadline(deadline)
    best = 0
    # even-regular factors nest (each splits into 2-factors), so ascend until the first failure
    for r in range(2, G.min_degree() + 1, 2):
        if _has_regular_factor(G, r, clock) is None:
            break
        best = r
    return best

"""Hamilton cycle search engines.

* ``dirac_cycle``: path extension plus crossing rotations; always succeeds when
  the minimum degree is at least n/2.
* ``hamilton_cycle_with``: exact backtracking for undirected cycles that must
  contain a prescribed set of edges.
* ``directed_hamilton_cycle``: exact backtracking for a directed cycle visiting
  a list of marker vertices in a prescribed order.
"""

from __future__ import annotations

import random
import time
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import ResourceError
from .graph import Graph, norm_edge


class SearchTimeout(ResourceError):
    pass


class _Clock:
    def __init__(self, deadline: float | None):
        self.stop = None if deadline is None else time.monotonic() + deadline
        self.ticks = 0

    def tick(self) -> None:
        self.ticks += 1
        if self.stop is not None and self.ticks % 512 == 0 and time.monotonic() > self.stop:
            raise SearchTimeout("Hamilton search exceeded its deadline")


def dirac_cycle(G: Graph, seed: int = 0) -> list[int]:
    """Hamilton cycle of a graph with minimum degree >= n/2."""
    n = G.n
    rng = random.Random(seed)
    adj = G.adj_sets
    path = [rng.randrange(n)]
    on = {path[0]}
    while True:
        # extend both ends greedily
        grew = True
        while grew:
            grew = False
            for _ in range(2):
                end = path[-1]
                free = sorted(w for w in adj[end] if w not in on)
                if free:
                    w = rng.choice(free)
                    path.append(w)
                    on.add(w)
                    grew = True
                    break
                path.reverse()
        # close via a crossing pair: v1 ~ v_{i+1} and v_i ~ v_k
        first, last = path[0], path[-1]
        if last in adj[first]:
            cycle = path
        else:
            k = len(path)
            cut = next((i for i in range(k - 1)
                        if path[i + 1] in adj[first] and path[i] in adj[last]), None)
            if cut is None:
                raise AssertionError("crossing rotation missing; minimum degree below n/2?")
            cycle = path[: cut + 1] + path[cut + 1:][::-1]
        if len(cycle) == n:
            return cycle
        # open the cycle next to an outside neighbour
        for idx, c in enumerate(cycle):
            outside = [w for w in adj[c] if w not in on]
            if outside:
                w = min(outside)
                path = [w] + cycle[idx:] + cycle[:idx]
                on.add(w)
                break
        else:
            raise AssertionError("graph is disconnected")


def hamilton_cycle_with(
    G: Graph,
    required: Iterable[Sequence[int]] = (),
    vertices: Iterable[int] | None = None,
    deadline: float | None = None,
    seed: int = 0,
) -> list[int] | None:
    """Hamilton cycle on ``vertices`` (default: all) of G containing every required edge.

    Required edges need not be edges of G. Returns None when no such cycle exists.
    """
    verts = sorted(range(G.n) if vertices is None else set(vertices))
    vset = set(verts)
    k = len(verts)
    req: dict[int, set[int]] = {v: set() for v in verts}
    for u, v in required:
        if u not in vset or v not in vset:
            return None
        req[u].add(v)
        req[v].add(u)
    if any(len(r) > 2 for r in req.values()):
        return None
    if k < 3:
        return None
    nbr = {v: (set(G.adj[v]) & vset) | req[v] for v in verts}
    if any(len(nbr[v]) < 2 for v in verts):
        return None
    rng = random.Random(seed)
    clock = _Clock(deadline)
    start = max(verts, key=lambda v: (len(req[v]), -len(nbr[v]), -v))
    visited = {start}
    path = [start]
    n_req_total = sum(len(r) for r in req.values()) // 2
    tiebreak = {v: rng.random() for v in verts}

    def closable(v: int) -> bool:
        if start not in nbr[v]:
            return False
        # start's required partners must be its two cycle neighbours
        return all(w == path[1] or w == v for w in req[start])

    def free_degree(w: int) -> int:
        return sum(1 for x in nbr[w] if x not in visited)

    def admissible(v: int, w: int) -> bool:
        # required partners of w other than v must still be reachable from w
        rest = req[w] - {v}
        if len(path) + 1 == k:
            return rest <= {start}
        return len(rest) <= 1 and not (rest & visited)

    def options(v: int) -> list[int]:
        forced = [w for w in req[v] if w not in visited]
        if len(forced) == 2 and v != start:
            return []
        if forced:
            cand = [min(forced)]
        else:
            cand = [w for w in nbr[v] if w not in visited]
        cand = [w for w in cand if admissible(v, w)]
        cand.sort(key=lambda w: (free_degree(w), tiebreak[w]))
        return cand

    def dead_end(v: int) -> bool:
        # some unvisited neighbour of v would be stranded
        for w in nbr[v]:
            if w in visited:
                continue
            slots = free_degree(w) + (1 if start in nbr[w] else 0)
            if slots < 1:
                return True
        return False

    def dfs(v: int) -> bool:
        clock.tick()
        if len(path) == k:
            return closable(v)
        if dead_end(v):
            return False
        for w in options(v):
            visited.add(w)
            path.append(w)
            if dfs(w):
                return True
            path.pop()
            visited.discard(w)
        return False

    import sys

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10 * k + 100))
    try:
        found = dfs(start)
    finally:
        sys.setrecursionlimit(old)
    if not found:
        return None
    used = {norm_edge(path[i], path[(i + 1) % k]) for i in range(k)}
    assert sum(1 for u in verts for w in req[u] if norm_edge(u, w) in used) // 2 == n_req_total
    return path


def directed_hamilton_cycle(
    nodes: Sequence[Hashable],
    out_adj: Mapping[Hashable, Iterable[Hashable]],
    order: Sequence[Hashable] = (),
    deadline: float | None = None,
    seed: int = 0,
) -> list[Hashable] | None:
    """Directed Hamilton cycle visiting ``order`` in that cyclic order, or None."""
    nodes = list(nodes)
    k = len(nodes)
    if k == 0:
        return None
    node_set = set(nodes)
    out = {v: [w for w in out_adj.get(v, ()) if w in node_set and w != v] for v in nodes}
    inn: dict[Hashable, set] = {v: set() for v in nodes}
    for v in nodes:
        for w in out[v]:
            inn[w].add(v)
    if k == 1:
        return None
    if any(not out[v] or not inn[v] for v in nodes):
        return None
    rank = {x: i for i, x in enumerate(order)}
    if len(rank) != len(order) or any(x not in node_set for x in order):
        return None
    rng = random.Random(seed)
    tiebreak = {v: rng.random() for v in nodes}
    start = order[0] if order else min(nodes, key=lambda v: (len(inn[v]), tiebreak[v]))
    clock = _Clock(deadline)
    visited = {start}
    path = [start]
    next_marker = [1 if order else 0]

    def free_in(w) -> int:
        return sum(1 for x in inn[w] if x not in visited)

    def stranded(v) -> bool:
        # an unvisited vertex whose in-neighbours are all used except the current end
        for w in nodes:
            if w in visited:
                continue
            if not any((x not in visited) or x == v for x in inn[w]):
                return True
            if not any((x not in visited) or x == start for x in out[w]):
                return True
        return False

    def dfs(v) -> bool:
        clock.tick()
        if len(path) == k:
            return start in out[v]
        if len(path) % 4 == 0 and stranded(v):
            return False
        cand = []
        for w in out[v]:
            if w in visited:
                continue
            r = rank.get(w)
            if r is not None and r != next_marker[0]:
                continue
            cand.append(w)
        cand.sort(key=lambda w: (free_in(w), tiebreak[w]))
        for w in cand:
            visited.add(w)
            path.append(w)
            bumped = w in rank
            if bumped:
                next_marker[0] += 1
            if dfs(w):
                return True
            if bumped:
                next_marker[0] -= 1
            path.pop()
            visited.discard(w)
        return False

    import sys

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10 * k + 100))
    try:
        ok = dfs(start)
    finally:
        sys.setrecursionlimit(old)
    return path if ok else None

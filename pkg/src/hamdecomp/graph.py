"""Graph data model, text formats, elementary statistics and the extremal generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence, TextIO

from .errors import ContractError, DomainError, ParseError

Edge = tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    Instances are immutable; every "modifying" method returns a new graph.
    Duplicate input pairs collapse to one edge, self-loops are rejected.
    """

    __slots__ = ("n", "edges", "__dict__")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if n < 0:
            raise DomainError(f"vertex count must be non-negative, got {n}")
        canon = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise DomainError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"edge {u}-{v} out of range for n={n}")
            canon.add(norm_edge(u, v))
        self.n = n
        self.edges: frozenset[Edge] = frozenset(canon)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def adj(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    @cached_property
    def adj_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adj)

    def vertices(self) -> range:
        return range(self.n)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adj]

    def has_edge(self, u: int, v: int) -> bool:
        return norm_edge(u, v) in self.edges

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def min_degree(self) -> int:
        return min(self.degrees(), default=0)

    def max_degree(self) -> int:
        return max(self.degrees(), default=0)

    def regular_degree(self) -> int | None:
        """The common degree if the graph is regular, else None."""
        degs = set(self.degrees())
        if len(degs) > 1:
            return None
        return degs.pop() if degs else 0

    def degree_into(self, v: int, X: Iterable[int]) -> int:
        s = self.adj_sets[v]
        return sum(1 for x in X if x in s)

    def with_edges(self, edges: Iterable[Sequence[int]]) -> Graph:
        return Graph(self.n, list(self.edges) + [tuple(e) for e in edges])

    def without_edges(self, edges: Iterable[Sequence[int]]) -> Graph:
        drop = {norm_edge(*e) for e in edges}
        return Graph(self.n, self.edges - drop)

    def spanning(self, edges: Iterable[Sequence[int]]) -> Graph:
        """Spanning subgraph on the same vertex set with the given edges."""
        return Graph(self.n, edges)

    def induced_edges(self, X: Iterable[int]) -> set[Edge]:
        xs = set(X)
        return {e for e in self.edges if e[0] in xs and e[1] in xs}

    def cross_edges(self, X: Iterable[int], Y: Iterable[int]) -> set[Edge]:
        xs, ys = set(X), set(Y)
        return {e for e in self.edges
                if (e[0] in xs and e[1] in ys) or (e[0] in ys and e[1] in xs)}

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            stack, comp = [s], []
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self.adj[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    @classmethod
    def from_networkx(cls, g) -> Graph:
        mapping = {v: i for i, v in enumerate(sorted(g.nodes()))}
        return cls(len(mapping), [(mapping[u], mapping[v]) for u, v in g.edges()])


class Digraph:
    """Directed graph on ``0..n-1`` with at most one arc per ordered pair.

    With ``oriented=True`` the pair (u, v), (v, u) is also forbidden.
    """

    __slots__ = ("n", "arcs", "oriented", "__dict__")

    def __init__(self, n: int, arcs: Iterable[Sequence[int]] = (), oriented: bool = False):
        canon = set()
        for a in arcs:
            u, v = int(a[0]), int(a[1])
            if u == v:
                raise DomainError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"arc {u}->{v} out of range for n={n}")
            canon.add((u, v))
        if oriented:
            for u, v in canon:
                if (v, u) in canon:
                    raise DomainError(f"both orientations of {u}-{v} present in an oriented graph")
        self.n = n
        self.arcs: frozenset[Edge] = frozenset(canon)
        self.oriented = oriented

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, arcs={len(self.arcs)})"

    @cached_property
    def out_adj(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.arcs:
            out[u].append(v)
        return tuple(tuple(sorted(a)) for a in out)

    @cached_property
    def in_adj(self) -> tuple[tuple[int, ...], ...]:
        inn: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.arcs:
            inn[v].append(u)
        return tuple(tuple(sorted(a)) for a in inn)

    def out_degree(self, v: int) -> int:
        return len(self.out_adj[v])

    def in_degree(self, v: int) -> int:
        return len(self.in_adj[v])

    def has_arc(self, u: int, v: int) -> bool:
        return (u, v) in self.arcs

    def underlying(self) -> Graph:
        return Graph(self.n, self.arcs)


@dataclass(frozen=True)
class BiPartition:
    """Vertex partition ``A, A0, B, B0`` with ``A' = A | A0`` and ``B' = B | B0``."""

    A: frozenset[int]
    A0: frozenset[int] = frozenset()
    B: frozenset[int] = frozenset()
    B0: frozenset[int] = frozenset()

    def __post_init__(self):
        for name in ("A", "A0", "B", "B0"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        parts = [self.A, self.A0, self.B, self.B0]
        total = sum(len(p) for p in parts)
        if len(frozenset().union(*parts)) != total:
            raise DomainError("partition classes overlap")

    @classmethod
    def from_sides(cls, A_prime: Iterable[int], B_prime: Iterable[int]) -> BiPartition:
        return cls(A=frozenset(A_prime), B=frozenset(B_prime))

    @property
    def A_prime(self) -> frozenset[int]:
        return self.A | self.A0

    @property
    def B_prime(self) -> frozenset[int]:
        return self.B | self.B0

    @property
    def V0(self) -> frozenset[int]:
        return self.A0 | self.B0

    @property
    def a(self) -> int:
        return len(self.A0)

    @property
    def b(self) -> int:
        return len(self.B0)

    def side_of(self, v: int) -> str:
        if v in self.A:
            return "A"
        if v in self.A0:
            return "A0"
        if v in self.B:
            return "B"
        if v in self.B0:
            return "B0"
        raise DomainError(f"vertex {v} not in partition")

    def check_covers(self, n: int) -> None:
        allv = self.A_prime | self.B_prime
        if allv != frozenset(range(n)):
            missing = sorted(set(range(n)) - allv)
            extra = sorted(allv - set(range(n)))
            raise DomainError(f"partition does not cover 0..{n - 1}: missing {missing}, extra {extra}")

    def swapped(self) -> BiPartition:
        return BiPartition(A=self.B, A0=self.B0, B=self.A, B0=self.A0)


def canonical_cycle(cycle: Sequence[int]) -> tuple[int, ...]:
    """Rotate to start at the minimum vertex and pick the smaller direction."""
    c = list(cycle)
    if len(c) < 3:
        return tuple(c)
    i = c.index(min(c))
    c = c[i:] + c[:i]
    if c[-1] < c[1]:
        c = [c[0]] + c[1:][::-1]
    return tuple(c)


def cycle_edges(cycle: Sequence[int]) -> list[Edge]:
    k = len(cycle)
    return [norm_edge(cycle[i], cycle[(i + 1) % k]) for i in range(k)]


@dataclass
class Decomposition:
    """Hamilton cycles and perfect matchings of a host graph.

    ``complete`` is a claim that the parts cover every host edge; the verifier
    checks it rather than trusting it.
    """

    host: Graph
    cycles: list[tuple[int, ...]] = field(default_factory=list)
    matchings: list[frozenset[Edge]] = field(default_factory=list)
    complete: bool = False

    def __post_init__(self):
        self.cycles = [canonical_cycle(c) for c in self.cycles]
        self.matchings = [frozenset(norm_edge(*e) for e in m) for m in self.matchings]

    def part_edges(self) -> list[list[Edge]]:
        return [cycle_edges(c) for c in self.cycles] + [sorted(m) for m in self.matchings]

    def covered(self) -> set[Edge]:
        out: set[Edge] = set()
        for p in self.part_edges():
            out.update(p)
        return out


# ---------------------------------------------------------------- statistics

def degree_threshold(n: int) -> int:
    if n < 3:
        raise DomainError(f"degree_threshold needs n >= 3, got {n}")
    return n - 2 * (n // 4) - 1


def _check_vertices(G: Graph, X: Iterable[int]) -> set[int]:
    xs = set(X)
    bad = [v for v in xs if not 0 <= v < G.n]
    if bad:
        raise DomainError(f"vertices {sorted(bad)} out of range for n={G.n}")
    return xs


def edges_between(G: Graph, X: Iterable[int], Y: Iterable[int]) -> int:
    """Number of edges with one end in X and the other in Y; e(X) when X == Y."""
    xs = _check_vertices(G, X)
    ys = _check_vertices(G, Y)
    if xs == ys:
        return len(G.induced_edges(xs))
    count = 0
    for u, v in G.edges:
        if (u in xs and v in ys) or (u in ys and v in xs):
            count += 1
    return count


def is_D_balanced(G: Graph, P: BiPartition, D: int) -> bool:
    P.check_covers(G.n)
    lhs = 2 * (edges_between(G, P.A_prime, P.A_prime) - edges_between(G, P.B_prime, P.B_prime))
    rhs = (len(P.A_prime) - len(P.B_prime)) * D
    if lhs != rhs:
        return False
    return all(G.degree(v) == D for v in P.V0)


def cut_parity_check(G: Graph, P: BiPartition, D: int) -> bool:
    """True iff e(A', B') is odd exactly when |A'| and D are both odd."""
    if G.regular_degree() != D:
        raise ContractError(f"graph is not {D}-regular")
    P.check_covers(G.n)
    cut = edges_between(G, P.A_prime, P.B_prime)
    predicted_odd = len(P.A_prime) % 2 == 1 and D % 2 == 1
    return (cut % 2 == 1) == predicted_odd


# ---------------------------------------------------------------- generators

def complete(n: int) -> Graph:
    if n < 1:
        raise DomainError("complete graph needs n >= 1")
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def cycle(n: int) -> Graph:
    if n < 3:
        raise DomainError("cycle needs n >= 3")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_bipartite(a: int, b: int | None = None) -> Graph:
    b = a if b is None else b
    if a < 1 or b < 1:
        raise DomainError("complete bipartite graph needs both classes non-empty")
    return Graph(a + b, [(u, a + v) for u in range(a) for v in range(b)])


def _clique(vs: Sequence[int]) -> list[Edge]:
    return [(vs[i], vs[j]) for i in range(len(vs)) for j in range(i + 1, len(vs))]


def two_cliques(n: int) -> Graph:
    """Disjoint cliques on the first floor(n/2) and the remaining vertices."""
    if n < 2:
        raise DomainError("two_cliques needs n >= 2")
    h = n // 2
    return Graph(n, _clique(range(h)) + _clique(range(h, n)))


def two_cliques_minus_ham(n: int) -> Graph:
    """Cliques of orders n/2-1 and n/2+1, minus the index-order Hamilton cycle of the larger."""
    if n % 2 or n < 6:
        raise DomainError(f"two_cliques_minus_ham needs even n >= 6, got {n}")
    small = list(range(n // 2 - 1))
    big = list(range(n // 2 - 1, n))
    ham = {norm_edge(big[i], big[(i + 1) % len(big)]) for i in range(len(big))}
    edges = _clique(small) + [e for e in _clique(big) if norm_edge(*e) not in ham]
    return Graph(n, edges)


def babai(k: int) -> Graph:
    """Empty class of size 4k joined completely to a class of size 4k+2 carrying a perfect matching."""
    if k < 1:
        raise DomainError(f"babai needs k >= 1, got {k}")
    A = range(4 * k)
    B = list(range(4 * k, 8 * k + 2))
    edges = [(a, b) for a in A for b in B]
    edges += [(B[i], B[i + 1]) for i in range(0, len(B), 2)]
    return Graph(8 * k + 2, edges)


def babai_partition(k: int) -> BiPartition:
    return BiPartition.from_sides(range(4 * k), range(4 * k, 8 * k + 2))


def _three_factor(vs: Sequence[int]) -> set[Edge]:
    # Hamilton cycle plus antipodal chords: 3-regular for an even number >= 4 of vertices.
    k = len(vs)
    out = {norm_edge(vs[i], vs[(i + 1) % k]) for i in range(k)}
    out |= {norm_edge(vs[i], vs[i + k // 2]) for i in range(k // 2)}
    return out


def bestposs(n: int) -> Graph:
    """Disconnected regular graph of the largest degree possible below the Hamiltonicity threshold."""
    if n < 6:
        raise DomainError(f"bestposs needs n >= 6, got {n}")
    d_star = n // 2 - 1
    if n % 2 == 0:
        return two_cliques(n)
    h = n // 2
    if d_star % 2 == 0:
        small, big = list(range(h)), list(range(h, n))
        pm = {norm_edge(big[i], big[i + 1]) for i in range(0, len(big), 2)}
        return Graph(n, _clique(small) + [e for e in _clique(big) if norm_edge(*e) not in pm])
    small, big = list(range(h - 1)), list(range(h - 1, n))
    drop = _three_factor(big)
    return Graph(n, _clique(small) + [e for e in _clique(big) if norm_edge(*e) not in drop])


def bestposs_degree(n: int) -> int:
    d_star = n // 2 - 1
    return d_star - 1 if (n % 2 == 1 and d_star % 2 == 1) else d_star


def g_crit(n: int) -> Graph:
    """Two cliques of order (n-1)/2 plus a vertex a = n-1 and a cross matching.

    a is joined to the first half (by index) of each clique; the remaining
    halves are matched to each other in index order.
    """
    if n % 4 != 1 or n < 5:
        raise DomainError(f"g_crit needs n = 1 mod 4 and n >= 5, got {n} (n mod 4 = {n % 4})")
    h = (n - 1) // 2
    A = list(range(h))
    B = list(range(h, 2 * h))
    a = n - 1
    edges = _clique(A) + _clique(B)
    edges += [(a, v) for v in A[: h // 2]] + [(a, v) for v in B[: h // 2]]
    edges += list(zip(A[h // 2:], B[h // 2:]))
    return Graph(n, edges)


def g_crit_partition(n: int) -> BiPartition:
    """A' = first clique plus the special vertex (as A0), B' = second clique."""
    h = (n - 1) // 2
    return BiPartition(A=frozenset(range(h)), A0=frozenset({n - 1}), B=frozenset(range(h, 2 * h)))


FAMILIES = {
    "complete": (complete, 1),
    "cycle": (cycle, 1),
    "complete_bipartite": (complete_bipartite, (1, 2)),
    "two_cliques": (two_cliques, 1),
    "two_cliques_minus_ham": (two_cliques_minus_ham, 1),
    "babai": (babai, 1),
    "bestposs": (bestposs, 1),
    "g_crit": (g_crit, 1),
}


def generate(family: str, *params: int) -> Graph:
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}; choose from {', '.join(sorted(FAMILIES))}")
    fn, arity = FAMILIES[family]
    allowed = arity if isinstance(arity, tuple) else (arity,)
    if len(params) not in allowed:
        raise DomainError(f"{family} takes {' or '.join(map(str, allowed))} integer parameter(s)")
    return fn(*params)


def random_regular(n: int, d: int, seed: int) -> Graph:
    import networkx as nx

    if (n * d) % 2 or d >= n:
        raise DomainError(f"no {d}-regular graph on {n} vertices")
    return Graph.from_networkx(nx.random_regular_graph(d, n, seed=seed))


# ---------------------------------------------------------------- text formats

def _lines(source: str | TextIO) -> Iterator[tuple[int, str]]:
    text = source if isinstance(source, str) else source.read()
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line


def _ints(tokens: Sequence[str], lineno: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"expected integers, got {' '.join(tokens)!r}", lineno) from None


def parse_graph(source: str | TextIO) -> Graph:
    lines = list(_lines(source))
    if not lines:
        raise ParseError("empty input, expected header 'n m'", 1)
    lineno, header = lines[0]
    hv = _ints(header.split(), lineno)
    if len(hv) != 2:
        raise ParseError("header must be 'n m'", lineno)
    n, m = hv
    if n < 0 or m < 0:
        raise ParseError("negative size in header", lineno)
    body = lines[1:]
    if len(body) != m:
        raise ParseError(f"header announces {m} edges, found {len(body)}",
                         body[-1][0] if body else lineno)
    seen = set()
    for ln, line in body:
        uv = _ints(line.split(), ln)
        if len(uv) != 2:
            raise ParseError("edge line must be 'u v'", ln)
        u, v = uv
        if u == v:
            raise ParseError(f"self-loop at {u}", ln)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"vertex out of range 0..{n - 1}", ln)
        e = norm_edge(u, v)
        if e in seen:
            raise ParseError(f"duplicate edge {u}-{v}", ln)
        seen.add(e)
    return Graph(n, seen)


def format_graph(G: Graph) -> str:
    out = [f"{G.n} {G.m}"]
    out += [f"{u} {v}" for u, v in G.sorted_edges()]
    return "\n".join(out) + "\n"


def read_graph(stream: TextIO) -> Graph:
    return parse_graph(stream)


def write_graph(G: Graph, stream: TextIO) -> None:
    stream.write(format_graph(G))


_PART_KEYS = ("A", "A0", "B", "B0")


def parse_partition(source: str | TextIO) -> BiPartition:
    found: dict[str, list[int]] = {}
    for ln, line in _lines(source):
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep or key not in _PART_KEYS:
            raise ParseError(f"expected one of {', '.join(k + ':' for k in _PART_KEYS)}", ln)
        if key in found:
            raise ParseError(f"class {key} given twice", ln)
        found[key] = _ints(rest.split(), ln)
    missing = [k for k in _PART_KEYS if k not in found]
    if missing:
        raise ParseError(f"missing classes {missing}")
    return BiPartition(*(frozenset(found[k]) for k in _PART_KEYS))


def format_partition(P: BiPartition) -> str:
    rows = []
    for k in _PART_KEYS:
        vs = " ".join(map(str, sorted(getattr(P, k))))
        rows.append(f"{k}: {vs}".rstrip())
    return "\n".join(rows) + "\n"


def read_partition(stream: TextIO) -> BiPartition:
    return parse_partition(stream)


def write_partition(P: BiPartition, stream: TextIO) -> None:
    stream.write(format_partition(P))


def parse_decomposition(source: str | TextIO, host: Graph) -> Decomposition:
    cycles, matchings, complete_flag = [], [], None
    for ln, line in _lines(source):
        key, sep, rest = line.partition(":")
        key = key.strip()
        if key == "C" and sep:
            cycles.append(tuple(_ints(rest.split(), ln)))
        elif key == "M" and sep:
            m = []
            for tok in rest.split():
                parts = tok.split("-")
                if len(parts) != 2:
                    raise ParseError(f"matching edge must be 'u-v', got {tok!r}", ln)
                m.append(tuple(_ints(parts, ln)))
            matchings.append(m)
        elif key == "complete" and sep:
            val = rest.strip()
            if val not in ("yes", "no"):
                raise ParseError("complete flag must be 'yes' or 'no'", ln)
            complete_flag = val == "yes"
        else:
            raise ParseError("expected 'C:', 'M:' or 'complete:'", ln)
    if complete_flag is None:
        raise ParseError("missing trailing 'complete: yes|no' line")
    return Decomposition(host, cycles, matchings, complete_flag)


def format_decomposition(D: Decomposition) -> str:
    rows = [("C: " + " ".join(map(str, c))) for c in D.cycles]
    rows += [("M: " + " ".join(f"{u}-{v}" for u, v in sorted(m))) for m in D.matchings]
    rows.append("complete: " + ("yes" if D.complete else "no"))
    return "\n".join(rows) + "\n"


def read_decomposition(stream: TextIO, host: Graph) -> Decomposition:
    return parse_decomposition(stream, host)


def write_decomposition(D: Decomposition, stream: TextIO) -> None:
    stream.write(format_decomposition(D))


"""Classification, frameworks, criticality, random partitions, slices and regularity tests."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _flow
from .config import DEFAULT_CONFIG, ToleranceConfig
from .errors import ConstructionError, ContractError, DomainError, HamDecompError, ResourceError, ToleranceError
from .graph import BiPartition, Edge, Graph, edges_between, is_D_balanced, norm_edge


def _adjacency(G: Graph) -> np.ndarray:
    M = np.zeros((G.n, G.n), dtype=np.int64)
    for u, v in G.edges:
        M[u, v] = M[v, u] = 1
    return M


# ---------------------------------------------------------------- bisections

@dataclass(frozen=True)
class BisectionWitness:
    """A set A of size floor(n/2) and the value it achieves; ``exact`` means the optimum was proven."""

    A: frozenset[int]
    value: int
    exact: bool


def _best_bisection(G: Graph, score, config: ToleranceConfig, seed: int = 0) -> BisectionWitness:
    """Minimize ``score(indicator)`` over |A| = floor(n/2): exhaustive up to the cap, swaps beyond."""
    n, h = G.n, G.n // 2
    if n <= config.bisection_exact_cap:
        best = None
        for A in itertools.combinations(range(n), h):
            x = np.zeros(n, dtype=np.int64)
            x[list(A)] = 1
            s = score(x)
            if best is None or s < best[0]:
                best = (s, A)
        return BisectionWitness(frozenset(best[1]), int(best[0]), True)
    rng = random.Random(seed)
    starts = [list(range(h))]
    starts += [sorted(rng.sample(range(n), h)) for _ in range(8)]
    best = None
    for start in starts:
        x = np.zeros(n, dtype=np.int64)
        x[start] = 1
        cur = score(x)
        improved = True
        while improved:
            improved = False
            move = None
            for a in np.flatnonzero(x):
                for b in np.flatnonzero(1 - x):
                    x[a], x[b] = 0, 1
                    s = score(x)
                    x[a], x[b] = 1, 0
                    if s < cur and (move is None or s < move[0]):
                        move = (s, a, b)
            if move is not None:
                cur, a, b = move
                x[a], x[b] = 0, 1
                improved = True
        if best is None or cur < best[0]:
            best = (cur, frozenset(int(v) for v in np.flatnonzero(x)))
    return BisectionWitness(best[1], int(best[0]), False)


def min_bisection_cut(G: Graph, config: ToleranceConfig = DEFAULT_CONFIG, seed: int = 0) -> BisectionWitness:
    M = _adjacency(G)
    return _best_bisection(G, lambda x: int(x @ M @ (1 - x)), config, seed)


def min_bisection_inside(G: Graph, config: ToleranceConfig = DEFAULT_CONFIG, seed: int = 0) -> BisectionWitness:
    """Minimum of e(A) over |A| = floor(n/2)."""
    M = _adjacency(G)
    return _best_bisection(G, lambda x: int(x @ M @ x) // 2, config, seed)


def min_bisection_both_sides(G: Graph, config: ToleranceConfig = DEFAULT_CONFIG, seed: int = 0) -> BisectionWitness:
    """Minimum of max(e(A), e(V - A)) over |A| = floor(n/2)."""
    M = _adjacency(G)
    return _best_bisection(
        G, lambda x: max(int(x @ M @ x) // 2, int((1 - x) @ M @ (1 - x)) // 2), config, seed)


def eps_close_two_cliques(G: Graph, eps, config: ToleranceConfig = DEFAULT_CONFIG, seed: int = 0) -> BisectionWitness | None:
    w = min_bisection_cut(G, config, seed)
    return w if w.value <= Fraction(str(eps)) * G.n ** 2 else None


def eps_close_bipartite(G: Graph, eps, config: ToleranceConfig = DEFAULT_CONFIG, seed: int = 0) -> BisectionWitness | None:
    """Witness that G is eps-close to K_{n/2,n/2}: e(A) <= eps n^2."""
    w = min_bisection_inside(G, config, seed)
    return w if w.value <= Fraction(str(eps)) * G.n ** 2 else None


def eps_bipartite(G: Graph, eps, config: ToleranceConfig = DEFAULT_CONFIG, seed: int = 0) -> BisectionWitness | None:
    w = min_bisection_both_sides(G, config, seed)
    return w if w.value <= Fraction(str(eps)) * G.n ** 2 else None


# ---------------------------------------------------------------- robust expansion

@dataclass(frozen=True)
class ExpanderVerdict:
    is_expander: bool
    witness: frozenset[int] | None
    exhaustive: bool


def _robust_fail_rows(S: np.ndarray, M: np.ndarray, nu, n: int) -> np.ndarray:
    inside = S @ M  # neighbours of each vertex inside S
    robust = (inside * 1.0 >= float(nu) * n - 1e-9).sum(axis=1)
    size = S.sum(axis=1)
    return robust < size + float(nu) * n - 1e-9


def is_robust_expander(
    G: Graph, nu, tau, mode: str = "exact", config: ToleranceConfig = DEFAULT_CONFIG, seed: int = 0
) -> ExpanderVerdict:
    """Robust (nu, tau)-expansion: every S with tau n <= |S| <= (1-tau) n has a large robust neighbourhood."""
    nu, tau = Fraction(str(nu)), Fraction(str(tau))
    if not 0 < nu <= tau < 1:
        raise DomainError("need 0 < nu <= tau < 1")
    n = G.n
    lo, hi = math.ceil(tau * n), math.floor((1 - tau) * n)
    M = _adjacency(G)
    if mode == "exact":
        if n > config.expander_cap:
            raise ResourceError(f"exact expansion check capped at n={config.expander_cap}, got {n}")
        bits = 1 << np.arange(n, dtype=np.int64)
        chunk = 1 << 15
        for start in range(0, 1 << n, chunk):
            masks = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
            S = ((masks[:, None] & bits[None, :]) > 0).astype(np.int64)
            size = S.sum(axis=1)
            keep = (size >= lo) & (size <= hi)
            if not keep.any():
                continue
            S = S[keep]
            bad = _robust_fail_rows(S, M, nu, n)
            if bad.any():
                row = S[np.argmax(bad)]
                return ExpanderVerdict(False, frozenset(int(v) for v in np.flatnonzero(row)), True)
        return ExpanderVerdict(True, None, True)
    if mode != "sampled":
        raise DomainError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    rng = random.Random(seed)
    if lo > hi:
        return ExpanderVerdict(True, None, False)
    for _ in range(config.expander_samples):
        k = rng.randint(lo, hi)
        S = np.zeros((1, n), dtype=np.int64)
        S[0, rng.sample(range(n), k)] = 1
        if _robust_fail_rows(S, M, nu, n)[0]:
            return ExpanderVerdict(False, frozenset(int(v) for v in np.flatnonzero(S[0])), False)
    return ExpanderVerdict(True, None, False)


# ---------------------------------------------------------------- classification

@dataclass(frozen=True)
class StructureClass:
    kind: str  # "NearBipartite", "TwoCliques" or "RobustExpander"
    witness: frozenset[int] | None = None
    exact: bool = True
    nu: Fraction | None = None
    tau: Fraction | None = None


class ClassificationError(HamDecompError):
    def __init__(self, message: str, certificates: dict):
        self.certificates = certificates
        super().__init__(message)


def classify(
    G: Graph, eps=None, nu=None, tau=None, config: ToleranceConfig = DEFAULT_CONFIG, seed: int = 0
) -> StructureClass:
    eps = config.eps if eps is None else eps
    nu = config.nu if nu is None else nu
    tau = config.tau if tau is None else tau
    if G.min_degree() < (Fraction(1, 2) - Fraction(str(config.kappa))) * G.n:
        raise ContractError(f"minimum degree {G.min_degree()} below (1/2 - kappa) n")
    near_bip = min_bisection_inside(G, config, seed)
    if near_bip.value <= Fraction(str(eps)) * G.n ** 2:
        return StructureClass("NearBipartite", near_bip.A, near_bip.exact)
    cliques = min_bisection_cut(G, config, seed)
    if cliques.value <= Fraction(str(eps)) * G.n ** 2:
        return StructureClass("TwoCliques", cliques.A, cliques.exact)
    mode = "exact" if G.n <= config.expander_cap else "sampled"
    verdict = is_robust_expander(G, nu, tau, mode, config, seed)
    if verdict.is_expander:
        return StructureClass("RobustExpander", None, verdict.exhaustive, Fraction(str(nu)), Fraction(str(tau)))
    raise ClassificationError(
        "no class applies at these tolerances",
        {"inside": near_bip, "cut": cliques, "expander": verdict})


# ---------------------------------------------------------------- criticality

@dataclass(frozen=True)
class CriticalityReport:
    max_cross_degree: int
    capped_max_edges: int
    heavy: frozenset[int]
    is_critical: bool
    cap: int
    witness: frozenset[Edge] = frozenset()


def capped_max_edges(G: Graph, P: BiPartition, cap: int) -> tuple[int, set[Edge]]:
    """Max e(H) over H inside G[A', B'] with maximum degree at most ``cap``."""
    left, right = sorted(P.A_prime), sorted(P.B_prime)
    side = P.A_prime
    pairs = [(u, v) if u in side else (v, u) for u, v in G.cross_edges(left, right)]
    value, chosen = _flow.capped_bipartite_subgraph(
        left, right, pairs, {v: cap for v in left}, {v: cap for v in right})
    return value, {norm_edge(u, v) for u, v in chosen}


def criticality(G: Graph, P: BiPartition, D: int) -> CriticalityReport:
    P.check_covers(G.n)
    cross = Graph(G.n, G.cross_edges(P.A_prime, P.B_prime))
    delta = cross.max_degree()
    cap = (11 * D) // 40
    value, chosen = capped_max_edges(G, P, cap)
    heavy = frozenset(v for v in range(G.n) if 40 * cross.degree(v) >= 11 * D)
    critical = 40 * delta >= 11 * D and 40 * value <= 41 * D
    return CriticalityReport(delta, value, heavy, critical, cap, frozenset(chosen))


# ---------------------------------------------------------------- frameworks

@dataclass(frozen=True)
class Framework:
    partition: BiPartition
    eps0: float
    K: int
    kind: str = "FR"  # "FR", "WF" or "BFR"
    D: int | None = None
    eps_prime: float | None = None
    cut_history: tuple[int, ...] = ()

    @property
    def m(self) -> int:
        return len(self.partition.A) // self.K


def check_framework(G: Graph, P: BiPartition, eps0, K: int) -> list[str]:
    """Names of the violated framework rules (FR1-FR4) plus the half-degree property."""
    n = G.n
    e0 = Fraction(str(eps0))
    bad = []
    try:
        P.check_covers(n)
    except DomainError:
        bad.append("FR1")
        return bad
    A1, B1 = P.A_prime, P.B_prime
    if edges_between(G, A1, B1) > e0 * n * n:
        bad.append("FR2")
    if len(P.A) != len(P.B) or len(P.A) % K or P.a < P.b or P.a + P.b > e0 * n:
        bad.append("FR3")
    if any(G.degree_into(v, B1) >= e0 * n for v in P.A) or any(G.degree_into(v, A1) >= e0 * n for v in P.B):
        bad.append("FR4")
    if any(2 * G.degree_into(v, A1) < G.degree(v) for v in A1) or \
            any(2 * G.degree_into(v, B1) < G.degree(v) for v in B1):
        bad.append("half-degree")
    return bad


def _cut(G: Graph, X: set[int]) -> int:
    return sum(1 for u, v in G.edges if (u in X) != (v in X))


def build_framework(G: Graph, eps0=None, K: int | None = None, config: ToleranceConfig = DEFAULT_CONFIG,
                    seed: int = 0) -> Framework:
    """Local moves from a closeness witness, then absorption into the exceptional sets."""
    eps0 = config.eps0 if eps0 is None else eps0
    K = config.K if K is None else K
    if K < 1:
        raise DomainError("K must be positive")
    if G.regular_degree() is None:
        raise ContractError("build_framework needs a regular graph")
    n = G.n
    witness = eps_close_two_cliques(G, config.eps_ex, config, seed)
    if witness is None:
        raise ContractError(f"graph is not eps_ex={config.eps_ex}-close to two cliques")
    X = set(witness.A)
    history = [_cut(G, X)]
    while True:
        mover = None
        for v in range(n):
            own = X if v in X else set(range(n)) - X
            if 2 * G.degree_into(v, own) < G.degree(v):
                mover = v
                break
        if mover is None:
            break
        X ^= {mover}
        history.append(_cut(G, X))
    Y = set(range(n)) - X
    if len(X) < len(Y):
        X, Y = Y, X
    thresh = math.sqrt(config.eps_ex) * n
    A0p = {v for v in X if G.degree_into(v, Y) >= thresh}
    B0p = {v for v in Y if G.degree_into(v, X) >= thresh}
    size = min(len(X - A0p), len(Y - B0p)) // K * K

    def pick(side: set[int], other: set[int]) -> set[int]:
        ranked = sorted(side, key=lambda v: (G.degree_into(v, other), v))
        return set(ranked[:size])

    A = pick(X - A0p, Y)
    B = pick(Y - B0p, X)
    P = BiPartition(A=frozenset(A), A0=frozenset(X - A), B=frozenset(B), B0=frozenset(Y - B))
    if P.a < P.b:
        # FR3 asks for |A0| >= |B0|; swapping the labels keeps every other rule intact
        P = P.swapped()
    bad = check_framework(G, P, eps0, K)
    if bad:
        raise ConstructionError(f"framework rules {bad} fail for the locally optimal partition",
                                stage="build_framework", witness=P)
    return Framework(P, float(eps0), K, "FR", G.regular_degree(), None, tuple(history))


def check_weak_framework(F: Graph, G: Graph, P: BiPartition, eps, eps_prime, K: int, D: int) -> list[str]:
    n = G.n
    e, ep = Fraction(str(eps)), Fraction(str(eps_prime))
    bad = []
    try:
        P.check_covers(n)
    except DomainError:
        return ["WF1"]
    A1, B1 = P.A_prime, P.B_prime
    if not is_D_balanced(G, P, D):
        bad.append("WF2")
    if edges_between(G, A1, A1) > e * n * n or edges_between(G, B1, B1) > e * n * n:
        bad.append("WF3")
    if len(P.A) != len(P.B) or len(P.A) % K or P.a + P.b > e * n:
        bad.append("WF4")

    def internal(H: Graph, v: int) -> int:
        return H.degree_into(v, A1 if v in A1 else B1)

    if any(internal(F, v) > ep * n for v in P.A | P.B):
        bad.append("WF5")
    if any(2 * internal(G, v) > G.degree(v) for v in range(n)):
        bad.append("WF6")
    return bad


def check_bi_framework(G: Graph, P: BiPartition, eps, eps_prime, K: int, D: int) -> list[str]:
    n = G.n
    e, ep = Fraction(str(eps)), Fraction(str(eps_prime))
    bad = []
    try:
        P.check_covers(n)
    except DomainError:
        return ["BFR1"]
    A1, B1 = P.A_prime, P.B_prime
    if not is_D_balanced(G, P, D):
        bad.append("BFR2")
    if edges_between(G, A1, A1) > e * n * n or edges_between(G, B1, B1) > e * n * n:
        bad.append("BFR3")
    if len(P.A) != len(P.B) or len(P.A) % K or P.b > P.a or P.a + P.b > e * n:
        bad.append("BFR4")

    def internal(v: int) -> int:
        return G.degree_into(v, A1 if v in A1 else B1)

    if any(internal(v) > ep * n for v in P.A | P.B):
        bad.append("BFR5")
    if P.A0 and P.B0 and edges_between(G, P.A0, P.B0):
        bad.append("BFR6")
    if any(internal(v) > Fraction(G.degree(v), 2) + e * n for v in range(n)):
        bad.append("BFR7")
    return bad


def build_weak_framework(F: Graph, G: Graph, eps, eps_prime, K: int, D: int,
                         config: ToleranceConfig = DEFAULT_CONFIG, seed: int = 0) -> Framework:
    """Weak framework for an eps-bipartite F and a D-regular spanning subgraph G.

    The result is checked against the weakened parameter eps^(1/3).
    """
    n = F.n
    if G.n != n or not G.edges <= F.edges:
        raise ContractError("G must be a spanning subgraph of F")
    if G.regular_degree() != D:
        raise ContractError(f"G must be {D}-regular")
    witness = eps_bipartite(F, eps, config, seed)
    if witness is None:
        raise ContractError(f"F is not {eps}-bipartite")
    S1 = set(witness.A)
    S2 = set(range(n)) - S1
    root = math.sqrt(float(eps)) * n
    S = {x for x in S1 if F.degree_into(x, S1) >= root} | {x for x in S2 if F.degree_into(x, S2) >= root}
    X = set(S1)
    history = [_cut(G, X)]
    while True:
        mover = None
        for v in sorted(S):
            own = X if v in X else set(range(n)) - X
            if 2 * G.degree_into(v, own) > G.degree(v):
                mover = v
                break
        if mover is None:
            break
        X ^= {mover}
        history.append(_cut(G, X))
    Y = set(range(n)) - X
    if len(X) < len(Y):
        X, Y = Y, X
    lim = float(eps_prime) * n
    A0p = {v for v in X if F.degree_into(v, X) >= lim}
    B0p = {v for v in Y if F.degree_into(v, Y) >= lim}
    size = min(len(X - A0p), len(Y - B0p)) // K * K

    def pick(side: set[int], own: set[int]) -> set[int]:
        ranked = sorted(side, key=lambda v: (F.degree_into(v, own), v))
        return set(ranked[:size])

    A = pick(X - A0p, X)
    B = pick(Y - B0p, Y)
    P = BiPartition(A=frozenset(A), A0=frozenset(X - A), B=frozenset(B), B0=frozenset(Y - B))
    eps_out = float(eps) ** (1 / 3)
    bad = check_weak_framework(F, G, P, eps_out, eps_prime, K, D)
    if bad:
        raise ConstructionError(f"weak framework rules {bad} fail", stage="build_weak_framework", witness=P)
    return Framework(P, eps_out, K, "WF", D, float(eps_prime), tuple(history))


# ---------------------------------------------------------------- random equipartitions

@dataclass(frozen=True)
class Equipartition:
    parts: tuple[frozenset[int], ...]
    deviations: dict
    attempts: int


def _deviations(G: Graph, F: Graph, U: Sequence[int], parts: Sequence[Sequence[int]],
                rest: Sequence[Sequence[int]]) -> dict:
    n, K = G.n, len(parts)
    out = {}
    worst_g = worst_f = 0.0
    for v in range(n):
        dg, df = G.degree_into(v, U), F.degree_into(v, U)
        for P in parts:
            worst_g = max(worst_g, abs(K * G.degree_into(v, P) - dg) / n)
            worst_f = max(worst_f, abs(K * F.degree_into(v, P) - df) / n)
    out["ii"], out["vi"] = worst_g, worst_f
    eU = edges_between(G, U, U)
    scale = max(n, eU)
    worst3 = worst4 = 0.0
    for i, j in itertools.combinations(range(K), 2):
        worst3 = max(worst3, abs(K * K * edges_between(G, parts[i], parts[j]) / 2 - eU) / scale)
    for P in parts:
        worst4 = max(worst4, abs(K * K * edges_between(G, P, P) - eU) / scale)
    out["iii"], out["iv"] = worst3, worst4
    worst5 = 0.0
    for R in rest:
        if not R:
            continue
        eR = edges_between(G, U, R)
        for P in parts:
            worst5 = max(worst5, abs(K * edges_between(G, P, R) - eR) / max(n, eR))
    out["v"] = worst5
    return out


def random_equipartition(G: Graph, F: Graph | None, U: Iterable[int], K: int,
                         rest: Sequence[Iterable[int]] | None = None,
                         config: ToleranceConfig = DEFAULT_CONFIG, seed: int = 0) -> Equipartition:
    """Seeded uniform equipartition of U into K parts, redrawn until the degree and edge checks pass."""
    F = G if F is None else F
    U = sorted(set(U))
    if K < 1 or len(U) % K:
        raise DomainError(f"|U|={len(U)} is not divisible by K={K}")
    if rest is None:
        rest = [sorted(set(range(G.n)) - set(U))]
    rest = [sorted(set(R)) for R in rest]
    m = len(U) // K
    rng = random.Random(seed)
    limits = {"ii": config.eps1, "vi": config.eps1, "iii": config.eps2, "iv": config.eps2, "v": config.eps2}
    worst = None
    for attempt in range(1, config.retry_budget + 1):
        order = list(U)
        if K > 1:
            rng.shuffle(order)
        parts = [sorted(order[i * m:(i + 1) * m]) for i in range(K)]
        dev = _deviations(G, F, U, parts, rest)
        if all(dev[k] <= limits[k] + 1e-12 for k in limits):
            return Equipartition(tuple(frozenset(p) for p in parts), dev, attempt)
        if worst is None or max(dev[k] - limits[k] for k in limits) < max(worst[k] - limits[k] for k in limits):
            worst = dev
        if K == 1:
            break
    raise ToleranceError(f"no equipartition within tolerance after {config.retry_budget} draws; "
                         f"best deviations {worst}", stage="random_equipartition", witness=worst)


# ---------------------------------------------------------------- schemes

@dataclass(frozen=True)
class SchemePartition:
    A_clusters: tuple[frozenset[int], ...]
    B_clusters: tuple[frozenset[int], ...]
    A0: frozenset[int]
    B0: frozenset[int]
    eps0: float

    @property
    def K(self) -> int:
        return len(self.A_clusters)

    @property
    def m(self) -> int:
        return len(self.A_clusters[0]) if self.A_clusters else 0

    @property
    def A(self) -> frozenset[int]:
        return frozenset().union(*self.A_clusters)

    @property
    def B(self) -> frozenset[int]:
        return frozenset().union(*self.B_clusters)

    def bipartition(self) -> BiPartition:
        return BiPartition(self.A, self.A0, self.B, self.B0)


def check_scheme(G: Graph, S: SchemePartition, eps1, eps2) -> list[str]:
    """Violated rules among (Sch1)-(Sch3) for G[A]+G[B] and (ESch1)-(ESch5) for the rest."""
    n = G.n
    bad = []
    sizes = {len(c) for c in S.A_clusters + S.B_clusters}
    if len(sizes) != 1 or len(S.A0 | S.B0) > S.eps0 * n:
        bad.append("Sch1")
    A, B = S.A, S.B
    inner = Graph(n, G.induced_edges(A) | G.induced_edges(B))
    outer = G.without_edges(inner.edges)
    m = S.m
    for v in A:
        if any(inner.degree_into(v, Ai) < (1 - eps2) * m - 1e-9 for Ai in S.A_clusters):
            bad.append("Sch3")
            break
    else:
        for v in B:
            if any(inner.degree_into(v, Bi) < (1 - eps2) * m - 1e-9 for Bi in S.B_clusters):
                bad.append("Sch3")
                break
    A1, B1 = A | S.A0, B | S.B0
    if any(outer.degree_into(v, B1) >= S.eps0 * n for v in A) or \
            any(outer.degree_into(v, A1) >= S.eps0 * n for v in B):
        bad.append("ESch3")
    K = S.K
    for v in range(n):
        da, db = outer.degree_into(v, A), outer.degree_into(v, B)
        if any(abs(K * outer.degree_into(v, Ai) - da) > eps1 * n for Ai in S.A_clusters) or \
                any(abs(K * outer.degree_into(v, Bi) - db) > eps1 * n for Bi in S.B_clusters):
            bad.append("ESch4")
            break

    def close(part: int, whole: int, k: int) -> bool:
        return abs(k * part - whole) <= eps1 * max(whole, n)

    ok5 = True
    for X0 in (S.A0, S.B0):
        for side, clusters in ((A, S.A_clusters), (B, S.B_clusters)):
            whole = edges_between(outer, X0, side) if X0 else 0
            for C in clusters:
                part = edges_between(outer, X0, C) if X0 else 0
                ok5 &= close(part, whole, K)
    whole = edges_between(outer, A, B)
    for Ai in S.A_clusters:
        for Bj in S.B_clusters:
            ok5 &= close(edges_between(outer, Ai, Bj), whole, K * K)
    if not ok5:
        bad.append("ESch5")
    return bad


def scheme_partition(G: Graph, F: Framework, m: int | None = None,
                     config: ToleranceConfig = DEFAULT_CONFIG, seed: int = 0) -> SchemePartition:
    """Refine a framework into K clusters per side by two seeded equipartitions."""
    P = F.partition
    K = F.K
    m = len(P.A) // K if m is None else m
    if len(P.A) != K * m or len(P.B) != K * m:
        raise DomainError(f"|A| = |B| must equal K*m = {K * m}")
    rng = random.Random(seed)
    for _ in range(config.retry_budget):
        s1, s2 = rng.randrange(1 << 30), rng.randrange(1 << 30)
        try:
            first = random_equipartition(G, G, P.A, K, [P.A0, P.B0, P.B], config, s1)
            second = random_equipartition(G, G, P.B, K, [P.B0, P.A0, *first.parts], config, s2)
        except ToleranceError:
            continue
        S = SchemePartition(first.parts, second.parts, P.A0, P.B0, F.eps0)
        if not check_scheme(G, S, config.eps1, config.eps2):
            return S
        if K == 1:
            break
    raise ToleranceError("scheme checks failed on every draw", stage="scheme_partition")


# ---------------------------------------------------------------- localized slices

def _deal(items: list, k: int, rng: random.Random) -> list[list]:
    """Random split into k nearly equal parts (sizes differ by at most one)."""
    items = list(items)
    rng.shuffle(items)
    return [items[i::k] for i in range(k)]


def localized_slices(G: Graph, S: SchemePartition, mode: str = "cliques", seed: int = 0,
                     eps=None, config: ToleranceConfig = DEFAULT_CONFIG) -> dict:
    """Split the exceptional edges into K^2 localized pieces.

    mode "cliques": keys (i, j) map to (H, H') where H holds A0-A_i and B0-B_j
    edges and H' the edges of G[A0 + A_i, B0 + B_j].
    mode "bipartite": keys (i, j) map to (H^A, H^B), the localized slices of
    G[A'] and G[B'].
    """
    eps = config.slice_eps if eps is None else eps
    K = S.K
    rng = random.Random(seed)
    if mode == "cliques":
        slices = _cliques_slices(G, S, rng)
        bad = _check_cliques_slices(G, S, slices, eps)
    elif mode == "bipartite":
        slices = _bipartite_slices(G, S, rng)
        bad = []
    else:
        raise DomainError("mode must be 'cliques' or 'bipartite'")
    union: set[Edge] = set()
    total = 0
    for pair in slices.values():
        for part in pair:
            union |= part
            total += len(part)
    if total != len(union):
        raise ConstructionError("slices overlap", stage="localized_slices")
    if bad:
        raise ToleranceError(f"slice checks {bad} failed", stage="localized_slices")
    assert len(slices) == K * K
    return slices


def _cliques_slices(G: Graph, S: SchemePartition, rng: random.Random) -> dict:
    K = S.K
    A, B = S.A_clusters, S.B_clusters
    buckets: dict[tuple[int, int], set[Edge]] = {(i, j): set() for i in range(K) for j in range(K)}
    for i in range(K):
        for j in range(K):
            buckets[i, j] |= G.cross_edges(A[i], B[j])
    for idx, part in enumerate(_deal(sorted(G.cross_edges(S.A0, S.B0)), K * K, rng)):
        buckets[divmod(idx, K)] |= set(part)
    for i in range(K):
        for j, part in enumerate(_deal(sorted(G.cross_edges(S.A0, A[i])), K, rng)):
            buckets[i, j] |= set(part)
        for j, part in enumerate(_deal(sorted(G.cross_edges(S.B0, B[i])), K, rng)):
            buckets[j, i] |= set(part)
        for j, part in enumerate(_deal(sorted(G.cross_edges(S.B0, A[i])), K, rng)):
            buckets[i, j] |= set(part)
        for j, part in enumerate(_deal(sorted(G.cross_edges(S.A0, B[i])), K, rng)):
            buckets[j, i] |= set(part)
    A1, B1 = S.A | S.A0, S.B | S.B0
    out = {}
    for key, es in buckets.items():
        inside = {e for e in es if (e[0] in A1) == (e[1] in A1)}
        out[key] = (frozenset(inside), frozenset(es - inside))
    return out


def _check_cliques_slices(G: Graph, S: SchemePartition, slices: dict, eps) -> list[str]:
    n, K = G.n, S.K
    A1, B1 = S.A | S.A0, S.B | S.B0
    cross = edges_between(G, A1, B1)
    bad = set()
    V0 = S.A0 | S.B0
    for (i, j), (H, Hp) in slices.items():
        Ai, Bj = S.A_clusters[i], S.B_clusters[j]
        for u, v in H:
            ok = ({u, v} & S.A0 and {u, v} & Ai) or ({u, v} & S.B0 and {u, v} & Bj)
            if not ok:
                bad.add("a1")
        for u, v in Hp:
            if not ({u, v} & (S.A0 | Ai) and {u, v} & (S.B0 | Bj)):
                bad.add("a2")
        if abs(K * K * len(Hp) - cross) > 4 * eps * max(n, cross):
            bad.add("a3")
        Hg, Hpg = Graph(n, H), Graph(n, Hp)
        for v in V0:
            dv_cross = G.degree_into(v, B1 if v in A1 else A1)
            if abs(K * K * Hpg.degree(v) - dv_cross) > 2 * eps * n:
                bad.add("a4")
            if abs(K * K * (Hg.degree(v) + Hpg.degree(v)) - G.degree(v)) > 4 * eps * n:
                bad.add("a5")
    return sorted(bad)


def _bipartite_slices(G: Graph, S: SchemePartition, rng: random.Random) -> dict:
    K = S.K
    out = {}
    halves = {}
    for side, X0, clusters in (("A", S.A0, S.A_clusters), ("B", S.B0, S.B_clusters)):
        buckets = {(i, j): set() for i in range(K) for j in range(K)}
        for i in range(K):
            for j, part in enumerate(_deal(sorted(G.cross_edges(X0, clusters[i])), K, rng)):
                buckets[i, j] |= set(part)
            buckets[i, i] |= G.induced_edges(clusters[i])
            for j in range(i + 1, K):
                es = sorted(G.cross_edges(clusters[i], clusters[j]))
                buckets[i, j] |= set(es[: len(es) // 2])
                buckets[j, i] |= set(es[len(es) // 2:])
        for idx, part in enumerate(_deal(sorted(G.induced_edges(X0)), K * K, rng)):
            buckets[divmod(idx, K)] |= set(part)
        halves[side] = buckets
    for key in halves["A"]:
        out[key] = (frozenset(halves["A"][key]), frozenset(halves["B"][key]))
    return out


# ---------------------------------------------------------------- regularity

@dataclass(frozen=True)
class RegularityVerdict:
    ok: bool
    rule: str = ""
    witness: tuple = ()


def _pair_matrix(G: Graph, X: Sequence[int], Y: Sequence[int]) -> np.ndarray:
    M = np.zeros((len(X), len(Y)), dtype=np.int64)
    iy = {y: j for j, y in enumerate(Y)}
    for i, x in enumerate(X):
        for w in G.adj[x]:
            if w in iy:
                M[i, iy[w]] = 1
    return M


def _density_extremes(M: np.ndarray, min_a: int, min_b: int, cap: int):
    """Yield (subset rows, size b, min density, max density, argmin cols, argmax cols) over all row subsets."""
    p, q = M.shape
    if p > cap or q > cap:
        raise ResourceError(f"exact regularity check capped at class size {cap}")
    bits = 1 << np.arange(p, dtype=np.int64)
    masks = np.arange(1, 1 << p, dtype=np.int64)
    S = ((masks[:, None] & bits[None, :]) > 0).astype(np.int64)
    sizes = S.sum(axis=1)
    keep = sizes >= min_a
    S, sizes = S[keep], sizes[keep]
    deg = S @ M  # per chosen row set, degree of each column into it
    order = np.argsort(deg, axis=1, kind="stable")
    sorted_deg = np.take_along_axis(deg, order, axis=1)
    low = np.cumsum(sorted_deg, axis=1)
    high = np.cumsum(sorted_deg[:, ::-1], axis=1)
    for b in range(max(min_b, 1), q + 1):
        yield S, sizes, b, low[:, b - 1] / (sizes * b), high[:, b - 1] / (sizes * b), order


def is_eps_regular(G: Graph, X: Sequence[int], Y: Sequence[int], eps,
                   config: ToleranceConfig = DEFAULT_CONFIG) -> RegularityVerdict:
    """Exact check: every X' >= eps|X|, Y' >= eps|Y| has |d(X',Y') - d(X,Y)| < eps."""
    X, Y = sorted(X), sorted(Y)
    M = _pair_matrix(G, X, Y)
    eps = float(eps)
    d0 = M.sum() / (len(X) * len(Y))
    for S, sizes, b, lo, hi, order in _density_extremes(
            M, math.ceil(eps * len(X) - 1e-12), math.ceil(eps * len(Y) - 1e-12), config.regularity_cap):
        # zero deviation always passes, so eps = 0 accepts exactly the complete and empty pairs
        dev_lo, dev_hi = d0 - lo, hi - d0
        dev_lo[dev_lo < 1e-12] = 0
        dev_hi[dev_hi < 1e-12] = 0
        if ((dev_lo >= eps) & (dev_lo > 0)).any() or ((dev_hi >= eps) & (dev_hi > 0)).any():
            use_hi = dev_hi.max() >= dev_lo.max()
            r = int(np.argmax(dev_hi if use_hi else dev_lo))
            cols = order[r, ::-1][:b] if use_hi else order[r, :b]
            rows = [X[i] for i in np.flatnonzero(S[r])]
            return RegularityVerdict(False, "eps-regular", (tuple(rows), tuple(Y[c] for c in sorted(cols))))
    return RegularityVerdict(True)


def is_superregular(G: Graph, X: Sequence[int], Y: Sequence[int], eps, d,
                    config: ToleranceConfig = DEFAULT_CONFIG) -> RegularityVerdict:
    eps, d = float(eps), float(d)
    for P, Q in ((X, Y), (Y, X)):
        for v in P:
            if abs(G.degree_into(v, Q) - d * len(Q)) > eps * len(Q) + 1e-9:
                return RegularityVerdict(False, "degree", (v,))
    return is_eps_regular(G, X, Y, eps, config)


def is_sparse_superregular(G: Graph, X: Sequence[int], Y: Sequence[int], eps, d, dstar, c,
                           config: ToleranceConfig = DEFAULT_CONFIG) -> RegularityVerdict:
    """(Reg1)-(Reg4) for a bipartite pair with classes of size m."""
    X, Y = sorted(X), sorted(Y)
    m = len(X)
    if len(Y) != m:
        raise DomainError("sparse superregularity needs classes of equal size")
    eps, d, dstar, c = map(float, (eps, d, dstar, c))
    pair = set(X) | set(Y)
    deg = {v: G.degree_into(v, Y if v in set(X) else X) for v in pair}
    if min(deg.values()) < dstar * m - 1e-9:
        v = min(deg, key=lambda x: (deg[x], x))
        return RegularityVerdict(False, "Reg4", (v,))
    if max(deg.values()) > c * m + 1e-9:
        v = max(deg, key=lambda x: (deg[x], -x))
        return RegularityVerdict(False, "Reg3", (v,))
    for side, other in ((X, Y), (Y, X)):
        nb = {v: set(G.adj[v]) & set(other) for v in side}
        for u, w in itertools.combinations(side, 2):
            if len(nb[u] & nb[w]) > c * c * m + 1e-9:
                return RegularityVerdict(False, "Reg2", (u, w))
    M = _pair_matrix(G, X, Y)
    need = math.ceil(eps * m - 1e-12)
    for S, sizes, b, lo, hi, order in _density_extremes(M, need, need, config.regularity_cap):
        if (lo < (1 - eps) * d - 1e-12).any() or (hi > (1 + eps) * d + 1e-12).any():
            r = int(np.argmax((lo < (1 - eps) * d - 1e-12) | (hi > (1 + eps) * d + 1e-12)))
            rows = tuple(X[i] for i in np.flatnonzero(S[r]))
            return RegularityVerdict(False, "Reg1", (rows, b))
    return RegularityVerdict(True)


def sparse_split(G: Graph, X: Sequence[int], Y: Sequence[int], gamma, eps, mu=0, seed: int = 0,
                 config: ToleranceConfig = DEFAULT_CONFIG) -> tuple[Graph, Graph]:
    """Random H keeping each edge with probability 2*gamma, redrawn until it is
    (eps, 2gamma, gamma, 3gamma)-superregular and G - H has degrees (1 - mu +- 4gamma)m."""
    X, Y = sorted(X), sorted(Y)
    m = len(X)
    gamma, mu = float(gamma), float(mu)
    rng = random.Random(seed)
    pair_edges = sorted(G.cross_edges(X, Y))
    last = None
    for _ in range(config.retry_budget):
        H = Graph(G.n, [e for e in pair_edges if rng.random() < 2 * gamma])
        last = is_sparse_superregular(H, X, Y, eps, 2 * gamma, gamma, 3 * gamma, config)
        if not last.ok:
            continue
        rest = Graph(G.n, set(pair_edges) - H.edges)
        if all(abs(rest.degree_into(v, Y if v in set(X) else X) - (1 - mu) * m) <= 4 * gamma * m + 1e-9
               for v in X + Y):
            return H, rest
    raise ToleranceError(f"no superregular slice after {config.retry_budget} draws (last: {last})",
                         stage="sparse_split")

"""Command-line entry point: ``hamdecomp <command> ...``.

Exit codes: 0 success, 1 verified negative answer, 2 infeasible or out of
tolerance, 3 usage or malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import TextIO

from . import assembly, classic, exceptional, oracles, structure
from .config import DEFAULT_CONFIG, ToleranceConfig, load_config
from .errors import ConstructionError, ContractError, DomainError, HamDecompError, ResourceError
from .graph import (Decomposition, Graph, format_decomposition, format_graph, format_partition, generate,
                    parse_decomposition, parse_graph, parse_partition)

EXIT_OK, EXIT_NEGATIVE, EXIT_INFEASIBLE, EXIT_USAGE = 0, 1, 2, 3

ORACLES = ("one-factorization", "ham-decomposition", "ham-packing", "capped-max", "reg-even")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message} (see '{self.prog} --help')")


def _read_text(path: str, stdin: TextIO) -> str:
    if path == "-":
        return stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_graph(path: str, stdin: TextIO) -> Graph:
    # a bare token like "k5" is accepted as shorthand for a generated graph
    alias = _family_alias(path)
    if alias is not None:
        return alias
    return parse_graph(_read_text(path, stdin))


def _family_alias(token: str) -> Graph | None:
    if token == "-" or "/" in token or "." in token:
        return None
    head = token.rstrip("0123456789")
    tail = token[len(head):]
    if head.lower() in ("k", "c") and tail:
        try:
            return generate("complete" if head.lower() == "k" else "cycle", int(tail))
        except DomainError:
            return None
    return None


def _parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--config", default=None, help="flat key=value tolerance file")
    common.add_argument("--out", default=None, help="write the result here instead of stdout")

    top = _Parser(prog="hamdecomp", description="Hamilton and 1-factor decompositions of dense regular graphs")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common], help="generate a graph family")
    p.add_argument("family")
    p.add_argument("params", nargs="*", type=int)

    p = sub.add_parser("classify", parents=[common], help="classify a dense graph")
    p.add_argument("graph")
    p.add_argument("--eps", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--tau", type=float)

    p = sub.add_parser("framework", parents=[common], help="build a framework partition")
    p.add_argument("graph")
    p.add_argument("--K", type=int)
    p.add_argument("--eps0", type=float)

    p = sub.add_parser("decompose", parents=[common], help="construct a decomposition")
    p.add_argument("graph")
    p.add_argument("--mode", choices=("walecki", "bip", "petersen", "demo"), default="walecki")
    p.add_argument("--K", type=int, default=3, help="clusters per side in demo mode")

    p = sub.add_parser("regeven", parents=[common], help="largest even r with an r-regular spanning subgraph")
    p.add_argument("graph")

    p = sub.add_parser("critical", parents=[common], help="criticality of a bipartition")
    p.add_argument("graph")
    p.add_argument("partition")
    p.add_argument("--D", type=int, required=True)

    p = sub.add_parser("verify", parents=[common], help="verify a decomposition file")
    p.add_argument("graph")
    p.add_argument("decomposition")

    p = sub.add_parser("oracle", parents=[common], help="run a brute-force oracle")
    p.add_argument("which", choices=ORACLES)
    p.add_argument("graph")
    p.add_argument("--b", type=int, default=1, help="degree cap for capped-max")
    return top


# ---------------------------------------------------------------- commands

def _cmd_gen(a, cfg, stdin):
    return EXIT_OK, format_graph(generate(a.family, *a.params))


def _cmd_classify(a, cfg, stdin):
    G = _load_graph(a.graph, stdin)
    try:
        cls = structure.classify(G, a.eps, a.nu, a.tau, cfg, a.seed)
    except structure.ClassificationError as exc:
        return EXIT_INFEASIBLE, f"unclassified: {exc}\n"
    lines = [f"class: {cls.kind}", f"exact: {'yes' if cls.exact else 'no'}"]
    if cls.witness is not None:
        lines.append("witness: " + " ".join(map(str, sorted(cls.witness))))
    return EXIT_OK, "\n".join(lines) + "\n"


def _cmd_framework(a, cfg, stdin):
    G = _load_graph(a.graph, stdin)
    W = structure.build_framework(G, a.eps0, a.K, cfg, a.seed)
    return EXIT_OK, format_partition(W.partition)


def _relabel_bipartite(G: Graph) -> tuple[int, list[int]]:
    import networkx as nx
    g = G.to_networkx()
    if not nx.is_connected(g) or not nx.is_bipartite(g):
        raise ContractError("bip mode needs a connected complete bipartite graph")
    X, Y = nx.bipartite.sets(g)
    X, Y = sorted(X), sorted(Y)
    if 0 not in X:
        X, Y = Y, X
    if len(X) != len(Y) or G.m != len(X) * len(Y):
        raise ContractError("bip mode needs K_{K,K}")
    return len(X), X + Y


def _decompose(G: Graph, a, cfg) -> Decomposition:
    if a.mode == "walecki":
        if G.m != G.n * (G.n - 1) // 2:
            raise ContractError("walecki mode needs a complete graph")
        return classic.walecki(G.n)
    if a.mode == "bip":
        K, label = _relabel_bipartite(G)
        D = classic.bipartite_ham_decompose(K)
        return Decomposition(G, [[label[v] for v in c] for c in D.cycles], [], complete=True)
    if a.mode == "petersen":
        cycles, matchings = [], []
        for f in classic.two_factorization(G):
            comps = f.components()
            if len(comps) == 1:
                cycles.append(assembly._cycle_order(f))
            else:
                try:
                    matchings.extend(exceptional.split_two_cycles(f))
                except DomainError as exc:
                    raise ContractError(f"a 2-factor is neither Hamiltonian nor splittable: {exc}") from None
        return Decomposition(G, cycles, matchings, complete=True)
    return _demo(G, a, cfg)


def _demo(G: Graph, a, cfg) -> Decomposition:
    cfg = cfg.with_overrides(K=a.K)
    W = structure.build_framework(G, None, a.K, cfg, a.seed)
    S = structure.scheme_partition(G, W, None, cfg, a.seed)
    P = W.partition
    cover = exceptional.cover_A0B0(G, G, W, cfg, a.seed)
    systems = [exceptional.extend_candidate(exceptional.paths_from_edges(ps), G, P, W.eps0)
               for ps in cover.path_systems]
    result = assembly.approx_decompose_demo(G, S, systems, "two_cliques", cfg, a.seed)
    return result.decomposition(G)


def _cmd_decompose(a, cfg, stdin):
    G = _load_graph(a.graph, stdin)
    D = _decompose(G, a, cfg)
    cert = oracles.verify_decomposition(G, D)
    if not cert.ok:
        raise ConstructionError(f"refusing to emit an unverified decomposition: {cert}", stage="verify")
    return EXIT_OK, format_decomposition(D)


def _cmd_regeven(a, cfg, stdin):
    return EXIT_OK, f"{classic.reg_even(_load_graph(a.graph, stdin))}\n"


def _cmd_critical(a, cfg, stdin):
    if a.graph == "-" and a.partition == "-":
        raise UsageError("only one of graph and partition can be read from stdin")
    G = _load_graph(a.graph, stdin)
    P = parse_partition(_read_text(a.partition, stdin))
    rep = structure.criticality(G, P, a.D)
    text = json.dumps({
        "critical": rep.is_critical, "max_cross_degree": rep.max_cross_degree,
        "capped_max_edges": rep.capped_max_edges, "cap": rep.cap, "heavy": sorted(rep.heavy),
    }, sort_keys=True) + "\n"
    return (EXIT_OK if rep.is_critical else EXIT_NEGATIVE), text


def _cmd_verify(a, cfg, stdin):
    if a.graph == "-" and a.decomposition == "-":
        raise UsageError("only one of graph and decomposition can be read from stdin")
    G = _load_graph(a.graph, stdin)
    D = parse_decomposition(_read_text(a.decomposition, stdin), G)
    cert = oracles.verify_decomposition(G, D)
    return (EXIT_OK if cert.ok else EXIT_NEGATIVE), f"{cert}\n"


def _cmd_oracle(a, cfg, stdin):
    G = _load_graph(a.graph, stdin)
    if a.which == "one-factorization":
        D = oracles.brute_one_factorization(G, cfg)
    elif a.which == "ham-decomposition":
        D = oracles.brute_ham_decomposition(G, cfg)
    elif a.which == "ham-packing":
        k, cycles = oracles.max_ham_packing(G, cfg)
        body = "".join("C: " + " ".join(map(str, c)) + "\n" for c in cycles)
        return EXIT_OK, f"packing: {k}\n{body}"
    elif a.which == "capped-max":
        return EXIT_OK, f"{oracles.brute_degree_capped_max(G, a.b, cfg)}\n"
    else:
        return EXIT_OK, f"{oracles.reg_even_oracle(G, cfg)}\n"
    if D is None:
        return EXIT_NEGATIVE, "none\n"
    return EXIT_OK, format_decomposition(D)


COMMANDS = {
    "gen": _cmd_gen, "classify": _cmd_classify, "framework": _cmd_framework, "decompose": _cmd_decompose,
    "regeven": _cmd_regeven, "critical": _cmd_critical, "verify": _cmd_verify, "oracle": _cmd_oracle,
}


def run(argv: list[str], stdin: TextIO | None = None) -> tuple[int, str, str]:
    """Run one command and return (exit code, stdout text, stderr text) without touching the process streams."""
    stdin = sys.stdin if stdin is None else stdin
    try:
        a = _parser().parse_args(argv)
    except UsageError as exc:
        return EXIT_USAGE, "", f"usage error: {exc}\n"
    except SystemExit as exc:  # --help
        return (EXIT_OK if not exc.code else EXIT_USAGE), "", ""
    try:
        cfg: ToleranceConfig = load_config(a.config) if a.config else DEFAULT_CONFIG
        code, text = COMMANDS[a.command](a, cfg, stdin)
    except UsageError as exc:
        return EXIT_USAGE, "", f"usage error: {exc}\n"
    except OSError as exc:
        return EXIT_USAGE, "", f"usage error: {exc}\n"
    except ContractError as exc:
        return EXIT_INFEASIBLE, "", f"precondition not met: {exc}\n"
    except DomainError as exc:
        return EXIT_USAGE, "", f"usage error: {exc}\n"
    except ResourceError as exc:
        return EXIT_INFEASIBLE, "", f"resource limit: {exc}\n"
    except HamDecompError as exc:
        return EXIT_INFEASIBLE, "", f"infeasible: {exc}\n"
    if a.out:
        try:
            with open(a.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            return EXIT_USAGE, "", f"usage error: cannot write {a.out}: {exc.strerror}\n"
        return code, "", ""
    return code, text, ""


def main(argv: list[str] | None = None) -> int:
    code, out, err = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())

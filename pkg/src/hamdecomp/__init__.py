"""Constructive Hamilton and 1-factor decompositions of dense regular graphs."""

from .config import DEFAULT_CONFIG, ToleranceConfig, load_config, parse_config
from .errors import (ConstructionError, ContractError, DomainError, HamDecompError, InfeasibleError, ParseError,
                     ResourceError, ToleranceError)
from .graph import (BiPartition, Decomposition, Digraph, Graph, degree_threshold, generate, parse_decomposition,
                    parse_graph, parse_partition)
from .oracles import verify_decomposition

__all__ = [
    "BiPartition", "ConstructionError", "ContractError", "DEFAULT_CONFIG", "Decomposition", "Digraph",
    "DomainError", "Graph", "HamDecompError", "InfeasibleError", "ParseError", "ResourceError",
    "ToleranceConfig", "ToleranceError", "degree_threshold", "generate", "load_config", "parse_config",
    "parse_decomposition", "parse_graph", "parse_partition", "verify_decomposition",
]

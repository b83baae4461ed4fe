"""Explicit tolerances replacing asymptotic constant hierarchies.

A config file is flat ``key=value`` text; unknown keys are rejected so that
typos do not silently fall back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from fractions import Fraction
from typing import TextIO

from .errors import ParseError


@dataclass(frozen=True)
class ToleranceConfig:
    # closeness / classification
    eps: float = 0.02
    eps_ex: float = 0.05
    nu: float = 0.1
    tau: float = 0.3
    kappa: float = 0.15
    # frameworks
    eps0: float = 0.2
    eps_prime: float = 0.3
    K: int = 1
    # random partitions and slices
    eps1: float = 0.25
    eps2: float = 0.25
    slice_eps: float = 0.25
    retry_budget: int = 200
    # exact-mode caps
    expander_cap: int = 22
    expander_samples: int = 2000
    regularity_cap: int = 16
    bisection_exact_cap: int = 14
    one_factor_cap: int = 14
    ham_decomp_cap: int = 12
    packing_cap: int = 10
    capped_max_cap: int = 24
    reg_even_oracle_cap: int = 12
    # search limits (seconds)
    hamilton_deadline: float = 20.0
    # assign_degrees lower bound on a_i as a fraction of r
    matrix_lower: Fraction = Fraction(31, 60)
    # assembly: per-pair degree of a pre-split balanced-extension reserve
    # (0 draws reserve edges on demand from the system itself), and the
    # allowed relative degree deviation inside a cyclic system
    reserve_degree: int = 0
    reserve_degree_bip: int = 0
    system_eps: float = 0.75

    def with_overrides(self, **kw) -> ToleranceConfig:
        return replace(self, **kw)


DEFAULT_CONFIG = ToleranceConfig()


def _cast(kind, raw: str):
    if kind is int or kind == "int":
        return int(raw)
    if kind is float or kind == "float":
        return float(raw)
    if kind is Fraction or kind == "Fraction":
        return Fraction(raw)
    return raw


def parse_config(source: str | TextIO) -> ToleranceConfig:
    text = source if isinstance(source, str) else source.read()
    kinds = {f.name: f.type for f in fields(ToleranceConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep:
            raise ParseError("expected key=value", lineno)
        if key not in kinds:
            raise ParseError(f"unknown tolerance key {key!r}", lineno)
        try:
            values[key] = _cast(kinds[key], val)
        except ValueError:
            raise ParseError(f"bad value for {key}: {val!r}", lineno) from None
    return replace(DEFAULT_CONFIG, **values)


def load_config(path: str | None) -> ToleranceConfig:
    if path is None:
        return DEFAULT_CONFIG
    with open(path) as fh:
        return parse_config(fh)


def format_config(cfg: ToleranceConfig) -> str:
    return "".join(f"{f.name}={getattr(cfg, f.name)}\n" for f in fields(cfg))

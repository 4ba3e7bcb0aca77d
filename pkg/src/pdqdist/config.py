"""
Configuration models for pdqdist: size limits and CLI run configuration.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .errors import ParameterError

QUBIT_CAP_ENV = "PDQ_QUBIT_CAP"


@dataclass(frozen=True)
class Limits:
    """Desk-scale caps for the simulator, the enumerators and the Rips generator."""

    qubit_cap: int = 24
    enumeration_cap: int = 24
    cloud_cap: int = 256
    max_grid_points: int = 200_000

    def validate(self) -> None:
        """
        Validate that every cap is a positive integer.

        Raises:
            ParameterError: If any cap is invalid
        """
        for name in ("qubit_cap", "enumeration_cap", "cloud_cap", "max_grid_points"):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise ParameterError(f"{name} must be a positive integer, got {value!r}")

    @classmethod
    def from_env(cls) -> "Limits":
        """
        Build the default limits, honouring PDQ_QUBIT_CAP when set.

        The variable overrides both the simulator and the enumeration cap.
        """
        limits = cls()
        raw = os.getenv(QUBIT_CAP_ENV)
        if raw:
            try:
                cap = int(raw)
            except ValueError:
                raise ParameterError(f"{QUBIT_CAP_ENV} must be an integer, got {raw!r}") from None
            limits = replace(limits, qubit_cap=cap, enumeration_cap=cap)
        limits.validate()
        return limits


def resolve_limits(limits: Optional[Limits]) -> Limits:
    return limits if limits is not None else Limits.from_env()


class Subcommand(str, Enum):
    EXACT = "exact"
    QAOA = "qaoa"
    GRAPH = "graph"
    ENUMERATE = "enumerate"
    VERIFY = "verify"
    RIPS = "rips"
    GEN_EXAMPLE = "gen-example"
    TREE = "tree"


# Subcommands that read a pair of diagrams.
PAIR_COMMANDS = frozenset(
    {
        Subcommand.EXACT,
        Subcommand.QAOA,
        Subcommand.GRAPH,
        Subcommand.ENUMERATE,
        Subcommand.VERIFY,
        Subcommand.TREE,
    }
)


@dataclass
class RunConfig:
    """Everything one CLI invocation needs, validated before any work starts."""

    subcommand: Subcommand
    d1: Optional[str] = None
    d2: Optional[str] = None
    variant: str = "wasserstein"
    p: float = 2.0
    q: float = math.inf
    c: Optional[float] = None
    layers: int = 1
    shots: int = 10000
    seed: int = 0
    grid: int = 16
    strategy: str = "grid"
    out: Optional[str] = None
    histogram: Optional[str] = None
    trace: Optional[str] = None
    with_exact: bool = False
    strict_only: bool = False
    clause: str = "symmetric"
    beta: float = 0.7
    cloud: Optional[str] = None
    max_dim: int = 1
    max_scale: float = 4.0
    min_persistence: float = 0.0
    format: Optional[str] = None
    log_level: str = "WARNING"
    limits: Limits = field(default_factory=Limits)

    @property
    def writes_diagram_files(self) -> bool:
        return self.subcommand in (Subcommand.RIPS, Subcommand.GEN_EXAMPLE)

    def validate(self) -> None:
        """
        Validate ranges declared by the downstream modules.

        Raises:
            ParameterError: If any field is out of range or a required path is missing
        """
        if self.subcommand in PAIR_COMMANDS and (not self.d1 or not self.d2):
            raise ParameterError(f"{self.subcommand.value} requires --d1 and --d2")
        if self.subcommand == Subcommand.RIPS and not self.cloud:
            raise ParameterError("rips requires --cloud")
        if self.writes_diagram_files and not self.out:
            raise ParameterError(f"{self.subcommand.value} requires --out DIRECTORY")
        if not self.p >= 1:
            raise ParameterError("p must be >= 1")
        if not self.q >= 1:
            raise ParameterError("q must be >= 1 or inf")
        if self.variant == "dcp":
            if self.c is None:
                raise ParameterError("the dcp variant requires -c")
            if not self.c > 0:
                raise ParameterError("c must be positive")
        if self.layers < 0:
            raise ParameterError("layers must be non-negative")
        if self.shots < 1:
            raise ParameterError("shots must be positive")
        if self.grid < 2:
            raise ParameterError("grid resolution must be at least 2")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        if self.max_dim not in (0, 1):
            raise ParameterError("max-dim must be 0 or 1")
        if not self.max_scale > 0:
            raise ParameterError("max-scale must be positive")
        if self.min_persistence < 0:
            raise ParameterError("min-persistence must be non-negative")
        allowed = ("csv", "json") if self.writes_diagram_files else ("json", "csv", "text")
        if self.format is not None and self.format not in allowed:
            raise ParameterError(
                f"{self.subcommand.value} writes {'/'.join(allowed)}, not {self.format}"
            )
        self.limits.validate()

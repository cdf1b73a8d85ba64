"""Mixed integer/real search space for the tunable AODV protocol parameters.

The space has eleven genes in a fixed, documented order: five real-valued
timers followed by six integer counters. Arbitrary real vectors are made
valid by ``repair`` (round integer genes half-away-from-zero, then clamp
into bounds), which every variation operator applies before a genome is
evaluated or stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GeneSpec",
    "ParamSpace",
    "Genome",
    "GenomeError",
    "Violation",
    "aodv_param_space",
    "rfc_default",
    "repair",
    "validate",
]

REAL = "real"
INTEGER = "integer"

N_GENES = 11


class GenomeError(ValueError):
    """A vector does not have the structure the space requires."""


@dataclass(frozen=True)
class GeneSpec:
    """One tunable parameter: its kind, bounds, and standard default."""

    name: str
    kind: str
    lower: float
    upper: float
    rfc_default: float

    def __post_init__(self):
        if self.kind not in (REAL, INTEGER):
            raise ValueError(f"unknown gene kind {self.kind!r}")
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: lower must be < upper")
        if not self.lower <= self.rfc_default <= self.upper:
            raise ValueError(f"{self.name}: default outside bounds")
        if self.kind == INTEGER:
            for label, v in (("lower", self.lower), ("upper", self.upper),
                             ("default", self.rfc_default)):
                if v != int(v):
                    raise ValueError(f"{self.name}: integer gene has non-integral {label}")


@dataclass(frozen=True)
class ParamSpace:
    """Ordered collection of gene specs; gene order is part of the contract."""

    genes: tuple[GeneSpec, ...]

    def __post_init__(self):
        if len(self.genes) != N_GENES:
            raise ValueError(f"expected {N_GENES} genes, got {len(self.genes)}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.genes)

    def lowers(self) -> np.ndarray:
        return np.array([g.lower for g in self.genes])

    def uppers(self) -> np.ndarray:
        return np.array([g.upper for g in self.genes])

    def index(self, name: str) -> int:
        return self.names.index(name)


@dataclass(frozen=True)
class Genome:
    """Candidate configuration: 11 reals, integer genes stored as integral reals."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != N_GENES:
            raise GenomeError(f"genome needs {N_GENES} values, got {len(self.values)}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)

    def as_dict(self, space: ParamSpace) -> dict[str, float]:
        return dict(zip(space.names, self.values))

    def to_csv_row(self, space: ParamSpace) -> str:
        return ",".join(format_value(v, g) for v, g in zip(self.values, space.genes))

    def to_keyed_text(self, space: ParamSpace) -> str:
        lines = [f"{g.name}={format_value(v, g)}"
                 for v, g in zip(self.values, space.genes)]
        return "\n".join(lines) + "\n"


def format_value(v: float, gene: GeneSpec) -> str:
    """Shortest round-tripping text form; integer genes print without a decimal."""
    if gene.kind == INTEGER and v == int(v):
        return str(int(v))
    return repr(float(v))


# Standard AODV parameterization (RFC 3561) and the tuning ranges, in the
# frozen gene order used by every genome, log row, and config file.
AODV_GENES = (
    GeneSpec("HELLO_INTERVAL", REAL, 1.0, 20.0, 1.0),
    GeneSpec("ACTIVE_ROUTE_TIMEOUT", REAL, 1.0, 20.0, 3.0),
    GeneSpec("MY_ROUTE_TIMEOUT", REAL, 1.0, 40.0, 6.0),
    GeneSpec("NODE_TRAVERSAL_TIME", REAL, 0.01, 15.0, 0.040),
    GeneSpec("MAX_RREQ_TIMEOUT", REAL, 1.0, 100.0, 10.0),
    GeneSpec("NET_DIAMETER", INTEGER, 3, 100, 35),
    GeneSpec("ALLOWED_HELLO_LOSS", INTEGER, 0, 20, 2),
    GeneSpec("RREQ_RETRIES", INTEGER, 0, 20, 2),
    GeneSpec("TTL_START", INTEGER, 1, 40, 1),
    GeneSpec("TTL_INCREMENT", INTEGER, 1, 20, 2),
    GeneSpec("TTL_THRESHOLD", INTEGER, 1, 60, 7),
)


def aodv_param_space() -> ParamSpace:
    """The AODV space; the only space shipped in v1."""
    return ParamSpace(AODV_GENES)


def rfc_default(space: ParamSpace) -> Genome:
    """Genome holding the standard (RFC 3561) value of every parameter."""
    return Genome(tuple(g.rfc_default for g in space.genes))


def _round_half_away(x: float) -> float:
    return math.floor(x + 0.5) if x >= 0 else math.ceil(x - 0.5)


def repair(g: Genome | Sequence[float], space: ParamSpace) -> Genome:
    """Make an arbitrary vector valid: round integer genes, clamp all into bounds.

    Idempotent, and the identity on already-valid genomes.
    """
    values = g.values if isinstance(g, Genome) else tuple(float(v) for v in g)
    if len(values) != N_GENES:
        raise GenomeError(f"genome needs {N_GENES} values, got {len(values)}")
    out = []
    for v, gene in zip(values, space.genes):
        if gene.kind == INTEGER:
            v = _round_half_away(v)
        out.append(min(max(v, gene.lower), gene.upper))
    return Genome(tuple(out))


@dataclass(frozen=True)
class Violation:
    index: int
    name: str
    value: float
    reason: str


def validate(g: Genome, space: ParamSpace) -> list[Violation]:
    """Every way ``g`` deviates from the space; empty list means valid.

    A genome is valid exactly when ``repair(g) == g``.
    """
    violations = []
    for i, (v, gene) in enumerate(zip(g.values, space.genes)):
        if gene.kind == INTEGER and v != int(v):
            violations.append(Violation(i, gene.name, v, "not integral"))
        if v < gene.lower:
            violations.append(Violation(i, gene.name, v, f"below lower bound {gene.lower}"))
        elif v > gene.upper:
            violations.append(Violation(i, gene.name, v, f"above upper bound {gene.upper}"))
    return violations


def genome_from_csv_row(row: str) -> Genome:
    parts = [p.strip() for p in row.strip().split(",")]
    if len(parts) != N_GENES:
        raise GenomeError(f"expected {N_GENES} comma-separated values, got {len(parts)}")
    try:
        return Genome(tuple(float(p) for p in parts))
    except ValueError as exc:
        raise GenomeError(f"bad genome value: {exc}") from exc


def genome_from_keyed_text(text: str | Iterable[str], space: ParamSpace) -> Genome:
    """Parse ``PARAMETER_NAME=value`` lines (any order, all 11 required)."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    seen: dict[str, float] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise GenomeError(f"line {lineno}: expected NAME=value, got {raw!r}")
        name, _, value = line.partition("=")
        name = name.strip()
        if name not in space.names:
            raise GenomeError(f"line {lineno}: unknown parameter {name!r}")
        if name in seen:
            raise GenomeError(f"line {lineno}: duplicate parameter {name!r}")
        try:
            seen[name] = float(value.strip())
        except ValueError as exc:
            raise GenomeError(f"line {lineno}: bad value for {name}: {value.strip()!r}") from exc
    missing = [n for n in space.names if n not in seen]
    if missing:
        raise GenomeError(f"missing parameters: {', '.join(missing)}")
    return Genome(tuple(seen[n] for n in space.names))

"""Scalar fitness of a configuration from Monte-Carlo energy and delivery metrics.

The score to minimize blends the energy ratio against a baseline configuration
(weight 0.9) with the packet delivery ratio (weight -0.1) plus a 0.1 offset,
which keeps it in [0, 1] whenever the candidate uses no more energy than the
baseline. Candidates whose delivery ratio drops below an allowed degradation
threshold get a continuous penalty on top, so their genetic material stays
comparable instead of being discarded outright.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

from .sim.engine import SimOutcome

__all__ = [
    "ReferenceValues",
    "FitnessWeights",
    "FitnessReport",
    "aggregate",
    "fitness",
    "penalized_fitness",
    "pdr_floor",
    "score",
]


@dataclass(frozen=True)
class ReferenceValues:
    """Baseline energy and delivery ratio that normalize the score."""

    energy: float
    pdr: float
    pdr_max: float = 1.0

    def __post_init__(self):
        if self.energy <= 0:
            raise ValueError("reference energy must be positive")
        if not 0 < self.pdr <= 1:
            raise ValueError("reference pdr must be in (0, 1]")


@dataclass(frozen=True)
class FitnessWeights:
    """Score coefficients. ``literal_floor`` switches the degraded-delivery
    threshold from (1 - max_degradation) * baseline to the literal
    max_degradation * baseline reading (compatibility flag)."""

    energy_weight: float = 0.9
    pdr_weight: float = -0.1
    offset: float = 0.1
    max_degradation: float = 0.15
    literal_floor: bool = False


def pdr_floor(refs: ReferenceValues, weights: FitnessWeights) -> float:
    """Lowest delivery ratio that escapes the penalty."""
    if weights.literal_floor:
        return weights.max_degradation * refs.pdr
    return (1.0 - weights.max_degradation) * refs.pdr


def aggregate(outcomes: Sequence[SimOutcome]) -> tuple[float, float]:
    """Arithmetic means of per-replication energy and delivery ratio."""
    if not outcomes:
        raise ValueError("need at least one replication outcome")
    n = len(outcomes)
    mean_energy = math.fsum(o.energy_joules for o in outcomes) / n
    mean_pdr = math.fsum(o.pdr for o in outcomes) / n
    return mean_energy, mean_pdr


def fitness(energy: float, pdr: float, refs: ReferenceValues,
            weights: FitnessWeights = FitnessWeights()) -> float:
    """Unpenalized score: offset + w_e * E/E_base + w_p * PDR/PDR_max."""
    return (weights.offset
            + weights.energy_weight * energy / refs.energy
            + weights.pdr_weight * pdr / refs.pdr_max)


def penalized_fitness(energy: float, pdr: float, refs: ReferenceValues,
                      weights: FitnessWeights = FitnessWeights()) -> float:
    """Score for candidates below the delivery floor: base score plus
    (floor - PDR) * E/E_base. Continuous at the floor."""
    base = fitness(energy, pdr, refs, weights)
    return base + (pdr_floor(refs, weights) - pdr) * energy / refs.energy


@dataclass(frozen=True)
class FitnessReport:
    """Monte-Carlo aggregate for one candidate plus its per-replication rows."""

    mean_energy: float
    mean_pdr: float
    fitness: float
    penalized: bool
    outcomes: tuple[SimOutcome, ...] = ()
    seeds: tuple[int, ...] = ()

    def to_json(self) -> str:
        rows = []
        for i, o in enumerate(self.outcomes):
            row = {
                "replication": i,
                "energy_joules": o.energy_joules,
                "data_packets_sent": o.data_packets_sent,
                "data_packets_delivered": o.data_packets_delivered,
                "pdr": o.pdr,
                "hello_count": o.hello_count,
                "rreq_count": o.rreq_count,
                "rrep_count": o.rrep_count,
                "route_discoveries_failed": o.route_discoveries_failed,
            }
            if self.seeds:
                row["seed"] = self.seeds[i]
            rows.append(row)
        doc = {
            "mean_energy": self.mean_energy,
            "mean_pdr": self.mean_pdr,
            "fitness": self.fitness,
            "penalized": self.penalized,
            "replications": rows,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def score(outcomes: Sequence[SimOutcome], refs: ReferenceValues,
          weights: FitnessWeights = FitnessWeights(),
          seeds: Sequence[int] = ()) -> FitnessReport:
    """Aggregate replication outcomes and apply the penalty rule.

    The penalty engages strictly below the delivery floor; at the floor the
    unpenalized score applies (the two agree there anyway).
    """
    mean_energy, mean_pdr = aggregate(outcomes)
    penalized = mean_pdr < pdr_floor(refs, weights)
    if penalized:
        value = penalized_fitness(mean_energy, mean_pdr, refs, weights)
    else:
        value = fitness(mean_energy, mean_pdr, refs, weights)
    return FitnessReport(mean_energy=mean_energy, mean_pdr=mean_pdr,
                         fitness=value, penalized=penalized,
                         outcomes=tuple(outcomes), seeds=tuple(seeds))

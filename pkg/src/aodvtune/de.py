"""Differential evolution over the protocol parameter space.

Classic rand/1 difference mutation and greedy one-to-one selection, with two
selectable recombination operators: blend crossover (default; samples both
children from the per-gene parent interval stretched by alpha, the first
child becoming the trial) and the canonical binomial crossover. The initial
population is spread over diagonal subspace bands around the standard
configuration instead of sampled uniformly, so even a micro population
starts with one individual per band.

Every random draw comes from a named counter-based stream keyed by
(purpose, generation, individual) and the base seed, which makes a run a
pure function of its configuration regardless of evaluation parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fitness import FitnessReport
from .params import Genome, ParamSpace, repair, rfc_default

__all__ = [
    "DEConfig",
    "Population",
    "GenerationLog",
    "OptimizationResult",
    "EvaluatorFailure",
    "diagonal_offset_vector",
    "diagonal_init_raw",
    "initial_population",
    "mutation_vector",
    "mutate",
    "binomial_crossover",
    "blx_pair_raw",
    "blx_crossover",
    "select",
    "run",
]

N_GENES = 11

_PURPOSE_INIT = 0
_PURPOSE_MUTATE = 1
_PURPOSE_BINOMIAL = 2
_PURPOSE_BLX = 3


def _stream(base_seed: int, purpose: int, generation: int, individual: int):
    ss = np.random.SeedSequence(entropy=base_seed,
                                spawn_key=(purpose, generation, individual))
    return np.random.Generator(np.random.PCG64(ss))


class EvaluatorFailure(RuntimeError):
    """The evaluator raised (or returned NaN); carries the failing genome."""

    def __init__(self, genome: Genome, message: str):
        super().__init__(message)
        self.genome = genome


@dataclass(frozen=True)
class DEConfig:
    pop_size: int = 8
    generations: int = 50
    mutation_factor: float = 0.5
    crossover_prob: float = 0.9
    blx_alpha: float = 0.2
    crossover_kind: str = "blx"  # or "binomial"
    base_seed: int = 0

    def __post_init__(self):
        if self.pop_size < 4:
            raise ValueError("pop_size must be >= 4 (mutation draws three "
                             "distinct donors besides the target)")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if self.mutation_factor <= 0:
            raise ValueError("mutation factor must be positive")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError("crossover probability must be in [0, 1]")
        if self.blx_alpha < 0:
            raise ValueError("blend alpha must be >= 0")
        if self.crossover_kind not in ("blx", "binomial"):
            raise ValueError(f"unknown crossover kind {self.crossover_kind!r}")


@dataclass(frozen=True)
class Population:
    members: tuple[Genome, ...]
    fitnesses: tuple[float, ...]
    generation: int


@dataclass(frozen=True)
class GenerationLog:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_genome: Genome


@dataclass(frozen=True)
class OptimizationResult:
    best_genome: Genome
    best_report: FitnessReport
    logs: tuple[GenerationLog, ...]
    config: DEConfig
    total_replications: int


# -- initialization ----------------------------------------------------------

def diagonal_offset_vector(space: ParamSpace, individual: int, pop_size: int,
                           betas: np.ndarray) -> np.ndarray:
    """Continuous initial vector for one individual: the standard values
    offset into diagonal band ``individual``, wrapped back into range.

    The wrapped distance-from-default fraction of every gene lands in
    [individual/pop_size, (individual+1)/pop_size).
    """
    if pop_size < 1:
        raise ValueError("pop_size must be >= 1")
    lo = space.lowers()
    span = space.uppers() - lo
    base = rfc_default(space).as_array()
    rho = (np.asarray(betas) + individual) / pop_size * span
    x = base + rho
    return lo + np.mod(x - lo, span)


def diagonal_init_raw(space: ParamSpace, pop_size: int, base_seed: int) -> np.ndarray:
    """Continuous (pre-repair) initial vectors, one row per individual."""
    out = np.empty((pop_size, N_GENES))
    for p in range(pop_size):
        betas = _stream(base_seed, _PURPOSE_INIT, 0, p).random(N_GENES)
        out[p] = diagonal_offset_vector(space, p, pop_size, betas)
    return out


def initial_population(space: ParamSpace, cfg: DEConfig) -> list[Genome]:
    raw = diagonal_init_raw(space, cfg.pop_size, cfg.base_seed)
    return [repair(row, space) for row in raw]


# -- variation operators -----------------------------------------------------

def mutation_vector(a: np.ndarray, b: np.ndarray, c: np.ndarray,
                    factor: float) -> np.ndarray:
    """Difference mutation: a + factor * (b - c)."""
    return np.asarray(a) + factor * (np.asarray(b) - np.asarray(c))


def mutate(members: Sequence[Genome], target: int, factor: float, rng,
           space: ParamSpace) -> Genome:
    """Mutant for the target index from three distinct other members."""
    n = len(members)
    if n < 4:
        raise ValueError("mutation needs a population of at least 4")
    others = [j for j in range(n) if j != target]
    picks = rng.choice(n - 1, size=3, replace=False)
    r1, r2, r3 = (others[int(k)] for k in picks)
    assert len({target, r1, r2, r3}) == 4
    w = mutation_vector(members[r1].as_array(), members[r2].as_array(),
                        members[r3].as_array(), factor)
    return repair(w, space)


def binomial_crossover(target: Genome, mutant: Genome, prob: float, rng,
                       space: ParamSpace) -> Genome:
    """Per-gene coin-flip mix; one forced gene always comes from the mutant."""
    forced = int(rng.integers(N_GENES))
    draws = rng.random(N_GENES)
    take = (draws <= prob) | (np.arange(N_GENES) == forced)
    u = np.where(take, mutant.as_array(), target.as_array())
    return repair(u, space)


def blx_pair_raw(x: np.ndarray, y: np.ndarray, alpha: float,
                 rng) -> tuple[np.ndarray, np.ndarray]:
    """Two blend-crossover children, continuous (pre-repair).

    Child genes are uniform on [min - l*alpha, max + l*alpha] where l is the
    per-gene parent distance; draws go gene by gene, first child then second.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    g_min = np.minimum(x, y)
    g_max = np.maximum(x, y)
    ext = (g_max - g_min) * alpha
    left = g_min - ext
    width = (g_max + ext) - left
    draws = rng.random((N_GENES, 2))
    return left + draws[:, 0] * width, left + draws[:, 1] * width


def blx_crossover(x: Genome, y: Genome, alpha: float, rng,
                  space: ParamSpace) -> tuple[Genome, Genome]:
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    c1, c2 = blx_pair_raw(x.as_array(), y.as_array(), alpha, rng)
    return repair(c1, space), repair(c2, space)


def select(target: Genome, trial: Genome, f_target: float, f_trial: float) -> Genome:
    """Greedy one-to-one selection; ties go to the trial."""
    if math.isnan(f_target) or math.isnan(f_trial):
        raise ValueError("cannot select on NaN fitness")
    return trial if f_trial <= f_target else target


# -- main loop ----------------------------------------------------------------

Evaluator = Callable[[Genome], FitnessReport]


def _evaluate(evaluator: Evaluator, genome: Genome) -> FitnessReport:
    try:
        report = evaluator(genome)
    except Exception as exc:
        raise EvaluatorFailure(genome, f"evaluator failed on {genome.values}: {exc}") from exc
    if math.isnan(report.fitness):
        raise EvaluatorFailure(genome, f"evaluator returned NaN fitness for {genome.values}")
    return report


def _log(generation: int, members, fitnesses, reports) -> tuple[GenerationLog, int]:
    best = min(range(len(members)), key=lambda i: fitnesses[i])
    entry = GenerationLog(
        generation=generation,
        best_fitness=fitnesses[best],
        mean_fitness=math.fsum(fitnesses) / len(fitnesses),
        best_genome=members[best],
    )
    return entry, best


def run(space: ParamSpace, cfg: DEConfig, evaluator: Evaluator) -> OptimizationResult:
    """Full optimization: initialize, evolve for cfg.generations, return the
    best-ever candidate with per-generation logs.

    Deterministic given cfg.base_seed; greedy selection makes the logged best
    fitness non-increasing.
    """
    members = initial_population(space, cfg)
    reports = [_evaluate(evaluator, m) for m in members]
    fitnesses = [r.fitness for r in reports]
    total_replications = sum(len(r.outcomes) for r in reports)

    entry, best_i = _log(0, members, fitnesses, reports)
    logs = [entry]
    best_genome, best_fitness, best_report = members[best_i], fitnesses[best_i], reports[best_i]

    for gen in range(1, cfg.generations + 1):
        new_members, new_fitnesses, new_reports = [], [], []
        for i in range(cfg.pop_size):
            mutant = mutate(members, i, cfg.mutation_factor,
                            _stream(cfg.base_seed, _PURPOSE_MUTATE, gen, i), space)
            if cfg.crossover_kind == "blx":
                trial, _ = blx_crossover(
                    members[i], mutant, cfg.blx_alpha,
                    _stream(cfg.base_seed, _PURPOSE_BLX, gen, i), space)
            else:
                trial = binomial_crossover(
                    members[i], mutant, cfg.crossover_prob,
                    _stream(cfg.base_seed, _PURPOSE_BINOMIAL, gen, i), space)
            report = _evaluate(evaluator, trial)
            total_replications += len(report.outcomes)
            if report.fitness <= fitnesses[i]:
                new_members.append(trial)
                new_fitnesses.append(report.fitness)
                new_reports.append(report)
            else:
                new_members.append(members[i])
                new_fitnesses.append(fitnesses[i])
                new_reports.append(reports[i])
        members, fitnesses, reports = new_members, new_fitnesses, new_reports
        entry, best_i = _log(gen, members, fitnesses, reports)
        logs.append(entry)
        if fitnesses[best_i] < best_fitness:
            best_genome, best_fitness, best_report = (
                members[best_i], fitnesses[best_i], reports[best_i])

    return OptimizationResult(
        best_genome=best_genome,
        best_report=best_report,
        logs=tuple(logs),
        config=cfg,
        total_replications=total_replications,
    )

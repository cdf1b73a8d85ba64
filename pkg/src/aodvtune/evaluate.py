"""Monte-Carlo evaluation: N independent simulator replications per genome.

Replication seeds mix the base seed, a content hash of the genome, and the
replication index, so re-evaluating the same genome reproduces the same
outcomes no matter when, where, or how parallel the run is. Outcomes are
aggregated in replication order, making the report independent of worker
count and scheduling.
"""

from __future__ import annotations

import hashlib
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .fitness import FitnessReport, FitnessWeights, ReferenceValues, score
from .params import Genome, aodv_param_space, rfc_default
from .sim.engine import SimOutcome, simulate
from .sim.scenario import ScenarioSpec

__all__ = [
    "EvalConfig",
    "EvaluationError",
    "MonteCarloEvaluator",
    "evaluate",
    "evaluate_baseline",
    "baseline_report",
    "replication_seed",
    "clear_baseline_cache",
]

_MASK64 = (1 << 64) - 1


class EvaluationError(RuntimeError):
    """A replication failed; message names the replication index and seed."""


@dataclass(frozen=True)
class EvalConfig:
    """How one genome is turned into a FitnessReport."""

    scenario: ScenarioSpec
    replications: int = 24
    parallelism: int | None = None  # None: one worker per core, capped at N
    base_seed: int = 0
    fresh_noise: bool = False  # salt seeds per evaluation call instead of per genome

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if self.parallelism is not None and self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")

    def workers(self) -> int:
        limit = self.parallelism or os.cpu_count() or 1
        return max(1, min(limit, self.replications))


def replication_seed(base_seed: int, genome: Genome, index: int, salt: int = 0) -> int:
    """Stable 64-bit seed for one replication of one genome."""
    h = hashlib.blake2b(digest_size=8)
    h.update(struct.pack("<Q", base_seed & _MASK64))
    h.update(struct.pack("<11d", *genome.values))
    h.update(struct.pack("<QQ", index, salt & _MASK64))
    return int.from_bytes(h.digest(), "little")


def _run_replication(args) -> SimOutcome:
    genome_values, scenario, seed = args
    return simulate(Genome(genome_values), scenario, seed)


class MonteCarloEvaluator:
    """Callable Genome -> FitnessReport with a reusable worker pool.

    With one worker the replications run inline; otherwise a process pool is
    kept alive across calls (one optimization run makes hundreds of them).
    Use as a context manager or call close() to drop the pool.
    """

    def __init__(self, cfg: EvalConfig, refs: ReferenceValues,
                 weights: FitnessWeights = FitnessWeights()):
        self.cfg = cfg
        self.refs = refs
        self.weights = weights
        self._pool = None
        self._calls = 0

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def _run_all(self, genome: Genome, seeds: list[int]) -> list[SimOutcome]:
        cfg = self.cfg
        tasks = [(genome.values, cfg.scenario, s) for s in seeds]
        if cfg.workers() == 1:
            results = []
            for r, task in enumerate(tasks):
                try:
                    results.append(_run_replication(task))
                except Exception as exc:
                    raise EvaluationError(
                        f"replication {r} (seed {seeds[r]}) failed: {exc}") from exc
            return results
        if self._pool is None:
            self._pool = ProcessPoolExecutor(max_workers=cfg.workers())
        futures = [self._pool.submit(_run_replication, task) for task in tasks]
        results = []
        for r, fut in enumerate(futures):
            try:
                results.append(fut.result())
            except Exception as exc:
                for other in futures:
                    other.cancel()
                raise EvaluationError(
                    f"replication {r} (seed {seeds[r]}) failed: {exc}") from exc
        return results

    def __call__(self, genome: Genome) -> FitnessReport:
        cfg = self.cfg
        salt = self._calls if cfg.fresh_noise else 0
        self._calls += 1
        seeds = [replication_seed(cfg.base_seed, genome, r, salt)
                 for r in range(cfg.replications)]
        outcomes = self._run_all(genome, seeds)
        return score(outcomes, self.refs, self.weights, seeds=seeds)


def evaluate(genome: Genome, cfg: EvalConfig, refs: ReferenceValues,
             weights: FitnessWeights = FitnessWeights()) -> FitnessReport:
    """One-shot evaluation (builds and tears down its own pool if needed)."""
    with MonteCarloEvaluator(cfg, refs, weights) as ev:
        return ev(genome)


# Baseline reports are cached per (scenario, base_seed, replications): the
# standard-configuration run is re-requested constantly (reference values,
# validation tables) and is fully deterministic.
_baseline_cache: dict = {}


def clear_baseline_cache() -> None:
    _baseline_cache.clear()


def baseline_report(cfg: EvalConfig,
                    weights: FitnessWeights = FitnessWeights()) -> FitnessReport:
    """FitnessReport of the standard configuration under this EvalConfig.

    The fitness field is self-referential (energy ratio exactly 1), which is
    exactly what the optimizer compares trial candidates against.
    """
    key = (cfg.scenario, cfg.base_seed, cfg.replications)
    report = _baseline_cache.get(key)
    if report is None:
        genome = rfc_default(aodv_param_space())
        seeds = [replication_seed(cfg.base_seed, genome, r)
                 for r in range(cfg.replications)]
        with MonteCarloEvaluator(cfg, ReferenceValues(1.0, 1.0), weights) as ev:
            outcomes = ev._run_all(genome, seeds)
        from .fitness import aggregate

        mean_energy, mean_pdr = aggregate(outcomes)
        if mean_energy <= 0 or mean_pdr <= 0:
            raise EvaluationError(
                "standard configuration produced no traffic or no deliveries; "
                "scenario cannot normalize fitness")
        refs = ReferenceValues(energy=mean_energy, pdr=mean_pdr)
        report = score(outcomes, refs, weights, seeds=seeds)
        _baseline_cache[key] = report
    return report


def evaluate_baseline(cfg: EvalConfig,
                      weights: FitnessWeights = FitnessWeights()) -> ReferenceValues:
    """Reference energy and delivery ratio of the standard configuration."""
    report = baseline_report(cfg, weights)
    return ReferenceValues(energy=report.mean_energy, pdr=report.mean_pdr)

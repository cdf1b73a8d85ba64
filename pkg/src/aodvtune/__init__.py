"""aodvtune: energy-aware AODV parameter search.

Couples a differential-evolution optimizer with a built-in desk-scale VANET
simulator. Candidate configurations are scored by parallel Monte-Carlo
replications, and winners are validated against the RFC 3561 defaults with
nonparametric statistics.
"""

from .de import (DEConfig, GenerationLog, OptimizationResult, Population,
                 binomial_crossover, blx_crossover, initial_population, mutate,
                 run, select)
from .evaluate import (EvalConfig, EvaluationError, MonteCarloEvaluator,
                       evaluate, evaluate_baseline, replication_seed)
from .fitness import (FitnessReport, FitnessWeights, ReferenceValues,
                      aggregate, fitness, penalized_fitness, score)
from .params import (Genome, GenomeError, GeneSpec, ParamSpace,
                     aodv_param_space, repair, rfc_default, validate)
from .sim import (AodvConfig, CbrSpec, ChannelSpec, EnergySpec, MobilityTrace,
                  ScenarioSpec, SimOutcome, generate_mobility, load_scenario,
                  load_trace, packet_airtime, reception_probability,
                  ring_timeout, ring_ttl_sequence, simulate, write_trace)

__version__ = "0.1.0"

__all__ = [
    "DEConfig", "GenerationLog", "OptimizationResult", "Population",
    "binomial_crossover", "blx_crossover", "initial_population", "mutate",
    "run", "select",
    "EvalConfig", "EvaluationError", "MonteCarloEvaluator",
    "evaluate", "evaluate_baseline", "replication_seed",
    "FitnessReport", "FitnessWeights", "ReferenceValues",
    "aggregate", "fitness", "penalized_fitness", "score",
    "Genome", "GenomeError", "GeneSpec", "ParamSpace",
    "aodv_param_space", "repair", "rfc_default", "validate",
    "AodvConfig", "CbrSpec", "ChannelSpec", "EnergySpec", "MobilityTrace",
    "ScenarioSpec", "SimOutcome", "generate_mobility", "load_scenario",
    "load_trace", "packet_airtime", "reception_probability",
    "ring_timeout", "ring_ttl_sequence", "simulate", "write_trace",
    "__version__",
]

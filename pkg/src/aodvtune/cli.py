"""Command-line front end: optimize, evaluate, validate.

All randomness flows from --seed (drawn from entropy and echoed into the
output manifest when omitted), so every artifact file is reproducible
byte-for-byte from the config files and the seed. Worker parallelism never
changes results.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import secrets
import sys
from dataclasses import asdict
from pathlib import Path

from .de import DEConfig, EvaluatorFailure, OptimizationResult, run
from .evaluate import (EvalConfig, EvaluationError, MonteCarloEvaluator,
                       baseline_report, evaluate, evaluate_baseline)
from .fitness import FitnessReport
from .params import (GenomeError, aodv_param_space, genome_from_csv_row,
                     genome_from_keyed_text, rfc_default, validate)
from .sim.mobility import TraceError
from .sim.scenario import ScenarioError, dump_scenario, load_scenario
from .stats import DegenerateSampleError, SampleSet, kruskal_wallis, ks_normality

__all__ = ["main"]


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, TraceError, GenomeError, EvaluationError,
            EvaluatorFailure, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aodvtune",
        description="Search for energy-efficient AODV configurations by "
                    "differential evolution over Monte-Carlo VANET simulations.")
    sub = parser.add_subparsers(required=True)

    def common(p):
        p.add_argument("--scenario", required=True, action="append",
                       metavar="FILE", help="scenario file (keyed text)")
        p.add_argument("--seed", type=int, default=None,
                       help="base seed; random (and echoed) when omitted")
        p.add_argument("--replications", type=int, default=24, metavar="N",
                       help="simulator replications per evaluation (default 24)")
        p.add_argument("--parallelism", type=int, default=None, metavar="N",
                       help="worker processes (default: one per core)")

    p_opt = sub.add_parser("optimize", help="run the evolutionary search")
    common(p_opt)
    p_opt.add_argument("--out", required=True, metavar="DIR")
    p_opt.add_argument("--generations", type=int, default=None, metavar="N")
    p_opt.add_argument("--pop-size", type=int, default=None, metavar="N")
    p_opt.add_argument("--crossover", choices=("blx", "binomial"), default=None)
    p_opt.add_argument("--alpha", type=float, default=None,
                       help="blend crossover extension fraction")
    p_opt.add_argument("--mu", type=float, default=None, help="mutation factor")
    p_opt.add_argument("--pc", type=float, default=None,
                       help="binomial crossover probability")
    p_opt.add_argument("--de-config", metavar="FILE", default=None,
                       help="keyed-text file with optimizer settings; flags override")
    p_opt.set_defaults(func=cmd_optimize)

    p_eval = sub.add_parser("evaluate", help="score one configuration")
    common(p_eval)
    p_eval.add_argument("--genome", metavar="FILE", default=None,
                        help="genome file (keyed text or CSV); default: RFC values")
    p_eval.add_argument("--out", metavar="DIR", default=None)
    p_eval.set_defaults(func=cmd_evaluate)

    p_val = sub.add_parser(
        "validate", help="compare a configuration against the RFC baseline "
                         "over one or more scenarios")
    common(p_val)
    p_val.add_argument("--genome", metavar="FILE", required=True)
    p_val.add_argument("--out", required=True, metavar="DIR")
    p_val.set_defaults(func=cmd_validate)
    return parser


# -- shared helpers -----------------------------------------------------------

_DE_KEYS = {
    "POP_SIZE": ("pop_size", int),
    "GENERATIONS": ("generations", int),
    "MUTATION_FACTOR": ("mutation_factor", float),
    "CROSSOVER_PROB": ("crossover_prob", float),
    "BLX_ALPHA": ("blx_alpha", float),
    "CROSSOVER_KIND": ("crossover_kind", str),
}


def _load_de_file(path: str) -> dict:
    kwargs = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"{path}:{lineno}: expected KEY=value")
        key, _, value = line.partition("=")
        key = key.strip().upper()
        if key not in _DE_KEYS:
            raise ScenarioError(f"{path}:{lineno}: unknown optimizer key {key}")
        name, cast = _DE_KEYS[key]
        kwargs[name] = cast(value.strip())
    return kwargs


def _resolve_de_config(args, seed: int) -> DEConfig:
    kwargs = _load_de_file(args.de_config) if args.de_config else {}
    overrides = {
        "pop_size": args.pop_size,
        "generations": args.generations,
        "mutation_factor": args.mu,
        "crossover_prob": args.pc,
        "blx_alpha": args.alpha,
        "crossover_kind": args.crossover,
    }
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return DEConfig(base_seed=seed, **kwargs)


def _resolve_seed(args) -> int:
    return args.seed if args.seed is not None else secrets.randbits(63)


def _load_genome(path: str):
    space = aodv_param_space()
    text = Path(path).read_text()
    if "=" in text:
        genome = genome_from_keyed_text(text, space)
    else:
        genome = genome_from_csv_row(text)
    violations = validate(genome, space)
    if violations:
        detail = "; ".join(f"{v.name}={v.value:g} {v.reason}" for v in violations)
        raise GenomeError(f"{path}: invalid configuration: {detail}")
    return genome


def _config_hash(**parts) -> str:
    canon = json.dumps(parts, sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()


def _write_manifest(outdir: Path, command: str, seed: int, config_hash: str,
                    artifacts: list[str], extra: dict | None = None) -> None:
    doc = {
        "command": command,
        "seed": seed,
        "config_hash": config_hash,
        "artifacts": {
            name: hashlib.sha256((outdir / name).read_bytes()).hexdigest()
            for name in sorted(artifacts)
        },
    }
    if extra:
        doc.update(extra)
    (outdir / "manifest.json").write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _single_scenario(args) -> str:
    if len(args.scenario) != 1:
        raise ScenarioError("this command takes exactly one --scenario")
    return args.scenario[0]


# -- commands -------------------------------------------------------------------

def cmd_optimize(args) -> int:
    scenario_path = _single_scenario(args)
    scenario = load_scenario(scenario_path)
    seed = _resolve_seed(args)
    de_cfg = _resolve_de_config(args, seed)
    eval_cfg = EvalConfig(scenario=scenario, replications=args.replications,
                          parallelism=args.parallelism, base_seed=seed)
    space = aodv_param_space()

    refs = evaluate_baseline(eval_cfg)
    with MonteCarloEvaluator(eval_cfg, refs) as evaluator:
        result = run(space, de_cfg, evaluator)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    best = result.best_genome
    (outdir / "best_genome.txt").write_text(best.to_keyed_text(space))
    (outdir / "best_genome.csv").write_text(best.to_csv_row(space) + "\n")
    (outdir / "generations.csv").write_text(_generations_csv(result, space))
    (outdir / "best_report.json").write_text(result.best_report.to_json())

    config_hash = _config_hash(
        scenario=dump_scenario(scenario), de=asdict(de_cfg),
        replications=args.replications, seed=seed)
    _write_manifest(
        outdir, "optimize", seed, config_hash,
        ["best_genome.txt", "best_genome.csv", "generations.csv", "best_report.json"],
        extra={"reference_energy": refs.energy, "reference_pdr": refs.pdr,
               "total_replications": result.total_replications,
               "best_fitness": result.best_report.fitness})

    first, last = result.logs[0], result.logs[-1]
    print(f"generations: {len(result.logs) - 1}, "
          f"replications: {result.total_replications}")
    print(f"best fitness: {first.best_fitness:.6f} -> {last.best_fitness:.6f}")
    print(f"mean energy: {result.best_report.mean_energy:.1f} J "
          f"(baseline {refs.energy:.1f} J), "
          f"mean PDR: {result.best_report.mean_pdr:.4f} "
          f"(baseline {refs.pdr:.4f})")
    print(f"artifacts in {outdir}")
    return 0


def _generations_csv(result: OptimizationResult, space) -> str:
    header = "generation,best_fitness,mean_fitness," + ",".join(space.names)
    lines = [header]
    for log in result.logs:
        lines.append(f"{log.generation},{log.best_fitness!r},"
                     f"{log.mean_fitness!r},{log.best_genome.to_csv_row(space)}")
    return "\n".join(lines) + "\n"


def cmd_evaluate(args) -> int:
    scenario_path = _single_scenario(args)
    scenario = load_scenario(scenario_path)
    seed = _resolve_seed(args)
    genome = _load_genome(args.genome) if args.genome else rfc_default(aodv_param_space())
    eval_cfg = EvalConfig(scenario=scenario, replications=args.replications,
                          parallelism=args.parallelism, base_seed=seed)
    refs = evaluate_baseline(eval_cfg)
    report = evaluate(genome, eval_cfg, refs)
    sys.stdout.write(report.to_json())
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "report.json").write_text(report.to_json())
        config_hash = _config_hash(
            scenario=dump_scenario(scenario), genome=genome.values,
            replications=args.replications, seed=seed)
        _write_manifest(outdir, "evaluate", seed, config_hash, ["report.json"],
                        extra={"reference_energy": refs.energy,
                               "reference_pdr": refs.pdr})
    return 0


_VALIDATION_HEADER = ("scenario,metric,de_mean,rfc_mean,delta_pct,delta_abs,"
                      "ks_p_de,ks_p_rfc,kw_h,kw_p,reject_at_95")


def _metric_values(report: FitnessReport, metric: str) -> tuple[float, ...]:
    if metric == "energy":
        return tuple(o.energy_joules for o in report.outcomes)
    return tuple(o.pdr for o in report.outcomes)


def _ks_cell(label: str, values: tuple[float, ...]) -> str:
    if len(values) < 5:
        return ""
    try:
        return repr(ks_normality(SampleSet(label, values)).p_value)
    except DegenerateSampleError:
        return ""


def cmd_validate(args) -> int:
    seed = _resolve_seed(args)
    genome = _load_genome(args.genome)
    rows = [_VALIDATION_HEADER]
    for scenario_path in args.scenario:
        scenario = load_scenario(scenario_path)
        label = Path(scenario_path).stem
        eval_cfg = EvalConfig(scenario=scenario, replications=args.replications,
                              parallelism=args.parallelism, base_seed=seed)
        rfc_rep = baseline_report(eval_cfg)
        refs = evaluate_baseline(eval_cfg)
        de_rep = evaluate(genome, eval_cfg, refs)
        for metric in ("energy", "pdr"):
            de_vals = _metric_values(de_rep, metric)
            rfc_vals = _metric_values(rfc_rep, metric)
            de_mean = sum(de_vals) / len(de_vals)
            rfc_mean = sum(rfc_vals) / len(rfc_vals)
            # Sign convention: positive energy delta = savings, negative pdr
            # delta = degradation, both relative to the RFC mean.
            if metric == "energy":
                delta_pct = (rfc_mean - de_mean) / rfc_mean * 100.0
            else:
                delta_pct = (de_mean - rfc_mean) / rfc_mean * 100.0
            kw = kruskal_wallis([SampleSet("de", de_vals),
                                 SampleSet("rfc", rfc_vals)])
            rows.append(",".join([
                label, metric, repr(de_mean), repr(rfc_mean),
                repr(delta_pct), repr(de_mean - rfc_mean),
                _ks_cell("de", de_vals), _ks_cell("rfc", rfc_vals),
                repr(kw.statistic), repr(kw.p_value), str(kw.reject_at_95),
            ]))
            print(f"{label} {metric}: DE {de_mean:.4f} vs RFC {rfc_mean:.4f} "
                  f"({delta_pct:+.2f}%), KW p={kw.p_value:.4g}")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "validation_report.csv").write_text("\n".join(rows) + "\n")
    config_hash = _config_hash(
        scenarios=[dump_scenario(load_scenario(s)) for s in args.scenario],
        genome=genome.values, replications=args.replications, seed=seed)
    _write_manifest(outdir, "validate", seed, config_hash,
                    ["validation_report.csv"])
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line entry point: ``detcap <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import rng as rngmod
from .alphabet import ConfigAlphabet, Configuration, p_average
from .capacity import RoundSchedule
from .config import ConfigError, resolve_config
from .detection import detection_pmf, empirical_law
from .ensemble import ensemble_report, lemma_constants, variance_sandwich_check
from .experiment import dump_json, run_experiment
from .schemes import FamilySpec, InfeasibleScheme, Scheme, pairwise_disjointness, prefix_distinctness

DEMO_SCHEME = (1, 2)
DEMO_PROBS = (0.5, 0.5)
ENSEMBLE_HEADER = ("n", "r", "mean_T", "se_mean", "var_T", "se_var", "mean_S", "exact_mean_T")


class UsageError(Exception):
    pass


def _numbers(text: str, cast=float) -> list:
    """Numbers from a JSON list, a JSON object with one list field, or a
    comma/whitespace separated string."""
    text = text.strip()
    if text.startswith("[") or text.startswith("{"):
        data = json.loads(text)
        if isinstance(data, dict):
            lists = [v for v in data.values() if isinstance(v, list)]
            if len(lists) != 1:
                raise UsageError("JSON object must hold exactly one list")
            data = lists[0]
        return [cast(x) for x in data]
    return [cast(x) for x in text.replace(",", " ").split()]


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"file not found: {path}")
    return p.read_text()


def _scheme_and_config(args) -> tuple[Scheme, Configuration]:
    if args.demo:
        assignment, probs = DEMO_SCHEME, DEMO_PROBS
    else:
        if args.scheme_file:
            assignment = _numbers(_read(args.scheme_file), int)
        elif args.scheme:
            assignment = _numbers(args.scheme, int)
        else:
            raise UsageError("give --demo, --scheme-file or --scheme")
        if args.config_file:
            probs = _numbers(_read(args.config_file))
        elif args.probs:
            probs = _numbers(args.probs)
        else:
            raise UsageError("give --config-file or --probs")
    scheme = Scheme(tuple(assignment))
    config = Configuration.of(probs)
    scheme.check(config.n)
    return scheme, config


def _emit(obj) -> None:
    sys.stdout.write(dump_json(obj))


def cmd_exact(args) -> int:
    scheme, config = _scheme_and_config(args)
    out = detection_pmf(scheme, config).to_dict()
    out["scheme"] = list(scheme.assignment)
    out["probs"] = config.probs.tolist()
    _emit(out)
    return 0


def cmd_simulate(args) -> int:
    scheme, config = _scheme_and_config(args)
    emp = empirical_law(scheme, config, args.replicates, rngmod.stream(args.seed, "decisions"))
    exact = detection_pmf(scheme, config)
    _emit({
        "scheme": list(scheme.assignment),
        "probs": config.probs.tolist(),
        "replicates": args.replicates,
        "seed": args.seed,
        "empirical": emp.to_dict(),
        "exact": exact.to_dict(),
    })
    return 0


def _family(args, n: int, r: int):
    try:
        return FamilySpec.parse(args.family).build(n, r)
    except InfeasibleScheme as exc:
        raise UsageError(str(exc)) from exc


def cmd_scheme_stats(args) -> int:
    fam = _family(args, args.n, args.r)
    method = "auto" if args.method == "exact" else "mc"
    gen = rngmod.stream(args.seed, "scheme-stats")
    a = prefix_distinctness(fam, args.k, method, args.samples, gen)
    b = pairwise_disjointness(fam, args.k, method, args.samples, gen)
    _emit({
        "family": fam.describe(),
        "k": args.k,
        "a_k": a.a_k,
        "b_k": b.b_k,
        "method": {"a_k": a.method, "b_k": b.method},
        "stderr": {"a_k": a.stderr, "b_k": b.stderr},
    })
    return 0


def cmd_ensemble(args) -> int:
    alphabet = ConfigAlphabet.parse(args.alphabet)
    schedule = RoundSchedule()
    rows, bounds = [], []
    capacity = 1.0 / p_average(alphabet)
    for idx, n in enumerate(args.n):
        r = args.r if args.r is not None else schedule(n)
        fam = _family(args, n, r)
        rep = ensemble_report(fam, alphabet, args.replicates, args.seed, key=(idx,), keep_alphas=True)
        rows.append([n, r, rep.mean_T, rep.se_mean, rep.var_T, rep.se_var, rep.mean_S, rep.exact_mean_T])
        k = min(args.k, r)
        sandwich = variance_sandwich_check(fam, alphabet, k, args.replicates, args.seed, alphas=rep.alphas)
        mean = rep.exact_mean_T if rep.exact_mean_T is not None else rep.mean_T
        lo, hi = capacity - 0.01, capacity + 1.0 / alphabet.p_min + 0.01
        bounds.append({
            "n": n, "r": r,
            "mean_bounds": {"lower": lo, "upper": hi, "value": mean, "holds": lo <= mean <= hi},
            "variance_sandwich": sandwich.to_dict(),
        })
    constants = lemma_constants(alphabet)
    report = {
        "family": args.family,
        "alphabet": alphabet.to_dict(),
        "capacity": capacity,
        "constants": {
            "degenerate": constants.degenerate,
            "c": {str(j): v for j, v in constants.c.items()},
            "d": {str(j): v for j, v in constants.d.items()},
            "e_diagonal": {str(j): constants.e_table[(j, j)] for j in range(1, 5)},
        },
        "points": bounds,
    }
    if args.format == "json":
        _emit({"rows": [dict(zip(ENSEMBLE_HEADER, row)) for row in rows], "bounds": report})
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(ENSEMBLE_HEADER)
        for row in rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                        for v in row])
    if args.out:
        Path(args.out).write_text(dump_json(report))
    return 0


def cmd_run(args) -> int:
    config = resolve_config(args.config)
    result = run_experiment(config, args.out, args.seed)
    _emit({
        "out": str(result.out_dir),
        "verdicts": {name: {"verdict": v.verdict, "predicted": v.predicted, "consistent": v.consistent}
                     for name, v in result.verdicts.items()},
    })
    return 0 if all(v.consistent for v in result.verdicts.values()) else 1


def cmd_verify(args) -> int:
    from .verify import run_checks

    results = run_checks(fast=args.fast, log=print)
    failed = sum(not r.ok for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="detcap", description="Randomized multidetector scheme toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def scheme_args(p):
        p.add_argument("--demo", action="store_true", help="two detectors with p=(0.5, 0.5), scheme (1, 2)")
        p.add_argument("--scheme-file", help="file with the 1-based detector sequence")
        p.add_argument("--config-file", help="file with the detection probabilities")
        p.add_argument("--scheme", help="inline detector sequence, e.g. 2,1,2")
        p.add_argument("--probs", help="inline detection probabilities, e.g. 0.2,0.8")

    p = sub.add_parser("exact", help="exact detection law for one scheme and configuration")
    scheme_args(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", help="simulate detection rounds")
    scheme_args(p)
    p.add_argument("--replicates", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scheme-stats", help="prefix distinctness a_k and disjointness b_k")
    p.add_argument("--family", required=True, help="e.g. uniform-injective or block-repeat:m=2")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--method", choices=("exact", "mc"), default="exact")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_scheme_stats)

    p = sub.add_parser("ensemble", help="configuration-averaged statistics and bound checks")
    p.add_argument("--family", required=True)
    p.add_argument("--alphabet", default="0.2,0.8", help="values, or value:weight pairs")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--r", type=int, help="round length (default floor(sqrt n))")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--replicates", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="write the bound-check report here as JSON")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("run", help="run a capacity experiment from a TOML config")
    p.add_argument("config", help="config path or bundled name (theorem1_demo)")
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run the invariant self-checks")
    p.add_argument("--fast", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"detcap: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError) as exc:
        print(f"detcap: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

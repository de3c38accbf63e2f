"""Run a configured capacity experiment and write its artifacts.

Layout under the output directory::

    <label>/sweep.csv    one row per grid point
    verdict.json         verdict per family
    manifest.json        seed, config echo, versions, partitioning
    runtime.json         wall clock and worker count

Everything except ``runtime.json`` depends only on the config and the seed.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import time
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

import numpy as np

from . import kernels, rng
from .alphabet import p_average
from .capacity import SWEEP_HEADER, AchievabilityTarget, CapacityVerdict, capacity_sweep
from .config import ExperimentConfig

FORMAT_VERSION = 1


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def sweep_csv(verdict: CapacityVerdict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in verdict.rows:
        w.writerow([_fmt(v) for v in row.csv_values()])
    return buf.getvalue()


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


@dataclass
class ExperimentResult:
    out_dir: Path
    verdicts: dict[str, CapacityVerdict]
    wall_clock: float


def run_experiment(config: ExperimentConfig, out_dir: str | Path, seed: int | None = None) -> ExperimentResult:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    seed = config.seed if seed is None else int(seed)
    started = time.perf_counter()

    alphabet = config.alphabet
    if config.s is None:
        target = AchievabilityTarget.at_capacity(alphabet, config.epsilon, config.delta)
    else:
        target = AchievabilityTarget(config.s, config.epsilon, config.delta)

    verdicts: dict[str, CapacityVerdict] = {}
    for idx, spec in enumerate(config.families):
        verdict = capacity_sweep(spec, alphabet, config.grid, config.schedule, target, config.replicates,
                                 seed, config.k_check, config.converse_factors, key=(idx,))
        verdicts[spec.name] = verdict
        fam_dir = out / spec.name
        fam_dir.mkdir(exist_ok=True)
        (fam_dir / "sweep.csv").write_text(sweep_csv(verdict))

    summary = {
        "format_version": FORMAT_VERSION,
        "experiment": config.name,
        "capacity": 1.0 / p_average(alphabet),
        "p_av": p_average(alphabet),
        "families": {name: v.to_dict() for name, v in verdicts.items()},
        "all_consistent": all(v.consistent for v in verdicts.values()),
    }
    (out / "verdict.json").write_text(dump_json(summary))

    manifest = {
        "format_version": FORMAT_VERSION,
        "experiment": config.name,
        "seed": seed,
        "config": {
            "alphabet": alphabet.to_dict(),
            "families": [s.to_dict() for s in config.families],
            "schedule": config.schedule.to_dict(),
            "grid": list(config.grid),
            "target": {"s": target.s, "epsilon": target.epsilon, "delta": target.delta,
                       "converse_factors": list(config.converse_factors)},
            "replicates": config.replicates,
            "k_check": config.k_check,
        },
        "versions": {
            "artifact": _version(),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "kernel_backend": kernels.BACKEND,
        },
        "partitioning": {
            "chunk_size": rng.CHUNK,
            "streams": "SeedSequence(seed, spawn_key=(crc32(purpose), family, grid_point, chunk))",
            "reduction": "chunks concatenated in index order, then reduced once",
        },
        "outputs": sorted([f"{name}/sweep.csv" for name in verdicts] + ["verdict.json", "runtime.json"]),
    }
    (out / "manifest.json").write_text(dump_json(manifest))

    wall = time.perf_counter() - started
    runtime = {"wall_clock_seconds": wall, "threads": rng.workers()}
    (out / "runtime.json").write_text(dump_json(runtime))
    return ExperimentResult(out, verdicts, wall)

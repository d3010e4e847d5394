"""Command-line runner: ``python -m helmbench --config run.toml``.

Exit codes: 0 success, 1 experiment failure (partial tables plus
``failure.json``), 2 malformed configuration (nothing written).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
import time
import traceback

from . import __version__
from .config import EXPERIMENTS, ConfigError, ExperimentConfig, build_config, load_config

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_CONFIG = 2

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

log = logging.getLogger("helmbench")


def _versions() -> dict:
    import numpy
    import pydantic
    import scipy

    return {
        "helmbench": __version__,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.__version__,
    }


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run(config: ExperimentConfig, threads: int | None = None) -> int:
    """Run one experiment and write its tables plus ``manifest.json`` to ``config.output``."""
    from .experiments import REGISTRY, Recorder

    out = config.output
    os.makedirs(out, exist_ok=True)
    rec = Recorder(out)
    manifest = {
        "experiment": config.experiment,
        "config": config.model_dump(mode="json"),
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "threads": threads,
        "versions": _versions(),
    }
    t0 = time.perf_counter()
    try:
        summary = REGISTRY[config.experiment](config, rec)
    except Exception as exc:  # noqa: BLE001 - every failure is recorded, then reported
        manifest.update(status="failed", wallclock_s=time.perf_counter() - t0, files=rec.files)
        _write_json(os.path.join(out, "failure.json"), {
            "experiment": config.experiment,
            "error_type": type(exc).__name__,
            "message": str(exc),
            "traceback": traceback.format_exc(),
            "completed_rows": rec.n_rows(),
            "files": rec.files,
        })
        _write_json(os.path.join(out, "manifest.json"), manifest)
        log.error("%s failed: %s", config.experiment, exc)
        return EXIT_FAILED
    manifest.update(status="ok", wallclock_s=time.perf_counter() - t0, files=rec.files, summary=summary)
    _write_json(os.path.join(out, "manifest.json"), manifest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="helmbench", description="Helmholtz FEM/BEM/Schwarz experiment runner")
    ap.add_argument("--config", help="TOML experiment configuration")
    ap.add_argument("--experiment", choices=EXPERIMENTS, help="experiment name (overrides the config)")
    ap.add_argument("--out", help="output directory (overrides the config)")
    ap.add_argument("--threads", type=int, default=None, help="BLAS/OpenMP thread count for this process")
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config, args.experiment, args.out)
        else:
            cfg = build_config({}, args.experiment, args.out)
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be positive")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    if args.threads is not None:
        # effective only when BLAS has not been initialised yet in this process
        for var in _THREAD_VARS:
            os.environ[var] = str(args.threads)
    return run(cfg, args.threads)


if __name__ == "__main__":
    sys.exit(main())

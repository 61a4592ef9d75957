"""Command line front end: ``ecmm simulate | bath | check``.

Exit codes: 0 success, 1 failed check, 2 invalid configuration, 3 too many
aborted trajectories.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time
from importlib import metadata
from pathlib import Path

from .bath import reorg_energy_continuous, reorg_energy_discrete
from .checks import format_table, run_checks
from .config import ConfigError, load_config, spectral_density
from .estimators import TooManyAbortsError, ehrenfest_population, estimate_population

THREADS_ENV = "ECMM_THREADS"

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_ABORTS = 0, 1, 2, 3


def _fmt(x) -> str:
    # repr of a Python float is the shortest round-trip decimal
    return repr(float(x))


def version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _default_threads() -> int:
    value = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def population_csv(result, scale_time: float = 1.0) -> str:
    n = result.initial_state + 1
    F = result.populations.shape[1]
    cols = ["t"] + [f"P_{m}_{n}" for m in range(1, F + 1)] + ["D"]
    cols += [f"se_P_{m}_{n}" for m in range(1, F + 1)] + ["se_D"]
    lines = [",".join(cols)]
    for i, t in enumerate(result.times):
        row = [t * scale_time, *result.populations[i], result.D[i], *result.stderr[i], result.se_D[i]]
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def run_simulation(cfg, threads: int = 1):
    common = dict(beta=cfg.beta, initial_state=cfg.initial_state, batch_size=cfg.batch_size, threads=threads)
    if cfg.method == "ehrenfest":
        return ehrenfest_population(cfg.system, cfg.integrator, cfg.n_traj, cfg.seed, **common)
    return estimate_population(cfg.system, cfg.space, cfg.integrator, cfg.n_traj, cfg.seed, **common)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        result = run_simulation(cfg, args.threads)
    except TooManyAbortsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ABORTS
    wall = time.perf_counter() - t0
    scale = cfg.system.delta if args.scale_time_by_delta else 1.0
    with open(out / "populations.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(population_csv(result, scale))
    record = dict(cfg.raw)
    record["run"] = {
        "version": version_string(),
        "n_aborted": result.n_aborted,
        "wall_time_s": wall,
        "dt": cfg.integrator.dt,
        "threads": args.threads,
        "time_scaled_by_delta": bool(args.scale_time_by_delta),
    }
    with open(out / "run.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(record, fh, indent=2)
        fh.write("\n")
    print(f"wrote {out / 'populations.csv'} ({result.n_traj} trajectories, {wall:.1f} s)")
    return EXIT_OK


def bath_csv(cfg) -> str:
    bath = cfg.system.bath
    lines = ["j,omega_j,c_j"]
    for j, (w, c) in enumerate(zip(bath.omega, bath.c), start=1):
        lines.append(f"{j},{_fmt(w)},{_fmt(c)}")
    discrete = reorg_energy_discrete(bath)
    sd = spectral_density(cfg.raw["model"])
    cont = reorg_energy_continuous(sd) if sd is not None else 0.0
    ratio = discrete / cont if cont else float("nan")
    lines.append(f"# reorg_discrete={_fmt(discrete)} reorg_continuous={_fmt(cont)} ratio={_fmt(ratio)}")
    return "\n".join(lines) + "\n"


def cmd_bath(args) -> int:
    cfg = load_config(args.config)
    text = bath_csv(cfg)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text, encoding="utf-8", newline="\n")
    return EXIT_OK


def cmd_check(args) -> int:
    results = run_checks(quick=args.quick)
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecmm", description="Constraint-space mapping dynamics for spin-boson models")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a population simulation from a JSON config")
    sim.add_argument("--config", required=True)
    sim.add_argument("--output", default=".")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--threads", type=int, default=_default_threads(),
                     help=f"worker threads (default from ${THREADS_ENV}, else 1)")
    sim.add_argument("--scale-time-by-delta", action="store_true", help="report t*Delta in the t column")
    sim.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bath", help="dump the discretised bath as CSV")
    b.add_argument("--config", required=True)
    b.add_argument("--output", required=True, help="CSV path, or - for stdout")
    b.set_defaults(func=cmd_bath)

    chk = sub.add_parser("check", help="run the built-in invariant suite")
    chk.add_argument("--quick", action="store_true", help="10^4 instead of 10^5 trajectories for the Rabi check")
    chk.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) is not None and getattr(args, "threads", 1) < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Regenerate the bundled example configs in src/ecmm/configs.

Run from the repository root: python3 tools/make_configs.py
"""

import json
import math
from pathlib import Path

from ecmm.config import parse_config

OUT = Path(__file__).resolve().parents[1] / "src" / "ecmm" / "configs"
N_MODES = 100
N_TRAJ = 100_000
RECORDS = 150

GAMMAS = {
    "g-0.2": -0.2,
    "g0": 0.0,
    "g0.366": (math.sqrt(3.0) - 1.0) / 2.0,
    "g0.5": 0.5,
    "g1": 1.0,
}


def ohmic(alpha, wc):
    return {"kind": "ohmic", "alpha": alpha, "omega_c": wc}


def debye(lam, wc):
    return {"kind": "debye", "lambda": lam, "omega_c": wc}


# name: (epsilon, delta, spectral density, beta, t_max)
# Fig 1 panels a,b and g,h: the coupling strengths follow the pattern of c,d and e,f
PANELS = {
    "fig1a": (1.0, 1.0, ohmic(0.1, 1.0), 0.25, 15.0),
    "fig1b": (1.0, 1.0, ohmic(0.4, 1.0), 0.25, 15.0),
    "fig1c": (1.0, 1.0, ohmic(0.1, 2.5), 0.25, 15.0),
    "fig1d": (1.0, 1.0, ohmic(0.4, 2.5), 0.25, 15.0),
    "fig1e": (1.0, 1.0, ohmic(0.1, 1.0), 5.0, 15.0),
    "fig1f": (1.0, 1.0, ohmic(0.4, 1.0), 5.0, 15.0),
    "fig1g": (1.0, 1.0, ohmic(0.1, 2.5), 5.0, 15.0),
    "fig1h": (1.0, 1.0, ohmic(0.4, 2.5), 5.0, 15.0),
    "fig2a": (1.0, 0.4, ohmic(0.3767, 1.0618), "inf", 50.0),
    "fig2b": (1.0, 0.4, ohmic(1.130, 1.0618), "inf", 50.0),
    "fig2c": (1.0, 2.0, ohmic(0.7535, 1.0618), "inf", 10.0),
    "fig2d": (1.0, 2.0, ohmic(1.884, 1.0618), "inf", 10.0),
    "figS1a": (1.0, 1.0, ohmic(0.4, 2.0), 5.0, 15.0),
    "figS1b": (1.0, 1.0, ohmic(0.2, 2.5), 5.0, 15.0),
    "figS1c": (1.0, 1.0, ohmic(0.2, 2.5), 10.0, 15.0),
    "figS2a": (1.0, 1.0, debye(0.25, 0.25), 0.5, 15.0),
    "figS2b": (1.0, 1.0, debye(0.25, 5.0), 0.5, 15.0),
    "figS2c": (1.0, 1.0, debye(0.25, 5.0), 50.0, 15.0),
}


def base(name, eps, delta, sd, beta, t_max):
    return {
        "name": name,
        "model": {"epsilon": eps, "delta": delta, "spectral_density": sd, "n_modes": N_MODES, "beta": beta},
        "dynamics": {"t_max": t_max, "record_stride": 1},
        "ensemble": {"n_traj": N_TRAJ, "seed": 20240101},
        "initial_state": 1,
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for old in OUT.glob("*.json"):
        old.unlink()
    for panel, (eps, delta, sd, beta, t_max) in PANELS.items():
        variants = {tag: {"method": "ecmm", "mapping": {"F": 2, "gamma": g}} for tag, g in GAMMAS.items()}
        variants["ehrenfest"] = {"method": "ehrenfest"}
        for tag, extra in variants.items():
            cfg = base(f"{panel}_{tag}", eps, delta, sd, beta, t_max)
            cfg.update(extra)
            # about RECORDS output rows under the default time step
            n_steps = parse_config(cfg).integrator.n_steps
            cfg["dynamics"]["record_stride"] = max(1, n_steps // RECORDS)
            parse_config(cfg)
            (OUT / f"{panel}_{tag}.json").write_text(json.dumps(cfg, indent=2) + "\n")


if __name__ == "__main__":
    main()

"""Driving a shipped configuration through the command-line entry point.

The same calls work from a shell, e.g. ``ecmm simulate --config fig1a_g0.json``.
"""

# %%
import json
import pathlib
import tempfile

from ecmm.cli import main
from ecmm.config import shipped_configs

names = sorted(p.name for p in shipped_configs())
print(len(names), "shipped configs, e.g.", names[:6])

# %%
path = next(p for p in shipped_configs() if p.name == "fig2a_g0.366.json")
raw = json.loads(path.read_text())
print(json.dumps(raw["model"], indent=1))

# %% [markdown]
# A reduced run: fewer trajectories and a shorter window.

# %%
raw["ensemble"]["n_traj"] = 500
raw["dynamics"]["t_max"] = 5.0
work = pathlib.Path(tempfile.mkdtemp())
(work / "cfg.json").write_text(json.dumps(raw))
main(["simulate", "--config", str(work / "cfg.json"), "--output", str(work / "out"), "--scale-time-by-delta"])
print((work / "out" / "populations.csv").read_text().splitlines()[:4])
print(json.loads((work / "out" / "run.json").read_text())["run"])

# %%
main(["bath", "--config", str(path), "--output", "-"])
main(["check", "--quick"])

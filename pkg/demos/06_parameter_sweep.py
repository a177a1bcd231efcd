"""Batch interface: a small parameter sweep through the CLI layer.

Sweeps run concurrently (bounded by PHI_YAMABE_THREADS) and collect one
convergence report per combination.  The same machinery backs the command
line:  phiyamabe sweep config.json sweep.json
"""

import json
import os
import tempfile

from phiyamabe.cli import cmd_run, cmd_sweep, cmd_verify

workdir = tempfile.mkdtemp(prefix="phiyamabe_demo_")
config = {
    "manifold": {"m": 6, "b": 2, "scalY": -2.0, "scalZ": -1.0},
    "grid": {"N": 48, "x_min": 0.1, "x_max": 1.0},
    "flow": {"variant": "cyf_plus", "t_end": 3.0, "cfl_safety": 0.8,
             "tol_converge": 1e-3, "record_every": 100},
    "outputs": {"csv_path": os.path.join(workdir, "run.csv"),
                "json_path": os.path.join(workdir, "run.json")},
    "seed": 0,
}
cfg_path = os.path.join(workdir, "config.json")
with open(cfg_path, "w") as fh:
    json.dump(config, fh, indent=1)

print("single run:")
cmd_run(cfg_path)

print("\nidentity suites:")
cmd_verify(cfg_path)

sweep = {
    "parameters": {"manifold.scalZ": [-1.0, -2.0, -3.0]},
    "summary_path": os.path.join(workdir, "summary.json"),
}
sweep_path = os.path.join(workdir, "sweep.json")
with open(sweep_path, "w") as fh:
    json.dump(sweep, fh, indent=1)

print("\nsweep over the fiber curvature:")
cmd_sweep(cfg_path, sweep_path)
with open(sweep["summary_path"]) as fh:
    for row in json.load(fh)["runs"]:
        print(f"  scalZ = {row['params']['manifold.scalZ']:+.1f}: "
              f"converged = {row['converged']}, S* = {row['s_star']:.6f}")
print(f"\nartifacts under {workdir}")

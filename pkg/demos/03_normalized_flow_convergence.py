"""Convergence of the increasing curvature-normalized flow.

On an inhomogeneous model (curvature between -5 and -3) the normalized
flow squeezes the curvature gap exponentially while the factor stays
pinned inside an a-priori envelope computed once from the initial data.
The run below is a small version of the desk-scale experiment; it writes
the monitor CSV, the snapshot JSON and an SVG plot next to this script.
"""

import os

import numpy as np

from phiyamabe import (
    FlowConfig,
    build_grid,
    build_manifold,
    detect_convergence,
    fit_gap_rate,
    run_flow,
    write_snapshots_json,
    write_trace_csv,
    write_trace_svg,
)

out = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(out, exist_ok=True)

man = build_manifold(m=6, b=2, scalY=-4.0, scalZ=-3.0, x_max=1.0)
grid = build_grid(man, N=100, x_min=0.035, x_max=1.0)
cfg = FlowConfig(variant="cyf_plus", t_end=6.0, cfl_safety=0.5,
                 record_every=500, snapshot_every=10)

trace = run_flow(man, grid, cfg, np.ones(grid.n))
print(f"integrated to t = {trace.t[-1]:.2f} with {trace.n_records} records")
print(f"a-priori envelope: [{trace.c1:.4f}, {trace.c2:.4f}]")
print(f"factor stayed in [{trace.u_min.min():.6f}, {trace.u_max.max():.6f}]")

# extremal curvatures move monotonically toward each other
print(f"\nS_sup: {trace.s_sup[0]:.4f} -> {trace.s_sup[-1]:.6f} (non-increasing)")
print(f"S_inf: {trace.s_inf[0]:.4f} -> {trace.s_inf[-1]:.6f} (non-decreasing)")

C, rate = fit_gap_rate(trace, 1.0, 5.0)
print(f"gap decay fit over [1, 5]: gap ~ {C:.3f} exp({rate:.3f} t)")
print(f"(the curvature window guarantees a rate of at least -{man.a2:.3f})")

report = detect_convergence(man, grid, trace.final_state(), 1e-3,
                            bracket0=(trace.s_inf[0], trace.s_sup[0]))
print(f"\nconverged: {report.converged}")
print(f"limit curvature S* = {report.s_star:.6f}, "
      f"stationary-equation residual {report.residual_sup:.2e}")

write_trace_csv(trace, os.path.join(out, "cyf_plus.csv"))
write_snapshots_json(trace, os.path.join(out, "cyf_plus.json"))
write_trace_svg(trace, os.path.join(out, "cyf_plus.svg"))
print(f"\nwrote cyf_plus.csv / .json / .svg under {out}")

"""End-to-end tour: analog grid search composed with every digital solver.

Runs the full pipelines on one realization, shows the selected steering
angle, the achieved cost/SINR, and exports the winning weights plus the scan
diagnostics for the improved-bat hybrid.
"""

from pathlib import Path

import numpy as np

from beamsim import Scenario, export_weights, run_pipeline

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

scenario = Scenario(
    n_antennas=32,
    n_subarrays=4,
    theta_desired=0.0,
    theta_interferers=(np.radians(60.0), np.radians(-30.0)),
    snr_desired_db=0.0,
    snr_interferer_db=15.0,
    n_snapshots=128,
)

print(f"{'method':10s} {'angle':>12s} {'residual cost':>14s} {'SINR':>9s}")
for method in ("scb", "dl", "dl_apals", "smf_apals", "pso_apals", "ba_apals",
               "iba_apals"):
    trace_path = out_dir / "scan_trace.csv" if method == "iba_apals" else None
    sol = run_pipeline(scenario, method, seed=4, trace_path=trace_path)
    angle = f"{sol.optimized_angle:.3e}" if sol.optimized_angle is not None else "-"
    print(f"{method:10s} {angle:>12s} {sol.achieved_cost:14.3e} "
          f"{sol.achieved_sinr:7.2f} dB")
    if method == "iba_apals":
        export_weights(out_dir / "weights_iba_apals.json", sol.digital, scenario,
                       algorithm=sol.method, seed=4)

print("\nThe analog search pins the steering angle near broadside, where the")
print("subarray factor already nulls the -30 degree jammer; the digital stage")
print("then handles the 60 degree one.  Scan trace and weight export are in",
      out_dir)

"""Convergence race between the three swarm optimizers on the phase cost.

Runs PSO, the base bat algorithm, and the improved bat algorithm on the
residual-interference objective and prints how the incumbent cost falls.
Trace CSVs land in demos/output/.
"""

from pathlib import Path

import numpy as np

from beamsim import (
    BatConfig,
    ImprovedBatConfig,
    Scenario,
    analog_from_angle,
    ba_optimize,
    iba_optimize,
    phase_objective,
    pso_optimize,
    write_cost_trace,
)

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

scenario = Scenario(
    n_antennas=32,
    n_subarrays=4,
    theta_desired=0.0,
    theta_interferers=(np.radians(60.0), np.radians(-30.0)),
    snr_desired_db=-15.0,
    snr_interferer_db=15.0,
    n_snapshots=200,
)
objective = phase_objective(analog_from_angle(0.0, 32, 4), scenario)

runs = {
    "pso": lambda rng: pso_optimize(objective, 40, 100, rng),
    "ba": lambda rng: ba_optimize(objective, 40, 100, BatConfig(), rng),
    "iba": lambda rng: iba_optimize(objective, 40, 100, ImprovedBatConfig(), rng),
}

print("Best residual interference power by iteration (seed 0):")
traces = {}
for name, run in runs.items():
    best_x, best_cost, trace = run(np.random.default_rng([0, len(traces)]))
    traces[name] = trace
    write_cost_trace(out_dir / f"trace_{name}.csv", trace)
    print(f"\n{name}: final cost {best_cost:.3e}, phases {np.round(best_x, 4)}")
    for it in (1, 5, 10, 25, 50, 100):
        print(f"   iter {it:3d}: {trace[it - 1]:.3e}")

print("\nThe base bat variant plateaus early; the improved variant keeps")
print("descending, and the inertia-weight PSO polishes furthest on this")
print("smooth low-dimensional cost.  Traces saved to", out_dir)

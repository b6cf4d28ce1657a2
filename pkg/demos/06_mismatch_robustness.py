"""Robustness to a mis-estimated desired direction.

Compares the fully digital loaded beamformer with the improved-bat hybrid
when the presumed desired DOA is off by up to 3 degrees: the hybrid's output
SINR degrades less.
"""

import numpy as np

from beamsim import Scenario, run_pipeline

N_SEEDS = 10


def ensemble(method, mismatch_deg):
    scenario = Scenario(
        n_antennas=16,
        n_subarrays=4,
        theta_desired=0.0,
        theta_interferers=(np.radians(60.0), np.radians(-30.0)),
        snr_desired_db=10.0,
        snr_interferer_db=15.0,
        n_snapshots=200,
        doa_mismatch_max=np.radians(mismatch_deg),
    )
    return float(np.mean([run_pipeline(scenario, method, seed=s).achieved_sinr
                          for s in range(N_SEEDS)]))


print(f"Mean output SINR over {N_SEEDS} runs at desired SNR 10 dB:")
print(f"{'method':10s} {'exact DOA':>10s} {'3deg slack':>11s} {'loss':>7s}")
for method in ("dl", "smf_apals", "iba_apals"):
    exact = ensemble(method, 0.0)
    sloppy = ensemble(method, 3.0)
    print(f"{method:10s} {exact:8.2f} dB {sloppy:8.2f} dB {exact - sloppy:6.2f} dB")

print("\nThe phase-only hybrid leans on known jammer directions rather than")
print("the sample covariance, so a mis-steered main lobe costs it less.")

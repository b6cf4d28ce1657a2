"""Closed-form digital beamformers: Capon, diagonal loading, SMF loading.

Shows how the loading level trades adaptivity against robustness, and how far
each solver sits from the optimum given the true covariance.
"""

import numpy as np

from beamsim import (
    LoadingPolicy,
    Scenario,
    analog_from_angle,
    capon_weights,
    generate_snapshots,
    output_sinr,
    sample_covariance,
    smf_loading_level,
    solve_digital,
    steering_vector,
    true_reduced_covariance,
)

scenario = Scenario(
    n_antennas=16,
    n_subarrays=4,
    theta_desired=0.0,
    theta_interferers=(np.radians(60.0), np.radians(-30.0)),
    snr_desired_db=0.0,
    snr_interferer_db=15.0,
    n_snapshots=128,
)
f_rf = analog_from_angle(0.0, 16, 4)
a_eff = f_rf.reduce(steering_vector(0.0, 16))

w_opt = capon_weights(true_reduced_covariance(scenario, f_rf), a_eff,
                      LoadingPolicy.none())
print(f"Optimal SINR (true covariance): {output_sinr(f_rf, w_opt, scenario):.2f} dB")

block = generate_snapshots(scenario, f_rf, np.random.default_rng(3))
print(f"SMF loading level for this block: {smf_loading_level(block, a_eff):.2f}")

for method in ("scb", "dl", "smf"):
    w = solve_digital(scenario, f_rf, block, method)
    print(f"{method:4s}: SINR {output_sinr(f_rf, w, scenario):6.2f} dB, "
          f"distortionless response {abs(w.conj() @ a_eff):.6f}")

print("\nLoading sweep (one realization):")
r_hat = sample_covariance(block)
for xi in (0.0, 1.0, 10.0, 30.0, 100.0, 1000.0):
    w = capon_weights(r_hat, a_eff, LoadingPolicy.fixed(xi))
    print(f"  xi={xi:7.1f}: SINR {output_sinr(f_rf, w, scenario):6.2f} dB")

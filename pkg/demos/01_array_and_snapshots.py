"""Tour of the array model: steering vectors, snapshots, and covariance.

Builds the 16-element, 4-subarray receive scenario used throughout, draws
baseband snapshots, and checks their statistics against the analytic
covariance.
"""

from dataclasses import replace

import numpy as np

from beamsim import (
    Scenario,
    analog_from_angle,
    generate_snapshots,
    sample_covariance,
    snapshot_components,
    steering_vector,
    true_reduced_covariance,
)

scenario = Scenario(
    n_antennas=16,
    n_subarrays=4,
    theta_desired=0.0,
    theta_interferers=(np.radians(60.0), np.radians(-30.0)),
    snr_desired_db=-5.0,
    snr_interferer_db=15.0,
    n_snapshots=128,
    seed=1,
)

print("Scenario:", scenario.n_antennas, "antennas,", scenario.n_subarrays,
      "RF chains,", scenario.n_interferers, "jammers")
print("Desired power:", f"{scenario.desired_power:.4f}",
      "| jammer powers:", np.round(scenario.interferer_powers, 2))

a0 = steering_vector(0.0, scenario.n_antennas)
print("\nBroadside manifold is all ones:", np.allclose(a0, 1.0))
a30 = steering_vector(np.radians(-30.0), scenario.n_antennas)
print("Manifold entries stay unit magnitude:", np.allclose(np.abs(a30), 1.0))

f_rf = analog_from_angle(scenario.theta_desired, scenario.n_antennas,
                         scenario.n_subarrays)
print("\nAnalog stage steered at broadside:")
print("  orthonormal columns:",
      np.allclose(f_rf.matrix.conj().T @ f_rf.matrix, np.eye(4)))
print("  coherent desired gain per subarray:",
      np.round(np.abs(f_rf.reduce(a0)), 3))

block = generate_snapshots(scenario, f_rf, np.random.default_rng(scenario.seed))
desired, interference, noise = snapshot_components(block, scenario, f_rf)
print("\nSnapshot block:", block.samples.shape, "components sum exactly:",
      np.allclose(desired + interference + noise, block.samples))

r_hat = sample_covariance(block)
print("Sample covariance Hermitian:", np.allclose(r_hat, r_hat.conj().T))
print("Eigenvalues:", np.round(np.linalg.eigvalsh(r_hat), 2))

# The interference+noise part of the sample covariance approaches the analytic
# one as the snapshot count grows.
r_true = true_reduced_covariance(scenario, f_rf)
for q in (128, 2048, 32768):
    big = replace(scenario, n_snapshots=q)
    blk = generate_snapshots(big, f_rf, np.random.default_rng(7))
    _, i_part, n_part = snapshot_components(blk, big, f_rf)
    x = i_part + n_part
    empirical = (x @ x.conj().T) / q
    err = np.linalg.norm(empirical - r_true) / np.linalg.norm(r_true)
    print(f"Q={q:6d}: relative covariance error {err:.3f}")

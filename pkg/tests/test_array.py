"""Tests for the array model: steering, snapshots, covariance, serialization."""

import numpy as np
import pytest

from beamsim import (
    Scenario,
    analog_from_angle,
    generate_snapshots,
    interference_matrix,
    recombine_snapshots,
    sample_covariance,
    snapshot_components,
    steering_matrix,
    steering_vector,
    true_reduced_covariance,
)
from beamsim.array import SnapshotBlock, load_scenario, save_scenario, scenario_from_dict, scenario_to_dict


def make_scenario(**overrides):
    base = dict(
        n_antennas=16,
        n_subarrays=4,
        theta_desired=0.0,
        theta_interferers=(np.radians(60.0), np.radians(-30.0)),
        snr_desired_db=-5.0,
        snr_interferer_db=15.0,
        n_snapshots=128,
        seed=0,
    )
    base.update(overrides)
    return Scenario(**base)


class TestSteeringVector:
    def test_broadside_is_all_ones(self):
        assert np.array_equal(steering_vector(0.0, 4), np.ones(4))

    def test_thirty_degrees_two_elements(self):
        np.testing.assert_allclose(steering_vector(np.pi / 6, 2), [1.0, 1j], atol=1e-12)

    def test_negative_angle_conjugates(self):
        np.testing.assert_allclose(steering_vector(-np.pi / 6, 3),
                                   np.conj(steering_vector(np.pi / 6, 3)), atol=1e-12)

    def test_unit_magnitude_entries(self):
        rng = np.random.default_rng(1)
        for theta in rng.uniform(-np.pi / 2, np.pi / 2, size=25):
            np.testing.assert_allclose(np.abs(steering_vector(theta, 32)), 1.0, atol=1e-13)

    def test_rejects_out_of_range_angle(self):
        with pytest.raises(ValueError):
            steering_vector(1.8, 8)
        with pytest.raises(ValueError):
            steering_vector(0.0, 0)


class TestSteeringMatrix:
    def test_no_interferers_single_column(self):
        scen = make_scenario(theta_interferers=(), snr_interferer_db=())
        mat = steering_matrix(scen)
        assert mat.shape == (16, 1)
        np.testing.assert_allclose(mat[:, 0], steering_vector(0.0, 16))

    def test_two_jammer_geometry_shape_and_modulus(self):
        scen = make_scenario()
        mat = steering_matrix(scen)
        assert mat.shape == (16, 3)
        np.testing.assert_allclose(np.abs(mat), 1.0, atol=1e-13)

    def test_column_norms_equal_sqrt_n(self):
        scen = make_scenario(n_antennas=32, n_subarrays=4)
        norms = np.linalg.norm(steering_matrix(scen), axis=0)
        np.testing.assert_allclose(norms, np.sqrt(32), atol=1e-12)

    def test_interference_matrix_drops_desired(self):
        scen = make_scenario()
        ai = interference_matrix(scen)
        assert ai.shape == (16, 2)
        np.testing.assert_allclose(ai[:, 0], steering_vector(np.radians(60), 16))


class TestScenarioValidation:
    def test_rejects_indivisible_subarrays(self):
        with pytest.raises(ValueError):
            make_scenario(n_antennas=14)

    def test_rejects_out_of_range_doa(self):
        with pytest.raises(ValueError):
            make_scenario(theta_interferers=(2.0,))

    def test_rejects_coincident_desired_and_interferer(self):
        with pytest.raises(ValueError):
            make_scenario(theta_interferers=(0.0,))

    def test_rejects_bad_snapshots_and_noise(self):
        with pytest.raises(ValueError):
            make_scenario(n_snapshots=0)
        with pytest.raises(ValueError):
            make_scenario(noise_power=0.0)

    def test_scalar_interferer_snr_broadcasts(self):
        scen = make_scenario(snr_interferer_db=15.0)
        assert scen.snr_interferer_db == (15.0, 15.0)
        np.testing.assert_allclose(scen.interferer_powers, 10.0 ** 1.5)

    def test_fully_digital_variant(self):
        scen = make_scenario().fully_digital()
        assert scen.n_subarrays == 16
        assert scen.elements_per_subarray == 1


class TestScenarioSerialization:
    def test_round_trip_preserves_fields(self, tmp_path):
        scen = make_scenario(doa_mismatch_max=np.radians(3.0), seed=99)
        path = tmp_path / "scenario.json"
        save_scenario(scen, path, optimizer={"population": 40, "iterations": 100})
        loaded = load_scenario(path)
        assert (loaded.n_antennas, loaded.n_subarrays, loaded.seed) == (16, 4, 99)
        assert loaded.n_snapshots == scen.n_snapshots
        assert loaded.snr_interferer_db == scen.snr_interferer_db
        # Angles pass through degrees in the file; equal to rounding.
        assert loaded.theta_desired == pytest.approx(scen.theta_desired, abs=1e-12)
        assert loaded.theta_interferers == pytest.approx(scen.theta_interferers, abs=1e-12)
        assert loaded.doa_mismatch_max == pytest.approx(scen.doa_mismatch_max, abs=1e-12)

    def test_angles_stored_in_degrees(self):
        doc = scenario_to_dict(make_scenario())
        assert doc["theta_interferers"] == [pytest.approx(60.0), pytest.approx(-30.0)]
        assert doc["theta_desired"] == pytest.approx(0.0)

    def test_inconsistent_subarray_size_rejected(self):
        doc = scenario_to_dict(make_scenario())
        doc["elements_per_subarray"] = 7
        with pytest.raises(ValueError):
            scenario_from_dict(doc)


class TestGenerateSnapshots:
    def test_zero_power_sources_leave_pure_noise(self):
        scen = make_scenario(snr_desired_db=-np.inf, snr_interferer_db=-np.inf,
                             n_snapshots=1)
        f_rf = analog_from_angle(0.0, 16, 4)
        norms = []
        for seed in range(200):
            block = generate_snapshots(scen, f_rf, np.random.default_rng(seed))
            assert np.all(block.true_signals == 0)
            norms.append(np.linalg.norm(block.samples) ** 2)
        assert np.mean(norms) == pytest.approx(4.0, rel=0.2)

    def test_identical_seeds_identical_blocks(self):
        scen = make_scenario(seed=7)
        f_rf = analog_from_angle(0.0, 16, 4)
        a = generate_snapshots(scen, f_rf, np.random.default_rng(7))
        b = generate_snapshots(scen, f_rf, np.random.default_rng(7))
        assert np.array_equal(a.samples, b.samples)
        assert np.array_equal(a.noise, b.noise)

    def test_dimension_mismatch_rejected(self):
        scen = make_scenario()
        wrong = analog_from_angle(0.0, 8, 4)
        with pytest.raises(ValueError):
            generate_snapshots(scen, wrong, np.random.default_rng(0))

    def test_desired_component_power_matches_theory(self):
        # Monte Carlo oracle: the combined desired component has second moment
        # P_d * ||F^H a(theta_d)||^2 per snapshot.
        scen = make_scenario(snr_desired_db=-5.0, snr_interferer_db=15.0)
        f_rf = analog_from_angle(0.0, 16, 4)
        reduced = f_rf.reduce(steering_vector(0.0, 16))
        expected = scen.desired_power * np.linalg.norm(reduced) ** 2
        powers = []
        for seed in range(50):
            block = generate_snapshots(scen, f_rf, np.random.default_rng(seed))
            desired, _, _ = snapshot_components(block, scen, f_rf)
            powers.append(np.mean(np.abs(np.linalg.norm(desired, axis=0)) ** 2))
        assert np.mean(powers) == pytest.approx(expected, rel=0.2)

    def test_components_sum_to_samples(self):
        scen = make_scenario()
        f_rf = analog_from_angle(0.0, 16, 4)
        block = generate_snapshots(scen, f_rf, np.random.default_rng(5))
        desired, interference, noise = snapshot_components(block, scen, f_rf)
        np.testing.assert_allclose(desired + interference + noise, block.samples, atol=1e-12)

    def test_recombination_with_same_beamformer_is_identity(self):
        scen = make_scenario()
        f_rf = analog_from_angle(0.0, 16, 4)
        block = generate_snapshots(scen, f_rf, np.random.default_rng(11))
        again = recombine_snapshots(block, scen, f_rf)
        np.testing.assert_allclose(again.samples, block.samples, atol=1e-12)


class TestSampleCovariance:
    def test_single_snapshot_outer_product(self):
        block = SnapshotBlock(samples=np.array([[1.0 + 0j], [0.0 + 0j]]),
                              true_signals=np.zeros((1, 1)), noise=np.zeros((2, 1)),
                              noise_power=1.0)
        np.testing.assert_allclose(sample_covariance(block), [[1.0, 0.0], [0.0, 0.0]])

    def test_identical_snapshots_give_rank_one(self):
        x0 = np.array([1.0 + 1j, -2.0, 0.5j])
        samples = np.tile(x0[:, None], (1, 10))
        block = SnapshotBlock(samples=samples, true_signals=np.zeros((1, 10)),
                              noise=np.zeros((3, 10)), noise_power=1.0)
        np.testing.assert_allclose(sample_covariance(block), np.outer(x0, x0.conj()),
                                   atol=1e-12)

    def test_pure_noise_converges_to_identity(self):
        # Law of large numbers at Q = 10000, sigma^2 = 1, L = 4.
        scen = make_scenario(snr_desired_db=-np.inf, snr_interferer_db=-np.inf,
                             n_snapshots=10_000)
        f_rf = analog_from_angle(0.0, 16, 4)
        block = generate_snapshots(scen, f_rf, np.random.default_rng(42))
        r = sample_covariance(block)
        assert np.linalg.norm(r - np.eye(4)) < 0.1

    def test_hermitian_and_psd(self):
        scen = make_scenario()
        f_rf = analog_from_angle(0.0, 16, 4)
        for seed in range(5):
            r = sample_covariance(generate_snapshots(scen, f_rf, np.random.default_rng(seed)))
            assert np.allclose(r, r.conj().T, atol=1e-12)
            eigvals = np.linalg.eigvalsh(r)
            assert eigvals.min() >= -1e-10 * np.trace(r).real

    def test_empty_block_rejected(self):
        with pytest.raises(ValueError):
            sample_covariance(np.zeros((4, 0)))


class TestTrueReducedCovariance:
    def test_no_interferers_gives_scaled_identity(self):
        scen = make_scenario(theta_interferers=(), snr_interferer_db=(), noise_power=2.0)
        f_rf = analog_from_angle(0.2, 16, 4)
        np.testing.assert_allclose(true_reduced_covariance(scen, f_rf), 2.0 * np.eye(4),
                                   atol=1e-12)

    def test_strong_interferer_dominates_eigenvector(self):
        scen = make_scenario(theta_interferers=(np.radians(40.0),),
                             snr_interferer_db=80.0)
        f_rf = analog_from_angle(0.0, 16, 4)
        r = true_reduced_covariance(scen, f_rf)
        _, vecs = np.linalg.eigh(r)
        dominant = vecs[:, -1]
        reduced = f_rf.reduce(steering_vector(np.radians(40.0), 16))
        reduced = reduced / np.linalg.norm(reduced)
        assert abs(np.vdot(dominant, reduced)) == pytest.approx(1.0, abs=1e-6)

    def test_matches_monte_carlo_interference_plus_noise(self):
        # Fig. 2-style scenario; compare against the sample covariance of the
        # interference+noise part of 1e5 snapshots.
        scen = make_scenario(n_antennas=32, n_subarrays=4, snr_desired_db=0.0,
                             n_snapshots=100_000)
        f_rf = analog_from_angle(0.0, 32, 4)
        block = generate_snapshots(scen, f_rf, np.random.default_rng(2024))
        _, interference, noise = snapshot_components(block, scen, f_rf)
        x = interference + noise
        empirical = (x @ x.conj().T) / x.shape[1]
        analytic = true_reduced_covariance(scen, f_rf)
        rel = np.linalg.norm(empirical - analytic) / np.linalg.norm(analytic)
        assert rel < 0.05


class TestDeterminism:
    def test_pipeline_to_covariance_is_byte_deterministic(self):
        scen = make_scenario(seed=123)
        f_rf = analog_from_angle(0.0, 16, 4)
        results = []
        for _ in range(2):
            block = generate_snapshots(scen, f_rf, np.random.default_rng(scen.seed))
            results.append(sample_covariance(block).tobytes())
        assert results[0] == results[1]

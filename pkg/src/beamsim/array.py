"""Uniform linear array model: scenarios, steering vectors, snapshots, covariance.

The receive array is an N-element half-wavelength ULA split into L contiguous
subarrays of M = N/L elements, each driven by one RF chain.  Baseband snapshots
follow x(n) = F_RF^H A s(n) + v(n) with L-dimensional circular complex Gaussian
noise injected after the analog combiner.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "Scenario",
    "SnapshotBlock",
    "steering_vector",
    "steering_matrix",
    "interference_matrix",
    "generate_snapshots",
    "recombine_snapshots",
    "snapshot_components",
    "sample_covariance",
    "true_reduced_covariance",
    "scenario_to_dict",
    "scenario_from_dict",
    "save_scenario",
    "load_scenario",
]

HALF_PI = np.pi / 2.0


@dataclass(frozen=True)
class Scenario:
    """Full experiment configuration for one simulated environment.

    Angles are radians internally; the JSON representation stores degrees.
    ``snr_interferer_db`` may be a single value (applied to every interferer)
    or one value per interferer.
    """

    n_antennas: int
    n_subarrays: int
    theta_desired: float
    theta_interferers: tuple[float, ...]
    snr_desired_db: float
    snr_interferer_db: tuple[float, ...]
    noise_power: float = 1.0
    n_snapshots: int = 128
    seed: int = 0
    doa_mismatch_max: float = 0.0
    element_spacing: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "theta_interferers",
                           tuple(float(t) for t in np.atleast_1d(self.theta_interferers)))
        snr_i = np.atleast_1d(self.snr_interferer_db).astype(float)
        if snr_i.size == 1:
            snr_i = np.repeat(snr_i, len(self.theta_interferers))
        object.__setattr__(self, "snr_interferer_db", tuple(snr_i))
        if self.n_subarrays < 1:
            raise ValueError("n_subarrays must be >= 1")
        if self.n_antennas % self.n_subarrays != 0:
            raise ValueError(
                f"n_antennas={self.n_antennas} not divisible by n_subarrays={self.n_subarrays}")
        if self.elements_per_subarray < 1:
            raise ValueError("elements_per_subarray must be >= 1")
        if self.element_spacing != 0.5:
            raise ValueError("only half-wavelength element spacing is supported")
        for theta in (self.theta_desired, *self.theta_interferers):
            if abs(theta) > HALF_PI:
                raise ValueError(f"DOA {theta} outside [-pi/2, pi/2]")
        if any(np.isclose(self.theta_desired, t) for t in self.theta_interferers):
            raise ValueError("desired DOA coincides with an interferer DOA")
        if len(self.snr_interferer_db) != len(self.theta_interferers):
            raise ValueError("need one interferer SNR per interferer DOA")
        if self.n_snapshots < 1:
            raise ValueError("n_snapshots must be >= 1")
        if not self.noise_power > 0:
            raise ValueError("noise_power must be positive")
        if self.doa_mismatch_max < 0:
            raise ValueError("doa_mismatch_max must be >= 0")

    @property
    def elements_per_subarray(self) -> int:
        return self.n_antennas // self.n_subarrays

    @property
    def n_interferers(self) -> int:
        return len(self.theta_interferers)

    @property
    def desired_power(self) -> float:
        """Linear desired-signal power P_d = sigma^2 * 10^(SNR_d/10)."""
        return self.noise_power * 10.0 ** (self.snr_desired_db / 10.0)

    @property
    def interferer_powers(self) -> np.ndarray:
        """Linear interferer powers P_k, one per interferer."""
        return self.noise_power * 10.0 ** (np.asarray(self.snr_interferer_db) / 10.0)

    def fully_digital(self) -> "Scenario":
        """Variant with one RF chain per antenna (M = 1, L = N)."""
        return replace(self, n_subarrays=self.n_antennas)


@dataclass(frozen=True)
class SnapshotBlock:
    """Q post-analog baseband snapshots plus the realizations that built them.

    ``samples`` is L x Q with columns x(n) = F_RF^H A s(n) + v(n) for the
    analog beamformer in effect at generation time.  ``true_signals`` is the
    (K+1) x Q source matrix (desired first) and ``noise`` the L x Q additive
    noise, kept so the same realization can be re-combined under a different
    analog beamformer or split into signal components.
    """

    samples: np.ndarray
    true_signals: np.ndarray
    noise: np.ndarray
    noise_power: float

    @property
    def n_snapshots(self) -> int:
        return self.samples.shape[1]


def steering_vector(theta: float, n_antennas: int) -> np.ndarray:
    """Array manifold a(theta) of the half-wavelength ULA.

    Entry n is exp(j*pi*n*sin(theta)) for n = 0..N-1; no normalization, so
    every entry has unit magnitude and a(0) is the all-ones vector.

    Parameters
    ----------
    theta : float
        Direction of arrival in radians, within [-pi/2, pi/2].
    n_antennas : int
        Number of array elements N.

    Returns
    -------
    ndarray, shape (N,), complex
    """
    if n_antennas < 1:
        raise ValueError("n_antennas must be >= 1")
    if abs(theta) > HALF_PI:
        raise ValueError(f"angle {theta} outside [-pi/2, pi/2]")
    n = np.arange(n_antennas)
    return np.exp(1j * np.pi * n * np.sin(theta))


def steering_matrix(scenario: Scenario) -> np.ndarray:
    """N x (K+1) matrix [a(theta_d), a(theta_1), ..., a(theta_K)]."""
    angles = (scenario.theta_desired, *scenario.theta_interferers)
    return np.column_stack([steering_vector(t, scenario.n_antennas) for t in angles])


def interference_matrix(scenario: Scenario) -> np.ndarray:
    """N x K matrix of interferer steering vectors (empty when K = 0)."""
    return steering_matrix(scenario)[:, 1:]


def _require_analog_shape(scenario: Scenario, f_rf_matrix: np.ndarray) -> None:
    expected = (scenario.n_antennas, scenario.n_subarrays)
    if f_rf_matrix.shape != expected:
        raise ValueError(
            f"analog beamformer shape {f_rf_matrix.shape} does not match scenario {expected}")


def _analog_matrix(f_rf) -> np.ndarray:
    # Accept either an AnalogBeamformer (duck-typed via .matrix) or a bare matrix.
    return np.asarray(getattr(f_rf, "matrix", f_rf))


def generate_snapshots(scenario: Scenario, f_rf, rng: np.random.Generator) -> SnapshotBlock:
    """Draw Q baseband snapshots x(n) = F_RF^H A s(n) + v(n).

    The desired signal, each interferer, and the L-dimensional noise are
    independent circular complex Gaussians with powers P_d, P_k and sigma^2
    per entry.  Identical generators yield bit-identical blocks.

    Parameters
    ----------
    scenario : Scenario
    f_rf : AnalogBeamformer or ndarray
        N x L analog combining matrix in effect during acquisition.
    rng : numpy.random.Generator
        Seeded generator; consumed in a fixed draw order.

    Returns
    -------
    SnapshotBlock
    """
    matrix = _analog_matrix(f_rf)
    _require_analog_shape(scenario, matrix)
    q = scenario.n_snapshots
    k = scenario.n_interferers
    powers = np.concatenate(([scenario.desired_power], scenario.interferer_powers))
    scale = np.sqrt(powers / 2.0)[:, None]
    signals = scale * (rng.standard_normal((k + 1, q)) + 1j * rng.standard_normal((k + 1, q)))
    sigma = np.sqrt(scenario.noise_power / 2.0)
    noise = sigma * (rng.standard_normal((scenario.n_subarrays, q))
                     + 1j * rng.standard_normal((scenario.n_subarrays, q)))
    samples = matrix.conj().T @ (steering_matrix(scenario) @ signals) + noise
    return SnapshotBlock(samples=samples, true_signals=signals, noise=noise,
                         noise_power=scenario.noise_power)


def recombine_snapshots(block: SnapshotBlock, scenario: Scenario, f_rf) -> SnapshotBlock:
    """Re-apply a different analog beamformer to the same signal/noise realization.

    Models re-tuning the phase shifters while the environment and the
    post-RF-chain noise realization stay fixed: x'(n) = F'^H A s(n) + v(n).
    """
    matrix = _analog_matrix(f_rf)
    _require_analog_shape(scenario, matrix)
    samples = matrix.conj().T @ (steering_matrix(scenario) @ block.true_signals) + block.noise
    return SnapshotBlock(samples=samples, true_signals=block.true_signals,
                         noise=block.noise, noise_power=block.noise_power)


def snapshot_components(block: SnapshotBlock, scenario: Scenario, f_rf):
    """Split a block into (desired, interference, noise) L x Q components.

    The three parts sum to ``F_RF^H A s(n) + v(n)`` exactly; useful as a
    snapshot-level oracle for output power bookkeeping.
    """
    matrix = _analog_matrix(f_rf)
    _require_analog_shape(scenario, matrix)
    reduced = matrix.conj().T @ steering_matrix(scenario)
    desired = np.outer(reduced[:, 0], block.true_signals[0])
    interference = reduced[:, 1:] @ block.true_signals[1:]
    return desired, interference, block.noise


def sample_covariance(block: SnapshotBlock) -> np.ndarray:
    """Sample covariance (1/Q) sum_q x(q) x(q)^H of a snapshot block.

    Hermitian by construction; the tiny numerical skew of the matrix product
    is symmetrized away.
    """
    x = np.asarray(block.samples if isinstance(block, SnapshotBlock) else block)
    if x.ndim != 2 or x.shape[1] < 1:
        raise ValueError("snapshot block must contain at least one snapshot")
    r = (x @ x.conj().T) / x.shape[1]
    return 0.5 * (r + r.conj().T)


def true_reduced_covariance(scenario: Scenario, f_rf) -> np.ndarray:
    """Analytic interference-plus-noise covariance seen at the digital combiner.

    Returns sum_k P_k (F^H a_k)(F^H a_k)^H + sigma^2 F^H F, which reduces to
    sigma^2 I_L for any orthonormal analog beamformer.
    """
    matrix = _analog_matrix(f_rf)
    _require_analog_shape(scenario, matrix)
    reduced_i = matrix.conj().T @ interference_matrix(scenario)
    r = (reduced_i * scenario.interferer_powers) @ reduced_i.conj().T
    r = r + scenario.noise_power * (matrix.conj().T @ matrix)
    return 0.5 * (r + r.conj().T)


_ANGLE_FIELDS = ("theta_desired", "theta_interferers", "doa_mismatch_max")


def scenario_to_dict(scenario: Scenario) -> dict:
    """JSON-ready dict with snake_case fields; angles converted to degrees."""
    doc = {
        "n_antennas": scenario.n_antennas,
        "n_subarrays": scenario.n_subarrays,
        "elements_per_subarray": scenario.elements_per_subarray,
        "element_spacing": scenario.element_spacing,
        "theta_desired": float(np.degrees(scenario.theta_desired)),
        "theta_interferers": [float(np.degrees(t)) for t in scenario.theta_interferers],
        "snr_desired_db": scenario.snr_desired_db,
        "snr_interferer_db": list(scenario.snr_interferer_db),
        "noise_power": scenario.noise_power,
        "n_snapshots": scenario.n_snapshots,
        "seed": scenario.seed,
        "doa_mismatch_max": float(np.degrees(scenario.doa_mismatch_max)),
    }
    return doc


def scenario_from_dict(doc: dict) -> Scenario:
    """Inverse of :func:`scenario_to_dict`; angles in the dict are degrees."""
    known = dict(doc)
    known.pop("optimizer", None)
    m = known.pop("elements_per_subarray", None)
    scenario = Scenario(
        n_antennas=int(known["n_antennas"]),
        n_subarrays=int(known["n_subarrays"]),
        theta_desired=float(np.radians(known["theta_desired"])),
        theta_interferers=tuple(np.radians(known["theta_interferers"])),
        snr_desired_db=float(known["snr_desired_db"]),
        snr_interferer_db=tuple(np.atleast_1d(known["snr_interferer_db"]).astype(float)),
        noise_power=float(known.get("noise_power", 1.0)),
        n_snapshots=int(known.get("n_snapshots", 128)),
        seed=int(known.get("seed", 0)),
        doa_mismatch_max=float(np.radians(known.get("doa_mismatch_max", 0.0))),
        element_spacing=float(known.get("element_spacing", 0.5)),
    )
    if m is not None and int(m) != scenario.elements_per_subarray:
        raise ValueError("elements_per_subarray inconsistent with n_antennas/n_subarrays")
    return scenario


def save_scenario(scenario: Scenario, path, optimizer: dict | None = None) -> None:
    """Write a scenario JSON document; optional optimizer settings ride along."""
    doc = scenario_to_dict(scenario)
    if optimizer is not None:
        doc["optimizer"] = optimizer
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def load_optimizer_settings(path) -> dict:
    """Optimizer block of a scenario JSON document ({} when absent)."""
    with open(path) as fh:
        return dict(json.load(fh).get("optimizer", {}))

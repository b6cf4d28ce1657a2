"""Partial-connected analog beamformer, SINR, cost function, and beampatterns.

The analog stage is an N x L block-diagonal matrix of unit-modulus phase
shifters (scaled by 1/sqrt(M)); the digital stage is a length-L complex
combining vector.  Both enter the output SINR

    SINR = P_d |f^H F^H a(theta_d)|^2
           / (sum_k P_k |f^H F^H a(theta_k)|^2 + sigma^2 f^H f)

and the interference-residual cost minimized by the analog search and the
swarm optimizers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .array import (
    Scenario,
    interference_matrix,
    scenario_to_dict,
    steering_vector,
)

__all__ = [
    "AnalogBeamformer",
    "analog_from_angle",
    "identity_analog",
    "output_sinr",
    "cost_function",
    "beampattern",
    "distortionless",
    "export_weights",
    "export_beampattern",
]

ORTHONORMALITY_TOL = 1e-12


@dataclass(frozen=True)
class AnalogBeamformer:
    """Block-diagonal N x L phase-shift matrix with 1/sqrt(M)-modulus entries.

    Column l is supported on rows (l*M)..(l*M + M - 1) only, so
    F^H F = I_L holds for every valid instance.
    """

    matrix: np.ndarray
    steer_angle: float | None = None

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] % m.shape[1] != 0:
            raise ValueError("analog matrix must be N x L with L dividing N")
        n, l = m.shape
        size = n // l
        mod = np.abs(m)
        for col in range(l):
            block = slice(col * size, (col + 1) * size)
            if not np.allclose(mod[block, col], 1.0 / np.sqrt(size), atol=ORTHONORMALITY_TOL):
                raise ValueError("nonzero analog entries must have magnitude 1/sqrt(M)")
            outside = np.delete(mod[:, col], np.r_[block])
            if outside.size and outside.max() != 0.0:
                raise ValueError("analog matrix must be block-diagonal")
        gram = m.conj().T @ m
        if not np.allclose(gram, np.eye(l), atol=1e-10):
            raise ValueError("analog beamformer columns must be orthonormal")

    @property
    def n_antennas(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_subarrays(self) -> int:
        return self.matrix.shape[1]

    @property
    def elements_per_subarray(self) -> int:
        return self.n_antennas // self.n_subarrays

    def reduce(self, vectors: np.ndarray) -> np.ndarray:
        """Project antenna-domain vectors into the RF-chain domain: F^H v."""
        return self.matrix.conj().T @ vectors


def analog_from_angle(theta: float, n_antennas: int, n_subarrays: int,
                      index_offset: int = 0) -> AnalogBeamformer:
    """Analog beamformer steered at ``theta``.

    The phase of element m of subarray l is pi * g * sin(theta) with the
    zero-based global element index g = l*M + m, matching the manifold
    exponent convention.  ``index_offset`` shifts g by a constant, which only
    rotates each subarray by a common phase (absorbed by the digital weights);
    it is exposed for auditing the alternative one-based convention.

    Parameters
    ----------
    theta : float
        Steering angle in radians, within [-pi/2, pi/2].
    n_antennas, n_subarrays : int
        Array size N and RF-chain count L; L must divide N.

    Returns
    -------
    AnalogBeamformer
    """
    if n_subarrays < 1 or n_antennas % n_subarrays != 0:
        raise ValueError("n_subarrays must divide n_antennas")
    if abs(theta) > np.pi / 2:
        raise ValueError(f"angle {theta} outside [-pi/2, pi/2]")
    size = n_antennas // n_subarrays
    phases = np.pi * (np.arange(n_antennas) + index_offset) * np.sin(theta)
    matrix = np.zeros((n_antennas, n_subarrays), dtype=complex)
    for col in range(n_subarrays):
        block = slice(col * size, (col + 1) * size)
        matrix[block, col] = np.exp(1j * phases[block]) / np.sqrt(size)
    return AnalogBeamformer(matrix=matrix, steer_angle=float(theta))


def identity_analog(n_antennas: int) -> AnalogBeamformer:
    """N x N identity stage used by the fully digital baselines."""
    return analog_from_angle(0.0, n_antennas, n_antennas)


def _as_weights(f_d) -> np.ndarray:
    w = np.asarray(f_d, dtype=complex).ravel()
    if w.size == 0 or not np.any(w):
        raise ValueError("digital weight vector must be nonzero")
    return w


def _scaled_interference_response(f_rf: AnalogBeamformer, f_d, scenario: Scenario) -> np.ndarray:
    """Per-interferer responses sqrt(P_k) * f^H F^H a(theta_k)."""
    w = _as_weights(f_d)
    reduced = f_rf.reduce(interference_matrix(scenario))
    return np.sqrt(scenario.interferer_powers) * (w.conj() @ reduced)


def output_sinr(f_rf: AnalogBeamformer, f_d, scenario: Scenario) -> float:
    """Output SINR in dB of the hybrid pair (F_RF, f_D) under a scenario.

    Interferer powers enter as diag(P_1..P_K); the result is invariant to
    rescaling f_D by any nonzero complex constant.
    """
    w = _as_weights(f_d)
    desired = f_rf.reduce(steering_vector(scenario.theta_desired, scenario.n_antennas))
    signal = scenario.desired_power * np.abs(w.conj() @ desired) ** 2
    residual = _scaled_interference_response(f_rf, w, scenario)
    denom = np.sum(np.abs(residual) ** 2) + scenario.noise_power * np.real(w.conj() @ w)
    return float(10.0 * np.log10(signal / denom))


def cost_function(f_rf: AnalogBeamformer, f_d, scenario: Scenario) -> float:
    """Residual interference power sum_k P_k |f^H F^H a(theta_k)|^2.

    This is the objective of the analog grid search and of the phase-only
    swarm optimizers; it is zero iff every interference response vanishes.
    """
    residual = _scaled_interference_response(f_rf, f_d, scenario)
    return float(np.sum(np.abs(residual) ** 2))


def beampattern(f_rf: AnalogBeamformer, f_d, grid) -> np.ndarray:
    """Peak-normalized power pattern 20*log10 |f^H F^H a(theta)| over a grid.

    Parameters
    ----------
    f_rf : AnalogBeamformer
    f_d : array_like
        Digital weights.
    grid : array_like
        Evaluation angles in radians.

    Returns
    -------
    ndarray of dB gains, max over the grid equal to 0 dB.
    """
    w = _as_weights(f_d)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("beampattern grid must be nonempty")
    n = f_rf.n_antennas
    manifold = np.exp(1j * np.pi * np.outer(np.arange(n), np.sin(grid)))
    response = np.abs(w.conj() @ f_rf.reduce(manifold))
    response = np.maximum(response, np.finfo(float).tiny)
    gains = 20.0 * np.log10(response)
    return gains - gains.max()


def null_depth(f_rf: AnalogBeamformer, f_d, theta: float,
               window: float = np.radians(2.0), n_grid: int = 3601) -> float:
    """Depth of the pattern dip near ``theta``, on an amplitude decibel scale.

    Measured as 10*log10 of the peak-normalized field amplitude at its lowest
    point within ``window`` of ``theta`` (half the power-pattern value of
    :func:`beampattern`, which the comparison tables use as their scale).
    More negative is a deeper null.
    """
    grid = np.linspace(-np.pi / 2, np.pi / 2, n_grid)
    gains = beampattern(f_rf, f_d, grid)
    near = np.abs(grid - theta) <= window
    if not near.any():
        raise ValueError("window around theta contains no grid points")
    return float(gains[near].min() / 2.0)


def distortionless(f_rf: AnalogBeamformer, f_d, theta_desired: float) -> np.ndarray:
    """Rescale weights so f^H F^H a(theta_d) = 1 (SINR is unaffected)."""
    w = _as_weights(f_d)
    gain = w.conj() @ f_rf.reduce(steering_vector(theta_desired, f_rf.n_antennas))
    if gain == 0:
        raise ValueError("desired response is zero; cannot normalize")
    return w / np.conj(gain)


def scenario_hash(scenario: Scenario) -> str:
    """Stable hex digest of the scenario JSON document."""
    doc = json.dumps(scenario_to_dict(scenario), sort_keys=True)
    return hashlib.sha256(doc.encode()).hexdigest()


def export_weights(path, f_d, scenario: Scenario, algorithm: str, seed: int | None = None) -> None:
    """Write digital weights as JSON real/imag pairs with provenance metadata."""
    w = _as_weights(f_d)
    doc = {
        "weights": [[float(v.real), float(v.imag)] for v in w],
        "metadata": {
            "scenario_sha256": scenario_hash(scenario),
            "algorithm": algorithm,
            "seed": seed,
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def export_beampattern(path, grid, gains_db) -> None:
    """Write a two-column CSV (theta_deg, gain_db)."""
    grid = np.asarray(grid, dtype=float)
    gains_db = np.asarray(gains_db, dtype=float)
    with open(path, "w") as fh:
        fh.write("theta_deg,gain_db\n")
        for theta, gain in zip(np.degrees(grid), gains_db):
            fh.write(f"{float(theta)!r},{float(gain)!r}\n")

"""Closed-form digital beamformers: Capon, diagonal loading, and SMF loading.

All solvers share one formula,

    w = (R + xi*I)^{-1} a_eff / (a_eff^H (R + xi*I)^{-1} a_eff),

differing only in the loading level xi: zero for the standard Capon
beamformer, a fixed constant for diagonal loading, or the data-derived
spatial-matched-filter level.  The same code serves the hybrid path
(L-dimensional covariance, reduced steering F^H a) and the fully digital
baselines (N-dimensional covariance, plain steering).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .array import Scenario, SnapshotBlock, sample_covariance, steering_vector
from .hybrid import AnalogBeamformer

__all__ = [
    "LoadingPolicy",
    "capon_weights",
    "smf_loading_level",
    "solve_digital",
    "DEFAULT_LOADING_LEVEL",
]

DEFAULT_LOADING_LEVEL = 30.0

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class LoadingPolicy:
    """Diagonal loading rule: none (Capon), fixed level, or data-derived SMF.

    An SMF policy starts with no level; it must be resolved against a snapshot
    block (never cached across blocks) before a solve.
    """

    kind: str
    level: float | None = None

    _KINDS = ("none", "fixed", "smf")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"loading kind must be one of {self._KINDS}")
        if self.kind == "none":
            object.__setattr__(self, "level", 0.0)
        if self.kind == "fixed":
            if self.level is None or self.level < 0:
                raise ValueError("fixed loading needs a level >= 0")

    @classmethod
    def none(cls) -> "LoadingPolicy":
        return cls("none")

    @classmethod
    def fixed(cls, level: float = DEFAULT_LOADING_LEVEL) -> "LoadingPolicy":
        return cls("fixed", float(level))

    @classmethod
    def smf(cls) -> "LoadingPolicy":
        return cls("smf")

    def resolve(self, block: SnapshotBlock, presumed_steering: np.ndarray) -> "LoadingPolicy":
        """Return a policy with a concrete level for this data block."""
        if self.kind != "smf":
            return self
        return LoadingPolicy("smf", smf_loading_level(block, presumed_steering))


def capon_weights(covariance: np.ndarray, effective_steering: np.ndarray,
                  loading: LoadingPolicy | float = 0.0) -> np.ndarray:
    """Distortionless minimum-variance weights from a (loaded) covariance.

    Solves (R + xi*I) w = a_eff by Hermitian factorization (no explicit
    inverse) and normalizes so w^H a_eff = 1.

    Parameters
    ----------
    covariance : ndarray, shape (D, D)
        Hermitian sample or analytic covariance.
    effective_steering : ndarray, shape (D,)
        Reduced steering F^H a(theta_d) in the hybrid path, or a(theta_d)
        for the fully digital baselines.
    loading : LoadingPolicy or float
        Diagonal loading level xi; an SMF policy must already be resolved.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the loaded covariance is singular or its condition number exceeds
        1e12 (the estimate is reported in the message).
    """
    steering = np.asarray(effective_steering, dtype=complex).ravel()
    r = np.asarray(covariance, dtype=complex)
    if r.shape != (steering.size, steering.size):
        raise ValueError(f"covariance shape {r.shape} does not match steering length {steering.size}")
    xi = loading.level if isinstance(loading, LoadingPolicy) else float(loading)
    if xi is None:
        raise ValueError("SMF loading policy must be resolved against a block first")
    loaded = r + xi * np.eye(r.shape[0])
    cond = np.linalg.cond(loaded)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise np.linalg.LinAlgError(
            f"loaded covariance is numerically singular (condition number {cond:.3e})")
    solved = scipy.linalg.solve(loaded, steering, assume_a="her")
    denom = steering.conj() @ solved
    return solved / denom


def smf_loading_level(block: SnapshotBlock, presumed_steering: np.ndarray) -> float:
    """Spatial-matched-filter loading level a_hat^H R_x a_hat.

    The presumed steering is normalized internally, so the level does not
    depend on its scale.
    """
    steering = np.asarray(presumed_steering, dtype=complex).ravel()
    norm = np.linalg.norm(steering)
    if norm == 0:
        raise ValueError("presumed steering must be nonzero")
    unit = steering / norm
    r = sample_covariance(block)
    return float(np.real(unit.conj() @ r @ unit))


def solve_digital(scenario: Scenario, f_rf: AnalogBeamformer, block: SnapshotBlock,
                  method: str, presumed_theta: float | None = None,
                  loading_level: float = DEFAULT_LOADING_LEVEL) -> np.ndarray:
    """Closed-form digital weights from a snapshot block.

    ``method`` is one of ``scb`` (no loading), ``dl`` (fixed level) or
    ``smf`` (level recomputed from this block).  The steering direction
    defaults to the scenario's desired DOA; pass ``presumed_theta`` to model
    DOA mismatch.
    """
    policies = {
        "scb": LoadingPolicy.none(),
        "dl": LoadingPolicy.fixed(loading_level),
        "smf": LoadingPolicy.smf(),
    }
    if method not in policies:
        raise ValueError(f"unknown closed-form method {method!r}")
    if block.samples.shape[0] != f_rf.n_subarrays:
        raise ValueError("snapshot block dimension does not match analog beamformer")
    theta = scenario.theta_desired if presumed_theta is None else presumed_theta
    steering = f_rf.reduce(steering_vector(theta, scenario.n_antennas))
    policy = policies[method].resolve(block, steering)
    return capon_weights(sample_covariance(block), steering, policy)

"""Swarm optimizers over bounded real vectors: PSO, bat algorithm, improved bat.

All three minimize a nonnegative objective over a box, keep an elitist global
best (the per-iteration best-cost trace is non-increasing), clamp positions to
the bounds after every update, and are bit-reproducible for a fixed seeded
generator.  For hybrid beamforming the decision vector is the L digital
phases and the objective is the residual interference power.

The bat algorithm follows its canonical recurrences literally, including the
velocity term (x_i - x*) * f that moves bats away from the incumbent (a
``toward_best`` switch restores the conventional sign) and acceptance gated on
improving the global best.  The improved variant adds habitat selection
(quantum jumps around the global best), Doppler-compensated frequencies,
a stochastic inertia weight, and a stagnation reset of loudness/pulse rates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .array import Scenario, interference_matrix, steering_vector
from .hybrid import AnalogBeamformer

__all__ = [
    "BoundedObjective",
    "phase_objective",
    "inverse_sinr_objective",
    "pso_optimize",
    "ba_optimize",
    "iba_optimize",
    "BatConfig",
    "ImprovedBatConfig",
    "pulse_rate",
    "write_cost_trace",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class BoundedObjective:
    """A deterministic cost over a box in R^D."""

    dimension: int
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    evaluate: Callable[[np.ndarray], float]

    def __post_init__(self):
        lb = np.broadcast_to(np.asarray(self.lower_bounds, float), (self.dimension,)).copy()
        ub = np.broadcast_to(np.asarray(self.upper_bounds, float), (self.dimension,)).copy()
        if np.any(ub <= lb):
            raise ValueError("upper bounds must exceed lower bounds")
        object.__setattr__(self, "lower_bounds", lb)
        object.__setattr__(self, "upper_bounds", ub)

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower_bounds, self.upper_bounds)

    @property
    def span(self) -> np.ndarray:
        return self.upper_bounds - self.lower_bounds


def _reduced_interference(f_rf: AnalogBeamformer, scenario: Scenario) -> np.ndarray:
    """Interferer responses at the digital combiner, scaled by sqrt(P_k)."""
    reduced = f_rf.reduce(interference_matrix(scenario))
    return reduced * np.sqrt(scenario.interferer_powers)


def phase_objective(f_rf: AnalogBeamformer, scenario: Scenario) -> BoundedObjective:
    """Objective over the L digital phases: cost of f_D = [e^{j a_1}, ...].

    Evaluates the same residual interference power as
    :func:`beamsim.hybrid.cost_function`, with the reduced responses
    precomputed.  Phase bounds default to one full turn per dimension; the
    typical optima sit well inside.
    """
    scaled = _reduced_interference(f_rf, scenario)

    def evaluate(phases: np.ndarray) -> float:
        weights = np.exp(1j * np.asarray(phases))
        return float(np.sum(np.abs(weights.conj() @ scaled) ** 2))

    return BoundedObjective(
        dimension=f_rf.n_subarrays,
        lower_bounds=np.zeros(f_rf.n_subarrays),
        upper_bounds=np.full(f_rf.n_subarrays, TWO_PI),
        evaluate=evaluate,
    )


def inverse_sinr_objective(f_rf: AnalogBeamformer, scenario: Scenario,
                           presumed_theta: float | None = None) -> BoundedObjective:
    """Phase objective scoring the full inverse SINR, not just interference.

    Minimizing the interference residual alone is degenerate for unit-modulus
    phases: it can vanish on a whole manifold of weight vectors whose
    desired-signal gain varies freely.  The un-reduced ratio

        (sum_k P_k |f^H F^H a_k|^2 + sigma^2 f^H f) / (P_d |f^H F^H a_d|^2)

    keeps the main-lobe term in play, so the optimum nulls the interferers
    while holding the desired response; this is the objective the hybrid
    pipelines hand to the swarm stage.  ``presumed_theta`` substitutes the
    beamformer's (possibly mismatched) desired DOA.
    """
    theta = scenario.theta_desired if presumed_theta is None else presumed_theta
    reduced_desired = f_rf.reduce(steering_vector(theta, scenario.n_antennas))
    scaled = _reduced_interference(f_rf, scenario)
    power = scenario.desired_power
    tiny = np.finfo(float).tiny

    def evaluate(phases: np.ndarray) -> float:
        weights = np.exp(1j * np.asarray(phases))
        residual = float(np.sum(np.abs(weights.conj() @ scaled) ** 2))
        noise = scenario.noise_power * weights.size
        gain = power * np.abs(weights.conj() @ reduced_desired) ** 2
        return (residual + noise) / max(gain, tiny)

    return BoundedObjective(
        dimension=f_rf.n_subarrays,
        lower_bounds=np.zeros(f_rf.n_subarrays),
        upper_bounds=np.full(f_rf.n_subarrays, TWO_PI),
        evaluate=evaluate,
    )


def pulse_rate(r0: float | np.ndarray, gamma: float, t: int):
    """Pulse-rate schedule r0 * (1 - exp(-gamma t)); non-decreasing in t."""
    return r0 * (1.0 - np.exp(-gamma * t))


@dataclass(frozen=True)
class BatConfig:
    """Bat-algorithm constants (loudness decay, pulse growth, frequency range)."""

    alpha: float = 0.9
    gamma: float = 0.9
    f_min: float = 0.0
    f_max: float = 2.0
    loudness_range: tuple[float, float] = (0.0, 2.0)
    pulse_range: tuple[float, float] = (0.0, 1.0)
    toward_best: bool = False  # canonical form moves bats away from the best


@dataclass(frozen=True)
class ImprovedBatConfig:
    """Improved-bat constants: habitat/Doppler/inertia parameters.

    Per-bat values (initial loudness and pulse rate, habitat threshold P,
    compensation rate C, contraction-expansion eta) are drawn once from the
    listed ranges at initialization; the inertia weight and frequencies are
    redrawn every iteration.
    """

    alpha: float = 0.9
    gamma: float = 0.9
    f_min: float = 0.0
    f_max: float = 1.5
    loudness_range: tuple[float, float] = (0.0, 2.0)
    pulse_range: tuple[float, float] = (0.0, 1.0)
    habitat_range: tuple[float, float] = (0.5, 0.9)
    compensation_range: tuple[float, float] = (0.1, 0.9)
    contraction_range: tuple[float, float] = (0.5, 1.0)
    stagnation_window: int = 2
    inertia_min: float = 0.4
    inertia_max: float = 0.9
    inertia_deviation: float = 0.2
    sound_speed: float = 340.0
    reset_pulse_range: tuple[float, float] = (0.85, 0.9)
    literal_doppler: bool = True  # True: ratio (c+v)/(c+v)=1; False: (c+v_i)/(c+v_best)

    u_floor: float = 1e-12  # keeps ln(1/u) finite in the quantum jump


class _Swarm:
    """Shared population bookkeeping: init, elitist best, trace."""

    def __init__(self, objective: BoundedObjective, n: int, rng: np.random.Generator,
                 x0: np.ndarray | None):
        if n < 2:
            raise ValueError("population size must be >= 2")
        self.obj = objective
        self.x = rng.uniform(objective.lower_bounds, objective.upper_bounds,
                             size=(n, objective.dimension))
        if x0 is not None:
            self.x[0] = objective.clip(np.asarray(x0, float))
        self.cost = np.array([objective.evaluate(xi) for xi in self.x])
        best = int(np.argmin(self.cost))
        self.best_x = self.x[best].copy()
        self.best_cost = float(self.cost[best])
        self.best_index = best
        self.trace: list[float] = []

    def offer(self, index: int, candidate: np.ndarray, cost: float) -> None:
        """Elitist global-best update from any evaluated candidate."""
        if cost < self.best_cost:
            self.best_cost = float(cost)
            self.best_x = candidate.copy()
            self.best_index = index

    def record(self) -> None:
        self.trace.append(self.best_cost)

    def result(self):
        return self.best_x, self.best_cost, np.asarray(self.trace)


def pso_optimize(objective: BoundedObjective, n_particles: int = 40,
                 n_iterations: int = 100, rng: np.random.Generator | None = None,
                 x0: np.ndarray | None = None, cognitive: float = 0.5,
                 social: float = 0.5, inertia: tuple[float, float] = (0.4, 0.9),
                 velocity_fraction: float = 0.2):
    """Inertia-weight PSO with linearly decaying w and clamped velocities.

    Parameters
    ----------
    objective : BoundedObjective
    n_particles, n_iterations : int
    rng : numpy.random.Generator
    x0 : optional initial position injected as the first particle.

    Returns
    -------
    (best_position, best_cost, trace)
        ``trace`` holds the global best cost after each iteration and is
        non-increasing.
    """
    if n_iterations < 1:
        raise ValueError("n_iterations must be >= 1")
    rng = np.random.default_rng() if rng is None else rng
    swarm = _Swarm(objective, n_particles, rng, x0)
    v = np.zeros_like(swarm.x)
    v_max = velocity_fraction * objective.span
    pbest_x = swarm.x.copy()
    pbest_cost = swarm.cost.copy()
    w_high, w_low = max(inertia), min(inertia)

    for t in range(n_iterations):
        frac = t / (n_iterations - 1) if n_iterations > 1 else 1.0
        w = w_high - (w_high - w_low) * frac
        for i in range(n_particles):
            r1 = rng.random(objective.dimension)
            r2 = rng.random(objective.dimension)
            v[i] = (w * v[i]
                    + cognitive * r1 * (pbest_x[i] - swarm.x[i])
                    + social * r2 * (swarm.best_x - swarm.x[i]))
            v[i] = np.clip(v[i], -v_max, v_max)
            swarm.x[i] = objective.clip(swarm.x[i] + v[i])
            cost = objective.evaluate(swarm.x[i])
            swarm.cost[i] = cost
            if cost < pbest_cost[i]:
                pbest_cost[i] = cost
                pbest_x[i] = swarm.x[i].copy()
            swarm.offer(i, swarm.x[i], cost)
        swarm.record()
    return swarm.result()


def ba_optimize(objective: BoundedObjective, n_bats: int = 40, n_iterations: int = 100,
                config: BatConfig | None = None, rng: np.random.Generator | None = None,
                x0: np.ndarray | None = None):
    """Bat algorithm with frequency-tuned velocities and loudness/pulse decay.

    Per iteration and bat: draw a frequency, update velocity with
    (x_i - x*) * f (sign per ``config.toward_best``), move, and with
    probability 1 - r_i replace the candidate by a random walk scaled by the
    mean loudness.  A candidate is committed when rand < A_i and it improves
    on the global best; commits decay A_i and raise r_i.

    Returns ``(best_position, best_cost, trace)`` as in :func:`pso_optimize`.
    """
    if n_iterations < 1:
        raise ValueError("n_iterations must be >= 1")
    cfg = config or BatConfig()
    rng = np.random.default_rng() if rng is None else rng
    swarm = _Swarm(objective, n_bats, rng, x0)
    d = objective.dimension
    v = np.zeros((n_bats, d))
    loudness = rng.uniform(*cfg.loudness_range, size=n_bats)
    r0 = rng.uniform(*cfg.pulse_range, size=n_bats)
    r = r0.copy()
    sign = -1.0 if cfg.toward_best else 1.0

    for t in range(1, n_iterations + 1):
        for i in range(n_bats):
            beta = rng.random()
            freq = cfg.f_min + (cfg.f_max - cfg.f_min) * beta
            v[i] = v[i] + sign * (swarm.x[i] - swarm.best_x) * freq
            candidate = objective.clip(swarm.x[i] + v[i])
            if rng.random() > r[i]:
                step = rng.uniform(-1.0, 1.0, size=d)
                candidate = objective.clip(candidate + step * loudness.mean())
            cost = objective.evaluate(candidate)
            if rng.random() < loudness[i] and cost < swarm.best_cost:
                swarm.x[i] = candidate
                swarm.cost[i] = cost
                loudness[i] *= cfg.alpha
                r[i] = pulse_rate(r0[i], cfg.gamma, t)
            swarm.offer(i, candidate, cost)
        swarm.record()
    return swarm.result()


def iba_optimize(objective: BoundedObjective, n_bats: int = 40, n_iterations: int = 100,
                 config: ImprovedBatConfig | None = None,
                 rng: np.random.Generator | None = None,
                 x0: np.ndarray | None = None):
    """Improved bat algorithm: habitat selection, Doppler shift, inertia weight.

    Each bat either takes a quantum jump around the global best (scaled by its
    distance to the mean of personal bests) or a mechanical move with
    Doppler-compensated frequency and a stochastic inertia weight.  Local
    search perturbs the global best multiplicatively with a spread set by the
    loudness deviation.  Unlike the base algorithm there is no loudness
    acceptance gate: each bat keeps the better of its old and new position,
    and the loudness decay / pulse-rate growth run on the iteration clock.
    When the global best stalls for ``config.stagnation_window`` iterations,
    loudnesses are redrawn and pulse rates temporarily raised.

    Returns ``(best_position, best_cost, trace)`` as in :func:`pso_optimize`.
    """
    if n_iterations < 1:
        raise ValueError("n_iterations must be >= 1")
    cfg = config or ImprovedBatConfig()
    rng = np.random.default_rng() if rng is None else rng
    swarm = _Swarm(objective, n_bats, rng, x0)
    d = objective.dimension
    v = np.zeros((n_bats, d))
    loudness = rng.uniform(*cfg.loudness_range, size=n_bats)
    r0 = rng.uniform(*cfg.pulse_range, size=n_bats)
    r = r0.copy()
    habitat = rng.uniform(*cfg.habitat_range, size=n_bats)
    compensation = rng.uniform(*cfg.compensation_range, size=n_bats)
    contraction = rng.uniform(*cfg.contraction_range, size=n_bats)
    pbest_x = swarm.x.copy()
    pbest_cost = swarm.cost.copy()
    eps = np.finfo(float).eps
    stalled = 0

    for t in range(1, n_iterations + 1):
        previous_best = swarm.best_cost
        mean_best = pbest_x.mean(axis=0)
        for i in range(n_bats):
            if rng.random() < habitat[i]:
                # Quantum habitat: jump around the global best.
                signs = np.where(rng.random(d) < habitat[i], 1.0, -1.0)
                u = np.maximum(rng.random(d), cfg.u_floor)
                candidate = swarm.best_x + signs * contraction[i] * np.abs(
                    mean_best - swarm.x[i]) * np.log(1.0 / u)
            else:
                # Mechanical habitat with Doppler-compensated frequency.
                freq = cfg.f_min + (cfg.f_max - cfg.f_min) * rng.random()
                gap = swarm.best_x - swarm.x[i]
                shifted = freq * (1.0 + compensation[i] * gap / (np.abs(gap) + eps))
                if not cfg.literal_doppler:
                    ref_v = v[swarm.best_index]
                    shifted = shifted * (cfg.sound_speed + v[i]) / (cfg.sound_speed + ref_v)
                w = (cfg.inertia_min
                     + (cfg.inertia_max - cfg.inertia_min) * rng.random()
                     + cfg.inertia_deviation * rng.standard_normal())
                v[i] = w * v[i] + gap * shifted
                candidate = swarm.x[i] + v[i]
            candidate = objective.clip(candidate)
            if rng.standard_normal() > r[i]:
                spread = np.sqrt(np.abs(loudness[i] - loudness.mean()) + eps)
                candidate = objective.clip(
                    swarm.best_x * (1.0 + spread * rng.standard_normal(d)))
            cost = objective.evaluate(candidate)
            if cost < pbest_cost[i]:
                pbest_cost[i] = cost
                pbest_x[i] = candidate.copy()
            if cost <= swarm.cost[i]:
                swarm.x[i] = candidate
                swarm.cost[i] = cost
            loudness[i] *= cfg.alpha
            r[i] = pulse_rate(r0[i], cfg.gamma, t)
            swarm.offer(i, candidate, cost)
        if swarm.best_cost < previous_best:
            stalled = 0
        else:
            stalled += 1
            if stalled >= cfg.stagnation_window:
                loudness = rng.uniform(*cfg.loudness_range, size=n_bats)
                r = rng.uniform(*cfg.reset_pulse_range, size=n_bats)
                stalled = 0
        swarm.record()
    return swarm.result()


def write_cost_trace(path, trace) -> None:
    """Write a convergence trace as CSV (iteration, best_cost)."""
    trace = np.asarray(trace, dtype=float)
    with open(path, "w") as fh:
        fh.write("iteration,best_cost\n")
        for i, value in enumerate(trace, start=1):
            fh.write(f"{i},{float(value)!r}\n")

"""Analog phase alignment by linear search, composed into full hybrid pipelines.

The analog beamformer is parameterized by a single steering angle; an
exhaustive fine grid over [-pi/2, pi/2] scores each candidate angle by the
residual interference power of a cheap diagonally-loaded digital solve, a
main-lobe guard rejects angles that sacrifice desired-signal gain, and the
designated digital solver (closed-form or phase-only swarm) runs once at the
winning angle.

Scoring the whole grid reuses the one acquired snapshot realization: retuning
the phase shifters changes only the analog projection, so the sample
covariance at any candidate angle expands algebraically in precomputed
antenna-domain moments and the scan is exact, deterministic, and vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array import (
    Scenario,
    SnapshotBlock,
    generate_snapshots,
    interference_matrix,
    recombine_snapshots,
    steering_matrix,
    steering_vector,
)
from .closed_form import DEFAULT_LOADING_LEVEL, solve_digital
from .hybrid import AnalogBeamformer, analog_from_angle, cost_function, identity_analog, output_sinr
from .metaheuristics import (
    BatConfig,
    ImprovedBatConfig,
    ba_optimize,
    iba_optimize,
    inverse_sinr_objective,
    pso_optimize,
)

__all__ = [
    "SearchGrid",
    "ScanResult",
    "HybridSolution",
    "scan_grid",
    "apals_search",
    "run_pipeline",
    "PIPELINE_METHODS",
    "DEFAULT_GRID_POINTS",
]

DEFAULT_GRID_POINTS = 30305

PIPELINE_METHODS = ("scb", "dl", "dl_apals", "smf_apals", "ba_apals", "pso_apals", "iba_apals")

_APALS_SOLVERS = {"dl_apals": "dl", "smf_apals": "smf",
                  "ba_apals": "ba", "pso_apals": "pso", "iba_apals": "iba"}

_CHUNK = 4096


@dataclass(frozen=True)
class SearchGrid:
    """Uniform angle grid spanning [-pi/2, pi/2] (single-point grids allowed).

    Multi-point grids must be uniformly spaced and include both endpoints; a
    one-point grid degenerates the search to that fixed steering angle.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=float))
        if pts.ndim != 1 or pts.size < 1:
            raise ValueError("grid needs at least one point")
        if np.any(np.abs(pts) > np.pi / 2):
            raise ValueError("grid angles must lie in [-pi/2, pi/2]")
        if pts.size > 1:
            if not (np.isclose(pts[0], -np.pi / 2) and np.isclose(pts[-1], np.pi / 2)):
                raise ValueError("grid must span [-pi/2, pi/2] inclusive")
            if not np.allclose(np.diff(pts), pts[1] - pts[0], rtol=0, atol=1e-12):
                raise ValueError("grid spacing must be uniform")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, n_points: int = DEFAULT_GRID_POINTS) -> "SearchGrid":
        return cls(np.linspace(-np.pi / 2, np.pi / 2, n_points))

    @property
    def n_points(self) -> int:
        return self.points.size

    @property
    def spacing(self) -> float:
        if self.points.size < 2:
            raise ValueError("single-point grid has no spacing")
        return float(self.points[1] - self.points[0])


@dataclass(frozen=True)
class ScanResult:
    """Per-grid-point diagnostics of one analog search."""

    thetas: np.ndarray
    cost_values: np.ndarray
    guard_pass: np.ndarray
    desired_power: np.ndarray
    selected_index: int

    @property
    def selected_theta(self) -> float:
        return float(self.thetas[self.selected_index])

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("theta_rad,cf_value,guard_pass\n")
            for theta, cf, ok in zip(self.thetas, self.cost_values, self.guard_pass):
                fh.write(f"{float(theta)!r},{float(cf)!r},{int(ok)}\n")


@dataclass(frozen=True)
class HybridSolution:
    """Assembled result of one pipeline run."""

    analog: AnalogBeamformer
    digital: np.ndarray
    optimized_angle: float | None
    achieved_cost: float
    achieved_sinr: float
    method: str


def _blockify(vectors: np.ndarray, n_subarrays: int) -> np.ndarray:
    """Reshape antenna-domain columns (N, ...) into (L, M, ...)."""
    n = vectors.shape[0]
    return vectors.reshape(n_subarrays, n // n_subarrays, *vectors.shape[1:])


def scan_grid(scenario: Scenario, grid: SearchGrid, block: SnapshotBlock,
              presumed_theta: float | None = None,
              guard_fraction: float = 0.5,
              loading_level: float = DEFAULT_LOADING_LEVEL) -> ScanResult:
    """Score every grid angle by the residual interference of an inner DL solve.

    For each candidate angle the snapshot realization is re-combined under
    F(theta) (in closed form via antenna-domain moments), the loaded sample
    covariance is solved for the distortionless digital weights, and the
    interference cost is evaluated.  Grid points whose desired-signal gain
    ||F(theta)^H a(theta_d)||^2 falls below ``guard_fraction`` of the grid
    maximum are rejected.  Ties in cost are broken by larger desired gain,
    then by lower grid index.
    """
    n, l = scenario.n_antennas, scenario.n_subarrays
    m = scenario.elements_per_subarray
    theta_d = scenario.theta_desired if presumed_theta is None else presumed_theta

    # Antenna-domain second moments of the acquired realization.
    y = steering_matrix(scenario) @ block.true_signals
    q = block.n_snapshots
    c_y = (y @ y.conj().T) / q
    cross = (y @ block.noise.conj().T) / q
    c_v = (block.noise @ block.noise.conj().T) / q

    c_y_blocks = c_y.reshape(l, m, n)
    cross_blocks = _blockify(cross, l)
    desired_blocks = _blockify(steering_vector(theta_d, n), l)
    scaled_i = interference_matrix(scenario) * np.sqrt(scenario.interferer_powers)
    interf_blocks = _blockify(scaled_i, l)

    thetas = grid.points
    g_total = thetas.size
    cf = np.empty(g_total)
    desired_power = np.empty(g_total)
    eye = loading_level * np.eye(l)

    for start in range(0, g_total, _CHUNK):
        sl = slice(start, min(start + _CHUNK, g_total))
        sin_t = np.sin(thetas[sl])
        manifold = np.exp(1j * np.pi * np.outer(sin_t, np.arange(n)))
        u = manifold.reshape(-1, l, m) / np.sqrt(m)
        uc = u.conj()

        half = np.einsum("glm,lmp->glp", uc, c_y_blocks)
        r_hat = np.einsum("glkn,gkn->glk", half.reshape(-1, l, l, m), u)
        r_cross = np.einsum("glm,lmk->glk", uc, cross_blocks)
        r_hat = r_hat + r_cross + r_cross.conj().transpose(0, 2, 1) + c_v

        v_d = np.einsum("glm,lm->gl", uc, desired_blocks)
        weights = np.linalg.solve(r_hat + eye, v_d[..., None])[..., 0]
        weights = weights / np.einsum("gl,gl->g", v_d.conj(), weights)[:, None]

        if interf_blocks.shape[-1]:
            v_i = np.einsum("glm,lmk->glk", uc, interf_blocks)
            response = np.einsum("gl,glk->gk", weights.conj(), v_i)
            cf[sl] = np.sum(np.abs(response) ** 2, axis=1)
        else:
            cf[sl] = 0.0
        desired_power[sl] = np.sum(np.abs(v_d) ** 2, axis=1)

    guard = desired_power >= guard_fraction * desired_power.max()
    candidates = np.flatnonzero(guard)
    if candidates.size == 0:
        raise RuntimeError("analog search failed: every grid point was rejected by the guard")
    best_cf = cf[candidates].min()
    ties = candidates[cf[candidates] == best_cf]
    ties = ties[desired_power[ties] == desired_power[ties].max()]
    selected = int(ties.min())
    return ScanResult(thetas=thetas, cost_values=cf, guard_pass=guard,
                      desired_power=desired_power, selected_index=selected)


def apals_search(scenario: Scenario, grid: SearchGrid | None, digital_solver: str,
                 block: SnapshotBlock, presumed_theta: float | None = None,
                 guard_fraction: float = 0.5,
                 loading_level: float = DEFAULT_LOADING_LEVEL,
                 rng: np.random.Generator | None = None,
                 n_population: int = 40, n_iterations: int = 100,
                 optimizer_config=None, trace_path=None) -> HybridSolution:
    """Full analog search followed by one run of the designated digital solver.

    Parameters
    ----------
    scenario : Scenario
        True environment (steers the snapshot re-combination and the final
        SINR/cost bookkeeping).
    grid : SearchGrid or None
        Candidate angles; None selects the default fine grid.
    digital_solver : str
        One of ``scb``, ``dl``, ``smf`` (closed form) or ``pso``, ``ba``,
        ``iba`` (phase-only swarm, seeded with the uniform-phase incumbent).
    block : SnapshotBlock
        Acquired snapshots (carries the realization used for re-combination).
    presumed_theta : float, optional
        Desired DOA as known to the beamformer (defaults to the true one).
    rng : numpy.random.Generator
        Required for the swarm solvers.
    trace_path : optional
        When given, the scan diagnostics are written there as CSV.

    Returns
    -------
    HybridSolution
    """
    grid = grid or SearchGrid.uniform()
    theta_d = scenario.theta_desired if presumed_theta is None else presumed_theta
    scan = scan_grid(scenario, grid, block, presumed_theta=theta_d,
                     guard_fraction=guard_fraction, loading_level=loading_level)
    if trace_path is not None:
        scan.write_csv(trace_path)
    theta_star = scan.selected_theta
    f_rf = analog_from_angle(theta_star, scenario.n_antennas, scenario.n_subarrays)

    if digital_solver in ("scb", "dl", "smf"):
        retuned = recombine_snapshots(block, scenario, f_rf)
        weights = solve_digital(scenario, f_rf, retuned, digital_solver,
                                presumed_theta=theta_d, loading_level=loading_level)
        method = f"{digital_solver}_apals"
    elif digital_solver in ("pso", "ba", "iba"):
        if rng is None:
            raise ValueError(f"solver {digital_solver!r} needs a random generator")
        objective = inverse_sinr_objective(f_rf, scenario, presumed_theta=theta_d)
        incumbent = np.zeros(objective.dimension)
        if digital_solver == "pso":
            best, _, _ = pso_optimize(objective, n_population, n_iterations, rng, x0=incumbent)
        elif digital_solver == "ba":
            best, _, _ = ba_optimize(objective, n_population, n_iterations,
                                     optimizer_config or BatConfig(), rng, x0=incumbent)
        else:
            best, _, _ = iba_optimize(objective, n_population, n_iterations,
                                      optimizer_config or ImprovedBatConfig(), rng, x0=incumbent)
        weights = np.exp(1j * best)
        method = f"{digital_solver}_apals"
    else:
        raise ValueError(f"unknown digital solver {digital_solver!r}")

    return HybridSolution(
        analog=f_rf,
        digital=weights,
        optimized_angle=theta_star,
        achieved_cost=cost_function(f_rf, weights, scenario),
        achieved_sinr=output_sinr(f_rf, weights, scenario),
        method=method,
    )


def run_pipeline(scenario: Scenario, method: str, seed: int | None = None,
                 grid: SearchGrid | None = None,
                 guard_fraction: float = 0.5,
                 loading_level: float = DEFAULT_LOADING_LEVEL,
                 n_population: int = 40, n_iterations: int = 100,
                 optimizer_config=None, trace_path=None) -> HybridSolution:
    """End-to-end run of one beamforming method on one scenario realization.

    The fully digital baselines ``scb``/``dl`` regenerate snapshots with one
    RF chain per antenna and skip the analog stage; the ``*_apals`` methods
    acquire snapshots under the initial beamformer steered at the (presumed)
    desired DOA, run the analog search, and finish with their digital solver.
    Under DOA mismatch the presumed desired angle is the true one plus a
    uniform draw in [-doa_mismatch_max, +doa_mismatch_max]; snapshots always
    use the true angle.  Identical seeds give identical solutions.
    """
    if method not in PIPELINE_METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {PIPELINE_METHODS}")
    rng = np.random.default_rng(scenario.seed if seed is None else seed)
    presumed = scenario.theta_desired
    if scenario.doa_mismatch_max > 0:
        presumed += rng.uniform(-scenario.doa_mismatch_max, scenario.doa_mismatch_max)
        presumed = float(np.clip(presumed, -np.pi / 2, np.pi / 2))

    if method in ("scb", "dl"):
        digital_scenario = scenario.fully_digital()
        f_rf = identity_analog(scenario.n_antennas)
        block = generate_snapshots(digital_scenario, f_rf, rng)
        weights = solve_digital(digital_scenario, f_rf, block, method,
                                presumed_theta=presumed, loading_level=loading_level)
        return HybridSolution(
            analog=f_rf,
            digital=weights,
            optimized_angle=None,
            achieved_cost=cost_function(f_rf, weights, digital_scenario),
            achieved_sinr=output_sinr(f_rf, weights, digital_scenario),
            method=method,
        )

    initial = analog_from_angle(presumed, scenario.n_antennas, scenario.n_subarrays)
    block = generate_snapshots(scenario, initial, rng)
    return apals_search(scenario, grid, _APALS_SOLVERS[method], block,
                        presumed_theta=presumed, guard_fraction=guard_fraction,
                        loading_level=loading_level, rng=rng,
                        n_population=n_population, n_iterations=n_iterations,
                        optimizer_config=optimizer_config, trace_path=trace_path)

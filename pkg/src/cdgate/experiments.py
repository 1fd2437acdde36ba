"""Named experiment recipes: the sweeps, optimum searches and checks that
regenerate the plot-ready data sets.

All sweeps evaluate their grid cells independently (optionally on a thread
pool; the compiled kernels release the GIL) and deterministically, so
results do not depend on evaluation order or worker count. Noise strengths
are specified in units of the minimal gap 2g in user-facing interfaces and
converted to absolute rates internally.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._kernels import backend_name
from ._version import __version__ as _version
from .dynamics import (
    EvolutionConfig,
    NoiseModel,
    lindblad_evolve,
    propagator,
    schrodinger_evolve,
)
from .errors import CdgateError, NoInteriorMaximumError
from .model import (
    CnotParams,
    RampedGateHamiltonian,
    build_inverse_engineered,
    cnot_system,
    cnot_unitary,
    linear_phase_ramp,
    nqubit_sector_states,
    nqubit_system,
)
from .numerics import (
    commutator,
    frobenius_distance,
    phase_insensitive_distance,
)
from .observables import FidelityPoint, fidelity_mixed, lz_formula

_GATE_DISTANCE_LIMIT = 1e-10


def default_worker_count() -> int:
    env = os.environ.get("CDGATE_WORKERS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _pool_map(fn, items, workers: int | None):
    workers = default_worker_count() if workers is None else max(1, workers)
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class SweepGrid:
    """The (alpha, tau) plane of a noise sweep; alphas are stored both as
    absolute rates and in units of the minimal gap 2g."""

    tau_values: np.ndarray
    alpha_values: np.ndarray
    alpha_gap_units: np.ndarray
    cd_enabled: bool
    params: CnotParams
    master_seed: int = 0
    full_range_ramp: bool = False

    def __post_init__(self):
        tau = np.asarray(self.tau_values, dtype=float)
        alpha = np.asarray(self.alpha_values, dtype=float)
        if tau.size == 0 or alpha.size == 0:
            raise ValueError("grid axes must be non-empty")
        if np.any(tau <= 0):
            raise ValueError("all tau values must be positive")
        if np.any(alpha < 0):
            raise ValueError("all alpha values must be non-negative")
        if np.any(np.diff(tau) < 0) or np.any(np.diff(alpha) < 0):
            raise ValueError("grid axes must be ascending")


def make_grid(params: CnotParams, tau_values, alpha_gap_units, cd_enabled,
              master_seed: int = 0, full_range_ramp: bool = False) -> SweepGrid:
    """Build a sweep grid from noise strengths given in units of 2g."""
    alpha_gap = np.asarray(alpha_gap_units, dtype=float)
    return SweepGrid(
        tau_values=np.asarray(tau_values, dtype=float),
        alpha_values=alpha_gap * (2.0 * params.g),
        alpha_gap_units=alpha_gap,
        cd_enabled=cd_enabled,
        params=params,
        master_seed=master_seed,
        full_range_ramp=full_range_ramp,
    )


@dataclass
class SweepResult:
    grid: SweepGrid
    fidelity: np.ndarray
    transition_prob: np.ndarray | None = None
    ground_prob: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)
    failed_cells: list = field(default_factory=list)


@dataclass(frozen=True)
class TradeoffCurve:
    """Largest tau keeping fidelity above a threshold, per noise strength."""

    threshold: float
    points: list
    product_mean: float
    product_spread: float


@dataclass(frozen=True)
class GateCheckReport:
    tau: float
    distance: float
    phase_insensitive: float
    commutator_residual: float
    passed: bool


def _base_cfg(cfg: EvolutionConfig | None, tau: float,
              use_cd: bool) -> EvolutionConfig:
    if cfg is None:
        return EvolutionConfig(tau=tau, use_cd=use_cd)
    return replace(cfg, tau=tau, use_cd=use_cd)


def _target_state(n: int) -> np.ndarray:
    dim = 2 ** n
    v = np.zeros(dim, dtype=np.complex128)
    v[dim - 1] = 1.0
    return v


def _initial_vector(system: RampedGateHamiltonian, n: int, params: CnotParams,
                    initial_state: str) -> np.ndarray:
    if initial_state == "bare":
        dim = 2 ** n
        v = np.zeros(dim, dtype=np.complex128)
        v[dim - 2] = 1.0
        return v
    if initial_state != "exact":
        raise ValueError(f"initial_state must be 'exact' or 'bare', got {initial_state!r}")
    j2_start = system.drive_value(system.t_start)
    ground, _ = nqubit_sector_states(n, params.g, j2_start)
    return ground


def adiabatic_profile(params: CnotParams, tau: float,
                      cfg: EvolutionConfig | None = None,
                      full_range_ramp: bool = False,
                      initial_state: str = "exact") -> list[FidelityPoint]:
    """Instantaneous fidelity |<Psi(t)|11>|^2 along one unitary gate run."""
    run_cfg = _base_cfg(cfg, tau, use_cd=cfg.use_cd if cfg else False)
    if run_cfg.sample_count < 3:
        run_cfg = replace(run_cfg, sample_count=201)
    system = cnot_system(params, tau, use_cd=run_cfg.use_cd,
                         full_range_ramp=full_range_ramp)
    psi0 = _initial_vector(system, 2, params, initial_state)
    traj = schrodinger_evolve(system, psi0, run_cfg)
    return [FidelityPoint(t=float(t), value=float(abs(psi[3]) ** 2))
            for t, psi in zip(traj.times, traj.states)]


def _unitary_cell(n: int, params: CnotParams, tau: float, cd: bool,
                  cfg: EvolutionConfig | None, full_range_ramp: bool,
                  initial_state: str) -> tuple[float, float, float]:
    system = nqubit_system(n, params, tau, use_cd=cd,
                           full_range_ramp=full_range_ramp)
    psi0 = _initial_vector(system, n, params, initial_state)
    run_cfg = _base_cfg(cfg, tau, cd)
    psi = schrodinger_evolve(system, psi0, run_cfg).final_state
    j2_end = system.drive_value(system.t_end)
    ground, excited = nqubit_sector_states(n, params.g, j2_end)
    target = _target_state(n)
    fid = float(abs(np.vdot(target, psi)) ** 2)
    p_trans = float(abs(np.vdot(excited, psi)) ** 2)
    p_ground = float(abs(np.vdot(ground, psi)) ** 2)
    return fid, p_trans, p_ground


def _sweep_unitary(n: int, params: CnotParams, tau_values, cd_enabled: bool,
                   cfg: EvolutionConfig | None, full_range_ramp: bool,
                   initial_state: str, workers: int | None) -> SweepResult:
    tau_values = np.asarray(tau_values, dtype=float)
    grid = SweepGrid(
        tau_values=tau_values,
        alpha_values=np.array([0.0]),
        alpha_gap_units=np.array([0.0]),
        cd_enabled=cd_enabled,
        params=params,
        full_range_ramp=full_range_ramp,
    )
    t_start = time.perf_counter()
    rows = _pool_map(
        lambda tau: _unitary_cell(n, params, float(tau), cd_enabled, cfg,
                                  full_range_ramp, initial_state),
        tau_values, workers,
    )
    fid = np.array([[r[0] for r in rows]])
    trans = np.array([[r[1] for r in rows]])
    ground = np.array([[r[2] for r in rows]])
    meta = _metadata(cfg, time.perf_counter() - t_start, n_qubits=n)
    return SweepResult(grid=grid, fidelity=fid, transition_prob=trans,
                       ground_prob=ground, metadata=meta)


def sweep_tau(params: CnotParams, tau_values, cd_enabled: bool,
              cfg: EvolutionConfig | None = None,
              full_range_ramp: bool = False, initial_state: str = "exact",
              workers: int | None = None) -> SweepResult:
    """Final fidelity, transition and ground-state probability per driving
    time for the unitary two-qubit gate."""
    return _sweep_unitary(2, params, tau_values, cd_enabled, cfg,
                          full_range_ramp, initial_state, workers)


def n_qubit_demo(n: int, params: CnotParams, tau_values, cd_enabled: bool,
                 cfg: EvolutionConfig | None = None,
                 full_range_ramp: bool = False,
                 initial_state: str = "exact",
                 workers: int | None = None) -> SweepResult:
    """The tau sweep on the 2^n-dimensional generalization, with target
    |1...1> and the |1...10> sector ground state as the start."""
    return _sweep_unitary(n, params, tau_values, cd_enabled, cfg,
                          full_range_ramp, initial_state, workers)


def _noise_cell(grid: SweepGrid, alpha: float, tau: float,
                cfg: EvolutionConfig | None,
                initial_state: str) -> float:
    system = cnot_system(grid.params, tau, use_cd=grid.cd_enabled,
                         full_range_ramp=grid.full_range_ramp)
    psi0 = _initial_vector(system, 2, grid.params, initial_state)
    rho0 = np.outer(psi0, psi0.conj())
    run_cfg = _base_cfg(cfg, tau, grid.cd_enabled)
    traj = lindblad_evolve(system, rho0, NoiseModel(alpha=alpha), run_cfg)
    return fidelity_mixed(traj.final_state, _target_state(2))


def sweep_noise(grid: SweepGrid, cfg: EvolutionConfig | None = None,
                initial_state: str = "exact",
                workers: int | None = None) -> SweepResult:
    """Lindblad evolution per (alpha, tau) cell; final mixed-state fidelity
    against |11>. Failed cells are recorded as NaN and the sweep continues."""
    n_a, n_t = len(grid.alpha_values), len(grid.tau_values)
    cells = [(i, j) for i in range(n_a) for j in range(n_t)]

    def run(cell):
        i, j = cell
        try:
            return _noise_cell(grid, float(grid.alpha_values[i]),
                               float(grid.tau_values[j]), cfg, initial_state)
        except CdgateError as exc:
            return ("failed", f"cell ({i},{j}): {exc}")

    t_start = time.perf_counter()
    results = _pool_map(run, cells, workers)
    fid = np.full((n_a, n_t), np.nan)
    failed = []
    for (i, j), value in zip(cells, results):
        if isinstance(value, tuple):
            failed.append(value[1])
        else:
            fid[i, j] = value
    meta = _metadata(cfg, time.perf_counter() - t_start)
    return SweepResult(grid=grid, fidelity=fid, metadata=meta,
                       failed_cells=failed)


def find_optimal_tau(params: CnotParams, alpha: float,
                     cfg: EvolutionConfig | None = None,
                     tau_window: tuple[float, float] = (2.0, 120.0),
                     coarse_points: int = 18,
                     resolution: float = 0.5,
                     initial_state: str = "exact",
                     full_range_ramp: bool = False) -> tuple[float, float]:
    """Locate the driving time maximizing the noisy no-CD final fidelity.

    Coarse log-spaced scan followed by golden-section refinement down to
    ``resolution``. Raises NoInteriorMaximumError when the coarse scan is
    monotone (the optimum sits outside the window, e.g. for alpha -> 0).
    """
    if alpha <= 0:
        raise ValueError("find_optimal_tau needs alpha > 0; the noiseless "
                         "fidelity is monotone in tau")

    def f_of(tau: float) -> float:
        grid = SweepGrid(
            tau_values=np.array([tau]), alpha_values=np.array([alpha]),
            alpha_gap_units=np.array([alpha / (2 * params.g)]),
            cd_enabled=False, params=params, full_range_ramp=full_range_ramp,
        )
        return _noise_cell(grid, alpha, tau, cfg, initial_state)

    taus = np.logspace(np.log10(tau_window[0]), np.log10(tau_window[1]),
                       coarse_points)
    values = [f_of(float(t)) for t in taus]
    k = int(np.argmax(values))
    if k == 0 or k == len(taus) - 1:
        raise NoInteriorMaximumError(
            f"fidelity is monotone over tau in [{tau_window[0]}, "
            f"{tau_window[1]}] at alpha={alpha}; no interior optimum"
        )

    lo, hi = float(taus[k - 1]), float(taus[k + 1])
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f_of(x1), f_of(x2)
    while hi - lo > resolution:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f_of(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f_of(x1)
    tau_star = x1 if f1 >= f2 else x2
    f_star = max(f1, f2)
    return float(tau_star), float(f_star)


def tradeoff_boundary(grid: SweepGrid, threshold: float,
                      cfg: EvolutionConfig | None = None,
                      initial_state: str = "exact",
                      workers: int | None = None) -> TradeoffCurve:
    """For each noise strength, the largest driving time whose CD-protected
    fidelity stays at or above the threshold; reports how constant the
    tau_max * alpha product is."""
    if not grid.cd_enabled:
        raise ValueError("tradeoff_boundary expects a CD-enabled grid")
    if not 0.5 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0.5, 1), got {threshold}")
    result = sweep_noise(grid, cfg, initial_state, workers)
    points = []
    products = []
    tau = grid.tau_values
    for i, alpha in enumerate(grid.alpha_values):
        row = result.fidelity[i]
        ok = np.where(np.nan_to_num(row, nan=-1.0) >= threshold)[0]
        if ok.size == 0:
            continue
        tau_max = float(tau[ok.max()])
        points.append((float(alpha), tau_max))
        saturated = ok.max() == len(tau) - 1
        if alpha > 0 and not saturated:
            products.append(alpha * tau_max)
    if products:
        mean = float(np.mean(products))
        spread = float(max(products) / min(products))
    else:
        mean, spread = float("nan"), float("nan")
    return TradeoffCurve(threshold=threshold, points=points,
                         product_mean=mean, product_spread=spread)


def gate_unitary_check(tau: float, n_offset: int = 0,
                       cfg: EvolutionConfig | None = None) -> GateCheckReport:
    """Propagate the inverse-engineered Hamiltonian with a linear phase ramp
    over [0, tau] and compare against the exact CNOT; also confirms the
    Hamiltonian commutes with itself across times."""
    schedule = linear_phase_ramp(tau, n_offset)
    if cfg is None:
        cfg = EvolutionConfig(tau=tau, abs_tol=1e-14, rel_tol=1e-12)
    else:
        cfg = replace(cfg, tau=tau)

    def h_of_t(t: float) -> np.ndarray:
        return build_inverse_engineered(schedule.derivative(t))

    u = propagator(h_of_t, cfg, t_span=(0.0, tau))
    target = cnot_unitary()
    dist = frobenius_distance(u, target)
    phase_dist = phase_insensitive_distance(u, target)

    sample_ts = np.linspace(0.0, tau, 5)
    resid = max(
        float(np.abs(commutator(h_of_t(t1), h_of_t(t2))).max())
        for t1 in sample_ts for t2 in sample_ts
    )
    return GateCheckReport(
        tau=float(tau),
        distance=float(dist),
        phase_insensitive=float(phase_dist),
        commutator_residual=resid,
        passed=bool(phase_dist < _GATE_DISTANCE_LIMIT),
    )


def _metadata(cfg: EvolutionConfig | None, wall_seconds: float,
              **extra) -> dict:
    out = {
        "version": _version,
        "backend": backend_name(),
        "rel_tol": cfg.rel_tol if cfg else EvolutionConfig(tau=1.0).rel_tol,
        "abs_tol": cfg.abs_tol if cfg else EvolutionConfig(tau=1.0).abs_tol,
        "wall_seconds": wall_seconds,
    }
    out.update(extra)
    return out


def lz_prediction_for(params: CnotParams, tau: float,
                      full_range_ramp: bool = False) -> float:
    """Closed-form LZ transition probability for the configured ramp."""
    amp = params.j2_amp * (2.0 if full_range_ramp else 1.0)
    return lz_formula(params.g, amp, tau)

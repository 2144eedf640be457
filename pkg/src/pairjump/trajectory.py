"""Monte Carlo quantum-jump engine with direction-resolved emission records.

Each trajectory owns an independent counter-based random stream keyed by
(base_seed, stream_index), so ensembles are reproducible and embarrassingly
parallel: the result is bit-identical for any worker count because partial
sums are combined in fixed block order.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import Direction, PhysicalParams, assert_normalized
from .dynamics import conditional_hamiltonian, dipole_coupling, no_jump_propagator

MAX_DT = 1e-3  # in units of 1/A; first-order jump decision needs a fine step
THREADS_ENV = "PAIRJUMP_THREADS"
_BLOCK = 128  # trajectories per reduction block, fixed for determinism


@dataclass(frozen=True)
class JumpEvent:
    time: float
    direction: Direction
    pre_state_hash: str
    post_state: np.ndarray


@dataclass
class TrajectoryRecord:
    """One stochastic realization of the pair's history."""

    seed: int
    stream: int
    times: np.ndarray  # snapshot times
    states: np.ndarray  # (n_snapshots, 4) normalized snapshots
    jumps: list = field(default_factory=list)

    @property
    def n_jumps(self) -> int:
        return len(self.jumps)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass
class EnsembleStats:
    """Aggregate over independent trajectories."""

    times: np.ndarray
    mean_density: np.ndarray  # (n_snapshots, 4, 4)
    sem_real: np.ndarray  # standard error of the mean, real part
    sem_imag: np.ndarray
    rate_times: np.ndarray  # interval midpoints
    emission_rate: np.ndarray  # jumps per unit time per system
    theta_edges: np.ndarray
    phi_edges: np.ndarray
    direction_counts: np.ndarray  # (theta_bins, phi_bins)
    count_n: int
    total_jumps: int
    mean_jump_rate: float
    mean_jump_rate_sem: float


def _state_hash(psi: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(psi).tobytes()).hexdigest()[:16]


def _make_rng(seed: int, stream: int) -> np.random.Generator:
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _prepare(params, t_final, dt, coupling, n_snapshots, allow_coarse_dt):
    if not allow_coarse_dt and dt * params.decay_rate > MAX_DT * (1.0 + 1e-12):
        raise ValueError(
            f"dt*A = {dt * params.decay_rate} exceeds {MAX_DT}; the per-step jump "
            "decision is only first order in dt"
        )
    if dt <= 0.0 or t_final <= 0.0:
        raise ValueError("dt and t_final must be positive")
    n_steps = int(round(t_final / dt))
    if n_steps < 1:
        raise ValueError("t_final shorter than one step")
    if coupling is None:
        coupling = dipole_coupling(params)
    u_cond = np.ascontiguousarray(
        no_jump_propagator(conditional_hamiltonian(params, coupling), dt)
    )
    snap_every = max(1, n_steps // max(1, n_snapshots))
    n_snaps = n_steps // snap_every + 1
    coeff = 3.0 * params.decay_rate / (8.0 * np.pi)
    kern_args = dict(
        u_cond=u_cond,
        n_steps=n_steps,
        snap_every=snap_every,
        coeff=coeff,
        bound=4.0 * coeff,
        dx=params.dipole[0],
        dy=params.dipole[1],
        dz=params.dipole[2],
        half_kr=np.pi * params.separation,
    )
    return kern_args, n_steps, snap_every, n_snaps


def _run_raw(psi0, kern_args, n_snaps, seed, stream, stop_after, t_final, decay_rate):
    """Call the stepping kernel, replaying with more capacity on overflow."""
    cap = 64 + int(8.0 * decay_rate * t_final)
    while True:
        rng = _make_rng(seed, stream)
        jump_steps = np.zeros(cap, dtype=np.int64)
        jump_costheta = np.zeros(cap)
        jump_phi = np.zeros(cap)
        pre_states = np.zeros((cap, 4), dtype=np.complex128)
        post_states = np.zeros((cap, 4), dtype=np.complex128)
        snaps = np.zeros((n_snaps, 4), dtype=np.complex128)
        n_jumps, steps_done, status = _kernels.simulate(
            psi0,
            kern_args["u_cond"],
            kern_args["n_steps"],
            kern_args["snap_every"],
            kern_args["coeff"],
            kern_args["bound"],
            kern_args["dx"],
            kern_args["dy"],
            kern_args["dz"],
            kern_args["half_kr"],
            stop_after,
            rng,
            jump_steps,
            jump_costheta,
            jump_phi,
            pre_states,
            post_states,
            snaps,
        )
        if status == _kernels.STATUS_JUMP_OVERFLOW:
            cap *= 4
            continue
        return (
            jump_steps[:n_jumps],
            jump_costheta[:n_jumps],
            jump_phi[:n_jumps],
            pre_states[:n_jumps],
            post_states[:n_jumps],
            snaps,
            steps_done,
        )


def run_trajectory(
    params: PhysicalParams,
    initial: np.ndarray,
    t_final: float,
    dt: float,
    seed: int,
    stream: int = 0,
    coupling: complex | None = None,
    n_snapshots: int = 200,
    max_jumps: int = 0,
    allow_coarse_dt: bool = False,
) -> TrajectoryRecord:
    """Simulate one quantum-jump trajectory.

    Per step the state is propagated with the no-emission propagator; with
    probability 1 - ||psi||^2 a photon is emitted within the step, its
    direction sampled from the pre-step state's angular rate density.
    Deterministic for fixed (params, seed, stream, dt).  max_jumps > 0 stops
    the run after that many emissions (waiting-time studies).
    """
    assert_normalized(initial)
    kern_args, n_steps, snap_every, n_snaps = _prepare(
        params, t_final, dt, coupling, n_snapshots, allow_coarse_dt
    )
    steps, costh, phi, pre, post, snaps, steps_done = _run_raw(
        np.asarray(initial, dtype=complex),
        kern_args,
        n_snaps,
        seed,
        stream,
        max_jumps,
        t_final,
        params.decay_rate,
    )
    filled = steps_done // snap_every + 1
    jumps = [
        JumpEvent(
            time=float(steps[k]) * dt,
            direction=Direction(theta=float(np.arccos(costh[k])), phi=float(phi[k])),
            pre_state_hash=_state_hash(pre[k]),
            post_state=post[k].copy(),
        )
        for k in range(len(steps))
    ]
    return TrajectoryRecord(
        seed=seed,
        stream=stream,
        times=np.arange(filled) * (snap_every * dt),
        states=snaps[:filled],
        jumps=jumps,
    )


def _resolve_threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return min(os.cpu_count() or 1, 8)


def _ensemble_block(
    psi0, kern_args, n_snaps, seed, streams, t_final, decay_rate, snap_every, theta_edges, phi_edges
):
    sum_rho = np.zeros((n_snaps, 4, 4), dtype=complex)
    sum_sq_re = np.zeros((n_snaps, 4, 4))
    sum_sq_im = np.zeros((n_snaps, 4, 4))
    counts = np.zeros((len(theta_edges) - 1, len(phi_edges) - 1), dtype=np.int64)
    interval_jumps = np.zeros(n_snaps - 1, dtype=np.int64)
    jumps_per_traj = np.zeros(len(streams))
    for pos, stream in enumerate(streams):
        steps, costh, phi, _pre, _post, snaps, _done = _run_raw(
            psi0, kern_args, n_snaps, seed, stream, 0, t_final, decay_rate
        )
        outer = snaps[:, :, None] * snaps[:, None, :].conj()
        sum_rho += outer
        sum_sq_re += outer.real**2
        sum_sq_im += outer.imag**2
        if len(steps):
            theta = np.arccos(costh)
            hist, _, _ = np.histogram2d(theta, phi, bins=(theta_edges, phi_edges))
            counts += hist.astype(np.int64)
            idx = np.minimum((steps - 1) // snap_every, n_snaps - 2)
            interval_jumps += np.bincount(idx, minlength=n_snaps - 1)
        jumps_per_traj[pos] = len(steps)
    return sum_rho, sum_sq_re, sum_sq_im, counts, interval_jumps, jumps_per_traj


def run_ensemble(
    params: PhysicalParams,
    initial: np.ndarray,
    t_final: float,
    dt: float,
    n_trajectories: int,
    base_seed: int,
    coupling: complex | None = None,
    n_snapshots: int = 200,
    theta_bins: int = 32,
    phi_bins: int = 64,
    threads: int | None = None,
    allow_coarse_dt: bool = False,
) -> EnsembleStats:
    """Run independent trajectories and aggregate ensemble statistics.

    Trajectory i uses the random stream (base_seed, i).  Aggregation happens
    in fixed blocks combined in index order, so the result does not depend
    on the number of worker threads.
    """
    if n_trajectories < 1:
        raise ValueError("n_trajectories must be at least 1")
    assert_normalized(initial)
    kern_args, n_steps, snap_every, n_snaps = _prepare(
        params, t_final, dt, coupling, n_snapshots, allow_coarse_dt
    )
    psi0 = np.asarray(initial, dtype=complex)
    theta_edges = np.linspace(0.0, np.pi, theta_bins + 1)
    phi_edges = np.linspace(0.0, 2.0 * np.pi, phi_bins + 1)
    blocks = [
        range(lo, min(lo + _BLOCK, n_trajectories)) for lo in range(0, n_trajectories, _BLOCK)
    ]
    worker = lambda streams: _ensemble_block(  # noqa: E731
        psi0,
        kern_args,
        n_snaps,
        base_seed,
        streams,
        t_final,
        params.decay_rate,
        snap_every,
        theta_edges,
        phi_edges,
    )
    n_threads = _resolve_threads(threads)
    if n_threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            partials = list(pool.map(worker, blocks))
    else:
        partials = [worker(b) for b in blocks]

    sum_rho = np.zeros((n_snaps, 4, 4), dtype=complex)
    sum_sq_re = np.zeros((n_snaps, 4, 4))
    sum_sq_im = np.zeros((n_snaps, 4, 4))
    counts = np.zeros((theta_bins, phi_bins), dtype=np.int64)
    interval_jumps = np.zeros(n_snaps - 1, dtype=np.int64)
    jumps_per_traj = []
    for part in partials:  # fixed block order -> deterministic reduction
        sum_rho += part[0]
        sum_sq_re += part[1]
        sum_sq_im += part[2]
        counts += part[3]
        interval_jumps += part[4]
        jumps_per_traj.append(part[5])
    jumps_per_traj = np.concatenate(jumps_per_traj)

    n = float(n_trajectories)
    mean = sum_rho / n
    if n_trajectories > 1:
        var_re = np.maximum(sum_sq_re / n - mean.real**2, 0.0) * n / (n - 1.0)
        var_im = np.maximum(sum_sq_im / n - mean.imag**2, 0.0) * n / (n - 1.0)
        sem_re = np.sqrt(var_re / n)
        sem_im = np.sqrt(var_im / n)
    else:
        sem_re = np.zeros_like(sum_sq_re)
        sem_im = np.zeros_like(sum_sq_im)

    times = np.arange(n_snaps) * (snap_every * dt)
    dt_interval = snap_every * dt
    horizon = n_steps * dt
    total_jumps = int(jumps_per_traj.sum())
    rate_per_traj = jumps_per_traj / horizon
    rate_sem = (
        float(rate_per_traj.std(ddof=1) / np.sqrt(n)) if n_trajectories > 1 else 0.0
    )
    return EnsembleStats(
        times=times,
        mean_density=mean,
        sem_real=sem_re,
        sem_imag=sem_im,
        rate_times=times[:-1] + 0.5 * dt_interval,
        emission_rate=interval_jumps / (n * dt_interval),
        theta_edges=theta_edges,
        phi_edges=phi_edges,
        direction_counts=counts,
        count_n=n_trajectories,
        total_jumps=total_jumps,
        mean_jump_rate=total_jumps / (n * horizon),
        mean_jump_rate_sem=rate_sem,
    )

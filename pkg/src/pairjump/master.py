"""Ensemble evolution: Liouvillian, RK4 integration, steady states.

The density-matrix equation of motion combines the non-Hermitian generator
with the two collective jump channels,

    drho/dt = -i (H rho - rho H+) + (A + Re C) R+ rho R+^dag
                                  + (A - Re C) R- rho R-^dag,

and serves as the deterministic oracle against which the stochastic
trajectories are checked.  The closed-form steady state for equal real
driving is provided alongside the numerical null-space solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PhysicalParams, check_density_matrix, symmetric_jump_operators
from .dynamics import conditional_hamiltonian, dipole_coupling

_TRACE_IDX = (0, 5, 10, 15)  # diagonal positions in the column-stacked rho


def _vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).flatten(order="F")


def _unvec(v: np.ndarray) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(4, 4, order="F")


def build_liouvillian(params: PhysicalParams, coupling: complex | None = None) -> np.ndarray:
    """16x16 generator acting on the column-stacked density matrix.

    Column stacking means vec(A rho B) = (B^T kron A) vec(rho).
    """
    if coupling is None:
        coupling = dipole_coupling(params)
    h = conditional_hamiltonian(params, coupling)
    r_plus, r_minus = symmetric_jump_operators()
    eye = np.eye(4, dtype=complex)
    liou = -1j * (np.kron(eye, h) - np.kron(h.conj(), eye))
    liou += (params.decay_rate + coupling.real) * np.kron(r_plus.conj(), r_plus)
    liou += (params.decay_rate - coupling.real) * np.kron(r_minus.conj(), r_minus)
    return liou


def apply_liouvillian(liou: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Time derivative of rho under the vectorized generator."""
    return _unvec(liou @ _vec(rho))


def integrate(
    liou: np.ndarray,
    rho0: np.ndarray,
    t_final: float,
    dt: float,
    trace_tol: float = 1e-8,
    max_halvings: int = 10,
) -> tuple[np.ndarray, np.ndarray]:
    """Classic fixed-step RK4 on the vectorized equation.

    Returns (times, rhos) including the initial state.  Every snapshot is
    checked for Hermiticity and unit trace; if the trace drifts beyond
    trace_tol the whole integration restarts with dt halved, giving up
    after max_halvings.
    """
    check_density_matrix(rho0)
    if dt > 1e-2:
        raise ValueError(f"dt = {dt} exceeds the 1e-2 step-size bound")
    if dt <= 0.0 or t_final <= 0.0:
        raise ValueError("dt and t_final must be positive")
    for _ in range(max_halvings + 1):
        n_steps = int(round(t_final / dt))
        times = np.arange(n_steps + 1) * dt
        out = np.empty((n_steps + 1, 4, 4), dtype=complex)
        out[0] = rho0
        v = _vec(rho0)
        ok = True
        for k in range(n_steps):
            k1 = liou @ v
            k2 = liou @ (v + 0.5 * dt * k1)
            k3 = liou @ (v + 0.5 * dt * k2)
            k4 = liou @ (v + dt * k3)
            v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            rho = _unvec(v)
            if abs(np.trace(rho).real - 1.0) > trace_tol:
                ok = False
                break
            if np.max(np.abs(rho - rho.conj().T)) > 1e-9:
                ok = False
                break
            out[k + 1] = rho
        if ok:
            return times, out
        dt *= 0.5
    raise RuntimeError("integration failed: trace drift persisted after halving dt")


def steady_state_numeric(liou: np.ndarray, kernel_tol: float = 1e-10) -> np.ndarray:
    """Unique stationary density matrix from the generator's null space.

    The first scalar equation is replaced by the trace constraint.  Raises if
    the kernel is not one dimensional (degenerate stationary states).
    """
    svals = np.linalg.svd(liou, compute_uv=False)
    dim_kernel = int(np.sum(svals < kernel_tol * max(svals[0], 1.0)))
    if dim_kernel != 1:
        raise RuntimeError(
            f"generator kernel is {dim_kernel}-dimensional, steady state not unique"
        )
    mat = liou.copy()
    mat[0, :] = 0.0
    mat[0, list(_TRACE_IDX)] = 1.0
    rhs = np.zeros(16, dtype=complex)
    rhs[0] = 1.0
    rho = _unvec(np.linalg.solve(mat, rhs))
    rho = 0.5 * (rho + rho.conj().T)
    check_density_matrix(rho)
    return rho


@dataclass(frozen=True)
class SteadyStatePopulations:
    """Closed-form stationary populations in the collective (g, s, a, e) basis.

    Only the populations and Im rho_sa are fixed in closed form; all other
    coherences come from the numerical solver.
    """

    gg: float
    ss: float
    aa: float
    ee: float
    im_sa: float
    normalization: float

    def as_array(self) -> np.ndarray:
        return np.array([self.gg, self.ss, self.aa, self.ee])


def steady_state_analytic(
    params: PhysicalParams, coupling: complex | None = None
) -> SteadyStatePopulations:
    """Closed-form steady state for equal real driving of both atoms.

    With K = A^2 (2A + Re C) Re C + A^2 (Im C)^2 and
    N = (A^2 + 2 Omega^2)^2 + K:

        rho_gg = ((A^2 + Omega^2)^2 + K) / N
        rho_ss = Omega^2 (2 A^2 + Omega^2) / N
        rho_ee = rho_aa = Omega^4 / N
        Im rho_sa = 0

    Raises when the Rabi frequencies are unequal or complex.
    """
    if not params.equal_real_rabi:
        raise ValueError(
            "closed-form steady state requires equal real Rabi frequencies, got "
            f"rabi_1={params.rabi_1}, rabi_2={params.rabi_2}"
        )
    if coupling is None:
        coupling = dipole_coupling(params)
    a = params.decay_rate
    omega = params.rabi_1.real
    k = a * a * (2.0 * a + coupling.real) * coupling.real + a * a * coupling.imag**2
    norm = (a * a + 2.0 * omega * omega) ** 2 + k
    return SteadyStatePopulations(
        gg=((a * a + omega * omega) ** 2 + k) / norm,
        ss=omega * omega * (2.0 * a * a + omega * omega) / norm,
        aa=omega**4 / norm,
        ee=omega**4 / norm,
        im_sa=0.0,
        normalization=norm,
    )

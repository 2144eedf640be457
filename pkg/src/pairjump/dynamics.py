"""No-emission evolution: dipole coupling, non-Hermitian generator, propagator.

Between photon detections the pair evolves with a non-Hermitian 4x4 generator
whose anti-Hermitian part encodes the collective decay channels and whose
Hermitian part holds the laser drive plus the coherent dipole level shift.
The norm loss of the propagated state gives the probability that no photon
was emitted.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .core import PhysicalParams, assert_normalized, lowering_operator

MIN_SEPARATION = 1e-6
VALIDATED_SEPARATION = 0.1  # below this the second-order coupling is untested

# atoms sit on the x axis, so the unit separation vector is fixed
_R_HAT = np.array([1.0, 0.0, 0.0])


def dipole_coupling(params: PhysicalParams) -> complex:
    """Complex dipole interaction constant, in units of the decay rate.

    With x = k0*r and d2 = |dipole . r_hat|^2:

        C = (3A/2) e^{ix} [ (1 - d2)/(ix) + (1/x^2 - 1/(ix^3)) (1 - 3 d2) ]

    Re C modifies the collective decay rates (A +- Re C), Im C is the
    coherent level shift between the symmetric and antisymmetric states.
    Diverges as r -> 0; separations below MIN_SEPARATION are rejected.
    """
    if params.separation <= MIN_SEPARATION:
        raise ValueError(
            f"separation {params.separation} is below the near-field cutoff "
            f"{MIN_SEPARATION}"
        )
    if params.separation < VALIDATED_SEPARATION:
        warnings.warn(
            f"separation {params.separation} < {VALIDATED_SEPARATION} lambda_0 is "
            "outside the validated range of the second-order coupling",
            stacklevel=2,
        )
    x = params.k0r
    d2 = float(np.dot(params.dipole_vector, _R_HAT) ** 2)
    ix = 1j * x
    val = (1.0 - d2) / ix + (1.0 / x**2 - 1.0 / (ix * x * x)) * (1.0 - 3.0 * d2)
    return complex(1.5 * params.decay_rate * np.exp(ix) * val)


def conditional_hamiltonian(params: PhysicalParams, coupling: complex | None = None) -> np.ndarray:
    """Non-Hermitian generator of the no-emission evolution (hbar = 1).

    H = -(i/2) [ A (S1+S1- + S2+S2-) + C (S1+S2- + S2+S1-) ]
        + (1/2) (Omega1 S1+ + Omega2 S2+ + h.c.)

    Resonant driving in the rotating frame, so H is time independent.
    """
    if coupling is None:
        coupling = dipole_coupling(params)
    s1 = lowering_operator(1)
    s2 = lowering_operator(2)
    a = params.decay_rate
    h = -0.5j * (
        a * (s1.conj().T @ s1 + s2.conj().T @ s2)
        + coupling * (s1.conj().T @ s2 + s2.conj().T @ s1)
    )
    h += 0.5 * (params.rabi_1 * s1.conj().T + np.conj(params.rabi_1) * s1)
    h += 0.5 * (params.rabi_2 * s2.conj().T + np.conj(params.rabi_2) * s2)
    return h


def decay_operator(h_cond: np.ndarray) -> np.ndarray:
    """Positive-semidefinite rate operator i (H - H+).

    Its expectation value is the instantaneous norm-loss rate; for the atom
    pair its eigenvalues are {0, A - Re C, A + Re C, 2A}.
    """
    return 1j * (h_cond - h_cond.conj().T)


def no_jump_propagator(h_cond: np.ndarray, dt: float) -> np.ndarray:
    """Dense propagator exp(-i H dt) of the no-emission evolution.

    Uses the eigendecomposition of the 4x4 generator; falls back to
    scaling-and-squaring when the eigenbasis is ill conditioned (the
    non-Hermitian generator can be defective at exceptional points).
    """
    if dt < 0.0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    if dt == 0.0:
        return np.eye(4, dtype=complex)
    evals, vecs = np.linalg.eig(h_cond)
    if np.linalg.cond(vecs) < 1e8:
        return vecs @ np.diag(np.exp(-1j * evals * dt)) @ np.linalg.inv(vecs)
    return scipy.linalg.expm(-1j * h_cond * dt)


def no_emission_probability(psi: np.ndarray, propagator: np.ndarray) -> float:
    """Probability that no photon is emitted while psi evolves one interval."""
    assert_normalized(psi)
    p = float(np.linalg.norm(propagator @ np.asarray(psi, dtype=complex)) ** 2)
    return min(p, 1.0)

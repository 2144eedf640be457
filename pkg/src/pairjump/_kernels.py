"""Hot stochastic-stepping kernel, compiled with numba when available.

The same source function is used for both backends: `simulate_jit` is the
njit-compiled version, `simulate_py` the plain-Python one.  Both consume the
random stream in exactly the same order, so a given generator state yields
the same jump history on either backend (state amplitudes can differ by
compiler rounding); repeated runs on one backend are bit-identical.  Set
PAIRJUMP_NUMBA=0 to force the pure-numpy path; `active_backend()` reports
which one is in use.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

STATUS_OK = 0
STATUS_JUMP_OVERFLOW = 1


def _simulate(
    psi0,
    u_cond,
    n_steps,
    snap_every,
    coeff,
    bound,
    dx,
    dy,
    dz,
    half_kr,
    stop_after,
    rng,
    jump_steps,
    jump_costheta,
    jump_phi,
    pre_states,
    post_states,
    snaps,
):
    """Step one trajectory; fills the preallocated jump/snapshot arrays.

    Per step: propagate with u_cond, decide a jump with probability
    1 - ||psi||^2, on a jump rejection-sample the emission direction from the
    pre-step state and reset.  Exactly one uniform draw per step plus three
    per rejection candidate.  Returns (n_jumps, steps_done, status).
    """
    psi = np.empty(4, dtype=np.complex128)
    work = np.empty(4, dtype=np.complex128)
    for i in range(4):
        psi[i] = psi0[i]
        snaps[0, i] = psi0[i]
    n_jumps = 0
    cap = jump_steps.shape[0]
    for step in range(n_steps):
        for i in range(4):
            acc = 0.0 + 0.0j
            for j in range(4):
                acc += u_cond[i, j] * psi[j]
            work[i] = acc
        p0 = (
            work[0].real ** 2
            + work[0].imag ** 2
            + work[1].real ** 2
            + work[1].imag ** 2
            + work[2].real ** 2
            + work[2].imag ** 2
            + work[3].real ** 2
            + work[3].imag ** 2
        )
        p_jump = 1.0 - p0
        r = rng.random()
        excited = (
            psi[1].real ** 2
            + psi[1].imag ** 2
            + psi[2].real ** 2
            + psi[2].imag ** 2
            + 2.0 * (psi[3].real ** 2 + psi[3].imag ** 2)
        )
        # a state with no excitation cannot emit; its norm loss is an
        # O(dt^2) driving artifact, so the step counts as no-jump
        if p_jump > 1e-14 and excited > 1e-12 and r < p_jump:
            # sample the direction from the (normalized) pre-step state
            w_exc2 = 2.0 * (psi[3].real ** 2 + psi[3].imag ** 2)
            while True:
                u = 2.0 * rng.random() - 1.0
                ph = 2.0 * np.pi * rng.random()
                v = rng.random()
                sth = np.sqrt(max(1.0 - u * u, 0.0))
                kx = sth * np.cos(ph)
                ky = sth * np.sin(ph)
                proj = dx * kx + dy * ky + dz * u
                geom = 1.0 - proj * proj
                eta = half_kr * kx
                e1 = np.cos(eta) + 1j * np.sin(eta)
                a0 = e1 * psi[2] + np.conj(e1) * psi[1]
                w = coeff * geom * (a0.real**2 + a0.imag**2 + w_exc2)
                if v * bound < w and w > 1e-24:
                    break
            v1 = e1 * psi[3]
            v2 = np.conj(e1) * psi[3]
            nrm = np.sqrt(
                a0.real**2
                + a0.imag**2
                + v1.real**2
                + v1.imag**2
                + v2.real**2
                + v2.imag**2
            )
            for i in range(4):
                pre_states[n_jumps, i] = psi[i]
            psi[0] = a0 / nrm
            psi[1] = v1 / nrm
            psi[2] = v2 / nrm
            psi[3] = 0.0 + 0.0j
            jump_steps[n_jumps] = step + 1
            jump_costheta[n_jumps] = u
            jump_phi[n_jumps] = ph
            for i in range(4):
                post_states[n_jumps, i] = psi[i]
            n_jumps += 1
            if n_jumps >= cap:
                return n_jumps, step + 1, STATUS_JUMP_OVERFLOW
            if stop_after > 0 and n_jumps >= stop_after:
                if (step + 1) % snap_every == 0:
                    for i in range(4):
                        snaps[(step + 1) // snap_every, i] = psi[i]
                return n_jumps, step + 1, STATUS_OK
        else:
            inv = 1.0 / np.sqrt(p0)
            for i in range(4):
                psi[i] = work[i] * inv
        if (step + 1) % snap_every == 0:
            for i in range(4):
                snaps[(step + 1) // snap_every, i] = psi[i]
    return n_jumps, n_steps, STATUS_OK


simulate_py = _simulate

if _HAVE_NUMBA:
    simulate_jit = njit(cache=True, nogil=True)(_simulate)
else:  # pragma: no cover
    simulate_jit = None

_use_numba = _HAVE_NUMBA and os.environ.get("PAIRJUMP_NUMBA", "1") != "0"
simulate = simulate_jit if _use_numba else simulate_py


def active_backend() -> str:
    return "numba" if _use_numba else "numpy"

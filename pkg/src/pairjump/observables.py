"""Derived quantities: interference patterns, the which-way coherence
criterion, visibility, and the zero-delay photon correlation g2.

The fringes of the stationary emission pattern exist exactly when the
cross coherence Tr(S2+ S1- rho) is nonzero; for equal real driving and
negligible dipole coupling the pattern and g2 have closed forms that the
full pipeline is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Direction, PhysicalParams, check_density_matrix
from .emission import intensity_grid, intensity_mixed, reset_operator

G2_DENOMINATOR_EPS = 1e-12  # rate density below which g2 is marked undefined
COHERENCE_TOL = 1e-10


@dataclass(frozen=True)
class AngularGrid:
    """Values of an angular map sampled on an outer theta x phi grid."""

    theta: np.ndarray
    phi: np.ndarray
    values: np.ndarray  # shape (len(theta), len(phi)); NaN marks undefined


def default_grid(n_theta: int = 64, n_phi: int = 128) -> tuple[np.ndarray, np.ndarray]:
    """Default angular sampling: theta in [0, pi], phi in [0, 2pi)."""
    return np.linspace(0.0, np.pi, n_theta), np.linspace(
        0.0, 2.0 * np.pi, n_phi, endpoint=False
    )


def interference_pattern(
    rho: np.ndarray,
    params: PhysicalParams,
    theta: np.ndarray | None = None,
    phi: np.ndarray | None = None,
) -> AngularGrid:
    """Stationary emission rate density over the sphere."""
    check_density_matrix(rho)
    if theta is None or phi is None:
        d_theta, d_phi = default_grid()
        theta = d_theta if theta is None else np.asarray(theta, dtype=float)
        phi = d_phi if phi is None else np.asarray(phi, dtype=float)
    return AngularGrid(theta=theta, phi=phi, values=intensity_grid(rho, params, theta, phi))


def _require_closed_form_geometry(params: PhysicalParams, what: str):
    if not params.equal_real_rabi:
        raise ValueError(f"{what} requires equal real Rabi frequencies")
    if abs(params.dipole[2]) < 1.0 - 1e-12:
        raise ValueError(f"{what} requires the dipole along z (perpendicular geometry)")


def pattern_closed_form(
    params: PhysicalParams, theta: np.ndarray, phi: np.ndarray
) -> np.ndarray:
    """Closed-form stationary pattern for equal real driving, coupling neglected.

    I = (3/4pi) A Omega^2 / (A^2 + 2 Omega^2)^2 * sin^2(theta)
        * [A^2 + 2 Omega^2 + A^2 cos(k0 r sin(theta) cos(phi))]
    """
    _require_closed_form_geometry(params, "closed-form pattern")
    a = params.decay_rate
    omega = params.rabi_1.real
    theta = np.asarray(theta, dtype=float)[:, None]
    phi = np.asarray(phi, dtype=float)[None, :]
    st = np.sin(theta)
    xi = params.k0r * st * np.cos(phi)
    denom = (a * a + 2.0 * omega * omega) ** 2
    return (
        3.0 / (4.0 * np.pi)
        * a
        * omega
        * omega
        / denom
        * st
        * st
        * (a * a + 2.0 * omega * omega + a * a * np.cos(xi))
    )


def fringe_visibility(
    rho: np.ndarray,
    params: PhysicalParams,
    theta: float = np.pi / 2,
    n_phi: int = 16385,
) -> float:
    """(I_max - I_min)/(I_max + I_min) from grid extrema at fixed polar angle.

    Computed from a dense azimuthal scan rather than any closed form, so it
    remains meaningful with dipole coupling included.
    """
    check_density_matrix(rho)
    phi = np.linspace(0.0, 2.0 * np.pi, n_phi)
    vals = intensity_grid(rho, params, np.array([theta]), phi)[0]
    hi, lo = vals.max(), vals.min()
    if hi + lo == 0.0:
        raise ValueError("pattern vanishes at this polar angle")
    return float((hi - lo) / (hi + lo))


def count_pattern_maxima(values: np.ndarray) -> int:
    """Number of local maxima of a 1-D scan, endpoints included."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        raise ValueError("need at least 3 samples to count maxima")
    interior = np.sum((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:]))
    return int(interior + (v[0] > v[1]) + (v[-1] > v[-2]))


def count_derivative_sign_changes(values: np.ndarray) -> int:
    d = np.diff(np.asarray(values, dtype=float))
    d = d[d != 0.0]
    return int(np.sum(d[1:] * d[:-1] < 0.0))


def interference_criterion(rho: np.ndarray, tol: float = COHERENCE_TOL):
    """Cross coherence Tr(S2+ S1- rho) and whether fringes exist.

    A nonzero value is necessary and sufficient for the angular pattern to
    depend on phi; zero means which-way information is in principle
    available and the pattern is flat.
    """
    check_density_matrix(rho)
    value = complex(np.asarray(rho)[2, 1])  # <21|rho|12>
    return value, bool(abs(value) > tol)


def g2_zero(
    rho: np.ndarray,
    params: PhysicalParams,
    direction: Direction,
    eps: float = G2_DENOMINATOR_EPS,
) -> float:
    """Zero-delay photon correlation in one direction.

    Ratio of the rate density immediately after a detection (from the
    renormalized reset of rho) to the stationary rate density.  Returns NaN
    where the stationary rate is below eps (the correlation diverges exactly
    where the intensity vanishes).
    """
    check_density_matrix(rho)
    op = reset_operator(params, direction)
    rr = op.total @ np.asarray(rho, dtype=complex) @ op.total.conj().T
    denom = float(np.real(np.trace(rr)))
    if denom < eps:
        return float("nan")
    post = rr / denom
    num = float(np.real(np.trace(op.total @ post @ op.total.conj().T)))
    return num / denom


def g2_closed_form_scalar(omega_over_a: float, cos_xi: float) -> float:
    """Closed-form g2 for equal real driving with coupling neglected:
    [1 - cos(xi) / (1 + 2 (Omega/A)^2 + cos(xi))]^2."""
    s = 1.0 + 2.0 * omega_over_a * omega_over_a
    return (1.0 - cos_xi / (s + cos_xi)) ** 2


def g2_closed_form(params: PhysicalParams, direction: Direction) -> float:
    _require_closed_form_geometry(params, "closed-form g2")
    a = params.decay_rate
    xi = params.k0r * np.sin(direction.theta) * np.cos(direction.phi)
    return g2_closed_form_scalar(params.rabi_1.real / a, float(np.cos(xi)))


def bunching_map(
    rho: np.ndarray,
    params: PhysicalParams,
    theta: np.ndarray | None = None,
    phi: np.ndarray | None = None,
) -> AngularGrid:
    """g2 over the angular grid; NaN where the stationary rate vanishes."""
    check_density_matrix(rho)
    if theta is None or phi is None:
        d_theta, d_phi = default_grid()
        theta = d_theta if theta is None else np.asarray(theta, dtype=float)
        phi = d_phi if phi is None else np.asarray(phi, dtype=float)
    vals = np.empty((len(theta), len(phi)))
    for i, th in enumerate(theta):
        for j, ph in enumerate(phi):
            vals[i, j] = g2_zero(rho, params, Direction(theta=float(th), phi=float(ph)))
    return AngularGrid(theta=np.asarray(theta), phi=np.asarray(phi), values=vals)


def maximal_bunching_phis(params: PhysicalParams, theta: float = np.pi / 2) -> np.ndarray:
    """Azimuthal angles in [0, pi] where cos(k0 r sin(theta) cos(phi)) = -1.

    These are the directions of maximal photon bunching; each solves
    k0 r sin(theta) cos(phi) = (2m + 1) pi for integer m.
    """
    scale = params.k0r * np.sin(theta)
    if scale <= 0.0:
        return np.array([])
    m_max = int(np.floor((scale / np.pi - 1.0) / 2.0))
    sols = []
    for m in range(-(m_max + 1), m_max + 1):
        c = (2 * m + 1) * np.pi / scale
        if -1.0 <= c <= 1.0:
            sols.append(np.arccos(c))
    return np.unique(np.array(sorted(sols)))

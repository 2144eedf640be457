"""Two-atom Hilbert space: basis conventions, parameters, elementary operators.

Everything is dimensionless: rates in units of the single-atom emission rate A,
times in 1/A, lengths in units of the transition wavelength lambda_0, so that
k0*r = 2*pi*separation.  The product basis is ordered (|11>, |12>, |21>, |22>)
where |ij> means atom 1 in level i and atom 2 in level j (1 = ground,
2 = excited).  The atoms sit on the x axis at -r/2 and +r/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BASIS_LABELS = ("11", "12", "21", "22")
DICKE_LABELS = ("g", "s", "a", "e")

NORM_TOL = 1e-10

_RT2 = np.sqrt(0.5)

# Rows are (g, s, a, e) in the product basis:
#   g = |11>,  s = (|12>+|21>)/sqrt2,  a = (|12>-|21>)/sqrt2,  e = |22>.
# The matrix is symmetric and orthogonal, so it is its own inverse.
DICKE_MATRIX = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, _RT2, _RT2, 0.0],
        [0.0, _RT2, -_RT2, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensionless parameters of the driven atom pair.

    Attributes
    ----------
    decay_rate : float
        Single-atom emission rate A.  All other rates are quoted in its
        units, so the default 1.0 is rarely worth changing.
    rabi_1, rabi_2 : complex
        Driving Rabi frequencies of atom 1 and atom 2, in units of A.
    separation : float
        Interatomic distance in units of lambda_0.
    dipole : tuple of 3 floats
        Transition-dipole unit vector, shared by both atoms.  Default is
        z, perpendicular to the interatomic (x) axis.
    """

    decay_rate: float = 1.0
    rabi_1: complex = 0.0j
    rabi_2: complex = 0.0j
    separation: float = 1.0
    dipole: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if not self.decay_rate > 0.0:
            raise ValueError(f"decay_rate must be positive, got {self.decay_rate}")
        if not self.separation > 0.0:
            raise ValueError(f"separation must be positive, got {self.separation}")
        if len(self.dipole) != 3:
            raise ValueError("dipole must be a 3-vector")
        object.__setattr__(self, "rabi_1", complex(self.rabi_1))
        object.__setattr__(self, "rabi_2", complex(self.rabi_2))
        object.__setattr__(self, "dipole", tuple(float(c) for c in self.dipole))
        norm = np.sqrt(sum(c * c for c in self.dipole))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"dipole must be a unit vector, |dipole| = {norm}")

    @property
    def k0r(self) -> float:
        """Dimensionless optical phase k0*r across the pair."""
        return 2.0 * np.pi * self.separation

    @property
    def dipole_vector(self) -> np.ndarray:
        return np.array(self.dipole)

    @property
    def atom_positions(self) -> np.ndarray:
        """(2, 3) positions in units of lambda_0, symmetric about the origin."""
        half = 0.5 * self.separation
        return np.array([[-half, 0.0, 0.0], [half, 0.0, 0.0]])

    @property
    def equal_real_rabi(self) -> bool:
        """True when both atoms see the same real Rabi frequency."""
        return (
            abs(self.rabi_1.imag) < 1e-12
            and abs(self.rabi_2.imag) < 1e-12
            and abs(self.rabi_1 - self.rabi_2) < 1e-12
        )


@dataclass(frozen=True)
class Direction:
    """Emission direction on the unit sphere, polar angle from the z axis."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * np.pi))
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def unit_vector(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])


def ket(label: str) -> np.ndarray:
    """Basis state by label: '11', '12', '21', '22' or 'g', 's', 'a', 'e'."""
    vec = np.zeros(4, dtype=complex)
    if label in BASIS_LABELS:
        vec[BASIS_LABELS.index(label)] = 1.0
        return vec
    if label in DICKE_LABELS:
        return DICKE_MATRIX[DICKE_LABELS.index(label)].astype(complex)
    raise ValueError(f"unknown state label {label!r}")


def lowering_operator(atom_index: int) -> np.ndarray:
    """Lowering operator of one atom in the product basis.

    The raising operator is the conjugate transpose.
    """
    if atom_index not in (1, 2):
        raise ValueError(f"atom_index must be 1 or 2, got {atom_index}")
    s = np.zeros((2, 2), dtype=complex)
    s[0, 1] = 1.0  # |1><2| on a single atom
    eye = np.eye(2, dtype=complex)
    return np.kron(s, eye) if atom_index == 1 else np.kron(eye, s)


def number_operator(atom_index: int) -> np.ndarray:
    """Excited-state projector S+ S- of one atom."""
    s = lowering_operator(atom_index)
    return s.conj().T @ s


def symmetric_jump_operators() -> tuple[np.ndarray, np.ndarray]:
    """Collective operators (S1- + S2-)/sqrt2 and (S1- - S2-)/sqrt2."""
    s1 = lowering_operator(1)
    s2 = lowering_operator(2)
    return (s1 + s2) / np.sqrt(2.0), (s1 - s2) / np.sqrt(2.0)


def dicke_transform(psi: np.ndarray) -> np.ndarray:
    """Product-basis amplitudes -> (g, s, a, e) amplitudes."""
    return DICKE_MATRIX @ np.asarray(psi, dtype=complex)


def product_from_dicke(coeffs: np.ndarray) -> np.ndarray:
    """(g, s, a, e) amplitudes -> product-basis amplitudes."""
    return DICKE_MATRIX @ np.asarray(coeffs, dtype=complex)


def dicke_density(rho: np.ndarray) -> np.ndarray:
    """Density matrix expressed in the (g, s, a, e) basis."""
    return DICKE_MATRIX @ np.asarray(rho, dtype=complex) @ DICKE_MATRIX.T


def dicke_populations(rho: np.ndarray) -> np.ndarray:
    """Real populations (g, s, a, e) of a density matrix."""
    return np.real(np.diag(dicke_density(rho)))


def state_norm(psi: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(psi)))


def assert_normalized(psi: np.ndarray, tol: float = NORM_TOL, what: str = "state"):
    nrm = state_norm(psi)
    if abs(nrm - 1.0) > tol:
        raise ValueError(f"{what} is not normalized: |psi| = {nrm}")


def check_density_matrix(
    rho: np.ndarray,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-9,
    eig_tol: float = 1e-9,
):
    """Raise ValueError unless rho is a physical 4x4 density matrix."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"density matrix must be 4x4, got shape {rho.shape}")
    herm_dev = np.max(np.abs(rho - rho.conj().T))
    if herm_dev > herm_tol:
        raise ValueError(f"density matrix not Hermitian: max deviation {herm_dev:.3e}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr} differs from 1")
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if evals.min() < -eig_tol:
        raise ValueError(f"density matrix has negative eigenvalue {evals.min():.3e}")

"""Cross-route consistency suite.

Every check compares two independent computational routes: sphere quadrature
of the direction-resolved channels against the two collective channels, the
stochastic ensemble against the deterministic density-matrix integration, and
the closed-form steady state / correlation formulas against the numerical
pipeline.  Used by the command-line `validate` subcommand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Direction, PhysicalParams, dicke_populations, ket, symmetric_jump_operators
from .dynamics import dipole_coupling
from .emission import emission_integral
from .master import build_liouvillian, integrate, steady_state_analytic, steady_state_numeric
from .observables import g2_closed_form, g2_zero
from .trajectory import run_ensemble


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extras = ", ".join(f"{k}={v:.3e}" if isinstance(v, float) else f"{k}={v}"
                           for k, v in self.details.items())
        return f"[{status}] {self.name}: {extras}"


def _random_density(rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def check_quadrature_identity(
    separations=(1.0 / np.pi, 1.0, 10.0),
    n_random: int = 5,
    seed: int = 1234,
    tol: float = 1e-6,
    corrupt_coupling_sign: bool = False,
) -> CheckResult:
    """Sphere integral of the reset channels vs the two collective channels."""
    rng = np.random.default_rng(seed)
    r_plus, r_minus = symmetric_jump_operators()
    worst = 0.0
    for sep in separations:
        params = PhysicalParams(separation=sep)
        coupling = dipole_coupling(params)
        if corrupt_coupling_sign:
            coupling = -coupling
        a = params.decay_rate
        for _ in range(n_random):
            rho = _random_density(rng)
            lhs = emission_integral(rho, params)
            rhs = (a + coupling.real) * (r_plus @ rho @ r_plus.conj().T)
            rhs += (a - coupling.real) * (r_minus @ rho @ r_minus.conj().T)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return CheckResult(
        name="quadrature identity (direction-resolved vs collective channels)",
        passed=worst < tol,
        details={"max_elementwise_error": worst, "tolerance": tol},
    )


def check_steady_closed_form(
    omegas=(0.1, 0.3, 0.6, 1.0, 2.0),
    separations=(1.0 / np.pi, 0.5, 1.0, 2.0, 10.0),
    tol: float = 1e-8,
) -> CheckResult:
    """Closed-form stationary populations vs the generator null space."""
    worst = 0.0
    for omega in omegas:
        for sep in separations:
            params = PhysicalParams(rabi_1=omega, rabi_2=omega, separation=sep)
            coupling = dipole_coupling(params)
            rho = steady_state_numeric(build_liouvillian(params, coupling))
            pops = dicke_populations(rho)
            ref = steady_state_analytic(params, coupling)
            worst = max(worst, float(np.max(np.abs(pops - ref.as_array()))))
    return CheckResult(
        name="steady state closed form vs null space",
        passed=worst < tol,
        details={"max_population_error": worst, "tolerance": tol},
    )


def check_g2_closed_form(
    omega: float = 0.3,
    separation: float = 10.0,
    n_phi: int = 64,
    tol: float = 1e-10,
) -> CheckResult:
    """g2 pipeline with coupling zeroed vs the closed-form correlation."""
    params = PhysicalParams(rabi_1=omega, rabi_2=omega, separation=separation)
    rho = steady_state_numeric(build_liouvillian(params, coupling=0.0))
    worst = 0.0
    for phi in np.linspace(0.0, np.pi, n_phi):
        d = Direction(theta=np.pi / 2, phi=float(phi))
        worst = max(worst, abs(g2_zero(rho, params, d) - g2_closed_form(params, d)))
    return CheckResult(
        name="g2 pipeline (coupling zeroed) vs closed form",
        passed=worst < tol,
        details={"max_error": worst, "tolerance": tol},
    )


def check_trajectory_vs_master(
    omega: float = 0.3,
    separation: float = 1.0 / np.pi,
    dt: float = 1e-3,
    t_final: float = 5.0,
    n_trajectories: int = 10_000,
    base_seed: int = 20240,
    checkpoints=(1.0, 2.0, 3.0, 4.0, 5.0),
    sigma: float = 3.0,
    sem_floor: float = 1e-9,
    threads: int | None = None,
    initial_label: str = "g",
) -> CheckResult:
    """Ensemble-mean density matrix vs RK4 integration, elementwise.

    The two routes must agree within `sigma` standard errors of the ensemble
    mean (plus a small floor for elements with vanishing scatter).
    """
    params = PhysicalParams(rabi_1=omega, rabi_2=omega, separation=separation)
    initial = ket(initial_label)
    stats = run_ensemble(
        params,
        initial,
        t_final,
        dt,
        n_trajectories,
        base_seed,
        threads=threads,
        allow_coarse_dt=True,
    )
    liou = build_liouvillian(params)
    rho0 = np.outer(initial, initial.conj())
    times, rhos = integrate(liou, rho0, t_final, min(dt, 1e-3))
    worst_ratio = 0.0
    for t_check in checkpoints:
        i_stat = int(np.argmin(np.abs(stats.times - t_check)))
        # compare at the ensemble's own snapshot time
        i_ref = int(np.argmin(np.abs(times - stats.times[i_stat])))
        delta = stats.mean_density[i_stat] - rhos[i_ref]
        ratio_re = np.abs(delta.real) / (sigma * stats.sem_real[i_stat] + sem_floor)
        ratio_im = np.abs(delta.imag) / (sigma * stats.sem_imag[i_stat] + sem_floor)
        worst_ratio = max(worst_ratio, float(ratio_re.max()), float(ratio_im.max()))
    return CheckResult(
        name="trajectory ensemble vs density-matrix integration",
        passed=worst_ratio < 1.0,
        details={
            "worst_deviation_over_allowance": worst_ratio,
            "n_trajectories": n_trajectories,
            "dt": dt,
        },
    )


def run_suite(
    n_trajectories: int = 2000,
    dt: float = 1e-3,
    t_final: float = 3.0,
    seed: int = 1234,
    corrupt_coupling_sign: bool = False,
    threads: int | None = None,
) -> list[CheckResult]:
    results = [
        check_quadrature_identity(seed=seed, corrupt_coupling_sign=corrupt_coupling_sign),
        check_steady_closed_form(),
        check_g2_closed_form(),
        # strong driving makes the step-size sensitivity of the stochastic
        # scheme visible, so a too-coarse dt reliably fails this check
        check_trajectory_vs_master(
            omega=2.0,
            dt=dt,
            t_final=t_final,
            n_trajectories=n_trajectories,
            base_seed=seed,
            checkpoints=tuple(
                t for t in (1.0, 2.0, 3.0, 4.0, 5.0) if t <= t_final + 1e-12
            ),
            threads=threads,
        ),
    ]
    return results

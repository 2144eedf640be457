import numpy as np
import pytest

from pairjump.core import PhysicalParams, dicke_populations, ket
from pairjump.dynamics import dipole_coupling
from pairjump.master import (
    apply_liouvillian,
    build_liouvillian,
    integrate,
    steady_state_analytic,
    steady_state_numeric,
)

from conftest import random_density


def projector(label: str) -> np.ndarray:
    v = ket(label)
    return np.outer(v, v.conj())


class TestLiouvillian:
    def test_ground_state_stationary_without_driving(self):
        p = PhysicalParams(separation=1.0)
        liou = build_liouvillian(p, coupling=0.0)
        assert np.max(np.abs(apply_liouvillian(liou, projector("g")))) < 1e-15

    def test_trace_preserving_on_random_states(self, rng):
        p = PhysicalParams(rabi_1=0.4, rabi_2=0.7j, separation=0.6)
        liou = build_liouvillian(p)
        for _ in range(10):
            drho = apply_liouvillian(liou, random_density(rng))
            assert abs(np.trace(drho)) < 1e-12

    def test_identity_is_left_null_vector(self):
        p = PhysicalParams(rabi_1=0.3, rabi_2=0.3, separation=1 / np.pi)
        liou = build_liouvillian(p)
        left = np.eye(4, dtype=complex).flatten(order="F").conj() @ liou
        assert np.max(np.abs(left)) < 1e-12

    def test_spectrum_in_left_half_plane(self):
        p = PhysicalParams(rabi_1=0.5, rabi_2=0.5, separation=0.8)
        evals = np.linalg.eigvals(build_liouvillian(p))
        assert evals.real.max() < 1e-9


class TestIntegrate:
    def test_zero_generator_keeps_state(self, rng):
        rho0 = random_density(rng)
        _, rhos = integrate(np.zeros((16, 16), dtype=complex), rho0, 1.0, 1e-2)
        assert np.max(np.abs(rhos[-1] - rho0)) < 1e-14

    def test_pure_decay_populations(self):
        p = PhysicalParams(separation=1.0)
        liou = build_liouvillian(p, coupling=0.0)
        times, rhos = integrate(liou, projector("e"), 1.0, 1e-3)
        assert times[-1] == pytest.approx(1.0)
        assert abs(rhos[-1][3, 3].real - np.exp(-2.0)) < 1e-8

    def test_driven_relaxation_to_steady_state(self, driven_params):
        liou = build_liouvillian(driven_params)
        rho_ss = steady_state_numeric(liou)
        _, rhos = integrate(liou, projector("g"), 20.0, 1e-2)
        assert np.max(np.abs(rhos[-1] - rho_ss)) < 1e-6

    def test_snapshots_stay_positive(self, close_params):
        liou = build_liouvillian(close_params)
        _, rhos = integrate(liou, projector("g"), 5.0, 1e-2)
        for rho in rhos[:: len(rhos) // 20]:
            assert np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() > -1e-9

    def test_rejects_large_step(self):
        liou = np.zeros((16, 16), dtype=complex)
        with pytest.raises(ValueError, match="step-size"):
            integrate(liou, projector("g"), 1.0, 0.1)

    def test_halves_step_when_unstable(self):
        # |lambda|_max dt ~ 4 puts RK4 outside its stability region, so the
        # trace guard must restart with a smaller step and still converge
        p = PhysicalParams(rabi_1=200.0, rabi_2=200.0, separation=1.0)
        liou = build_liouvillian(p, coupling=0.0)
        times, rhos = integrate(liou, projector("g"), 1.0, 1e-2)
        assert len(times) > 101  # at least one halving happened
        assert abs(np.trace(rhos[-1]).real - 1.0) < 1e-8
        assert np.linalg.eigvalsh(rhos[-1]).min() > -1e-9


class TestSteadyStateNumeric:
    def test_undriven_ground_state(self):
        p = PhysicalParams(separation=1.0)
        rho = steady_state_numeric(build_liouvillian(p))
        assert np.max(np.abs(rho - projector("g"))) < 1e-12

    def test_matches_analytic_without_coupling(self, driven_params):
        rho = steady_state_numeric(build_liouvillian(driven_params, coupling=0.0))
        ref = steady_state_analytic(driven_params, coupling=0.0)
        assert np.max(np.abs(dicke_populations(rho) - ref.as_array())) < 1e-10

    def test_saturation_limit(self):
        p = PhysicalParams(rabi_1=100.0, rabi_2=100.0, separation=1.0)
        rho = steady_state_numeric(build_liouvillian(p, coupling=0.0))
        assert np.max(np.abs(dicke_populations(rho) - 0.25)) < 1e-3

    def test_degenerate_kernel_rejected(self):
        with pytest.raises(RuntimeError, match="kernel"):
            steady_state_numeric(np.zeros((16, 16), dtype=complex))

    def test_agrees_with_long_time_integration(self, close_params):
        liou = build_liouvillian(close_params)
        rho_ss = steady_state_numeric(liou)
        _, rhos = integrate(liou, projector("g"), 25.0, 1e-2)
        assert np.max(np.abs(rhos[-1] - rho_ss)) < 1e-6


class TestSteadyStateAnalytic:
    def test_undriven_is_ground(self):
        p = PhysicalParams(separation=1.0)
        ref = steady_state_analytic(p)
        assert ref.gg == 1.0 and ref.ss == ref.aa == ref.ee == 0.0

    def test_reference_point_values(self, driven_params):
        # Omega = 0.3 A with coupling dropped: N = 1.3924 A^4
        ref = steady_state_analytic(driven_params, coupling=0.0)
        norm = 1.18**2
        assert ref.normalization == pytest.approx(norm, rel=1e-14)
        assert ref.ss == pytest.approx(0.09 * 2.09 / norm, rel=1e-14)
        assert ref.ee == pytest.approx(0.0081 / norm, rel=1e-14)
        assert ref.aa == ref.ee
        assert ref.gg == pytest.approx(1.09**2 / norm, rel=1e-14)
        assert ref.ss == pytest.approx(0.13509, abs=5e-6)
        assert ref.ee == pytest.approx(0.005817, abs=5e-7)
        assert ref.gg == pytest.approx(0.85327, abs=5e-6)

    def test_populations_sum_to_one(self):
        for omega in (0.05, 0.3, 1.0, 4.0):
            for sep in (1 / np.pi, 0.5, 1.0, 10.0):
                p = PhysicalParams(rabi_1=omega, rabi_2=omega, separation=sep)
                ref = steady_state_analytic(p)
                assert abs(ref.as_array().sum() - 1.0) < 1e-12

    def test_im_sa_vanishes(self, close_params):
        ref = steady_state_analytic(close_params)
        assert ref.im_sa == 0.0
        rho = steady_state_numeric(build_liouvillian(close_params))
        from pairjump.core import dicke_density

        assert abs(dicke_density(rho)[1, 2].imag) < 1e-12

    def test_unequal_rabi_rejected(self):
        p = PhysicalParams(rabi_1=0.3, rabi_2=0.4, separation=1.0)
        with pytest.raises(ValueError, match="equal real"):
            steady_state_analytic(p)

    def test_complex_rabi_rejected(self):
        p = PhysicalParams(rabi_1=0.3j, rabi_2=0.3j, separation=1.0)
        with pytest.raises(ValueError, match="equal real"):
            steady_state_analytic(p)

    @pytest.mark.parametrize("sep", [1 / np.pi, 0.5, 2.0, 10.0])
    @pytest.mark.parametrize("omega", [0.1, 0.3, 1.0])
    def test_matches_null_space_with_coupling(self, omega, sep):
        p = PhysicalParams(rabi_1=omega, rabi_2=omega, separation=sep)
        c = dipole_coupling(p)
        rho = steady_state_numeric(build_liouvillian(p, c))
        ref = steady_state_analytic(p, c)
        assert np.max(np.abs(dicke_populations(rho) - ref.as_array())) < 1e-10

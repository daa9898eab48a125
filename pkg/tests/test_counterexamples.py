import math

import numpy as np
import pytest

from qsl import (
    DomainError,
    HermitianOperator,
    InsufficientLevels,
    PureState,
    RefutationSpec,
    RotatedHamiltonianSystem,
    bd_pointwise_margin,
    build_coupling,
    build_ml_family,
    choose_theta,
    commutator_norm,
    run_bd_nonsaturation,
    run_ml_refutation,
    sample_trajectory,
    variance,
)
from qsl.sweeps import random_hermitian, random_pure_state


class TestBuildCoupling:
    def test_geodesic_conditions_hold(self):
        rng = np.random.default_rng(51)
        worst_anticomm, worst_comm = 0.0, 0.0
        for _ in range(500):
            dim = int(rng.integers(2, 9))
            hamiltonian = random_hermitian(rng, dim, spectral_radius=rng.uniform(0.5, 5.0))
            state = random_pure_state(rng, dim)
            coupling = build_coupling(hamiltonian, state)
            rho = state.density
            anticomm = coupling.entries @ rho + rho @ coupling.entries - coupling.entries
            worst_anticomm = max(worst_anticomm, float(np.linalg.norm(anticomm)))
            effective = hamiltonian.entries - coupling.entries
            worst_comm = max(worst_comm, float(np.linalg.norm(effective @ rho - rho @ effective)))
        assert worst_anticomm <= 1e-10
        assert worst_comm <= 1e-10

    def test_vanishes_when_state_is_eigenvector(self):
        hamiltonian = HermitianOperator.from_diagonal([2.0, 2.0, 5.0])
        coupling = build_coupling(hamiltonian, PureState([1.0, 0.0, 0.0]))
        assert np.abs(coupling.entries).max() <= 1e-14

    def test_dimension_mismatch(self):
        from qsl import DimensionMismatch

        with pytest.raises(DimensionMismatch):
            build_coupling(HermitianOperator.from_diagonal([0.0, 1.0]), PureState([1.0, 0.0, 0.0]))

    def test_uniform_three_level_conditions(self):
        hamiltonian = HermitianOperator.from_diagonal([0.0, 1.0, 2.0])
        state = PureState.normalized([1.0, 1.0, 1.0])
        coupling = build_coupling(hamiltonian, state)
        rho = state.density
        assert np.linalg.norm(coupling.entries @ rho + rho @ coupling.entries - coupling.entries) <= 1e-10
        assert commutator_norm(hamiltonian.entries - coupling.entries, state) <= 1e-10
        # the effective Hamiltonian fixes the initial state with eigenvalue <H>
        fixed = (hamiltonian.entries - coupling.entries) @ state.amplitudes
        np.testing.assert_allclose(fixed, state.amplitudes, atol=1e-12)  # <H> = 1 here

    def test_family_coupling_matrix(self):
        theta, energy = 0.8, 1.3
        sys_ = build_ml_family(energy, theta)
        rate = energy / math.tan(theta / 2)
        z = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(sys_.A.entries, rate * z, atol=1e-12)


class TestBuildMlFamily:
    def test_right_angle_case(self):
        sys_ = build_ml_family(1.0, math.pi / 2)
        np.testing.assert_allclose(sys_.H.eigenvalues, [-1.0, 1.0], atol=1e-12)
        assert math.sqrt(variance(sys_.H, sys_.initial)) == pytest.approx(1.0, abs=1e-12)

    def test_sixty_degree_case(self):
        sys_ = build_ml_family(1.0, math.pi / 3)
        np.testing.assert_allclose(sys_.H.eigenvalues, [-2.0, 2.0], atol=1e-12)
        assert math.sqrt(variance(sys_.H, sys_.initial)) == pytest.approx(math.sqrt(3.0), abs=1e-12)

    def test_boundaries_rejected(self):
        for theta in (0.0, math.pi, -0.3, 3.5):
            with pytest.raises(DomainError):
                build_ml_family(1.0, theta)
        with pytest.raises(DomainError):
            build_ml_family(0.0, 1.0)

    def test_uncertainty_decreasing_and_unbounded(self):
        energy = 1.0
        thetas = np.linspace(0.05, math.pi - 0.05, 200)
        spreads = np.array(
            [math.sqrt(variance(build_ml_family(energy, float(t)).H, PureState([1.0, 0.0]))) for t in thetas]
        )
        assert np.all(np.diff(spreads) < 0)
        target = 50.0
        theta_small = 2 * math.atan(energy / (energy * target))
        sys_ = build_ml_family(energy, theta_small * 0.99)
        assert math.sqrt(variance(sys_.H, sys_.initial)) > target


class TestChooseTheta:
    def test_plug_back_satisfies_strict_inequality(self):
        for delta, big_l in [(0.0, math.pi / 2), (0.25, math.pi / 3), (0.6, 0.2)]:
            theta = choose_theta(delta, big_l, 0.1)
            assert 1.0 / math.tan(theta / 2) > math.acos(math.sqrt(delta)) / big_l

    def test_unit_ratio_margin_geometry(self):
        # c = 1, margin chosen so the angle comes out at pi/3 and cot = sqrt(3)
        theta = choose_theta(0.0, math.pi / 2, math.sqrt(3.0) - 1.0)
        assert theta == pytest.approx(math.pi / 3, abs=1e-12)
        assert 1.0 / math.tan(theta / 2) == pytest.approx(math.sqrt(3.0), abs=1e-12)

    def test_quarter_fidelity_case(self):
        theta = choose_theta(0.25, math.pi / 3, 0.1)
        assert 1.0 / math.tan(theta / 2) > 1.0  # arccos(1/2)/(pi/3) = 1

    def test_rejects_bad_input(self):
        with pytest.raises(DomainError):
            choose_theta(1.0, 1.0, 0.1)
        with pytest.raises(DomainError):
            choose_theta(0.5, 0.0, 0.1)
        with pytest.raises(DomainError):
            choose_theta(0.5, 1.0, 0.0)


class TestRefutationSpec:
    def test_valid_spec_passes(self):
        RefutationSpec(delta=0.0, L=math.pi / 2, E=1.0, theta=math.pi / 3, mu=2.0)

    def test_angle_condition_enforced(self):
        with pytest.raises(DomainError):
            RefutationSpec(delta=0.0, L=math.pi / 2, E=1.0, theta=2.5, mu=1.0 / (1 - math.cos(2.5)))

    def test_mu_consistency_enforced(self):
        with pytest.raises(DomainError):
            RefutationSpec(delta=0.0, L=math.pi / 2, E=1.0, theta=math.pi / 3, mu=3.0)


class TestRunMlRefutation:
    def test_canonical_sixty_degree_run(self):
        report = run_ml_refutation(0.0, math.pi / 2, 1.0, margin=math.sqrt(3.0) - 1.0)
        assert report.violated
        assert report.tau == pytest.approx(math.pi / (2 * math.sqrt(3.0)), abs=1e-8)
        assert report.hypothetical_bound == pytest.approx(math.pi / 2, abs=1e-12)
        assert report.margins["mt_saturation"] <= 1e-8
        assert report.max_energy_drift <= 1e-9

    def test_half_hypothesis_violated(self):
        # the (1 - delta)/2 numerator hypothesis at delta = 0
        report = run_ml_refutation(0.0, 0.5, 1.0)
        assert report.violated
        assert report.tau < 0.5 - 1e-9

    def test_arccos_hypothesis_violated_at_quarter(self):
        report = run_ml_refutation(0.25, math.pi / 3, 2.0, margin=0.1)
        assert report.violated
        assert report.tau < (math.pi / 3) / 2.0 - 1e-9

    def test_small_numerator(self):
        report = run_ml_refutation(0.0, 0.1, 1.0)
        assert report.violated
        assert report.spec.theta < 0.2  # small numerator forces a small angle

    def test_energy_conserved_along_trajectory(self):
        report = run_ml_refutation(0.3, 1.0, 0.5)
        np.testing.assert_allclose(report.trajectory.norm_energy, 0.5, atol=1e-9)

    def test_grid_of_hypotheses(self):
        for delta in (0.0, 0.4, 0.8):
            for big_l in (0.1, 1.0):
                for energy in (0.5, 2.0):
                    report = run_ml_refutation(delta, big_l, energy)
                    assert report.violated
                    assert report.margins["mt_saturation"] <= 1e-8


class TestRunBdNonsaturation:
    def test_canonical_three_level_run(self):
        hamiltonian = HermitianOperator.from_diagonal([0.0, 1.0, 2.0])
        state = PureState.normalized([1.0, 1.0, 1.0])
        report = run_bd_nonsaturation(hamiltonian, state, 0.0)
        assert report.tau_actual == pytest.approx((math.pi / 2) * math.sqrt(1.5), abs=1e-6)
        assert report.bd_closed == pytest.approx(math.pi / 2, abs=1e-9)
        assert abs(report.tau_actual - report.mt_closed) <= 1e-8
        assert report.mt_closed - report.bd_closed > 0.35

    def test_two_levels_rejected(self):
        hamiltonian = HermitianOperator.from_diagonal([0.0, 1.0])
        with pytest.raises(InsufficientLevels):
            run_bd_nonsaturation(hamiltonian, PureState.normalized([1.0, 1.0]), 0.0)

    def test_strict_pointwise_inequality(self):
        hamiltonian = HermitianOperator.from_diagonal([0.0, 1.0, 3.0])
        state = PureState.normalized(np.sqrt([0.5, 0.3, 0.2]))
        report = run_bd_nonsaturation(hamiltonian, state, 0.25)
        sys_ = RotatedHamiltonianSystem(hamiltonian, build_coupling(hamiltonian, state), state)
        traj = sample_trajectory(sys_, report.tau_actual, 1000)
        assert bd_pointwise_margin(traj) > 0.0

    def test_random_constructions_keep_positive_margin(self):
        rng = np.random.default_rng(53)
        done = 0
        while done < 50:
            dim = int(rng.integers(3, 7))
            hamiltonian = random_hermitian(rng, dim, spectral_radius=rng.uniform(1.0, 4.0))
            state = random_pure_state(rng, dim)
            report = run_bd_nonsaturation(hamiltonian, state, float(rng.uniform(0.0, 0.9)), samples=400)
            assert report.mt_closed - report.bd_closed > 1e-6
            assert abs(report.tau_actual - report.mt_closed) <= 1e-8
            done += 1

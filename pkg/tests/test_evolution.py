import math

import numpy as np
import pytest

from mesonq import (
    K0BAR_DIRECTION, Quasispin, StateVector,
    basis_convert, bipartite_expectation, effective_operator,
    evolve_bipartite, evolve_single_closed, joint_probabilities,
    lindblad_integrate, singlet_state,
)
from mesonq.evolution import (
    DensityMatrix, embed_surviving, pure_density, singlet_vector,
)

from conftest import random_density, random_pure_state


def surviving_pair_block(rho16):
    return rho16.reshape(4, 4, 4, 4)[:2, :2, :2, :2].reshape(4, 4)


class TestClosedForm:
    def test_time_zero_is_identity(self, kaon, rng):
        rho = random_density(rng)
        out = evolve_single_closed(rho, 0.0, kaon).entries
        assert np.abs(out[:2, :2] - rho).max() < 1e-15
        assert np.abs(out[2:, 2:]).max() == 0.0

    def test_short_lived_decay_population(self, kaon):
        rho = np.diag([1.0, 0.0]).astype(complex)
        out = evolve_single_closed(rho, 1.0 / kaon.gamma_s, kaon).entries
        assert out[0, 0].real == pytest.approx(math.exp(-1.0), abs=1e-14)
        assert out[3, 3].real == pytest.approx(1.0 - math.exp(-1.0), abs=1e-14)
        assert out[2, 2] == 0.0

    def test_coherence_oscillates_and_damps(self, kaon):
        rho = 0.5 * np.ones((2, 2), dtype=complex)  # (K_S + K_L)/sqrt(2)
        out = evolve_single_closed(rho, 1.0, kaon).entries
        want = 0.5 * np.exp((1j - kaon.gamma_mean) * 1.0)
        assert out[0, 1] == pytest.approx(want, abs=1e-14)
        # the integrator is the independent oracle for the phase direction
        num = lindblad_integrate(embed_surviving(rho), 1.0, kaon).entries
        assert abs(num[0, 1] - want) < 1e-9

    def test_negative_time_rejected(self, kaon):
        with pytest.raises(ValueError):
            evolve_single_closed(np.eye(2) / 2, -0.5, kaon)

    def test_markov_composition(self, kaon, rng):
        rho = embed_surviving(random_density(rng))
        one = evolve_single_closed(evolve_single_closed(rho, 0.7, kaon), 1.1, kaon)
        two = evolve_single_closed(rho, 1.8, kaon)
        assert np.abs(one.entries - two.entries).max() < 1e-12

    def test_trace_and_positivity_along_trajectory(self, kaon, rng):
        rho = embed_surviving(random_density(rng))
        for t in np.arange(0.0, 20.0, 0.25):
            out = evolve_single_closed(rho, float(t), kaon)
            assert abs(out.trace - 1.0) < 1e-12
            assert out.min_eigenvalue() > -1e-10

    def test_surviving_trace_monotone(self, kaon, rng):
        rho = embed_surviving(random_density(rng))
        traces = [evolve_single_closed(rho, float(t), kaon).surviving_trace()
                  for t in np.arange(0.0, 5.0, 0.01)]
        assert all(b <= a + 1e-12 for a, b in zip(traces, traces[1:]))


class TestLindbladIntegrator:
    def test_time_zero(self, kaon, rng):
        rho = embed_surviving(random_density(rng))
        out = lindblad_integrate(rho, 0.0, kaon).entries
        assert np.abs(out - rho).max() < 1e-15

    def test_matches_closed_form_for_pure_short(self, kaon):
        rho = embed_surviving(np.diag([1.0, 0.0]).astype(complex))
        a = evolve_single_closed(rho, 1.0, kaon).entries
        b = lindblad_integrate(rho, 1.0, kaon).entries
        assert np.abs(a - b).max() < 1e-8

    def test_matches_closed_form_random_states(self, kaon, rng):
        for _ in range(10):
            rho = embed_surviving(random_density(rng))
            for t in (0.1, 1.0, 5.0):
                a = evolve_single_closed(rho, t, kaon).entries
                b = lindblad_integrate(rho, t, kaon).entries
                assert np.abs(a - b).max() < 1e-8

    def test_everything_decays_eventually(self, bmeson):
        rho = embed_surviving(0.5 * np.eye(2, dtype=complex))
        out = lindblad_integrate(rho, 20.0, bmeson, dt=2e-3)
        assert out.surviving_trace() < 1e-10
        assert out.trace == pytest.approx(1.0, abs=1e-9)

    def test_trace_conservation_rate(self, kaon, rng):
        rho = embed_surviving(random_density(rng))
        out = lindblad_integrate(rho, 2.0, kaon, dt=1e-3)
        assert abs(out.trace - 1.0) < 2e-9  # 1e-9 per unit time

    def test_oversized_step_rejected(self, bmeson):
        rho = embed_surviving(np.diag([0.5, 0.5]).astype(complex))
        with pytest.raises(ValueError, match="reduce dt"):
            lindblad_integrate(rho, 5.0, bmeson, dt=0.5)

    def test_input_validation(self, kaon):
        rho = embed_surviving(np.eye(2) / 2)
        with pytest.raises(ValueError):
            lindblad_integrate(rho, 1.0, kaon, dt=-1e-3)
        with pytest.raises(ValueError):
            lindblad_integrate(np.eye(2) / 2, 1.0, kaon)


class TestBipartite:
    def test_product_state_factorizes(self, kaon, rng):
        rho_a = embed_surviving(random_density(rng))
        rho_b = embed_surviving(random_density(rng))
        out = evolve_bipartite(np.kron(rho_a, rho_b), 1.3, kaon).entries
        want = np.kron(evolve_single_closed(rho_a, 1.3, kaon).entries,
                       evolve_single_closed(rho_b, 1.3, kaon).entries)
        assert np.abs(out - want).max() < 1e-12

    def test_singlet_unchanged_at_zero(self, kaon):
        psi = singlet_state()
        out = evolve_bipartite(psi, 0.0, kaon)
        assert np.abs(out.entries - psi.entries).max() < 1e-15

    def test_matches_16dim_integrator_on_singlet(self, kaon):
        psi = singlet_state()
        a = evolve_bipartite(psi, 1.0, kaon).entries
        b = lindblad_integrate(psi, 1.0, kaon).entries
        assert np.abs(a - b).max() < 1e-8

    def test_trace_and_positivity(self, kaon):
        psi = singlet_state()
        for t in (0.0, 0.5, 2.0, 10.0, 20.0):
            out = evolve_bipartite(psi, t, kaon)
            assert abs(out.trace - 1.0) < 1e-10
            assert out.min_eigenvalue() > -1e-9

    def test_markov_composition(self, kaon):
        psi = singlet_state()
        one = evolve_bipartite(evolve_bipartite(psi, 0.9, kaon), 0.6, kaon)
        two = evolve_bipartite(psi, 1.5, kaon)
        assert np.abs(one.entries - two.entries).max() < 1e-12

    def test_summed_generator_breaks_factorization(self, kaon):
        # the variant with one summed decay generator couples the two decays:
        # product states stop factorizing, unlike the independent default
        plus = np.array([1.0, 1.0, 0.0, 0.0]) / math.sqrt(2.0)
        prod = pure_density(np.kron(plus, plus))
        factorized = evolve_bipartite(prod, 1.0, kaon).entries
        independent = lindblad_integrate(prod, 1.0, kaon).entries
        summed = lindblad_integrate(prod, 1.0, kaon, summed_generator=True).entries
        assert np.abs(independent - factorized).max() < 1e-8
        assert np.abs(summed - factorized).max() > 1e-3


class TestSinglet:
    def test_trace_one_pure(self):
        psi = singlet_state()
        assert psi.trace == pytest.approx(1.0, abs=1e-14)
        assert np.abs(psi.entries @ psi.entries - psi.entries).max() < 1e-14

    def test_marginals_maximally_mixed(self):
        r = singlet_state().entries.reshape(4, 4, 4, 4)
        red_a = np.einsum("abcb->ac", r)
        red_b = np.einsum("abad->bd", r)
        want = np.diag([0.5, 0.5, 0.0, 0.0])
        assert np.abs(red_a - want).max() < 1e-14
        assert np.abs(red_b - want).max() < 1e-14

    def test_antisymmetric_in_mass_basis(self):
        # rotating both factors to the mass basis leaves the antisymmetric
        # combination invariant up to a global phase
        v = StateVector(singlet_vector(), "strangeness")
        w = basis_convert(v, "mass").components
        want = np.zeros(16, dtype=complex)
        want[1 * 4 + 0] = -1.0 / math.sqrt(2.0)  # |K_L K_S>
        want[0 * 4 + 1] = 1.0 / math.sqrt(2.0)   # |K_S K_L>
        phase = np.vdot(want, w)
        assert abs(abs(phase) - 1.0) < 1e-12
        assert np.abs(w - phase * want).max() < 1e-12


class TestJointProbabilities:
    def test_perfect_anticorrelation_at_zero(self, kaon):
        jo = joint_probabilities(singlet_state(), K0BAR_DIRECTION, 0.0,
                                 K0BAR_DIRECTION, 0.0, kaon)
        assert jo.p_yy == pytest.approx(0.0, abs=1e-12)
        assert jo.p_nn == pytest.approx(0.0, abs=1e-12)
        assert jo.p_yn == pytest.approx(0.5, abs=1e-12)
        assert jo.p_ny == pytest.approx(0.5, abs=1e-12)

    def test_probabilities_sum_to_one(self, kaon, rng):
        psi = singlet_state()
        for _ in range(10):
            q1 = Quasispin(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            q2 = Quasispin(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            t_m = rng.uniform(0, 2)
            jo = joint_probabilities(psi, q1, t_m + rng.uniform(0, 2), q2, t_m, kaon)
            assert jo.total == pytest.approx(1.0, abs=1e-10)
            for p in (jo.p_yy, jo.p_yn, jo.p_ny, jo.p_nn):
                assert -1e-12 <= p <= 1.0 + 1e-12

    def test_everything_decayed_counts_as_no(self, kaon):
        jo = joint_probabilities(singlet_state(), K0BAR_DIRECTION, 1.0e4,
                                 K0BAR_DIRECTION, 0.0, kaon)
        assert jo.p_yy < 1e-12
        assert jo.p_yn < 1e-12

    def test_ordering_enforced(self, kaon):
        with pytest.raises(ValueError):
            joint_probabilities(singlet_state(), K0BAR_DIRECTION, 0.5,
                                K0BAR_DIRECTION, 1.0, kaon)

    def test_expectation_matches_effective_operators(self, kaon):
        psi = singlet_state()
        jo = joint_probabilities(psi, K0BAR_DIRECTION, 1.0, K0BAR_DIRECTION,
                                 0.0, kaon)
        o_n = effective_operator(K0BAR_DIRECTION, 1.0, kaon)
        o_m = effective_operator(K0BAR_DIRECTION, 0.0, kaon)
        e_eff = bipartite_expectation(o_n, o_m, surviving_pair_block(psi.entries))
        assert jo.expectation == pytest.approx(e_eff, abs=1e-9)


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.eye(3))

    def test_pure_density(self, rng):
        v = random_pure_state(rng, 4)
        rho = pure_density(v)
        assert rho.trace == pytest.approx(1.0, abs=1e-12)
        assert rho.min_eigenvalue() > -1e-12

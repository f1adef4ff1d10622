import math

import numpy as np
import pytest

from mesonq import (
    K0BAR_DIRECTION, MesonParams, Quasispin, bell_bounds, bell_operator,
    chsh_value, cp_bell_test, hermitian_eigen, sample_witness_max, scan_bell,
    singlet_state,
)
from mesonq.bell import BellSetting

SQRT2 = math.sqrt(2.0)


def planar_setting(t=0.0):
    return BellSetting(Quasispin(0.0, 0.0), t, Quasispin(math.pi / 4, 0.0), t,
                       Quasispin(math.pi / 2, 0.0), t,
                       Quasispin(3 * math.pi / 4, 0.0), t)


def strangeness_setting(t_n, t_m, t_np, t_mp):
    k = K0BAR_DIRECTION
    return BellSetting(k, t_n, k, t_m, k, t_np, k, t_mp)


def singlet4():
    rho = singlet_state().entries.reshape(4, 4, 4, 4)
    return rho[:2, :2, :2, :2].reshape(4, 4)


class TestBellOperator:
    def test_hermitian(self, kaon):
        b = bell_operator(strangeness_setting(0.0, 1.0, 1.0, 0.0), kaon)
        assert np.abs(b - b.conj().T).max() < 1e-14

    def test_planar_spectrum_reaches_tsirelson(self, kaon):
        vals = hermitian_eigen(bell_operator(planar_setting(), kaon)).eigenvalues
        assert vals[0] == pytest.approx(2.0 * SQRT2, abs=1e-9)
        assert vals[-1] == pytest.approx(-2.0 * SQRT2, abs=1e-9)

    def test_degenerate_b_side(self, kaon):
        k = K0BAR_DIRECTION
        s = BellSetting(Quasispin(0.3, 0.0), 0.0, k, 0.0, Quasispin(1.1, 0.0),
                        0.0, k, 0.0)
        vals = hermitian_eigen(bell_operator(s, kaon)).eigenvalues
        # O_m = O_m' makes the witness 2 O_n' x O_m with spectrum {+-2}
        assert np.allclose(np.abs(vals), 2.0, atol=1e-12)

    def test_norm_never_exceeds_four(self, kaon, rng):
        for _ in range(25):
            qs = [Quasispin(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
                  for _ in range(4)]
            ts = rng.uniform(0, 4, 4)
            s = BellSetting(qs[0], ts[0], qs[1], ts[1], qs[2], ts[2], qs[3], ts[3])
            vals = hermitian_eigen(bell_operator(s, kaon)).eigenvalues
            assert np.abs(vals).max() <= 4.0 + 1e-12


class TestBellBounds:
    def test_planar_maximum(self, kaon):
        rep = bell_bounds(planar_setting(), kaon)
        assert rep.lambda_max == pytest.approx(2.0 * SQRT2, abs=1e-9)
        assert rep.classical_bound == 2.0
        assert rep.tsirelson == pytest.approx(2.0 * SQRT2)

    def test_all_time_zero_settings_respect_tsirelson(self, kaon, rng):
        # unit Bloch vectors at t = 0: ordinary CHSH algebra applies
        for _ in range(25):
            qs = [Quasispin(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
                  for _ in range(4)]
            s = BellSetting(qs[0], 0.0, qs[1], 0.0, qs[2], 0.0, qs[3], 0.0)
            rep = bell_bounds(s, kaon)
            assert rep.lambda_max <= 2.0 * SQRT2 + 1e-9
            assert rep.lambda_min >= -2.0 * SQRT2 - 1e-9

    def test_witness_dominates_sampled_states(self, kaon, rng):
        for s in (planar_setting(), strangeness_setting(0.0, 1.0, 1.0, 0.0),
                  strangeness_setting(0.5, 0.5, 0.5, 0.5)):
            b = bell_operator(s, kaon)
            rep = bell_bounds(s, kaon)
            z = rng.standard_normal((1000, 4)) + 1j * rng.standard_normal((1000, 4))
            z /= np.linalg.norm(z, axis=1, keepdims=True)
            vals = np.einsum("ni,ij,nj->n", z.conj(), b, z).real
            assert vals.max() <= rep.lambda_max + 1e-9
            assert vals.min() >= rep.lambda_min - 1e-9

    def test_sampling_oracle_converges(self, kaon):
        b = bell_operator(planar_setting(), kaon)
        lam = bell_bounds(planar_setting(), kaon).lambda_max
        assert sample_witness_max(b, 10_000) <= lam + 1e-9
        assert abs(sample_witness_max(b, 10_000, refine_steps=300) - lam) < 1e-8


class TestChshValue:
    def test_identical_settings_saturate_classical(self, kaon):
        v = chsh_value(strangeness_setting(0.0, 0.0, 0.0, 0.0), singlet4(), kaon)
        assert v.s == pytest.approx(2.0, abs=1e-12)

    def test_planar_singlet_hits_tsirelson(self, kaon):
        v = chsh_value(planar_setting(), singlet4(), kaon)
        assert v.s == pytest.approx(2.0 * SQRT2, abs=1e-9)
        # the witness trace keeps the sign the absolute values discard
        assert abs(v.witness) == pytest.approx(2.0 * SQRT2, abs=1e-9)

    def test_witness_matches_aligned_signs(self, kaon):
        s = strangeness_setting(0.0, 1.0, 1.0, 0.0)
        v = chsh_value(s, singlet4(), kaon)
        assert v.s >= abs(v.witness) - 1e-12


class TestCpBellTest:
    def test_no_violation_without_cp_asymmetry(self):
        rep = cp_bell_test(0.0)
        assert not rep.variant_ks_violates and not rep.variant_kl_violates
        assert rep.s_ks == pytest.approx(2.0, abs=1e-9)
        assert rep.s_kl == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("delta", [3.322e-3, -3.322e-3, 1e-2, -2e-3])
    def test_exactly_one_variant_violates(self, delta):
        rep = cp_bell_test(delta)
        assert rep.variant_ks_violates != rep.variant_kl_violates
        flipped = cp_bell_test(-delta)
        assert rep.variant_ks_violates == flipped.variant_kl_violates

    def test_margin_is_first_order_in_delta(self):
        d = 3.322e-3
        rep = cp_bell_test(d)
        # winning variant reaches 1 + |delta| + sqrt(1 - delta^2)
        want = 1.0 + d + math.sqrt(1.0 - d * d) - 2.0
        margin = max(rep.margin_ks, rep.margin_kl)
        assert margin == pytest.approx(want, abs=1e-12)

    def test_witness_spectrum_cannot_discriminate(self):
        # both variants share lambda_max = 2 sqrt(1 + |delta|): the verdict
        # must come from the singlet CHSH value, not the spectrum
        d = 3.322e-3
        rep = cp_bell_test(d)
        want = 2.0 * math.sqrt(1.0 + d)
        assert rep.lambda_max_ks == pytest.approx(want, abs=1e-9)
        assert rep.lambda_max_kl == pytest.approx(want, abs=1e-9)

    def test_large_delta_rejected(self):
        with pytest.raises(ValueError):
            cp_bell_test(0.2)


class TestScanBell:
    def test_time_zero_row(self, kaon):
        row = scan_bell("alternating-1", [0.0, 0.5], kaon)[0]
        assert row.lambda_max == pytest.approx(2.0, abs=1e-9)
        assert row.summand_mu_bound == 0.0

    def test_policies_b_and_c_share_summand_bound(self, kaon):
        grid = [0.3, 0.8, 1.5, 2.4, 4.0]
        rows_b = scan_bell("alternating-1", grid, kaon)
        rows_c = scan_bell("alternating-2", grid, kaon)
        for rb, rc in zip(rows_b, rows_c):
            assert rb.summand_mu_bound == pytest.approx(rc.summand_mu_bound,
                                                        abs=1e-10)

    def test_strangeness_scan_maximum(self, kaon):
        grid = [0.02 * i for i in range(1, 301)]
        rows = scan_bell("alternating-1", grid, kaon)
        peak = max(r.lambda_max for r in rows)
        assert peak == pytest.approx(2.1238, abs=2e-3)

    def test_violation_persists_at_long_times(self, kaon):
        grid = [0.05 * i for i in range(1, 121)]
        rows = scan_bell("alternating-1", grid, kaon)
        horizon = 3.0 / kaon.gamma_s
        assert any(r.t > horizon and r.lambda_max > 2.0 for r in rows)

    def test_decay_asymmetry_skews_the_spectrum(self, kaon):
        # unequal widths push lambda_max and |lambda_min| apart; equal widths
        # keep the scan nearly symmetric
        grid = [0.05 * i for i in range(1, 121)]
        equal = MesonParams(kaon.gamma_l, kaon.gamma_l, 0.0, "equalwidth")
        rows_k = scan_bell("alternating-1", grid, kaon)
        rows_e = scan_bell("alternating-1", grid, equal)

        def asymmetry(rows):
            return abs(max(r.lambda_max for r in rows)
                       + min(r.lambda_min for r in rows))

        assert asymmetry(rows_k) > 10.0 * asymmetry(rows_e)

    def test_bmeson_scan_respects_tsirelson(self, bmeson):
        grid = [0.05 * i for i in range(1, 121)]
        rows = scan_bell("alternating-1", grid, bmeson)
        for r in rows:
            assert abs(r.lambda_max) <= 2.0 * SQRT2 + 1e-9
            assert abs(r.lambda_min) <= 2.0 * SQRT2 + 1e-9

    def test_input_validation(self, kaon):
        with pytest.raises(ValueError, match="unknown time policy"):
            scan_bell("nope", [0.1], kaon)
        with pytest.raises(ValueError, match="empty"):
            scan_bell("all-equal", [], kaon)
        with pytest.raises(ValueError, match="sorted"):
            scan_bell("all-equal", [1.0, 0.5], kaon)

    def test_negative_times_rejected(self, kaon):
        with pytest.raises(ValueError):
            BellSetting(K0BAR_DIRECTION, -0.1, K0BAR_DIRECTION, 0.0,
                        K0BAR_DIRECTION, 0.0, K0BAR_DIRECTION, 0.0)

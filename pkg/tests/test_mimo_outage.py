"""Channel model, outage probability and the large-K approximation."""
import math
import warnings

import numpy as np
import pytest

from wishart_outage import cmatrix2 as cm
from wishart_outage import presets
from wishart_outage.errors import DomainError, RankError
from wishart_outage.mimo_outage import (
    SERIES_AUTO_KMAX,
    ChannelSpec,
    OutageQuery,
    align_los,
    aligned_channel,
    alignment_bounds,
    large_k_outage,
    los_direction,
    outage_probability,
    outage_sweep,
    params_by_reparameterisation,
    series_terms_estimate,
    wishart_params_from_channel,
)


def random_channel(rng, k):
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    t = g @ g.conj().T + 0.1 * np.eye(2)
    t = 2 * t / np.trace(t).real
    w = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    h = np.outer(w, v.conj())
    h *= 2 / np.linalg.norm(h)
    return ChannelSpec(h, cm.Herm2.from_array(0.5 * (t + t.conj().T)), k)


class TestChannelSpec:
    def test_reference(self):
        ch = presets.reference_channel(1.0)
        assert np.sum(np.abs(ch.h_bar) ** 2) == pytest.approx(4.0, abs=1e-12)
        assert ch.t_corr.trace == pytest.approx(2.0, abs=1e-12)

    def test_strict_rejects_unnormalised(self):
        with pytest.raises(DomainError):
            ChannelSpec(presets.UPSILON_REF * 1.1, presets.PSI_REF, 1.0)
        with pytest.raises(DomainError):
            ChannelSpec(presets.reference_h_bar(), presets.PSI_REF.scaled(1.5), 1.0)

    def test_printed_mean_is_off_normalisation(self):
        # the four-decimal mean has trace 3.99997, outside the 1e-6 window
        with pytest.raises(DomainError):
            ChannelSpec(presets.UPSILON_REF, presets.PSI_REF, 1.0)

    def test_lenient_rescales(self):
        with pytest.warns(UserWarning):
            ch = ChannelSpec(3 * presets.UPSILON_REF, presets.PSI_REF.scaled(4), 1.0,
                             normalization="lenient")
        assert np.sum(np.abs(ch.h_bar) ** 2) == pytest.approx(4.0, rel=1e-14)
        assert ch.t_corr.trace == pytest.approx(2.0, rel=1e-14)

    def test_normalised_input_no_warning(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            ChannelSpec(presets.reference_h_bar(), presets.PSI_REF, 1.0, normalization="lenient")

    def test_full_rank_mean(self):
        with pytest.raises(RankError):
            ChannelSpec(np.sqrt(2) * np.eye(2), presets.PSI_REF, 1.0)

    def test_singular_t(self):
        t = cm.Herm2(2.0, 0.0)
        with pytest.raises(DomainError):
            ChannelSpec(presets.reference_h_bar(), t, 1.0)
        ch = ChannelSpec(presets.reference_h_bar(), t, 1.0, allow_singular_t=True)
        with pytest.raises(DomainError):
            wishart_params_from_channel(ch)

    @pytest.mark.parametrize("bad", ["strict-ish", None])
    def test_bad_mode(self, bad):
        with pytest.raises(DomainError):
            ChannelSpec(presets.reference_h_bar(), presets.PSI_REF, 1.0, normalization=bad)

    def test_negative_k(self):
        with pytest.raises(DomainError):
            presets.reference_channel(-0.1)

    def test_query(self):
        assert OutageQuery(2).gamma_th_over_gamma_bar == 2.0
        for bad in (0.0, -1.0, float("inf")):
            with pytest.raises(DomainError):
                OutageQuery(bad)


class TestParams:
    def test_k0(self):
        p = wishart_params_from_channel(presets.reference_channel(0.0))
        e = cm.herm_eigen(presets.PSI_REF)
        assert p.mu == 0.0 and p.eta == 0.0
        assert p.sigma1 == pytest.approx(1 / e.lam_max, rel=1e-14)
        assert p.sigma2 == pytest.approx(1 / e.lam_min, rel=1e-14)

    def test_identity_t(self):
        v = np.array([1.0, 1.0j]) / math.sqrt(2)
        h = np.outer([math.sqrt(2), math.sqrt(2)], v.conj())
        p = wishart_params_from_channel(ChannelSpec(h, cm.Herm2.identity(), 1.0))
        assert p.mu == pytest.approx(8.0, rel=1e-13)
        assert p.eta == pytest.approx(4.0, rel=1e-13)

    @pytest.mark.parametrize("k", [0.5, 1.0, 2.0, 1000.0])
    def test_dual_path_reference(self, k):
        ch = presets.reference_channel(k)
        a = wishart_params_from_channel(ch)
        b = params_by_reparameterisation(ch)
        for name in ("sigma1", "sigma2", "mu", "eta", "a1sq", "a2sq"):
            assert getattr(a, name) == pytest.approx(getattr(b, name), rel=1e-9, abs=1e-12)

    def test_dual_path_random(self, rng):
        for _ in range(50):
            ch = random_channel(rng, 10 ** rng.uniform(-2, 3))
            a = wishart_params_from_channel(ch)
            b = params_by_reparameterisation(ch)
            for name in ("sigma1", "sigma2", "mu", "eta"):
                assert getattr(a, name) == pytest.approx(getattr(b, name), rel=1e-9)

    def test_los_direction(self):
        v = los_direction(presets.reference_h_bar())
        g = cm.gram(presets.reference_h_bar()).to_array()
        np.testing.assert_allclose(4 * np.outer(v, v.conj()), g, atol=1e-9)


class TestOutage:
    def test_small_threshold(self):
        ch = presets.reference_channel(1.0)
        assert outage_probability(ch, 1e-3).value < 1e-8

    def test_large_threshold(self, rng):
        for k in (0.0, 1.0, 5.0):
            assert outage_probability(random_channel(rng, k), 40.0).value >= 0.999

    def test_equals_cdf(self):
        ch = presets.reference_channel(2.0)
        from wishart_outage.maxeig_cdf import cdf_max_eig

        p = wishart_params_from_channel(ch)
        assert outage_probability(ch, OutageQuery(3.0)).value == cdf_max_eig(p, 3.0).value

    def test_crossing(self):
        low, high = presets.reference_channel(0.5), presets.reference_channel(2.0)
        assert outage_probability(high, 0.5).value < outage_probability(low, 0.5).value
        assert outage_probability(high, 8.0).value > outage_probability(low, 8.0).value

    def test_methods_agree(self, rng):
        ch = random_channel(rng, 2.0)
        for x in (0.5, 3.0, 9.0):
            s = outage_probability(ch, x, method="series").value
            d = outage_probability(ch, x, method="direct").value
            assert s == pytest.approx(d, abs=1e-10)

    def test_methods_agree_reference(self):
        # the printed mean is rank one only to ~1e-10 relative; eta then
        # differs from its rank-one value by a few 1e-9, which only the series sees
        ch = presets.reference_channel(2.0)
        for x in (0.5, 3.0, 9.0):
            s = outage_probability(ch, x, method="series").value
            d = outage_probability(ch, x, method="direct").value
            assert s == pytest.approx(d, abs=1e-8)

    def test_auto_switches_for_strong_los(self):
        ch = presets.reference_channel(1000.0)
        p = wishart_params_from_channel(ch)
        assert series_terms_estimate(p) > SERIES_AUTO_KMAX
        r = outage_sweep(ch, [4.0])
        assert r[0].method == "direct" and r[0].terms_used == 0

    def test_bad_method(self):
        with pytest.raises(DomainError):
            outage_probability(presets.reference_channel(1.0), 1.0, method="fast")


class TestSweep:
    def test_singleton(self):
        r = outage_sweep(presets.reference_channel(1.0), [2.0])
        assert len(r) == 1 and r[0].x == 2.0

    def test_grid_checks(self):
        ch = presets.reference_channel(1.0)
        with pytest.raises(DomainError):
            outage_sweep(ch, [])
        with pytest.raises(DomainError):
            outage_sweep(ch, [2.0, 1.0])

    def test_monotone(self):
        ch = presets.reference_channel(2.0)
        v = [r.value for r in outage_sweep(ch, np.geomspace(0.1, 40, 200))]
        assert np.min(np.diff(v)) >= -1e-9

    def test_large_k_column(self):
        ch = presets.reference_channel(1000.0)
        r = outage_sweep(ch, [3.9, 4.0, 4.1], include_large_k=True)
        assert r[1].large_k_value == 0.5
        assert all(abs(p.value - p.large_k_value) < 0.05 for p in r)


class TestLargeK:
    def test_critical_point(self, rng):
        for _ in range(20):
            ch = random_channel(rng, 10 ** rng.uniform(0, 4))
            assert large_k_outage(ch, 4.0) == 0.5

    def test_barrier(self):
        ch = presets.reference_channel(1e12)
        assert large_k_outage(ch, 3.99) == 0.0
        assert large_k_outage(ch, 4.01) == 1.0

    def test_formula(self):
        ch = presets.reference_channel(100.0)
        v = los_direction(ch.h_bar)
        scale = math.sqrt(8 * ch.t_corr.quad_form(v) / 100.0)
        from scipy.stats import norm

        assert large_k_outage(ch, 3.7) == pytest.approx(norm.cdf((3.7 - 4) / scale), rel=1e-13)

    def test_needs_positive_k(self):
        with pytest.raises(DomainError):
            large_k_outage(presets.reference_channel(0.0), 4.0)

    def test_phase_transition(self):
        ch = presets.reference_channel(1000.0)
        least = aligned_channel(ch, "least")
        lead = aligned_channel(ch, "leading")
        assert large_k_outage(least, 3.8) < large_k_outage(lead, 3.8)
        assert large_k_outage(least, 4.2) > large_k_outage(lead, 4.2)
        assert large_k_outage(least, 4.0) == large_k_outage(lead, 4.0)


class TestAlignment:
    def test_leading_and_least(self):
        ch = presets.reference_channel(10.0)
        lo, hi, _ = alignment_bounds(ch)
        assert alignment_bounds(aligned_channel(ch, "leading"))[2] == pytest.approx(hi, rel=1e-12)
        assert alignment_bounds(aligned_channel(ch, "least"))[2] == pytest.approx(lo, rel=1e-12)

    def test_random_within_bounds(self, rng):
        for _ in range(10_000):
            lo, hi, val = alignment_bounds(random_channel(rng, 1.0))
            assert lo <= val <= hi

    def test_given_keeps_channel(self):
        ch = presets.reference_channel(10.0)
        assert aligned_channel(ch, "given") is ch

    def test_align_preserves_normalisation(self):
        ch = align_los(presets.reference_channel(10.0), [1.0, 2.0j])
        assert np.sum(np.abs(ch.h_bar) ** 2) == pytest.approx(4.0, rel=1e-14)
        v = los_direction(ch.h_bar)
        assert abs(np.vdot(v, np.array([1.0, 2.0j]) / math.sqrt(5))) == pytest.approx(1.0, rel=1e-12)

    def test_bad_alignment(self):
        with pytest.raises(DomainError):
            aligned_channel(presets.reference_channel(10.0), "middle")
        with pytest.raises(DomainError):
            align_los(presets.reference_channel(10.0), [0.0, 0.0])

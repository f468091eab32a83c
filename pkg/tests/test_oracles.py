"""Monte-Carlo sampling, matrix-integral quadrature and the large-K experiment."""
import math

import numpy as np
import pytest
from scipy.stats import qmc

from wishart_outage import cmatrix2 as cm
from wishart_outage import presets
from wishart_outage.errors import BudgetExceeded, DomainError
from wishart_outage.maxeig_cdf import WishartParams
from wishart_outage.mimo_outage import ChannelSpec
from wishart_outage.oracles import (
    EmpiricalCdf,
    McConfig,
    QuadConfig,
    complex_normal,
    disc_integral,
    empirical_sup_diff,
    hermitian_interval_volume,
    ks_distance_normal,
    prop1_experiment,
    quad_Qk,
    quad_region,
    sample_gaussian_matrices,
    sample_max_eig,
)


class TestEmpiricalCdf:
    def test_right_continuous(self):
        f = EmpiricalCdf([3.0, 1.0, 2.0, 2.0])
        np.testing.assert_array_equal(f([0.5, 1.0, 1.5, 2.0, 3.0]), [0, 0.25, 0.25, 0.75, 1.0])
        assert f.n == 4 and list(f.sorted_samples) == [1.0, 2.0, 2.0, 3.0]

    def test_empty(self):
        with pytest.raises(DomainError):
            EmpiricalCdf([])

    def test_dkw(self):
        f = EmpiricalCdf(np.zeros(1_000_000))
        assert f.dkw_band(1e-3) == pytest.approx(1.95e-3, rel=0.01)

    def test_sup_diff_self(self):
        rng = np.random.default_rng(0)
        f = EmpiricalCdf(rng.exponential(size=1000))
        assert empirical_sup_diff(f, f, f.sorted_samples) == 0.0

    def test_sup_diff_detects_shift(self):
        rng = np.random.default_rng(0)
        f = EmpiricalCdf(rng.exponential(size=100_000))
        grid = np.linspace(0.1, 5, 50)
        good = empirical_sup_diff(f, lambda x: 1 - math.exp(-x), grid)
        bad = empirical_sup_diff(f, lambda x: 1 - math.exp(-max(x - 0.5, 0)), grid)
        assert good < 0.01 < bad


class TestSampling:
    def test_complex_normal_convention(self):
        z = complex_normal(np.random.default_rng(1), (400_000,))
        assert np.var(z.real) == pytest.approx(0.5, abs=0.005)
        assert np.var(z.imag) == pytest.approx(0.5, abs=0.005)
        assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.005)

    def test_mean_identity(self):
        rng = np.random.default_rng(2)
        psi = presets.PSI_REF
        x = sample_gaussian_matrices(presets.UPSILON_REF, psi, rng, 200_000)
        w = np.einsum("nji,njk->nik", x.conj(), x)
        expected = np.trace(cm.gram(presets.UPSILON_REF).to_array()).real + 2 * psi.trace
        assert np.trace(w.mean(axis=0)).real == pytest.approx(expected, rel=5e-3)

    def test_central_mean(self):
        # E[lambda_max] for the central 2x2 case with Psi = I is 7/2
        f = sample_max_eig(np.zeros((2, 2)), cm.Herm2.identity(), McConfig(1_000_000, 5))
        assert f.mean() == pytest.approx(3.5, abs=0.01)

    def test_reproducible_and_worker_invariant(self):
        mc1 = McConfig(200_000, 77, 1)
        mc3 = McConfig(200_000, 77, 3)
        a = sample_max_eig(presets.UPSILON_REF, presets.PSI_REF, mc1).sorted_samples
        b = sample_max_eig(presets.UPSILON_REF, presets.PSI_REF, mc1).sorted_samples
        c = sample_max_eig(presets.UPSILON_REF, presets.PSI_REF, mc3).sorted_samples
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(a, c)

    def test_seed_matters(self):
        a = sample_max_eig(presets.UPSILON_REF, presets.PSI_REF, McConfig(10_000, 1)).sorted_samples
        b = sample_max_eig(presets.UPSILON_REF, presets.PSI_REF, McConfig(10_000, 2)).sorted_samples
        assert not np.array_equal(a, b)

    def test_thread_env(self, monkeypatch):
        monkeypatch.setenv("WISHART_OUTAGE_THREADS", "4")
        assert McConfig().workers == 4
        assert McConfig(n_workers=2).workers == 2

    def test_config_checks(self):
        with pytest.raises(DomainError):
            McConfig(n_samples=0)
        with pytest.raises(DomainError):
            McConfig(seed=-1)


class TestQuadrature:
    def test_disc_integral_against_angle_quadrature(self):
        a1, a2 = 0.3, 0.7
        y11, y22, rad2 = 0.4, 0.25, 0.08
        ph = 0.7  # relative phase of conj(al1) al2; the integral does not depend on it
        r = np.linspace(0, math.sqrt(rad2), 801)
        t = np.linspace(0, 2 * math.pi, 801)
        rr, tt = np.meshgrid(r, t, indexing="ij")
        for k in (0, 1, 2, 5):
            f = (a1 * y11 + a2 * y22 + 2 * math.sqrt(a1 * a2) * rr * np.cos(tt + ph)) ** k * rr
            num = np.trapezoid(np.trapezoid(f, t, axis=1), r)
            assert float(disc_integral(k, a1, a2, y11, y22, rad2)) == pytest.approx(num, rel=1e-5)

    def test_positive_and_decreasing(self, ref_params):
        for k in (0, 2, 5):
            q = [quad_Qk(k, x, ref_params) for x in (0.5, 2.0, 8.0, 20.0)]
            assert all(v > 0 for v in q)
            assert all(b < a for a, b in zip(q, q[1:]))

    def test_exponential_case_against_sobol(self):
        # k = 0: integrate exp(-x s1 y11 - x s2 y22) over {0 < Y < I} by scrambled Sobol
        p = WishartParams(0.5, 2.0, 1.0, 1.0, 0.5, 0.5)
        x = 1.5
        pts = qmc.Sobol(d=4, scramble=True, seed=11).random(1 << 20)
        y11, y22 = pts[:, 0], pts[:, 1]
        r2 = (pts[:, 2] - 0.5) ** 2 + (pts[:, 3] - 0.5) ** 2
        inside = (r2 < y11 * y22) & (r2 < (1 - y11) * (1 - y22))
        est = np.mean(inside * np.exp(-x * p.sigma1 * y11 - x * p.sigma2 * y22))
        assert quad_Qk(0, x, p) == pytest.approx(est, rel=1e-3)

    def test_volume_at_origin(self):
        p = WishartParams(0.5, 2.0, 1.0, 1.0, 0.5, 0.5)
        assert quad_Qk(0, 0.0, p) == pytest.approx(math.pi / 12, rel=1e-6)

    def test_budget(self, ref_params):
        with pytest.raises(BudgetExceeded):
            quad_region(3, 2.0, ref_params, 1, QuadConfig(rel_tol=1e-8, max_evals=500))

    def test_config_and_args(self, ref_params):
        with pytest.raises(DomainError):
            QuadConfig(rel_tol=1e-1)
        with pytest.raises(DomainError):
            quad_region(0, 1.0, ref_params, 3)


class TestVolume:
    def test_quasi_random(self):
        vol = hermitian_interval_volume()
        assert vol["total"] == pytest.approx(math.pi / 12, rel=1e-2)
        assert vol["region1"] + vol["region2"] == pytest.approx(vol["total"], rel=1e-3)
        # the map Y -> I - Y swaps the two regions
        assert vol["region1"] == pytest.approx(vol["region2"], rel=1e-2)

    def test_rejection_sampling(self):
        rng = np.random.default_rng(99)
        n = 10_000_000
        hits = 0
        for _ in range(10):
            y = rng.random((n // 10, 4))
            r2 = (y[:, 2] - 0.5) ** 2 + (y[:, 3] - 0.5) ** 2
            hits += np.count_nonzero((r2 < y[:, 0] * y[:, 1]) & (r2 < (1 - y[:, 0]) * (1 - y[:, 1])))
        assert hits / n == pytest.approx(math.pi / 12, rel=5e-3)


class TestLargeKExperiment:
    def test_ks_distance(self):
        rng = np.random.default_rng(4)
        assert ks_distance_normal(rng.standard_normal(100_000)) < 0.01
        assert ks_distance_normal(rng.standard_normal(100_000) + 0.2) > 0.05

    def test_trend(self):
        ch = presets.reference_channel(1000.0)
        ks = dict(prop1_experiment(ch, [1e2, 1e4], McConfig(20_000, 3)))
        assert ks[1e4] < ks[1e2]

    def test_rank_deficient_t(self):
        ch = ChannelSpec(presets.reference_h_bar(), cm.Herm2(2.0, 0.0), 1e4, allow_singular_t=True)
        ks = dict(prop1_experiment(ch, [1e3, 1e4], McConfig(20_000, 3)))
        assert all(math.isfinite(v) and v < 0.05 for v in ks.values())

    def test_argument_checks(self):
        ch = presets.reference_channel(1.0)
        with pytest.raises(DomainError):
            prop1_experiment(ch, [1e3, 1e2])
        with pytest.raises(DomainError):
            prop1_experiment(ch, [5.0])

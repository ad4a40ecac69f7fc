import numpy as np
import pytest
from scipy import stats

from cvfock.channels import generalized_bernoulli, loss
from cvfock.core import DM, StateArray
from cvfock.errors import SchemaError
from cvfock.homodyne import ImperfectionModel, PhaseSchedule, QuadratureDataset, sample_quadratures
from cvfock.metrics import quadrature_moments
from cvfock.phase_space import marginal
from cvfock.states import make_cat, make_fock, make_squeezed_vacuum, make_thermal, make_vacuum


def chi2_pvalue(samples, density, edges):
    counts, _ = np.histogram(samples, bins=edges)
    fine = [np.linspace(a, b, 41) for a, b in zip(edges[:-1], edges[1:])]
    probs = np.array([np.trapezoid(density(f), f) for f in fine])
    expected = probs / probs.sum() * counts.sum()
    keep = expected > 5
    return stats.chisquare(counts[keep], expected[keep] * counts[keep].sum() / expected[keep].sum()).pvalue


class TestSampling:
    def test_vacuum_variance(self):
        ds = sample_quadratures(make_vacuum((2,)), PhaseSchedule("uniform"), 10 ** 6, seed=1)
        assert np.var(ds.x) == pytest.approx(0.5, abs=0.002)

    def test_squeezed_variance(self):
        ds = sample_quadratures(make_squeezed_vacuum(0.345, cutoff=30), PhaseSchedule("fixed", phases=(0.0,)),
                                200000, seed=2)
        target = np.exp(-0.69) / 2
        assert np.var(ds.x) == pytest.approx(target, abs=5 * target * np.sqrt(2 / 200000))

    def test_single_photon_histogram(self):
        ds = sample_quadratures(make_fock(1, 2), PhaseSchedule("uniform"), 100000, seed=3)
        dens = lambda x: 2 * x ** 2 * np.exp(-x ** 2) / np.sqrt(np.pi)
        assert chi2_pvalue(ds.x, dens, np.linspace(-3.5, 3.5, 36)) > 1e-3

    def test_electronic_noise_adds_variance(self):
        model = ImperfectionModel(electronic_noise=0.1)
        ds = sample_quadratures(make_vacuum((1,)), PhaseSchedule("uniform"), 400000, model, seed=4)
        assert np.var(ds.x) == pytest.approx(0.6, abs=0.005)

    def test_moments_converge(self):
        s = make_cat(1.0, 0.4, 25)
        ph = (0.0, np.pi / 3)
        n = 100000
        ds = sample_quadratures(s, PhaseSchedule("swept", phases=ph), 2 * n, seed=6)
        for th in ph:
            x = ds.x[np.isclose(ds.theta, th)]
            mean, var = quadrature_moments(s, 0, th)
            assert abs(x.mean() - mean) < 5 * np.sqrt(var / x.size)
            fourth = np.mean((x - mean) ** 4)
            assert abs(x.var() - var) < 5 * np.sqrt((fourth - var ** 2) / x.size)

    def test_loss_model_equivalence(self):
        s = make_cat(0.9, np.pi, 20)
        eta = 0.7
        a = sample_quadratures(s, PhaseSchedule("fixed", phases=(0.5,)), 100000, ImperfectionModel(eta), seed=7)
        rho_b = StateArray(generalized_bernoulli(s.to_dm().matrix, eta), s.cutoffs, DM)
        b = sample_quadratures(rho_b, PhaseSchedule("fixed", phases=(0.5,)), 100000, seed=8)
        assert stats.ks_2samp(a.x, b.x).pvalue > 1e-3
        dens = lambda x: marginal(loss(s, 0, eta), 0.5, x)
        assert chi2_pvalue(a.x, dens, np.linspace(-3.5, 3.5, 36)) > 1e-3

    def test_mode_purity_mixture(self):
        model = ImperfectionModel(mode_purity=0.6)
        ds = sample_quadratures(make_fock(1, 2), PhaseSchedule("uniform"), 200000, model, seed=9,
                                background=make_vacuum((2,)))
        # <x^2> = 0.6 * 1.5 + 0.4 * 0.5
        assert np.mean(ds.x ** 2) == pytest.approx(1.1, abs=0.01)
        with pytest.raises(SchemaError):
            sample_quadratures(make_fock(1, 2), PhaseSchedule("uniform"), 10, model, seed=9)


class TestDeterminism:
    def test_same_seed_identical(self):
        s = make_thermal(0.3, 15)
        a = sample_quadratures(s, PhaseSchedule("uniform"), 70000, seed=42)
        b = sample_quadratures(s, PhaseSchedule("uniform"), 70000, seed=42)
        assert a.theta.tobytes() == b.theta.tobytes()
        assert a.x.tobytes() == b.x.tobytes()
        c = sample_quadratures(s, PhaseSchedule("uniform"), 70000, seed=43)
        assert not np.array_equal(a.x, c.x)

    def test_prefix_independent_of_length(self):
        s = make_fock(1, 2)
        a = sample_quadratures(s, PhaseSchedule("swept"), 1000, seed=5)
        b = sample_quadratures(s, PhaseSchedule("swept"), 3000, seed=5)
        assert np.array_equal(a.x, b.x[:1000])

    def test_csv_roundtrip(self, tmp_path):
        ds = sample_quadratures(make_fock(1, 2), PhaseSchedule("swept", 4), 500, ImperfectionModel(0.9), seed=11)
        path = tmp_path / "d.csv"
        ds.to_csv(path)
        back = QuadratureDataset.from_csv(path)
        assert np.array_equal(back.x, ds.x) and np.array_equal(back.theta, ds.theta)
        assert back.metadata["seed"] == 11
        assert back.metadata["imperfections"]["efficiency"] == 0.9
        assert "version" in back.metadata

    def test_bad_csv(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(SchemaError):
            QuadratureDataset.from_csv(p)


class TestSchedules:
    def test_fixed(self):
        ds = sample_quadratures(make_vacuum((1,)), PhaseSchedule("fixed", phases=(0.0,)), 50, seed=0)
        assert np.all(ds.theta == 0)

    def test_swept_twelve(self):
        sched = PhaseSchedule("swept", 12)
        assert np.allclose(sched.fixed_phases(), np.arange(12) * np.pi / 12)
        ds = sample_quadratures(make_vacuum((1,)), sched, 120, seed=0)
        assert np.unique(ds.theta).size == 12

    def test_uniform_reproducible_range(self):
        a = sample_quadratures(make_vacuum((1,)), PhaseSchedule("uniform"), 1000, seed=3)
        b = sample_quadratures(make_vacuum((1,)), PhaseSchedule("uniform"), 1000, seed=3)
        assert np.array_equal(a.theta, b.theta)
        assert a.theta.min() >= 0 and a.theta.max() < 2 * np.pi

    def test_invalid(self):
        with pytest.raises(SchemaError):
            PhaseSchedule("spiral")
        with pytest.raises(SchemaError):
            PhaseSchedule("fixed", phases=(0.0, 1.0))
        with pytest.raises(SchemaError):
            ImperfectionModel(efficiency=1.5)

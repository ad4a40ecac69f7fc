import numpy as np
import pytest
from sklearn.base import clone

from cvfock.channels import loss
from cvfock.conditional import subtract_photon_ideal
from cvfock.errors import IllConditioned, ModelMismatch, SchemaError
from cvfock.homodyne import ImperfectionModel, PhaseSchedule, sample_quadratures
from cvfock.phase_space import wigner, wigner_values
from cvfock.states import make_coherent, make_fock, make_squeezed_vacuum, make_vacuum
from cvfock.tomography import (Fock1MomentEstimator, MaxLikConvergenceWarning, MaxLikTomography,
                               ProcessTensor, RadonTomography, bootstrap, csqpt, fock1_from_moments,
                               fock1_model_moments)
from cvfock.tomography.estimation import moment_covariance, propagate

SWEPT = PhaseSchedule("swept", 12)


@pytest.fixture(scope="module")
def vacuum_data():
    return sample_quadratures(make_vacuum((4,)), SWEPT, 10000, seed=21)


@pytest.fixture(scope="module")
def photon_data():
    return sample_quadratures(make_fock(1, 4), PhaseSchedule("uniform"), 100000, seed=22)


class TestMaxLik:
    def test_vacuum(self, vacuum_data):
        est = MaxLikTomography(cutoff=6).fit(vacuum_data)
        assert est.monotone_ and est.converged_
        # a single 1e4-sample dataset fluctuates by a few 1e-3; judge the median
        pops = [np.real(MaxLikTomography(cutoff=6).fit(
            sample_quadratures(make_vacuum((4,)), SWEPT, 10000, seed=s)).density_matrix_[0, 0])
            for s in range(5)]
        assert np.median(pops) >= 0.99

    @pytest.mark.slow
    def test_lossy_photon_corrected(self):
        ds = sample_quadratures(make_fock(1, 4), SWEPT, 200000, ImperfectionModel(0.8), seed=23)
        est = MaxLikTomography(cutoff=6, eta=0.8).fit(ds)
        assert np.real(est.density_matrix_[1, 1]) >= 0.97
        assert est.monotone_

    def test_output_is_physical(self, photon_data):
        est = MaxLikTomography(cutoff=5, max_iter=200, tol=1e-6).fit(photon_data)
        d = est.state_.validate(1e-10)
        assert d["valid"]
        assert np.all(np.diff(est.history_) >= -1e-9 * np.abs(est.history_[1:]))

    def test_loglik_never_decreases_over_datasets(self):
        states = [make_coherent(0.8, 15), subtract_photon_ideal(make_squeezed_vacuum(0.4, cutoff=25), 0).state,
                  loss(make_fock(2, 4), 0, 0.7)]
        for i, s in enumerate(states):
            ds = sample_quadratures(s, SWEPT, 20000, seed=100 + i)
            est = MaxLikTomography(cutoff=8, max_iter=300).fit(ds)
            assert est.monotone_

    def test_max_iter_warning(self, vacuum_data):
        with pytest.warns(MaxLikConvergenceWarning):
            est = MaxLikTomography(cutoff=6, max_iter=2, tol=1e-15).fit(vacuum_data)
        assert not est.converged_ and est.n_iter_ == 2

    def test_sklearn_protocol(self, vacuum_data):
        est = MaxLikTomography(cutoff=4, eta=0.9)
        assert est.get_params()["eta"] == 0.9
        c = clone(est).set_params(cutoff=5)
        assert c.cutoff == 5 and est.cutoff == 4
        c.fit(vacuum_data.as_array())
        assert np.isfinite(c.score(vacuum_data))

    def test_validation(self, vacuum_data):
        with pytest.raises(SchemaError):
            MaxLikTomography(eta=0).fit(vacuum_data)


class TestRadon:
    def test_vacuum(self):
        ds = sample_quadratures(make_vacuum((4,)), PhaseSchedule("uniform"), 100000, seed=31)
        g = RadonTomography().fit(ds).grid_
        ref = wigner(make_vacuum((1,)), g.x, g.p)
        assert np.max(np.abs(g.values - ref.values)) <= 0.05

    def test_photon_negative_at_origin(self, photon_data):
        axis = np.linspace(-3, 3, 61)
        g = RadonTomography(x=axis, p=axis).fit(photon_data).grid_
        assert g.values[30, 30] < 0

    def test_low_cutoff_oversmooths(self, photon_data):
        axis = np.linspace(-3, 3, 31)
        sharp = RadonTomography(cutoff_frequency=5, x=axis, p=axis).fit(photon_data).transform()
        flat = RadonTomography(cutoff_frequency=0.05, x=axis, p=axis).fit(photon_data).transform()
        assert np.ptp(flat) < 0.02 * np.ptp(sharp)

    def test_agrees_with_maxlik_on_vacuum(self, vacuum_data):
        axis = np.linspace(-4, 4, 81)
        big = sample_quadratures(make_vacuum((4,)), PhaseSchedule("uniform"), 100000, seed=32)
        g = RadonTomography(x=axis, p=axis).fit(big).grid_
        ml = MaxLikTomography(cutoff=6).fit(vacuum_data).state_
        X, P = np.meshgrid(axis, axis, indexing="ij")
        assert np.max(np.abs(g.values - wigner_values(ml, X, P))) <= 0.05


class TestFock1:
    def test_model_inversion_ideal_photon(self):
        mu2, mu4 = fock1_model_moments(1.0, 2.0)
        assert (mu2, mu4) == pytest.approx((1.5, 3.75))
        s2, d, w = fock1_from_moments(1.5, 3.75)
        assert (s2, d) == pytest.approx((1, 2))
        assert w == pytest.approx(-1 / np.pi)

    def test_state_moments(self):
        # brute-force quadrature moments of the states themselves
        from cvfock.phase_space import directional_moment
        for state, (s2_ref, d_ref) in [(make_fock(1, 3), (1, 2)), (make_vacuum((3,)), (1, 0)),
                                        (loss(make_fock(1, 3), 0, 0.55), (1, 1.1))]:
            mu2, mu4 = directional_moment(state, 0.3, 2), directional_moment(state, 0.3, 4)
            s2, d, w = fock1_from_moments(mu2, mu4)
            assert s2 == pytest.approx(s2_ref, abs=1e-7)
            assert d == pytest.approx(d_ref, abs=1e-6)
            assert w == pytest.approx(float(wigner_values(state, 0, 0)), abs=1e-6)
        assert (1 - 1.1) / np.pi == pytest.approx(-0.0318, abs=1e-4)

    def test_mismatch(self):
        with pytest.raises(ModelMismatch):
            fock1_from_moments(0.5, 3.0)
        ds = sample_quadratures(make_fock(3, 4), PhaseSchedule("uniform"), 20000, seed=1)
        with pytest.raises(ModelMismatch):
            Fock1MomentEstimator().fit(ds)

    def test_estimator_and_error_bar(self):
        eta = 0.6
        ds = sample_quadratures(make_fock(1, 3), PhaseSchedule("uniform"), 10000, ImperfectionModel(eta), seed=40)
        est = Fock1MomentEstimator().fit(ds)
        assert abs(est.w00_ - (1 - 2 * eta) / np.pi) < 4 * est.w00_stderr_
        boot = bootstrap(ds.as_array(), lambda d: Fock1MomentEstimator().fit(d).w00_, 200, seed=3)
        assert boot.std() == pytest.approx(est.w00_stderr_, rel=0.3)

    def test_bootstrap_basics(self):
        X = np.column_stack([np.zeros(50), np.arange(50.0)])
        one = bootstrap(X, lambda d: d[:, 1].mean(), 1, seed=9)
        rng = np.random.default_rng(9)
        idx = rng.integers(0, 50, 50)
        assert one[0] == pytest.approx(X[idx, 1].mean())
        a = bootstrap(X, lambda d: d[:, 1].mean(), 20, seed=2)
        b = bootstrap(X, lambda d: d[:, 1].mean(), 20, seed=2)
        assert np.array_equal(a, b)

    def test_moment_covariance_and_propagation(self):
        mom = {0: 1, 2: 0.5, 4: 0.75, 6: 1.875, 8: 6.5625}
        cov = moment_covariance(mom, (2, 4), 100)
        assert cov[0, 0] == pytest.approx((0.75 - 0.25) / 100)
        assert propagate(lambda a, b: 2 * a + b, (1.0, 2.0), np.eye(2)) == pytest.approx(np.sqrt(5), rel=1e-6)

    @pytest.mark.slow
    def test_consistency_in_sample_size(self):
        eta = 0.7
        medians = []
        for n in (1000, 10000, 100000):
            errs = []
            for seed in range(11):
                ds = sample_quadratures(make_fock(1, 3), PhaseSchedule("uniform"), n, ImperfectionModel(eta),
                                        seed=1000 + seed)
                errs.append(abs(Fock1MomentEstimator().fit(ds).delta_ - 2 * eta))
            medians.append(np.median(errs))
        assert medians[0] > medians[1] > medians[2]


class TestQPT:
    def test_identity(self):
        pt = csqpt(lambda s: s, 3)
        d = 4
        ref = np.einsum("km,ln->klmn", np.eye(d), np.eye(d))
        assert np.max(np.abs(pt.data - ref)) <= 1e-6

    def test_loss_matches_bernoulli(self):
        from math import comb
        eta = 0.7
        pt = csqpt(lambda s: loss(s, 0, eta), 4)
        ref = np.zeros((5,) * 4)
        for m in range(5):
            for n in range(5):
                for k in range(min(m, n) + 1):
                    i, j = m - k, n - k
                    ref[i, j, m, n] = np.sqrt(comb(m, i) * comb(n, j) * eta ** (i + j) * (1 - eta) ** (2 * k))
        assert np.max(np.abs(pt.data - ref)) <= 1e-6
        diag = pt.diagnostics()
        assert diag["trace_deviation"] < 1e-6 and diag["choi_min_eigenvalue"] > -1e-6

    def test_subtraction_structure(self):
        pt = csqpt(lambda s: subtract_photon_ideal(s, 0), 3)
        exact = np.zeros((4,) * 4)
        for m in range(1, 4):
            for n in range(1, 4):
                exact[m - 1, n - 1, m, n] = np.sqrt(m * n)
        assert np.max(np.abs(pt.data - exact)) <= 1e-6

    def test_apply_and_serialization(self, tmp_path):
        pt = ProcessTensor.from_map(lambda s: loss(s, 0, 0.5), 3)
        out = pt.apply(make_fock(1, 3))
        assert np.allclose(np.real(np.diag(out.matrix)), [0.5, 0.5, 0, 0])
        pt.to_json(tmp_path / "pt.json")
        back = ProcessTensor.from_json(tmp_path / "pt.json")
        assert np.array_equal(back.data, pt.data)

    def test_ill_conditioned(self):
        with pytest.raises(IllConditioned):
            csqpt(lambda s: s, 3, radii=0.3 + 1e-6 * np.arange(12))

    def test_bad_grid(self):
        with pytest.raises(SchemaError):
            csqpt(lambda s: s, 3, n_phases=4)

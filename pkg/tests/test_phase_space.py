import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvfock.channels import displace, loss, phase_rotate
from cvfock.conditional import subtract_photon_ideal
from cvfock.core import tensor
from cvfock.phase_space import (WignerGrid, analytic_wigner, directional_moment,
                                displaced_photon_counts, marginal, marginal_from_wigner,
                                moment_witness, optimal_moment_witness, radial_moments_from_samples,
                                radial_moments_from_state, wigner, wigner_direct, wigner_from_counts,
                                wigner_point, wigner_values)
from cvfock.states import (make_cat, make_coherent, make_epr, make_fock, make_squeezed_vacuum,
                           make_thermal, make_vacuum)


def kitten(r=0.3):
    return subtract_photon_ideal(make_squeezed_vacuum(r, cutoff=30), 0).state


class TestWignerValues:
    def test_reference_points(self):
        assert wigner_values(make_vacuum((3,)), 0, 0) == pytest.approx(1 / np.pi)
        assert wigner_values(make_fock(1, 3), 0, 0) == pytest.approx(-1 / np.pi)
        lossy = loss(make_fock(1, 3), 0, 0.6)
        assert wigner_values(lossy, 0, 0) == pytest.approx((1 - 1.2) / np.pi)
        assert wigner_values(lossy, 0, 0) == pytest.approx(-0.0637, abs=1e-4)

    @pytest.mark.parametrize("state", [make_fock(2, 4), make_cat(0.9, 0.7, 15), make_thermal(0.4, 20)])
    def test_against_direct_integral(self, state):
        for x, p in [(0.0, 0.0), (0.7, -0.3), (-1.2, 0.9)]:
            assert wigner_values(state, x, p) == pytest.approx(wigner_direct(state, x, p), abs=1e-9)

    def test_cat_closed_form(self):
        x = np.linspace(-4, 4, 41)
        X, P = np.meshgrid(x, x, indexing="ij")
        for th in (0.0, np.pi, 0.8):
            num = wigner_values(make_cat(1.3, th, 40), X, P)
            assert np.allclose(num, analytic_wigner("cat", X, P, alpha=1.3, theta=th), atol=1e-10)

    def test_cat_fringe_sign_change(self):
        # interference term 2 e^{-x^2-p^2} cos(2 sqrt2 a p + theta) vanishes at p0
        a = 0.9
        p0 = np.pi / (4 * np.sqrt(2) * a)
        ps = np.array([p0 - 0.05, p0 + 0.05])
        full = analytic_wigner("cat", 0.0, ps, alpha=a, theta=np.pi)
        gauss = (np.exp(-(0 - np.sqrt(2) * a) ** 2 - ps ** 2) * 2) / (2 * np.pi * (1 - np.exp(-2 * a ** 2)))
        interference = full - gauss
        assert interference[0] * interference[1] < 0
        assert np.allclose(full, wigner_values(make_cat(a, np.pi, 30), 0.0, ps), atol=1e-12)

    def test_squeezed_and_fock1_models(self):
        x = np.linspace(-3, 3, 31)
        X, P = np.meshgrid(x, x, indexing="ij")
        r = 0.4
        assert np.allclose(wigner_values(make_squeezed_vacuum(r, cutoff=40), X, P),
                           analytic_wigner("squeezed", X, P, r=r), atol=1e-9)
        assert analytic_wigner("squeezed", 0, 0, r=r) == pytest.approx(1 / np.pi)
        assert np.allclose(analytic_wigner("fock1", X, P, sigma2=1, delta=2),
                           wigner_values(make_fock(1, 2), X, P), atol=1e-10)
        eta = 0.55
        assert np.allclose(analytic_wigner("fock1", X, P, sigma2=1, delta=2 * eta),
                           wigner_values(loss(make_fock(1, 2), 0, eta), X, P), atol=1e-10)

    def test_kitten_model(self):
        r = 0.3
        a, b = np.exp(-2 * r), np.exp(2 * r)
        x = np.linspace(-3, 3, 25)
        X, P = np.meshgrid(x, x, indexing="ij")
        ref = analytic_wigner("kitten", X, P, a=a, a_prime=a, b=b, b_prime=b)
        from cvfock.channels import single_mode_squeeze
        sq1 = single_mode_squeeze(make_fock(1, 60), 0, r)
        assert np.allclose(wigner_values(sq1, X, P), ref, atol=1e-9)

    def test_epr_two_mode(self):
        e = make_epr(0.3, 30)
        pts = [((0.2, -0.1), (0.3, 0.4)), ((0.0, 0.0), (0.0, 0.0)), ((1.0, 0.8), (-0.5, 0.6))]
        for xs, ps in pts:
            assert wigner_point(e, xs, ps) == pytest.approx(analytic_wigner("epr", xs, ps, r=0.3), abs=1e-9)

    def test_multimode_product(self):
        s = tensor(make_fock(1, 3), make_coherent(0.4, 12))
        val = wigner_point(s, (0.3, 0.1), (0.2, -0.4))
        ref = wigner_values(make_fock(1, 3), 0.3, 0.2) * wigner_values(make_coherent(0.4, 12), 0.1, -0.4)
        assert val == pytest.approx(ref, abs=1e-12)


class TestGrid:
    @pytest.mark.parametrize("state", [make_vacuum((1,)), make_fock(1, 2), make_cat(1.2, np.pi, 30),
                                       make_squeezed_vacuum(0.6, cutoff=40)])
    def test_normalization(self, state):
        N = state.cutoffs[0]
        ext = np.sqrt(2 * N) + 3
        g = wigner(state, np.linspace(-ext, ext, 161), np.linspace(-ext, ext, 161))
        assert g.integral() == pytest.approx(1, abs=1e-3)

    def test_negativity_metrics(self):
        m = wigner(make_vacuum((2,))).metrics()
        assert m["negative_volume"] == 0
        m = wigner(make_fock(1, 2)).metrics()
        assert m["min"] == pytest.approx(-1 / np.pi, abs=1e-12)
        assert m["negative_volume"] > 0
        m = wigner(loss(make_fock(1, 2), 0, 0.5)).metrics()
        assert m["negative_volume"] < 1e-12

    def test_hudson(self):
        for s in (make_squeezed_vacuum(0.5, cutoff=80), make_coherent(0.8, 20)):
            assert wigner(s).metrics()["negative_volume"] < 1e-12

    def test_csv_roundtrip(self, tmp_path):
        g = wigner(make_cat(0.5, 0, 12), np.linspace(-2, 2, 5), np.linspace(-1, 1, 3))
        g.to_csv(tmp_path / "w.csv")
        back = WignerGrid.from_csv(tmp_path / "w.csv")
        assert np.array_equal(back.values, g.values)
        assert back.x.tolist() == g.x.tolist()

    @settings(max_examples=15, deadline=None)
    @given(st.floats(0, 2 * np.pi))
    def test_rotation_covariance(self, th):
        s = kitten()
        x = np.linspace(-2, 2, 9)
        X, P = np.meshgrid(x, x, indexing="ij")
        rot = wigner_values(phase_rotate(s, 0, th), X, P)
        # W_rot(x, p) = W(R(-th)(x, p))
        Xb = np.cos(th) * X + np.sin(th) * P
        Pb = -np.sin(th) * X + np.cos(th) * P
        assert np.allclose(rot, wigner_values(s, Xb, Pb), atol=1e-10)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(-1, 1), st.floats(-1, 1))
    def test_displacement_shifts_peak(self, re, im):
        s = displace(make_vacuum((30,)), 0, complex(re, im))
        x = np.linspace(-2, 2, 9)
        X, P = np.meshgrid(x, x, indexing="ij")
        shifted = wigner_values(s, X + np.sqrt(2) * re, P + np.sqrt(2) * im)
        assert np.allclose(shifted, wigner_values(make_vacuum((1,)), X, P), atol=1e-9)


class TestMarginals:
    def test_vacuum_gaussian(self):
        x = np.linspace(-4, 4, 81)
        assert np.allclose(marginal(make_vacuum((2,)), 0.7, x), np.exp(-x ** 2) / np.sqrt(np.pi))

    def test_squeezed_variance(self):
        x = np.linspace(-6, 6, 2001)
        pr = marginal(make_squeezed_vacuum(0.5, cutoff=40), 0.0, x)
        assert np.trapezoid(pr, x) == pytest.approx(1, abs=1e-6)
        assert np.trapezoid(x ** 2 * pr, x) == pytest.approx(np.exp(-1) / 2, abs=1e-8)

    @pytest.mark.parametrize("state", [make_vacuum((2,)), make_fock(1, 3), kitten()])
    @pytest.mark.parametrize("theta", [0.0, np.pi / 4, np.pi / 2])
    def test_consistent_with_wigner(self, state, theta):
        g = wigner(state)
        x = np.linspace(-3, 3, 31)
        assert np.max(np.abs(marginal_from_wigner(g, theta, x) - marginal(state, theta, x))) <= 1e-3

    def test_single_photon_density(self):
        x = np.linspace(-4, 4, 41)
        assert np.allclose(marginal(make_fock(1, 2), 0.3, x), 2 * x ** 2 * np.exp(-x ** 2) / np.sqrt(np.pi))


class TestMoments:
    def test_radial_second_moment_identity(self):
        s = kitten()
        mom = radial_moments_from_state(s, 1)
        x2, p2 = directional_moment(s, 0, 2), directional_moment(s, np.pi / 2, 2)
        assert mom[1] == pytest.approx(x2 + p2, abs=1e-9)

    def test_fock_radial_moments(self):
        # W of |1>: (2u - 1) e^{-u} / pi with u = x^2 + p^2 -> <u> = 3, <u^2> = 10
        mom = radial_moments_from_state(make_fock(1, 3), 2)
        assert np.allclose(mom, [1, 3, 10], atol=1e-9)
        assert np.allclose(radial_moments_from_state(make_vacuum((3,)), 2), [1, 1, 2], atol=1e-9)

    def test_witness_values(self):
        c = [1, -1]
        assert moment_witness(radial_moments_from_state(make_vacuum((3,)), 2), c) > 0
        # (1 - R^2)^2 on |1>: 1 - 6 + 10 = 5
        assert moment_witness(radial_moments_from_state(make_fock(1, 3), 2), c) == pytest.approx(5, abs=1e-8)

    def test_optimal_witness_detects_photon(self):
        # degree 1 cannot see the photon: its moment matrix [[1, 3], [3, 10]] is positive
        val, _ = optimal_moment_witness(radial_moments_from_state(make_fock(1, 3), 2), 1)
        assert val > 0
        val, _ = optimal_moment_witness(radial_moments_from_state(make_fock(1, 5), 4), 2)
        assert val < 0
        val, _ = optimal_moment_witness(radial_moments_from_state(make_thermal(0.5, 30), 2), 1)
        assert val > 0

    def test_radial_from_samples(self):
        from cvfock.homodyne import PhaseSchedule, sample_quadratures
        phases = tuple(m * np.pi / 4 for m in range(4))
        ds = sample_quadratures(make_fock(1, 3), PhaseSchedule("swept", phases=phases), 200000, seed=5)
        mom = radial_moments_from_samples(ds.theta, ds.x, 2)
        assert mom[1] == pytest.approx(3, rel=0.02)
        assert mom[2] == pytest.approx(10, rel=0.05)


class TestCounting:
    def test_parity_values(self):
        assert wigner_from_counts(displaced_photon_counts(make_vacuum((4,)), 0), 1) == pytest.approx(2 / np.pi)
        assert wigner_from_counts(displaced_photon_counts(make_fock(1, 4), 0), 1) == pytest.approx(-2 / np.pi)

    def test_half_lossy_photon(self):
        lossy = loss(make_fock(1, 4), 0, 0.5)
        assert wigner_from_counts(displaced_photon_counts(lossy, 0), 1) == pytest.approx(0, abs=1e-14)
        # loss inside the counting model is corrected by the series
        counts = displaced_photon_counts(make_fock(1, 4), 0, eta=0.5)
        assert wigner_from_counts(counts, 0.5) == pytest.approx(-2 / np.pi, abs=1e-12)

    @pytest.mark.parametrize("beta", [0.3, 0.5 - 0.2j, -0.4j])
    def test_xp_conversion(self, beta):
        s = make_cat(0.8, np.pi, 20)
        w_alpha = wigner_from_counts(displaced_photon_counts(s, beta, out_cutoff=40), 1)
        w_xp = wigner_values(s, np.sqrt(2) * beta.real if isinstance(beta, complex) else np.sqrt(2) * beta,
                             np.sqrt(2) * complex(beta).imag)
        assert w_alpha / 2 == pytest.approx(float(w_xp), abs=1e-8)

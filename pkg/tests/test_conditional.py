import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvfock.channels import beam_splitter, single_mode_squeeze
from cvfock.conditional import (DetectorModel, add_photon_ideal, add_photon_physical,
                                apply_operator, delocalized_add, delocalized_subtract,
                                delocalized_subtract_physical, homodyne_project, operator_superpose,
                                project_fock, project_state, subtract_photon_ideal,
                                subtract_photon_physical)
from cvfock.core import annihilation, creation, partial_trace, tensor
from cvfock.errors import ImprobableEvent, SchemaError, ZeroWeightError
from cvfock.metrics import fano_factor, fidelity, log_negativity, mean_photon
from cvfock.states import (make_cat, make_coherent, make_epr, make_fock, make_squeezed_vacuum,
                           make_superposition, make_thermal, make_vacuum)
from cvfock.wavefunctions import fock_wavefunctions

from conftest import ladder


class TestProjectFock:
    def test_epr_herald(self):
        r = 0.3
        out = project_fock(make_epr(r, 30), 1, 1)
        assert fidelity(out.state, make_fock(1, 30)) == pytest.approx(1, abs=1e-12)
        assert out.probability == pytest.approx(np.tanh(r) ** 2 / np.cosh(r) ** 2, abs=1e-10)

    def test_onoff_dark_count_on_vacuum(self):
        det = DetectorModel("onoff", efficiency=0.7, dark_count=0.03)
        s = tensor(make_coherent(0.5, 10), make_vacuum((3,)))
        assert project_fock(s, 1, 1, det).probability == pytest.approx(0.03, abs=1e-12)

    def test_zero_mode_purity_returns_unconditioned(self):
        det = DetectorModel("pnr", mode_purity=0.0)
        e = make_epr(0.4, 30)
        out = project_fock(e, 1, 1, det)
        assert np.allclose(out.state.matrix, partial_trace(e, [0]).matrix, atol=1e-12)

    def test_inefficient_pnr_matches_loss_then_project(self):
        # photon statistics under efficiency eta follow a binomial law
        e = make_epr(0.5, 35)
        eta = 0.6
        out = project_fock(e, 1, 1, DetectorModel("pnr", efficiency=eta))
        lam = np.tanh(0.5)
        n = np.arange(36)
        w = (1 - lam ** 2) * lam ** (2 * n) * n * eta * (1 - eta) ** np.clip(n - 1, 0, None)
        assert out.probability == pytest.approx(w.sum(), rel=1e-8)
        assert np.allclose(np.real(np.diag(out.state.matrix)), w / w.sum(), atol=1e-10)

    def test_improbable_event(self):
        with pytest.raises(ImprobableEvent):
            project_fock(tensor(make_fock(0, 2), make_fock(0, 2)), 1, 2)

    def test_bad_outcome(self):
        with pytest.raises(SchemaError):
            project_fock(make_epr(0.2, 5), 1, 2, DetectorModel("onoff"))

    def test_project_state_matches_project_fock(self):
        e = make_epr(0.35, 20)
        ket = np.zeros(21)
        ket[2] = 1
        a, b = project_state(e, [1], ket), project_fock(e, 1, 2)
        assert a.probability == pytest.approx(b.probability)
        assert fidelity(a.state, b.state) == pytest.approx(1)


class TestIdealOperators:
    def test_coherent_eigenstate(self):
        c = make_coherent(0.8 - 0.2j, 30)
        out = subtract_photon_ideal(c, 0)
        assert fidelity(out.state, c) == pytest.approx(1, abs=1e-10)
        assert out.kind == "weight"
        assert out.probability == pytest.approx(abs(0.8 - 0.2j) ** 2, abs=1e-8)

    def test_thermal_subtraction_doubles_mean(self):
        th = make_thermal(1.0, 150)
        out = subtract_photon_ideal(th, 0).state
        assert mean_photon(out) == pytest.approx(1.0 - 1 + fano_factor(th), abs=1e-6)
        assert mean_photon(out) == pytest.approx(2.0, abs=1e-6)

    @pytest.mark.parametrize("r", [0.1, 0.3, 0.5])
    def test_squeezed_single_photon(self, r):
        out = subtract_photon_ideal(make_squeezed_vacuum(r, cutoff=40), 0).state
        ref = single_mode_squeeze(make_fock(1, 40), 0, r)
        assert fidelity(out, ref) >= 1 - 1e-10

    def test_vacuum_subtraction_fails(self):
        with pytest.raises(ZeroWeightError):
            subtract_photon_ideal(make_vacuum((3,)), 0)

    def test_addition(self):
        assert fidelity(add_photon_ideal(make_vacuum((2,)), 0).state, make_fock(1, 2)) == pytest.approx(1)
        c = add_photon_ideal(make_coherent(0.7, 30), 0, out_cutoff=31).state
        assert mean_photon(c) == pytest.approx(0.49 + 2 - 1 / (1 + 0.49), abs=1e-8)
        th = add_photon_ideal(make_thermal(0.8, 60), 0, out_cutoff=61).state
        assert abs(th.matrix[0, 0]) < 1e-15

    def test_coherent_addition_independent_oracle(self):
        # n' = <a a^dag n a a^dag> / <a a^dag> for a coherent state
        out = add_photon_ideal(make_coherent(0.7, 40), 0, out_cutoff=41).state
        A = ladder(41)
        v = np.zeros(42, complex)
        v[:41] = make_coherent(0.7, 40).vector
        w = A.conj().T @ v
        n_ref = np.real(np.vdot(w, np.diag(np.arange(42)) @ w) / np.vdot(w, w))
        assert mean_photon(out) == pytest.approx(n_ref, abs=1e-10)

    def test_superpose_identity_and_catalysis_form(self):
        s = make_cat(0.6, 0.2, 10)
        assert fidelity(operator_superpose(s, 0, "a", 0, 1).state, s) == pytest.approx(1)
        R, alpha = 0.25, 0.05
        out = operator_superpose(make_fock(1, 3), 0, "a", np.sqrt(R), alpha).state
        ref = make_superposition([1, alpha / np.sqrt(R)])
        assert fidelity(out, ref) == pytest.approx(1, abs=1e-12)

    def test_superpose_on_squeezed_vacuum(self):
        # (x a + y) S|0> = -sinh(r) x S|1> + y S|0> when S squeezes x
        r, x, y = 0.4, 0.7, 0.3 + 0.2j
        out = operator_superpose(make_squeezed_vacuum(r, cutoff=40), 0, "a", x, y).state
        s0 = make_squeezed_vacuum(r, cutoff=40).vector
        s1 = single_mode_squeeze(make_fock(1, 40), 0, r).vector
        ref = -x * np.sinh(r) * s1 + y * s0
        assert abs(np.vdot(ref / np.linalg.norm(ref), out.vector)) ** 2 == pytest.approx(1, abs=1e-10)

    def test_apply_operator_weight(self):
        s = make_coherent(0.4, 12)
        out = apply_operator(s, 2 * np.eye(13), [0])
        assert out.probability == pytest.approx(4)


class TestPhysical:
    def test_small_tap_approaches_ideal(self):
        sq = make_squeezed_vacuum(0.3, cutoff=25)
        ideal = subtract_photon_ideal(sq, 0).state
        inf = []
        for R in (0.2, 0.1, 0.05):
            out = subtract_photon_physical(sq, 0, R).state
            inf.append(1 - fidelity(out, ideal))
        assert inf[0] > inf[1] > inf[2]
        assert max(i / R for i, R in zip(inf, (0.2, 0.1, 0.05))) < 1.0

    def test_full_tap_leaves_vacuum(self):
        out = subtract_photon_physical(make_coherent(0.6, 15), 0, 1 - 1e-12).state
        assert fidelity(out, make_vacuum((15,))) == pytest.approx(1, abs=1e-8)

    def test_realistic_kitten(self):
        det = DetectorModel("onoff", efficiency=0.8)
        sq = make_squeezed_vacuum(0.43, cutoff=30)
        out = subtract_photon_physical(sq, 0, 0.1, det)
        ideal = subtract_photon_ideal(sq, 0).state
        f = fidelity(out.state, ideal)
        assert 0.8 < f < 1
        assert 0 < out.probability < 0.1

    def test_physical_addition(self):
        g = 0.05
        out = add_photon_physical(make_vacuum((4,)), 0, g)
        assert fidelity(out.state, make_fock(1, 4)) == pytest.approx(1, abs=1e-12)
        assert out.probability == pytest.approx(np.sinh(g) ** 2 / np.cosh(g) ** 4, rel=1e-9)
        ideal = add_photon_ideal(make_coherent(0.5, 20), 0, out_cutoff=21).state
        phys = add_photon_physical(make_coherent(0.5, 20), 0, 0.01, out_cutoff=21).state
        assert fidelity(phys, ideal) > 0.9999
        with pytest.raises(ImprobableEvent):
            add_photon_physical(make_vacuum((4,)), 0, 0.0)


class TestDelocalized:
    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.05, 1), st.floats(0.05, 1), st.floats(0, 2 * np.pi))
    def test_quantum_vampire(self, r, t, phi):
        psi = make_cat(0.7, 0.4, 15)
        out = delocalized_subtract(tensor(psi, make_vacuum((4,))), 0, 1, r, t, phi).state
        ref = tensor(subtract_photon_ideal(psi, 0).state, make_vacuum((4,)))
        assert fidelity(out, ref) == pytest.approx(1, abs=1e-10)

    def test_entangled_cats(self):
        a = 0.8
        cats = tensor(make_cat(a, 0, 18), make_cat(a, 0, 18))
        out = delocalized_subtract(cats, 0, 1, 1 / np.sqrt(2), 1 / np.sqrt(2)).state
        odd, even = make_cat(a, np.pi, 18).vector, make_cat(a, 0, 18).vector
        ref = np.kron(odd, even) + np.kron(even, odd)
        ref /= np.linalg.norm(ref)
        assert abs(np.vdot(ref, out.vector)) ** 2 == pytest.approx(1, abs=1e-10)

    def test_epr_gives_one_ebit(self):
        out = delocalized_subtract(make_epr(0.001, 3), 0, 1, 1 / np.sqrt(2), 1 / np.sqrt(2)).state
        bell = np.zeros((4, 4))
        bell[0, 1] = bell[1, 0] = 1 / np.sqrt(2)
        assert abs(np.vdot(bell, out.data)) ** 2 == pytest.approx(1, abs=1e-5)
        assert log_negativity(out, [0]) == pytest.approx(1, abs=1e-3)

    def test_delocalized_add_vampire_analogue(self):
        out = delocalized_add(tensor(make_vacuum((2,)), make_vacuum((2,))), 0, 1, 0.6, 0.8).state
        assert abs(out.data[1, 0]) ** 2 == pytest.approx(0.36)
        assert abs(out.data[0, 1]) ** 2 == pytest.approx(0.64)

    def test_physical_delocalized_first_order(self):
        e = make_epr(0.05, 6)
        ideal = delocalized_subtract(e, 0, 1, 1 / np.sqrt(2), 1 / np.sqrt(2)).state
        phys = delocalized_subtract_physical(e, 0, 1, 0.01).state
        assert fidelity(phys, ideal) > 0.999


class TestHomodyne:
    def test_vacuum_density(self):
        s = tensor(make_coherent(0.3, 8), make_vacuum((5,)))
        for th in (0.0, 1.0, 2.5):
            out = homodyne_project(s, 1, th, 0.0, 0.0)
            assert out.kind == "density"
            assert out.probability == pytest.approx(np.pi ** -0.5, abs=1e-12)

    def test_two_photon_split(self):
        st_ = beam_splitter(tensor(make_fock(2, 2), make_fock(0, 2)), 0, 1, np.pi / 4)
        out = homodyne_project(st_, 1, np.pi / 2, 0.0, 0.0).state
        x = np.linspace(-6, 6, 2001)
        psi = fock_wavefunctions(2, x).T @ out.vector
        ref = x ** 2 * np.exp(-x ** 2 / 2)
        ref /= np.sqrt(np.trapezoid(ref ** 2, x))
        psi *= np.sign(psi[1000 + 300])
        assert np.allclose(psi, ref, atol=1e-8)

    def test_hom_pair_to_superposition(self):
        st_ = beam_splitter(tensor(make_fock(1, 2), make_fock(1, 2)), 0, 1, np.pi / 4)
        out = homodyne_project(st_, 1, 0.0, 0.0, 0.0).state
        assert fidelity(out, make_superposition([1, 0, np.sqrt(2)])) == pytest.approx(1, abs=1e-12)

    def test_window_probability_is_marginal_integral(self):
        from cvfock.phase_space import marginal
        s = tensor(make_cat(0.9, np.pi, 15), make_squeezed_vacuum(0.3, cutoff=20))
        out = homodyne_project(s, 1, 0.4, 0.2, 0.1)
        x = np.linspace(0.1, 0.3, 2001)
        ref = np.trapezoid(marginal(partial_trace(s, [1]), 0.4, x), x)
        assert out.probability == pytest.approx(ref, rel=1e-8)
        assert out.kind == "probability"

    def test_zero_weight(self):
        with pytest.raises(ImprobableEvent):
            homodyne_project(tensor(make_vacuum((2,)), make_fock(1, 2)), 1, 0.0, 0.0, 0.0)


class TestOperatorIdentities:
    """Commutator and anticommutator actions on thermal states."""

    @pytest.mark.parametrize("nbar", [0.2, 0.7, 1.5])
    def test_commutator_is_identity(self, nbar):
        N = 60
        th = make_thermal(nbar, N)
        a, ad = annihilation(N + 1), creation(N + 1)
        comm = (a @ ad - ad @ a)[: N + 1, : N + 1]
        out = apply_operator(th, comm, [0]).state
        assert np.allclose(out.matrix, th.matrix, atol=1e-9)

    @pytest.mark.parametrize("nbar", [0.2, 0.7, 1.5])
    def test_anticommutator_weighting(self, nbar):
        N = 60
        th = make_thermal(nbar, N)
        a, ad = annihilation(N + 1), creation(N + 1)
        anti = (a @ ad + ad @ a)[: N + 1, : N + 1]
        out = apply_operator(th, anti, [0])
        n = np.arange(N + 1)
        p = np.real(np.diag(th.matrix))
        ref = (2 * n + 1) ** 2 * p
        assert np.allclose(np.real(np.diag(out.state.matrix)), ref / ref.sum(), atol=1e-10)
        assert out.probability == pytest.approx(ref.sum(), rel=1e-9)

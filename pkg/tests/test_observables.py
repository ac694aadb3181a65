import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from djcm import analytic, hilbert
from djcm import observables as obs
from djcm.errors import DegenerateMean, NonPositiveMatrix, WindowOutOfRange
from djcm.hilbert import FockSpace
from djcm.model import InitialCondition, default_space
from djcm.observables import ObservableSeries

from conftest import BETA, random_state

S80 = FockSpace(80)


def ket(atom, field):
    return hilbert.product_state(atom, field)


def bell(s):
    return (ket(hilbert.EXCITED, hilbert.fock_state(0, s)) + ket(hilbert.GROUND, hilbert.fock_state(1, s))) / math.sqrt(2)


@pytest.fixture(scope="module")
def ref_run(driven):
    t = np.linspace(0.0, 50.0, 2001)
    s = default_space(driven, BETA)
    return t, analytic.solve_state(t, driven, InitialCondition(BETA), s)


class TestInversion:
    @pytest.mark.parametrize("atom, w", [(hilbert.EXCITED, 1.0), (hilbert.GROUND, -1.0)])
    def test_pure_atom(self, atom, w):
        assert obs.inversion(ket(atom, hilbert.coherent_state(1.3, S80))) == pytest.approx(w, abs=1e-14)

    def test_bell(self):
        assert obs.inversion(bell(FockSpace(4))) == pytest.approx(0.0, abs=1e-15)

    def test_stack(self, rng):
        states = np.array([random_state(rng, 10) for _ in range(4)])
        assert obs.inversion(states).shape == (4,)


class TestPhotonMoments:
    def test_coherent(self):
        psi = ket(hilbert.EXCITED, hilbert.coherent_state(BETA, S80))
        assert obs.mean_photon(psi) == pytest.approx(8.0, abs=1e-9)
        var = obs.photon_second_moment(psi) - obs.mean_photon(psi) ** 2
        assert var == pytest.approx(obs.mean_photon(psi), abs=1e-9)

    def test_fock(self):
        psi = ket(hilbert.EXCITED, hilbert.fock_state(3, FockSpace(6)))
        assert obs.mean_photon(psi) == 3.0
        assert obs.photon_second_moment(psi) == 9.0

    def test_distribution_sums_to_one(self, rng):
        assert obs.photon_distribution(random_state(rng, 30)).sum() == pytest.approx(1.0)

    @given(st.integers(0, 2**31))
    @settings(max_examples=30)
    def test_variance_nonnegative(self, seed):
        psi = random_state(np.random.default_rng(seed), 24)
        assert obs.photon_second_moment(psi) - obs.mean_photon(psi) ** 2 >= -1e-12


class TestMandelQ:
    def test_coherent(self):
        assert abs(obs.mandel_q(ket(hilbert.EXCITED, hilbert.coherent_state(BETA, S80)))) <= 1e-9

    def test_fock(self):
        assert obs.mandel_q(ket(hilbert.GROUND, hilbert.fock_state(3, FockSpace(6)))) == -1.0

    def test_vacuum_rejected(self):
        with pytest.raises(DegenerateMean):
            obs.mandel_q(ket(hilbert.EXCITED, hilbert.fock_state(0, FockSpace(4))))

    def test_driven_run_changes_sign(self, ref_run):
        q = obs.mandel_q(ref_run[1])
        assert q.min() < 0 < q.max()
        assert np.all(q >= -1)


class TestReducedStates:
    def test_match_partial_traces(self, rng):
        psi = random_state(rng, 16)
        rho = hilbert.projector(psi)
        np.testing.assert_allclose(obs.reduced_atom(psi), hilbert.partial_trace_field(rho), atol=1e-14)
        np.testing.assert_allclose(obs.reduced_field(psi), hilbert.partial_trace_atom(rho), atol=1e-14)

    def test_product_and_bell(self):
        s = FockSpace(5)
        np.testing.assert_allclose(obs.reduced_atom(ket(hilbert.EXCITED, hilbert.fock_state(2, s))), np.diag([1, 0]))
        np.testing.assert_allclose(obs.reduced_atom(bell(s)), np.eye(2) / 2, atol=1e-15)
        assert np.trace(obs.reduced_field(bell(s))).real == pytest.approx(1.0)


class TestEntropy:
    def test_pure(self, rng):
        assert abs(obs.entropy(hilbert.projector(random_state(rng, 6)))) <= 1e-10

    def test_maximally_mixed_qubit(self):
        assert obs.entropy(np.eye(2) / 2) == pytest.approx(math.log(2))

    def test_rank_deficient_is_finite(self):
        assert obs.entropy(np.diag([1.0, 0.0, 0.0])) == 0.0

    def test_negative_eigenvalue(self):
        with pytest.raises(NonPositiveMatrix):
            obs.entropy(np.diag([1.1, -0.1]))

    @given(st.integers(0, 2**31))
    @settings(max_examples=30)
    def test_araki_lieb_and_bounds(self, seed):
        psi = random_state(np.random.default_rng(seed), 2 * 9)
        s_a, s_f = obs.atomic_entropy(psi), obs.field_entropy(psi)
        assert abs(s_a - s_f) <= 1e-8
        assert -1e-12 <= s_a <= math.log(2) + 1e-12

    def test_stack(self, ref_run):
        s = obs.atomic_entropy(ref_run[1][:10])
        assert s.shape == (10,) and s[0] == pytest.approx(0.0, abs=1e-10)


class TestEntropyMinimum:
    def test_refines_parabola(self):
        t = np.linspace(0, 10, 11)
        series = ObservableSeries("s", t, (t - 4.3) ** 2)
        t_min, s_min = obs.entropy_minimum(series, (1.0, 9.0))
        assert t_min == pytest.approx(4.3, abs=1e-12)
        assert s_min == pytest.approx(0.0, abs=1e-12)

    def test_constant_series_tie_break(self):
        t = np.linspace(0, 10, 101)
        t_min, _ = obs.entropy_minimum(ObservableSeries("s", t, np.ones_like(t)), (2.0, 5.0))
        assert t_min == pytest.approx(2.0)

    def test_window_out_of_range(self):
        t = np.linspace(0, 10, 11)
        with pytest.raises(WindowOutOfRange):
            obs.entropy_minimum(ObservableSeries("s", t, t), (5.0, 12.0))

    def test_series_validation(self):
        with pytest.raises(ValueError):
            ObservableSeries("s", np.arange(3.0), np.array([0.0, np.nan, 1.0]))

    def test_standard_minimum(self, standard):
        t = np.linspace(0.0, 50.0, 2001)
        psi = analytic.solve_state(t, standard, InitialCondition(BETA), default_space(standard, BETA))
        t_min, _ = obs.entropy_minimum(ObservableSeries("S", t, obs.atomic_entropy(psi)), (5.0, 15.0))
        assert t_min == pytest.approx(9.83, abs=0.3)

    @pytest.mark.parametrize("which", ["driven", "standard"])
    def test_minimum_inside_collapse(self, which, request):
        p = request.getfixturevalue(which)
        t = np.linspace(0.0, 50.0, 2001)
        psi = analytic.solve_state(t, p, InitialCondition(BETA), default_space(p, BETA))
        lo, hi = obs.collapse_window(t, obs.inversion(psi))
        t_min, _ = obs.entropy_minimum(ObservableSeries("S", t, obs.atomic_entropy(psi)), (5.0, 15.0))
        assert lo < t_min < hi


class TestWindowedStatistics:
    def test_variance_of_constant(self):
        t = np.linspace(0, 10, 101)
        _, v = obs.windowed_variance(t, np.full_like(t, 3.0), 2.0)
        assert np.max(v) <= 1e-15

    def test_variance_matches_numpy(self, rng):
        t = np.arange(0, 20, 0.1)
        x = rng.normal(size=t.size)
        ends, v = obs.windowed_variance(t, x, 5.0)
        w = 51
        assert ends[0] == pytest.approx(t[w - 1])
        np.testing.assert_allclose(v[:5], [np.var(x[k:k + w]) for k in range(5)], atol=1e-12)

    def test_nonuniform_grid_rejected(self):
        with pytest.raises(ValueError):
            obs.windowed_variance(np.array([0, 1, 3.0]), np.zeros(3), 1.0)

    def test_collapse_window_none_without_collapse(self):
        t = np.linspace(0, 20, 401)
        assert obs.collapse_window(t, np.cos(t)) is None
        assert obs.first_revival_time(t, np.cos(t)) is None

    def test_invariant_expectation(self, driven, ref_run):
        t, psi = ref_run
        vals = obs.evaluate("invariant", psi[:50], t[:50], driven)
        assert np.max(np.abs(vals - vals[0])) <= 1e-9

    def test_unknown_name(self, driven):
        with pytest.raises(KeyError):
            obs.evaluate("purity", np.zeros((1, 4)), np.zeros(1), driven)

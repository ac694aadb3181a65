import math

import numpy as np
import pytest

from djcm import analytic, hilbert, model, oracle
from djcm import observables as obs
from djcm.errors import ConvergenceError, MissingStates
from djcm.hilbert import FockSpace
from djcm.model import DrivenParams, InitialCondition, default_space, params_from_free, standard_params
from djcm.oracle import IntegratorConfig, Trajectory

from conftest import BETA

T50 = np.linspace(0.0, 50.0, 2000)


@pytest.fixture(scope="module")
def ref_traj(driven, space):
    return oracle.evolve_frame_exact(InitialCondition(BETA).state(space), T50, driven, space)


class TestTrajectory:
    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 2.0, 1.0]))

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            Trajectory(np.arange(3.0), observables={"w": np.zeros(2)})

    def test_config_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            IntegratorConfig(dt=0.0)


class TestFrameExact:
    def test_initial(self, ref_traj, driven, space):
        np.testing.assert_allclose(ref_traj.states[0], InitialCondition(BETA).state(space), atol=1e-13)

    def test_norm(self, ref_traj):
        assert ref_traj.meta["norm_drift"] <= 1e-10
        assert np.max(np.abs(np.linalg.norm(ref_traj.states, axis=1) - 1)) <= 1e-9

    def test_invariant(self, ref_traj, driven):
        assert oracle.invariant_drift(ref_traj, driven) <= 1e-9

    def test_matches_analytic(self, ref_traj, driven, space):
        psi = analytic.solve_state(T50, driven, InitialCondition(BETA), space)
        assert np.max(1 - hilbert.fidelity(psi, ref_traj.states)) <= 1e-8

    def test_streamed_observables(self, driven, space, ref_traj):
        lean = oracle.evolve_frame_exact(InitialCondition(BETA).state(space), T50, driven, space,
                                         observables=("inversion", "nphoton"), store_states=False)
        assert lean.states is None
        np.testing.assert_allclose(lean.observables["inversion"], obs.inversion(ref_traj.states), atol=1e-13)

    def test_missing_states(self, driven, space):
        lean = oracle.evolve_frame_exact(InitialCondition(BETA).state(space), T50[:5], driven, space,
                                         store_states=False)
        with pytest.raises(MissingStates):
            oracle.invariant_drift(lean, driven)

    def test_standard_excitation_number(self, standard, space):
        traj = oracle.evolve_frame_exact(InitialCondition(BETA).state(space), T50, standard, space)
        assert oracle.invariant_drift(traj, standard) <= 1e-10

    def test_perturbed_constraint_drifts(self, driven, space):
        off = DrivenParams(driven.omega_c, driven.omega_eg, driven.omega_0, driven.g, driven.zeta,
                           1.1 * driven.xi, mode="unconstrained")
        traj = oracle.evolve_frame_exact(InitialCondition(BETA).state(space), T50, off, space)
        assert oracle.invariant_drift(traj, driven) > 1e-3

    def test_jcm_energy_conserved(self):
        p = standard_params(0.4, 0.9, 1.0)
        s = default_space(p, BETA)
        h = model.hamiltonian_jcm(p, s)
        traj = oracle.evolve_frame_exact(InitialCondition(BETA).state(s), T50, p, s)
        energy = np.einsum("ti,ij,tj->t", traj.states.conj(), h, traj.states).real
        assert np.max(np.abs(energy - energy[0])) <= 1e-9

    def test_doubling_dim_is_stable(self, driven, space):
        t = np.linspace(0, 50, 300)
        psi0 = InitialCondition(BETA)
        base = oracle.evolve_frame_exact(psi0.state(space), t, driven, space)
        wide_space = FockSpace(2 * space.dim)
        wide = oracle.evolve_frame_exact(psi0.state(wide_space), t, driven, wide_space)
        for name in ("inversion", "nphoton", "mandelq", "entropy"):
            a = obs.evaluate(name, base.states, t, driven)
            b = obs.evaluate(name, wide.states, t, driven)
            assert np.max(np.abs(a - b)) <= 1e-8, name


def dispersive_set():
    return params_from_free(0.4, 20.4, 1.0, 0.7, 0.2)


class TestRK4:
    def test_vacuum_rabi(self):
        p = standard_params(1.0, 1.0, 1.0)
        s = FockSpace(5)
        e0 = InitialCondition(0.0).state(s)
        traj = oracle.evolve_rk4(e0, [0.0, math.pi / 4], p, s)
        assert abs(abs(traj.states[-1, s.dim + 1]) ** 2 - math.sin(math.pi / 4) ** 2) <= 1e-7

    @pytest.mark.parametrize(
        "params, beta",
        [
            (params_from_free(0.4, 0.9, 1.0, 0.7, 0.2), BETA),
            (standard_params(0.4, 0.9, 1.0), BETA),
            (dispersive_set(), 1.0),
        ],
        ids=["driven", "standard", "dispersive"],
    )
    def test_matches_frame_exact(self, params, beta):
        s = default_space(params, beta)
        atom = "superposition" if params.delta > 10 else "excited"
        psi0 = InitialCondition(beta, atom).state(s)
        t = np.linspace(0.0, 10.0, 21)
        rk = oracle.evolve_rk4(psi0, t, params, s)
        ref = oracle.evolve_frame_exact(psi0, t, params, s)
        assert np.max(1 - hilbert.fidelity(rk.states, ref.states)) <= 1e-7

    def test_norm_drift_over_many_steps(self, driven):
        s = FockSpace(30)
        psi0 = InitialCondition(1.5).state(s)
        # 10^4 steps at the accepted step
        traj = oracle.evolve_rk4(psi0, [0.0, 5.0], driven, s)
        assert 5.0 / traj.meta["dt"] >= 1e4
        assert traj.meta["norm_drift"] <= 1e-8

    def test_reports_step_and_change(self, driven):
        s = FockSpace(20)
        traj = oracle.evolve_rk4(InitialCondition(1.0).state(s), [0.0, 1.0], driven, s,
                                 observables=("inversion",), store_states=False)
        assert traj.states is None
        assert traj.meta["endpoint_change"] <= 1e-8
        assert traj.observables["inversion"].shape == (2,)

    def test_convergence_gate(self, driven):
        s = FockSpace(20)
        with pytest.raises(ConvergenceError):
            oracle.evolve_rk4(InitialCondition(1.0).state(s), [0.0, 20.0], driven, s, IntegratorConfig(dt=0.5))

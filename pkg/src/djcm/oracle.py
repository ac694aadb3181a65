"""Brute-force propagation used to validate the closed-form solution.

Two engines, independent of the transformation chain in :mod:`djcm.analytic`:

* ``evolve_frame_exact`` diagonalises the time-independent rotating-frame
  Hamiltonian once and maps back with ``T^dag(t)``.
* ``evolve_rk4`` integrates the raw time-dependent lab-frame Hamiltonian with
  fixed-step RK4, gated by a step-halving convergence test.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import observables as obs
from .errors import ConvergenceError, MissingStates
from .hilbert import FockSpace, HermitianPropagator
from .model import DrivenParams, drive_components, frame_phases, hamiltonian_rotating

log = logging.getLogger(__name__)

NORM_TOL = 1e-9
_CHUNK = 4096


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray | None = None
    observables: dict[str, np.ndarray] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or (self.times.size > 1 and np.any(np.diff(self.times) <= 0)):
            raise ValueError("trajectory times must be a strictly increasing 1-D grid")
        if self.states is not None and len(self.states) != self.times.size:
            raise ValueError("states and times differ in length")
        for name, values in self.observables.items():
            if len(values) != self.times.size:
                raise ValueError(f"observable {name!r} and times differ in length")


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    method: Literal["frame-exact", "rk4"] = "rk4"
    convergence_tol: float = 1e-8

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")


def _as_times(times) -> np.ndarray:
    return np.atleast_1d(np.asarray(times, dtype=float))


def evolve_frame_exact(
    init: np.ndarray,
    times,
    p: DrivenParams,
    space: FockSpace,
    observables: Sequence[str] = (),
    store_states: bool = True,
) -> Trajectory:
    """``psi(t) = T^dag(t) exp(-i H_T t) psi(0)`` with one shared eigendecomposition."""
    times = _as_times(times)
    init = np.asarray(init, dtype=complex)
    prop = HermitianPropagator(hamiltonian_rotating(p, space))
    stored, series = [], {name: [] for name in observables}
    drift = 0.0
    for lo in range(0, times.size, _CHUNK):
        tt = times[lo:lo + _CHUNK]
        psi = prop.evolve(init, tt) * np.conj(frame_phases(p.omega_0, tt, space))
        drift = max(drift, float(np.max(np.abs(np.linalg.norm(psi, axis=1) - np.linalg.norm(init)))))
        for name in observables:
            series[name].append(obs.evaluate(name, psi, tt, p))
        if store_states:
            stored.append(psi)
    return Trajectory(
        times,
        np.concatenate(stored) if store_states else None,
        {k: np.concatenate(v) for k, v in series.items()},
        {"engine": "frame", "norm_drift": drift},
    )


def _rk4_run(init, times, p, space, dt, keep: bool):
    """March over ``times`` with substeps no longer than ``dt``."""
    h0, drive = drive_components(p, space)
    drive_h = drive.conj().T
    w0 = p.omega_0

    def rhs(t, psi):
        ph = complex(math.cos(w0 * t), math.sin(w0 * t))
        return -1j * (h0 @ psi + ph * (drive @ psi) + ph.conjugate() * (drive_h @ psi))

    psi = init.copy()
    kept = [psi.copy()] if keep else None
    for t0, t1 in zip(times[:-1], times[1:]):
        nsub = max(1, int(math.ceil((t1 - t0) / dt - 1e-9)))
        h = (t1 - t0) / nsub
        t = t0
        for _ in range(nsub):
            k1 = rhs(t, psi)
            k2 = rhs(t + 0.5 * h, psi + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, psi + 0.5 * h * k2)
            k4 = rhs(t + h, psi + h * k3)
            psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        if keep:
            kept.append(psi.copy())
    return psi, (np.array(kept) if keep else None)


def evolve_rk4(
    init: np.ndarray,
    times,
    p: DrivenParams,
    space: FockSpace,
    cfg: IntegratorConfig = IntegratorConfig(),
    observables: Sequence[str] = (),
    store_states: bool = True,
) -> Trajectory:
    """Fixed-step RK4 on the time-dependent lab-frame Hamiltonian.

    The run is repeated at ``dt/2`` and accepted when the endpoint moves by at
    most ``cfg.convergence_tol``; one further halving is tried before giving up.
    Norm drift is reported in ``meta`` and never corrected.
    """
    times = _as_times(times)
    init = np.asarray(init, dtype=complex)
    dt = cfg.dt
    ref_end, _ = _rk4_run(init, times, p, space, dt, keep=False)
    for _attempt in range(2):
        dt /= 2
        end, states = _rk4_run(init, times, p, space, dt, keep=True)
        change = float(np.linalg.norm(end - ref_end))
        if change <= cfg.convergence_tol:
            break
        log.info("rk4 endpoint moved by %.2e at dt=%.2e; halving again", change, dt)
        ref_end = end
    else:
        raise ConvergenceError(f"rk4 did not converge: endpoint change {change:.2e} at dt={dt:.2e}")

    drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - np.linalg.norm(init))))
    log.info("rk4 accepted dt=%.2e, norm drift %.2e", dt, drift)
    series = {name: obs.evaluate(name, states, times, p) for name in observables}
    return Trajectory(
        times,
        states if store_states else None,
        series,
        {"engine": "rk4", "dt": dt, "endpoint_change": change, "norm_drift": drift},
    )


def invariant_drift(traj: Trajectory, p: DrivenParams) -> float:
    """``max_t |<I(t)> - <I(0)>|`` along a stored trajectory."""
    if traj.states is None:
        raise MissingStates("invariant drift needs a trajectory with stored states")
    values = obs.invariant_expectation(traj.states, traj.times, p)
    return float(np.max(np.abs(values - values[0])))

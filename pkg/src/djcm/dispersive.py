"""Large-detuning dynamics and the entangled cat state.

For ``|delta| >> g`` the small rotation ``R = exp[mu (s+ a - s- a^dag)]`` with
``mu = g/delta`` removes the Jaynes-Cummings coupling to second order in
``mu``, leaving the diagonal Hamiltonian

    H_eff = (delta_c + chi sz) n + (delta_eg + chi) sz/2 + chi/2

with dispersive shift ``chi = shift_factor * g^2/delta``.  The second-order
expansion gives ``shift_factor = 1``; ``shift_factor = 2`` reproduces the
doubled-shift form, kept for comparison because it disagrees with the exact
dynamics (see tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hilbert
from .errors import RegimeError
from .hilbert import FockSpace
from .model import DrivenParams, frame_phases, product_operators

MAX_MU = 0.1
SECOND_ORDER_SHIFT = 1.0
DOUBLED_SHIFT = 2.0


@dataclass(frozen=True)
class DispersiveParams:
    mu: float

    def __post_init__(self):
        if abs(self.mu) > MAX_MU:
            raise RegimeError(f"|mu| = |g/delta| = {abs(self.mu):.3g} exceeds {MAX_MU}")

    @classmethod
    def from_params(cls, p: DrivenParams) -> "DispersiveParams":
        if p.delta == 0 or abs(p.delta) < 10 * p.g:
            raise RegimeError(f"dispersive regime needs |delta| >= 10 g (delta={p.delta}, g={p.g})")
        return cls(p.g / p.delta)


def dispersive_shift(p: DrivenParams, shift_factor: float = SECOND_ORDER_SHIFT) -> float:
    DispersiveParams.from_params(p)
    return shift_factor * p.g**2 / p.delta


def effective_hamiltonian(p: DrivenParams, space: FockSpace, shift_factor: float = SECOND_ORDER_SHIFT) -> np.ndarray:
    chi = dispersive_shift(p, shift_factor)
    o = product_operators(space)
    return (p.delta_c * o.one + chi * o.sz) @ o.n + 0.5 * (p.delta_eg + chi) * o.sz + 0.5 * chi * o.one


def effective_diagonal(p: DrivenParams, space: FockSpace, shift_factor: float = SECOND_ORDER_SHIFT) -> np.ndarray:
    chi = dispersive_shift(p, shift_factor)
    n = space.levels.astype(float)
    excited = (p.delta_c + chi) * n + 0.5 * (p.delta_eg + chi) + 0.5 * chi
    ground = (p.delta_c - chi) * n - 0.5 * (p.delta_eg + chi) + 0.5 * chi
    return np.concatenate([excited, ground])


def rotation_operator(mu: float, space: FockSpace) -> np.ndarray:
    """``exp[mu (s+ a - s- a^dag)]``."""
    if abs(mu) > MAX_MU:
        raise RegimeError(f"|mu| = {abs(mu):.3g} exceeds {MAX_MU}")
    o = product_operators(space)
    return hilbert.expm_skew(mu * (o.sp @ o.a - o.sm @ o.ad))


def small_rotation(p: DrivenParams, space: FockSpace) -> np.ndarray:
    return rotation_operator(DispersiveParams.from_params(p).mu, space)


@dataclass(frozen=True)
class CatStateSpec:
    """Phases and branch amplitudes of the dispersive cat state at one time."""

    beta: complex
    phi: float
    theta: float
    lambda_phase: complex
    kappa_plus: complex
    kappa_minus: complex


def cat_spec(t: float, p: DrivenParams, beta: complex, phi: float = 0.0,
             shift_factor: float = SECOND_ORDER_SHIFT) -> CatStateSpec:
    chi = dispersive_shift(p, shift_factor)
    beta = complex(beta)
    gamma = beta + p.alpha
    return CatStateSpec(
        beta=beta,
        phi=phi,
        theta=0.5 * chi * t + p.alpha * beta.imag,
        lambda_phase=np.exp(-1j * t * (0.5 * p.omega_eg + 0.5 * chi)),
        kappa_plus=gamma * np.exp(-1j * t * (p.delta_c + chi)),
        kappa_minus=gamma * np.exp(-1j * t * (p.delta_c - chi)),
    )


def _cat_formula(t, p, beta, phi, space, shift_factor):
    s = cat_spec(t, p, beta, phi, shift_factor)
    rot = np.exp(-1j * p.omega_0 * t)
    a = p.alpha
    excited = s.lambda_phase * np.exp(1j * a * s.kappa_plus.imag) * hilbert.coherent_state((s.kappa_plus - a) * rot, space)
    ground = (np.exp(1j * phi) * np.conj(s.lambda_phase) * np.exp(1j * a * s.kappa_minus.imag)
              * hilbert.coherent_state((s.kappa_minus - a) * rot, space))
    return np.exp(-1j * s.theta) / math.sqrt(2) * np.concatenate([excited, ground])


def _cat_rotated(t, p, beta, phi, space, shift_factor):
    """``T^dag D^dag R^dag U_eff R D psi(0)`` without approximating ``R``."""
    d = hilbert.displacement(p.alpha, space)
    big_d = np.kron(hilbert.ATOM_IDENTITY, d)
    r = small_rotation(p, space)
    atom = np.array([1.0, np.exp(1j * phi)]) / math.sqrt(2)
    psi0 = hilbert.product_state(atom, hilbert.coherent_state(beta, space))
    u_eff = np.exp(-1j * t * effective_diagonal(p, space, shift_factor))
    psi = big_d.conj().T @ (r.conj().T @ (u_eff * (r @ (big_d @ psi0))))
    return np.conj(frame_phases(p.omega_0, t, space)) * psi


def cat_state(t, p: DrivenParams, beta: complex, phi: float, space: FockSpace,
              shift_factor: float = SECOND_ORDER_SHIFT, exact_rotation: bool = False) -> np.ndarray:
    """Dispersive state from ``|beta> (|e> + e^{i phi}|g>)/sqrt 2``.

    By default ``R`` is set to the identity and the state is assembled from
    coherent-state amplitudes; ``exact_rotation=True`` keeps ``R`` as a matrix
    to isolate the error of that step.  Array ``t`` returns one row per time.
    """
    build = _cat_rotated if exact_rotation else _cat_formula
    if np.ndim(t) == 0:
        return build(float(t), p, beta, phi, space, shift_factor)
    return np.array([build(float(tt), p, beta, phi, space, shift_factor) for tt in np.asarray(t)])


def branch_separation(t, p: DrivenParams, beta: complex, shift_factor: float = SECOND_ORDER_SHIFT):
    """``|kappa_+ - kappa_-| = 2 |beta + alpha| |sin(chi t)|``."""
    chi = dispersive_shift(p, shift_factor)
    out = 2 * abs(complex(beta) + p.alpha) * np.abs(np.sin(chi * np.asarray(t, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out

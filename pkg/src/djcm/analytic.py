"""Closed-form dynamics of the driven JCM.

The lab-frame state is obtained from the standard JCM propagator through

    psi(t) = T^dag(t) D^dag(alpha) S^dag(t) U_I(t) D(alpha) psi(0)

with ``T``/``S`` the frames rotating at ``omega_0``/``delta_c`` and ``U_I`` the
interaction-picture JCM propagator, which is block diagonal in the
excitation number and is applied here entry by entry in the Fock basis.

For ``psi(0) = |beta, e>`` the atomic inversion and the mean photon number
reduce to Poisson-weighted sums with ``gamma = beta + alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from . import hilbert
from .errors import DimensionMismatch, UnsupportedInitialCondition
from .hilbert import FockSpace
from .model import DrivenParams, InitialCondition, frame_phases

SINC_SERIES_CUTOFF = 1e-4
_CHUNK = 8192


def rabi_frequency(n, p: DrivenParams):
    """``sqrt(delta^2/4 + g^2 n)``; accepts scalars or arrays of ``n``."""
    out = np.sqrt(0.25 * p.delta**2 + p.g**2 * np.asarray(n, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def sin_over(omega, t):
    """``sin(omega t) / omega`` without the singularity at ``omega = 0``."""
    omega, t = np.broadcast_arrays(np.asarray(omega, dtype=float), np.asarray(t, dtype=float))
    x = omega * t
    small = np.abs(x) < SINC_SERIES_CUTOFF
    safe = np.where(small, 1.0, omega)
    return np.where(small, t * (1.0 - x * x / 6.0), np.sin(x) / safe)


def _v1(omega, t, delta):
    return np.cos(omega * t) - 0.5j * delta * sin_over(omega, t)


def evolution_blocks(t: float, p: DrivenParams, space: FockSpace):
    """The four field operators ``(U11, U12, U21, U22)`` of ``exp(-i H_I t)``."""
    n = space.levels
    om_n = rabi_frequency(n, p)
    om_n1 = rabi_frequency(n + 1, p)
    a = hilbert.annihilation(space)
    u11 = np.diag(_v1(om_n1, t, p.delta))
    u12 = -1j * p.g * a @ np.diag(sin_over(om_n, t))
    u21 = -1j * p.g * a.conj().T @ np.diag(sin_over(om_n1, t))
    u22 = np.diag(np.conj(_v1(om_n, t, p.delta)))
    return u11, u12, u21, u22


def interaction_propagator(t: float, p: DrivenParams, space: FockSpace) -> np.ndarray:
    u11, u12, u21, u22 = evolution_blocks(t, p, space)
    return np.block([[u11, u12], [u21, u22]])


def apply_interaction(times, p: DrivenParams, state: np.ndarray) -> np.ndarray:
    """``U_I(t) state`` for every ``t``; returns shape ``(len(times), 2 dim)``.

    Equivalent to ``interaction_propagator(t) @ state`` but O(dim) per time.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))[:, None]
    dim = state.shape[-1] // 2
    e, gr = state[:dim], state[dim:]
    n = np.arange(dim)
    sq = np.sqrt(n.astype(float))
    om_n = rabi_frequency(n, p)
    om_n1 = rabi_frequency(n + 1, p)
    s_n1 = sin_over(om_n1, times)

    new_e = _v1(om_n1, times, p.delta) * e
    new_e[:, :-1] += -1j * p.g * sq[1:] * s_n1[:, :-1] * gr[1:]
    new_g = np.conj(_v1(om_n, times, p.delta)) * gr
    new_g[:, 1:] += -1j * p.g * sq[1:] * s_n1[:, :-1] * e[:-1]
    return np.concatenate([new_e, new_g], axis=1)


@lru_cache(maxsize=32)
def _field_displacement(alpha: float, space: FockSpace) -> np.ndarray:
    d = hilbert.displacement(alpha, space)
    d.flags.writeable = False
    return d


def _displace(state: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Apply ``1_atom (x) d`` to states stored along the last axis."""
    dim = d.shape[0]
    shaped = state.reshape(state.shape[:-1] + (2, dim))
    return (shaped @ d.T).reshape(state.shape)


def solve_state(t, p: DrivenParams, init, space: FockSpace) -> np.ndarray:
    """Closed-form state at time(s) ``t``.

    ``init`` is an :class:`InitialCondition` or an explicit product-space
    vector.  A scalar ``t`` gives a vector, an array gives ``(len(t), 2 dim)``.
    """
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    psi0 = init.state(space) if isinstance(init, InitialCondition) else np.asarray(init, dtype=complex)
    if psi0.shape != (space.product_dim,):
        raise DimensionMismatch(f"state of length {psi0.shape} does not match dim {space.dim}")

    d = _field_displacement(p.alpha, space) if p.alpha != 0 else None
    chi0 = _displace(psi0, d) if d is not None else psi0
    out = np.empty((times.size, space.product_dim), dtype=complex)
    for lo in range(0, times.size, _CHUNK):
        tt = times[lo:lo + _CHUNK]
        chi = apply_interaction(tt, p, chi0) * np.conj(frame_phases(p.delta_c, tt, space))
        if d is not None:
            chi = _displace(chi, d.conj().T)
        out[lo:lo + _CHUNK] = chi * np.conj(frame_phases(p.omega_0, tt, space))
    return out[0] if scalar else out


def poisson_weight(n, gamma: complex):
    """``exp(-|gamma|^2) |gamma|^{2n} / n!``, in log space for ``n > 50``."""
    n_arr = np.asarray(n)
    lam = abs(complex(gamma)) ** 2
    if lam == 0:
        out = (n_arr == 0).astype(float)
    else:
        nf = n_arr.astype(float)
        small = n_arr <= 50
        direct = np.exp(-lam) * lam ** np.where(small, nf, 0.0) / np.exp(gammaln(np.where(small, nf, 0.0) + 1))
        logged = np.exp(-lam + nf * math.log(lam) - gammaln(nf + 1))
        out = np.where(small, direct, logged)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SeriesConfig:
    tail_epsilon: float = 1e-14

    def n_max(self, gamma: complex) -> int:
        """Smallest ``n`` whose cumulative Poisson mass reaches ``1 - tail_epsilon``."""
        lam = abs(complex(gamma)) ** 2
        if lam == 0:
            return 0
        upper = int(lam + 40 * math.sqrt(lam) + 60)
        sf = poisson.sf(np.arange(upper), lam)
        return int(np.argmax(sf <= self.tail_epsilon))


def _excited_beta(initial) -> complex:
    if isinstance(initial, InitialCondition):
        if initial.atom != "excited":
            raise UnsupportedInitialCondition(
                f"closed-form series assume the atom starts excited, got {initial.atom!r}"
            )
        return complex(initial.beta)
    return complex(initial)


def _series_terms(p: DrivenParams, initial, cfg: SeriesConfig):
    beta = _excited_beta(initial)
    gamma = beta + p.alpha
    n = np.arange(cfg.n_max(gamma) + 1)
    return gamma, n, poisson_weight(n, gamma)


def _chunked(fn, t):
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.concatenate([fn(times[lo:lo + _CHUNK, None]) for lo in range(0, times.size, _CHUNK)])
    return float(out[0]) if scalar else out


def inversion_series(t, p: DrivenParams, initial, cfg: SeriesConfig = SeriesConfig()):
    """Atomic inversion ``W(t)`` for ``|beta, e>``; scalar or array ``t``."""
    _, n, weights = _series_terms(p, initial, cfg)
    om = rabi_frequency(n + 1, p)
    coeff = 0.25 * p.delta**2 - p.g**2 * (n + 1)

    def terms(tt):
        return (weights * (np.cos(om * tt) ** 2 + coeff * sin_over(om, tt) ** 2)).sum(axis=1)

    return _chunked(terms, t)


def mean_photon_series(t, p: DrivenParams, initial, cfg: SeriesConfig = SeriesConfig()):
    """Mean photon number ``<n(t)>`` for ``|beta, e>``; scalar or array ``t``."""
    gamma, n, weights = _series_terms(p, initial, cfg)
    om1 = rabi_frequency(n + 1, p)
    om2 = rabi_frequency(n + 2, p)
    g2 = p.g**2
    alpha = p.alpha

    def terms(tt):
        v1_1, v1_2 = _v1(om1, tt, p.delta), _v1(om2, tt, p.delta)
        v2_1, v2_2 = sin_over(om1, tt), sin_over(om2, tt)
        s1 = (weights * (abs(gamma) ** 2 * np.abs(v1_2) ** 2 + (n + 1) ** 2 * g2 * v2_1**2)).sum(axis=1)
        s2 = (weights * (np.conj(v1_1) * v1_2 + (n + 2) * g2 * v2_1 * v2_2)).sum(axis=1)
        coherent = gamma * np.exp(-1j * p.delta_c * tt[:, 0]) * s2
        return s1 - 2 * alpha * coherent.real + alpha**2

    return _chunked(terms, t)

"""Driven Jaynes-Cummings parameters, Hamiltonians and frame transformations.

Units have hbar = 1.  The lab-frame Hamiltonian is

    H(t) = (w_eg/2) sz + w_c n + g (s+ a + s- a^dag)
           + zeta (s- e^{i w0 t} + s+ e^{-i w0 t}) + xi (a e^{i w0 t} + a^dag e^{-i w0 t})

and it admits the invariant ``sz/2 + n + alpha (a e^{i w0 t} + h.c.)`` only
when ``alpha = zeta/g`` and ``xi = alpha (w_c - w0)``.  Driven parameters are
therefore built from the five free values and ``w0`` is derived.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np

from . import hilbert
from .errors import InvalidCoupling, ModeError
from .hilbert import FockSpace

Mode = Literal["driven", "standard", "unconstrained"]
CONSTRAINT_TOL = 1e-12


@dataclass(frozen=True)
class DrivenParams:
    """Physical parameters of the (driven) JCM.

    ``mode="unconstrained"`` skips the invariant-existence check; it exists
    only for negative controls that deliberately break the constraint.
    """

    omega_c: float
    omega_eg: float
    omega_0: float
    g: float
    zeta: float = 0.0
    xi: float = 0.0
    mode: Mode = "driven"

    def __post_init__(self):
        if not self.g > 0:
            raise InvalidCoupling(f"g must be > 0, got {self.g}")
        if self.mode == "driven":
            if not self.zeta > 0:
                raise InvalidCoupling(f"driven mode needs zeta > 0, got {self.zeta}")
            if not self.xi > 0:
                raise InvalidCoupling(f"driven mode needs xi > 0, got {self.xi}")
            if abs(self.constraint_residual) > CONSTRAINT_TOL * max(1.0, abs(self.xi)):
                raise InvalidCoupling(
                    "invariant constraint xi = (zeta/g)(omega_c - omega_0) violated "
                    f"by {self.constraint_residual:.3e}"
                )
        elif self.mode == "standard":
            if self.zeta != 0 or self.xi != 0:
                raise ModeError("standard mode requires zeta = xi = 0")
        elif self.mode == "unconstrained":
            if self.zeta < 0 or self.xi < 0:
                raise InvalidCoupling("couplings must be non-negative")
        else:
            raise ModeError(f"unknown mode {self.mode!r}")

    @property
    def alpha(self) -> float:
        return self.zeta / self.g

    @property
    def delta_c(self) -> float:
        return self.omega_c - self.omega_0

    @property
    def delta_eg(self) -> float:
        return self.omega_eg - self.omega_0

    @property
    def delta(self) -> float:
        return self.omega_eg - self.omega_c

    @property
    def constraint_residual(self) -> float:
        return self.xi - self.alpha * self.delta_c

    @property
    def energy_offset(self) -> float:
        """Constant ``-zeta xi / g`` dropped from the displaced Hamiltonian."""
        return -self.zeta * self.xi / self.g

    def derived(self) -> dict:
        return {
            "omega_0": self.omega_0,
            "alpha": self.alpha,
            "delta_c": self.delta_c,
            "delta_eg": self.delta_eg,
            "delta": self.delta,
            "energy_offset": self.energy_offset,
        }


def params_from_free(omega_c: float, omega_eg: float, g: float, zeta: float, xi: float) -> DrivenParams:
    """Driven parameters with ``omega_0 = omega_c - g xi / zeta``."""
    if not g > 0:
        raise InvalidCoupling(f"g must be > 0, got {g}")
    if not zeta > 0:
        raise InvalidCoupling(f"driven mode needs zeta > 0, got {zeta}")
    return DrivenParams(omega_c, omega_eg, omega_c - g * xi / zeta, g, zeta, xi, "driven")


def standard_params(omega_c: float, omega_eg: float, g: float, omega_0: float | None = None) -> DrivenParams:
    """Undriven JCM; ``omega_0`` defaults to ``omega_c`` (no cavity detuning)."""
    return DrivenParams(omega_c, omega_eg, omega_c if omega_0 is None else omega_0, g, 0.0, 0.0, "standard")


@dataclass(frozen=True)
class InitialCondition:
    beta: complex
    atom: Literal["excited", "ground", "superposition"] = "excited"
    phi: float = 0.0

    def atom_vector(self) -> np.ndarray:
        if self.atom == "excited":
            return hilbert.EXCITED.copy()
        if self.atom == "ground":
            return hilbert.GROUND.copy()
        if self.atom == "superposition":
            return np.array([1.0, np.exp(1j * self.phi)]) / math.sqrt(2)
        raise ValueError(f"unknown atomic state {self.atom!r}")

    def state(self, space: FockSpace) -> np.ndarray:
        return hilbert.product_state(self.atom_vector(), hilbert.coherent_state(self.beta, space))


@dataclass(frozen=True)
class ProductOperators:
    """Read-only ladder and spin operators embedded in the product space."""

    space: FockSpace
    a: np.ndarray = field(repr=False)
    ad: np.ndarray = field(repr=False)
    n: np.ndarray = field(repr=False)
    sz: np.ndarray = field(repr=False)
    sp: np.ndarray = field(repr=False)
    sm: np.ndarray = field(repr=False)
    one: np.ndarray = field(repr=False)


@lru_cache(maxsize=16)
def product_operators(space: FockSpace) -> ProductOperators:
    a = hilbert.annihilation(space)
    ops = dict(
        a=hilbert.tensor(hilbert.ATOM_IDENTITY, a),
        ad=hilbert.tensor(hilbert.ATOM_IDENTITY, a.conj().T),
        n=hilbert.tensor(hilbert.ATOM_IDENTITY, hilbert.number(space)),
        sz=hilbert.tensor(hilbert.SIGMA_Z, space.identity),
        sp=hilbert.tensor(hilbert.SIGMA_PLUS, space.identity),
        sm=hilbert.tensor(hilbert.SIGMA_MINUS, space.identity),
        one=np.eye(space.product_dim, dtype=complex),
    )
    for arr in ops.values():
        arr.flags.writeable = False
    return ProductOperators(space=space, **ops)


def _jc_coupling(o: ProductOperators) -> np.ndarray:
    return o.sp @ o.a + o.sm @ o.ad


def drive_components(p: DrivenParams, space: FockSpace) -> tuple[np.ndarray, np.ndarray]:
    """``(H0, A)`` with ``H(t) = H0 + e^{i w0 t} A + e^{-i w0 t} A^dag``."""
    o = product_operators(space)
    h0 = 0.5 * p.omega_eg * o.sz + p.omega_c * o.n + p.g * _jc_coupling(o)
    return h0, p.zeta * o.sm + p.xi * o.a


def hamiltonian_full(t: float, p: DrivenParams, space: FockSpace) -> np.ndarray:
    h0, drive = drive_components(p, space)
    phase = np.exp(1j * p.omega_0 * t)
    return h0 + phase * drive + np.conj(phase) * drive.conj().T


def hamiltonian_rotating(p: DrivenParams, space: FockSpace) -> np.ndarray:
    """Time-independent Hamiltonian in the frame rotating at ``omega_0``."""
    o = product_operators(space)
    return (
        p.delta_c * o.n
        + 0.5 * p.delta_eg * o.sz
        + p.g * _jc_coupling(o)
        + p.zeta * (o.sm + o.sp)
        + p.xi * (o.a + o.ad)
    )


def hamiltonian_jcm(p: DrivenParams, space: FockSpace) -> np.ndarray:
    o = product_operators(space)
    return p.delta_c * o.n + 0.5 * p.delta_eg * o.sz + p.g * _jc_coupling(o)


def hamiltonian_interaction(p: DrivenParams, space: FockSpace) -> np.ndarray:
    o = product_operators(space)
    return 0.5 * p.delta * o.sz + p.g * _jc_coupling(o)


def excitation_number(space: FockSpace) -> np.ndarray:
    """``sz/2 + n``, the conserved quantity of the standard JCM."""
    o = product_operators(space)
    return 0.5 * o.sz + o.n


def invariant_operator(t: float, p: DrivenParams, space: FockSpace) -> np.ndarray:
    o = product_operators(space)
    phase = np.exp(1j * p.omega_0 * t)
    return excitation_number(space) + p.alpha * (phase * o.a + np.conj(phase) * o.ad)


def excitation_diagonal(space: FockSpace) -> np.ndarray:
    """Diagonal of ``n + sz/2`` in the product basis."""
    n = space.levels.astype(float)
    return np.concatenate([n + 0.5, n - 0.5])


def frame_phases(rate: float, t, space: FockSpace) -> np.ndarray:
    """Diagonal of ``exp[i rate t (n + sz/2)]``; broadcasts over an array of times."""
    t = np.asarray(t, dtype=float)
    return np.exp(1j * rate * t[..., None] * excitation_diagonal(space))


def frame_T(t: float, p: DrivenParams, space: FockSpace) -> np.ndarray:
    return np.diag(frame_phases(p.omega_0, t, space))


def frame_S(t: float, p: DrivenParams, space: FockSpace) -> np.ndarray:
    return np.diag(frame_phases(p.delta_c, t, space))


def default_space(p: DrivenParams, beta: complex) -> FockSpace:
    """Field truncation for an initial coherent amplitude ``beta``."""
    return FockSpace(hilbert.truncation_dim(complex(beta) + p.alpha))

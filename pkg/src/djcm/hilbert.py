"""Truncated Fock space and two-level atom linear algebra.

Operators and states are plain numpy arrays.  Product-space vectors use the
ordering ``i = a * dim + n`` with ``a = 0`` for the excited state ``|e>`` and
``a = 1`` for the ground state ``|g>``, so a product-space operator is a
2x2 block matrix whose top row acts on the excited sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import DimensionMismatch, EigenFailure, TruncationError

SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |e><g|
SIGMA_MINUS = SIGMA_PLUS.T.copy()  # |g><e|
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
ATOM_IDENTITY = np.eye(2, dtype=complex)
EXCITED = np.array([1, 0], dtype=complex)
GROUND = np.array([0, 1], dtype=complex)

COHERENT_TAIL_TOL = 1e-12
DISPLACEMENT_PROBE_TOL = 1e-9


@dataclass(frozen=True)
class FockSpace:
    """Fock levels ``0 .. dim-1`` of a single bosonic mode."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"FockSpace needs an integer dim >= 2, got {self.dim!r}")

    @property
    def product_dim(self) -> int:
        return 2 * self.dim

    @cached_property
    def levels(self) -> np.ndarray:
        return np.arange(self.dim)

    @cached_property
    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)


def truncation_dim(gamma: complex) -> int:
    """Field dimension ``ceil(|gamma|^2 + 8|gamma| + 20)``.

    ``gamma`` is the displaced amplitude ``beta + alpha`` the dynamics actually
    explores; the margin keeps both the Poisson tail and displacement edge
    effects far below the observable tolerances.
    """
    r = abs(gamma)
    return int(math.ceil(r * r + 8 * r + 20))


def annihilation(space: FockSpace) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, space.dim)), 1).astype(complex)


def creation(space: FockSpace) -> np.ndarray:
    return annihilation(space).T.copy()


def number(space: FockSpace) -> np.ndarray:
    return np.diag(space.levels.astype(float)).astype(complex)


def is_hermitian(op: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) <= tol)


def is_unitary(op: np.ndarray, tol: float = 1e-10) -> bool:
    eye = np.eye(op.shape[0])
    return bool(np.max(np.abs(op.conj().T @ op - eye)) <= tol)


def tensor(atom_op: np.ndarray, field_op: np.ndarray) -> np.ndarray:
    """Embed ``atom_op (x) field_op`` in the atom-major product basis."""
    atom_op = np.asarray(atom_op)
    field_op = np.asarray(field_op)
    if atom_op.shape != (2, 2):
        raise DimensionMismatch(f"atom operator must be 2x2, got {atom_op.shape}")
    if field_op.ndim != 2 or field_op.shape[0] != field_op.shape[1]:
        raise DimensionMismatch(f"field operator must be square, got {field_op.shape}")
    return np.kron(atom_op, field_op)


def product_state(atom: np.ndarray, field: np.ndarray) -> np.ndarray:
    atom = np.asarray(atom, dtype=complex)
    if atom.shape != (2,):
        raise DimensionMismatch(f"atom state must have 2 components, got {atom.shape}")
    return np.kron(atom, np.asarray(field, dtype=complex))


def fock_state(n: int, space: FockSpace) -> np.ndarray:
    if not 0 <= n < space.dim:
        raise TruncationError(f"Fock level {n} outside 0..{space.dim - 1}")
    v = np.zeros(space.dim, dtype=complex)
    v[n] = 1.0
    return v


def coherent_amplitudes(beta: complex, dim: int) -> np.ndarray:
    """Exact amplitudes ``exp(-|beta|^2/2) beta^n / sqrt(n!)`` for ``n < dim``.

    Not renormalised; evaluated in log space so large ``n`` cannot overflow.
    """
    beta = complex(beta)
    n = np.arange(dim)
    if beta == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    r = abs(beta)
    log_mag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * math.atan2(beta.imag, beta.real) * n)


def coherent_tail(beta: complex, dim: int) -> float:
    """Probability mass of ``|beta>`` on Fock levels ``>= dim``."""
    return float(poisson.sf(dim - 1, abs(complex(beta)) ** 2))


def coherent_state(beta: complex, space: FockSpace) -> np.ndarray:
    tail = coherent_tail(beta, space.dim)
    if tail > COHERENT_TAIL_TOL:
        raise TruncationError(
            f"coherent state |beta|={abs(beta):.4g} leaks {tail:.3e} beyond dim={space.dim}"
        )
    c = coherent_amplitudes(beta, space.dim)
    return c / np.linalg.norm(c)


def eigensystem(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc


class HermitianPropagator:
    """``exp(-i H t)`` for a fixed Hermitian ``H`` via one eigendecomposition."""

    def __init__(self, h: np.ndarray):
        self.energies, self.vectors = eigensystem(np.asarray(h, dtype=complex))

    def matrix(self, t: float) -> np.ndarray:
        return (self.vectors * np.exp(-1j * self.energies * t)) @ self.vectors.conj().T

    def evolve(self, v: np.ndarray, times) -> np.ndarray:
        """States at every time in ``times``, shape ``(len(times), dim)``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        coeffs = self.vectors.conj().T @ np.asarray(v, dtype=complex)
        phases = np.exp(-1j * np.outer(times, self.energies))
        return (phases * coeffs) @ self.vectors.T


def propagate_hermitian(h: np.ndarray, t: float, v: np.ndarray) -> np.ndarray:
    """Return ``sum_k exp(-i E_k t) <k|v> |k>``."""
    return HermitianPropagator(h).evolve(v, [t])[0]


def expm_skew(generator: np.ndarray) -> np.ndarray:
    """``exp(G)`` for skew-Hermitian ``G``, through the Hermitian ``i G``."""
    return HermitianPropagator(1j * generator).matrix(1.0)


def displacement(alpha: float, space: FockSpace) -> np.ndarray:
    """Glauber displacement ``exp[alpha (a^dagger - a)]`` on the truncated space.

    The truncated generator is exactly skew-Hermitian, so the result is
    unitary; edge damage shows up instead as a wrong ``D|0>``, which is probed
    against the exact coherent amplitudes on the levels far from the edge.
    """
    a = annihilation(space)
    d = expm_skew(alpha * (a.conj().T - a))
    probe = space.dim - 20 if space.dim > 40 else space.dim // 2
    err = np.max(np.abs(d[:probe, 0] - coherent_amplitudes(alpha, space.dim)[:probe]))
    if err > DISPLACEMENT_PROBE_TOL:
        raise TruncationError(
            f"displacement alpha={alpha:.4g} distorted by truncation at dim={space.dim} "
            f"(probe error {err:.2e})"
        )
    return d


def projector(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    return np.outer(state, state.conj())


def _split_dims(rho: np.ndarray) -> int:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] % 2:
        raise DimensionMismatch(f"expected an even square product-space matrix, got {rho.shape}")
    return rho.shape[0] // 2


def partial_trace_field(rho: np.ndarray) -> np.ndarray:
    """2x2 atomic density matrix ``Tr_F rho``."""
    n = _split_dims(rho)
    return np.einsum("anbn->ab", np.asarray(rho).reshape(2, n, 2, n))


def partial_trace_atom(rho: np.ndarray) -> np.ndarray:
    """Field density matrix ``Tr_A rho``."""
    n = _split_dims(rho)
    return np.einsum("anam->nm", np.asarray(rho).reshape(2, n, 2, n))


def fidelity(a: np.ndarray, b: np.ndarray) -> float | np.ndarray:
    """``|<a|b>|^2``; broadcasts over leading axes."""
    return np.abs(np.sum(np.conj(a) * b, axis=-1)) ** 2

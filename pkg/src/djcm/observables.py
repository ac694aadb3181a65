"""Observables and entanglement measures of atom-field states.

State arguments may be a single product-space vector or a stack of them
(time along the leading axis); the return value then has the stack shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMean, DimensionMismatch, NonPositiveMatrix, WindowOutOfRange

Q_FLOOR = 1e-9
POSITIVITY_TOL = 1e-8

OBSERVABLE_NAMES = ("inversion", "nphoton", "mandelq", "entropy", "invariant")


def _sectors(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.shape[-1] % 2:
        raise DimensionMismatch("product-space states have even length")
    return state.reshape(state.shape[:-1] + (2, state.shape[-1] // 2))


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def inversion(state):
    m = np.abs(_sectors(state)) ** 2
    return _scalar(m[..., 0, :].sum(-1) - m[..., 1, :].sum(-1))


def photon_distribution(state) -> np.ndarray:
    return (np.abs(_sectors(state)) ** 2).sum(-2)


def _moment(state, k: int):
    p = photon_distribution(state)
    n = np.arange(p.shape[-1], dtype=float)
    return _scalar((p * n**k).sum(-1))


def mean_photon(state):
    return _moment(state, 1)


def photon_second_moment(state):
    return _moment(state, 2)


def mandel_q(state):
    """``(<n^2> - <n>^2)/<n> - 1``."""
    mean = np.asarray(mean_photon(state))
    if np.any(mean <= Q_FLOOR):
        raise DegenerateMean(f"Mandel Q undefined for <n> <= {Q_FLOOR}")
    second = np.asarray(photon_second_moment(state))
    return _scalar((second - mean**2) / mean - 1.0)


def reduced_atom(state) -> np.ndarray:
    m = _sectors(state)
    return m @ np.swapaxes(m.conj(), -1, -2)


def reduced_field(state) -> np.ndarray:
    m = _sectors(state)
    return np.swapaxes(m, -1, -2) @ m.conj()


def entropy(rho) -> float | np.ndarray:
    """Von Neumann entropy ``-Tr rho ln rho`` with ``0 ln 0 = 0``.

    Accepts one density matrix or a stack of them.
    """
    lam = np.linalg.eigvalsh(np.asarray(rho))
    if np.any(lam < -POSITIVITY_TOL):
        raise NonPositiveMatrix(f"density matrix has eigenvalue {lam.min():.3e}")
    lam = np.clip(lam, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0, -lam * np.log(np.where(lam > 0, lam, 1.0)), 0.0)
    return _scalar(terms.sum(-1))


def atomic_entropy(state):
    return entropy(reduced_atom(state))


def field_entropy(state):
    return entropy(reduced_field(state))


def invariant_expectation(state, times, p):
    """``<psi(t)| I(t) |psi(t)>`` for the Lewis-Riesenfeld invariant of ``p``."""
    m = _sectors(state)
    dim = m.shape[-1]
    n = np.arange(dim, dtype=float)
    pops = np.abs(m) ** 2
    base = (pops * n).sum((-1, -2)) + 0.5 * (pops[..., 0, :].sum(-1) - pops[..., 1, :].sum(-1))
    # <a> = sum_n sqrt(n) conj(c_{n-1}) c_n, summed over both atomic sectors
    a_mean = (np.sqrt(n[1:]) * m[..., :-1].conj() * m[..., 1:]).sum((-1, -2))
    phase = np.exp(1j * p.omega_0 * np.asarray(times, dtype=float))
    return _scalar(base + 2 * p.alpha * np.real(phase * a_mean))


def evaluate(name: str, states: np.ndarray, times: np.ndarray, p) -> np.ndarray:
    """Observable ``name`` (one of ``OBSERVABLE_NAMES``) on a stack of states."""
    if name == "inversion":
        return inversion(states)
    if name == "nphoton":
        return mean_photon(states)
    if name == "mandelq":
        return mandel_q(states)
    if name == "entropy":
        return atomic_entropy(states)
    if name == "invariant":
        return invariant_expectation(states, times, p)
    raise KeyError(f"unknown observable {name!r}")


@dataclass(frozen=True)
class ObservableSeries:
    name: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values differ in length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"series {self.name!r} contains non-finite values")


def entropy_minimum(series: ObservableSeries, window: tuple[float, float]) -> tuple[float, float]:
    """Grid argmin inside ``window`` refined by a three-point parabola.

    Ties resolve to the earliest grid point; an argmin on the window edge is
    returned unrefined.
    """
    t = np.asarray(series.times, dtype=float)
    s = np.asarray(series.values, dtype=float)
    lo, hi = window
    if lo < t[0] or hi > t[-1] or lo >= hi:
        raise WindowOutOfRange(f"window {window} not inside [{t[0]}, {t[-1]}]")
    idx = np.flatnonzero((t >= lo) & (t <= hi))
    if idx.size == 0:
        raise WindowOutOfRange(f"no samples inside {window}")
    k = idx[np.argmin(s[idx])]
    if k == idx[0] or k == idx[-1]:
        return float(t[k]), float(s[k])
    h = t[k + 1] - t[k]
    y0, y1, y2 = s[k - 1], s[k], s[k + 1]
    curv = y0 - 2 * y1 + y2
    if curv <= 0:
        return float(t[k]), float(y1)
    shift = 0.5 * (y0 - y2) / curv
    return float(t[k] + shift * h), float(y1 - 0.25 * (y0 - y2) * shift)


def _uniform_step(times: np.ndarray) -> float:
    dt = np.diff(times)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise ValueError("windowed statistics need a uniform time grid")
    return float(dt[0])


def windowed_variance(times, values, width: float) -> tuple[np.ndarray, np.ndarray]:
    """Variance of ``values`` over trailing windows spanning ``width`` time units.

    Returns ``(window_end_times, variances)``.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    w = int(round(width / _uniform_step(times))) + 1
    if w > values.size:
        raise WindowOutOfRange(f"window {width} longer than the series")
    centred = values - values.mean()
    c1 = np.concatenate([[0.0], np.cumsum(centred)])
    c2 = np.concatenate([[0.0], np.cumsum(centred**2)])
    s1 = c1[w:] - c1[:-w]
    s2 = c2[w:] - c2[:-w]
    var = np.maximum(s2 / w - (s1 / w) ** 2, 0.0)
    return times[w - 1:], var


def envelope(times, values, width: float) -> np.ndarray:
    """Centred moving maximum of ``|values|`` over ``width`` time units."""
    from scipy.ndimage import maximum_filter1d

    w = max(1, int(round(width / _uniform_step(np.asarray(times, dtype=float)))))
    return maximum_filter1d(np.abs(np.asarray(values, dtype=float)), size=w, mode="nearest")


def collapse_window(times, inversion_values, threshold: float = 0.05, width: float = 2.0):
    """Longest interval on which the envelope of ``|W|`` stays below ``threshold``.

    Returns ``(t_start, t_end)`` or ``None`` when the envelope never drops.
    """
    times = np.asarray(times, dtype=float)
    quiet = envelope(times, inversion_values, width) < threshold
    if not quiet.any():
        return None
    edges = np.diff(np.concatenate([[0], quiet.astype(int), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    k = int(np.argmax(ends - starts))
    return float(times[starts[k]]), float(times[ends[k]])


def first_revival_time(times, inversion_values, width: float = 2.0, collapse_level: float = 0.25):
    """Centre of the first inversion revival, or ``None`` without a collapse.

    The envelope of ``|W - mean(W)|`` is smoothed over ``2*width``.  The
    collapse is the first time it falls below ``collapse_level`` of its start
    value; the revival is the first local maximum after the envelope has
    climbed back to half of its post-collapse maximum.
    """
    from scipy.ndimage import uniform_filter1d

    times = np.asarray(times, dtype=float)
    w = np.asarray(inversion_values, dtype=float)
    env = envelope(times, w - w.mean(), width)
    size = max(1, int(round(2 * width / _uniform_step(times))))
    smooth = uniform_filter1d(env, size, mode="nearest")
    quiet = np.flatnonzero(smooth < collapse_level * smooth[0])
    if quiet.size == 0:
        return None
    after = smooth[quiet[0]:]
    j = int(np.argmax(after >= 0.5 * after.max()))
    while j + 1 < after.size and after[j + 1] >= after[j]:
        j += 1
    return float(times[quiet[0] + j])

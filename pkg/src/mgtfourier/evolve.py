"""Modal time evolution and energy bookkeeping.

Each mode evolves independently, ``U_n(t) = exp(t B_n) U_n(0)``, so there is no
time-stepping error; the time grid only matters for the finite-difference
energy-balance check.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from ._ols import linear_fit
from .blocknum import EIGVEC_COND_LIMIT, ModalStack
from .model import ModelParams
from .sweep import FitError, FitResult

__all__ = [
    "EnergyTrace",
    "evolve",
    "random_initial_state",
    "fit_decay_rate",
    "energy_balance_defect",
    "spectral_abscissa",
]


class EnergyTrace(NamedTuple):
    times: np.ndarray
    energy: np.ndarray
    per_mode: np.ndarray
    dissipation: np.ndarray


def _as_stack(params, sigma) -> ModalStack:
    return sigma if isinstance(sigma, ModalStack) else ModalStack(params, sigma)


def _propagate(stack: ModalStack, U0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """States of shape (len(times), N, 4)."""
    z, V = np.linalg.eig(stack.B)
    out = np.empty((len(times),) + U0.shape, dtype=complex)
    good = np.linalg.cond(V) < EIGVEC_COND_LIMIT
    if good.any():
        g = np.flatnonzero(good)
        c = np.linalg.solve(V[g], U0[g][..., None])[..., 0]
        for i, t in enumerate(times):
            out[i, g] = np.einsum("nij,nj->ni", V[g], np.exp(t * z[g]) * c)
    for n in np.flatnonzero(~good):
        for i, t in enumerate(times):
            out[i, n] = scipy.linalg.expm(t * stack.B[n]) @ U0[n]
    # exp(0 B) = I exactly, so t = 0 reproduces the data without rounding
    out[times == 0] = U0
    return out


def evolve(params: ModelParams, sigma, initial, times) -> EnergyTrace:
    """Energy of ``U(t)`` over the truncation, per mode and summed.

    ``initial`` has shape (N, 4).  ``dissipation`` is ``2 Re<BU, U>`` summed
    over modes, so it should equal ``dE/dt``.
    """
    stack = _as_stack(params, sigma)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0 or times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be a non-empty increasing sequence of non-negative values")
    U0 = np.asarray(initial, dtype=complex).reshape(len(stack), 4)
    U = _propagate(stack, U0, times)
    per_mode = np.linalg.norm(np.einsum("nij,tnj->tni", stack.Lh, U), axis=-1) ** 2
    s = stack.sigma
    rate = -params.a**2 * (params.beta - params.alpha) * s * np.abs(U[..., 1]) ** 2 - s * np.abs(U[..., 3]) ** 2
    # np.sum reduces pairwise along the mode axis, independent of scheduling
    return EnergyTrace(times=times, energy=np.sum(per_mode, axis=1),
                       per_mode=per_mode, dissipation=2.0 * np.sum(rate, axis=1))


def random_initial_state(params: ModelParams, sigma, seed: int) -> np.ndarray:
    """Complex Gaussian state per mode, scaled to unit energy norm."""
    stack = _as_stack(params, sigma)
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((len(stack), 4)) + 1j * rng.standard_normal((len(stack), 4))
    # draw in orthonormal coordinates, then map back
    Z /= np.linalg.norm(Z, axis=-1, keepdims=True)
    return np.stack([scipy.linalg.solve_triangular(L, z, lower=False) for L, z in zip(stack.Lh, Z)])


def fit_decay_rate(trace: EnergyTrace, window=None) -> FitResult:
    """Slope of ln E against t; an exponential decay ``E ~ exp(-2 w t)`` gives ``-2 w``."""
    t = np.asarray(trace.times, dtype=float)
    e = np.asarray(trace.energy, dtype=float)
    lo, hi = (t[0], t[-1]) if window is None else window
    sel = (t >= lo) & (t <= hi)
    if sel.sum() < 2:
        raise FitError("decay window holds fewer than two samples")
    if np.any(e[sel] <= 0):
        raise FitError("energy is zero inside the decay window")
    slope, intercept, r2 = linear_fit(t[sel], np.log(e[sel]))
    return FitResult(slope=slope, intercept=intercept, r_squared=r2,
                     window=(float(t[sel][0]), float(t[sel][-1])), n_points=int(sel.sum()))


def energy_balance_defect(trace: EnergyTrace) -> float:
    """Max interior mismatch of centred dE/dt and the recorded dissipation,
    relative to the peak |dissipation|."""
    t = np.asarray(trace.times, dtype=float)
    if len(t) < 3:
        raise ValueError("need at least three samples")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise ValueError("times must be uniformly spaced")
    e = np.asarray(trace.energy, dtype=float)
    d = np.asarray(trace.dissipation, dtype=float)
    scale = np.max(np.abs(d))
    if scale == 0:
        return 0.0
    fd = (e[2:] - e[:-2]) / (2 * dt[0])
    return float(np.max(np.abs(fd - d[1:-1])) / scale)


def spectral_abscissa(params: ModelParams, sigma) -> float:
    """Largest real part over the eigenvalues of all included blocks."""
    stack = _as_stack(params, sigma)
    return float(np.max(np.linalg.eigvals(stack.B).real))


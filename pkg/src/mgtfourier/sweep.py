"""Resolvent-norm profiles along the imaginary axis and exponent fits.

Distinct modes are orthogonal in the energy inner product, so the resolvent
of the truncated generator is block diagonal and its norm at ``i*lam`` is the
maximum of the block norms.  Between resonances the block norms drop by orders
of magnitude, so a sweep always adds the per-mode peak frequencies found by
:func:`track_peaks` to the log grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._ols import linear_fit
from .blocknum import ModalStack
from .model import ModelParams

__all__ = [
    "FitError",
    "FitResult",
    "ResolventSample",
    "PeakSeries",
    "Sweep",
    "AnalyticityIndex",
    "resonance_families",
    "resonance_frequencies",
    "global_resolvent_norm",
    "global_norms",
    "log_grid",
    "run_sweep",
    "track_peaks",
    "fit_exponent",
    "default_window",
    "peak_window",
    "analyticity_index",
]

DEFAULT_PPD = 64
GOLDEN_RTOL = 1e-6
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    window: tuple
    n_points: int


@dataclass(frozen=True)
class ResolventSample:
    lam: float
    norm: float
    argmax_mode: int


def _as_stack(params, sigma) -> ModalStack:
    if isinstance(sigma, ModalStack):
        return sigma
    return ModalStack(params, sigma)


def resonance_families(params: ModelParams, sigma):
    """The two matched-frequency families ``a*sqrt(s)`` and ``sqrt(a^2 be/al)*sqrt(s)``."""
    root = np.sqrt(np.asarray(sigma, dtype=float))
    fam_a = params.a * root
    fam_b = math.sqrt(params.a**2 * params.beta / params.alpha) * root
    return fam_a, fam_b


def resonance_frequencies(params: ModelParams, sigma) -> np.ndarray:
    """Both families merged, sorted and deduplicated."""
    fam_a, fam_b = resonance_families(params, sigma)
    return np.unique(np.concatenate([fam_a, fam_b]))


def global_norms(stack: ModalStack, lams):
    """Sup over modes of the block resolvent norm for each ``lam``.

    Returns ``(norms, argmax)`` with 0-based argmax positions; the public
    records (:class:`ResolventSample`, :class:`Sweep`) use 1-based mode numbers.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    norms = np.empty(len(lams))
    arg = np.empty(len(lams), dtype=int)
    for i, lam in enumerate(lams):
        per_mode = stack.resolvent_norms(lam)
        j = int(np.argmax(per_mode))
        norms[i], arg[i] = per_mode[j], j
    return norms, arg


def global_resolvent_norm(params: ModelParams, sigma, lam: float) -> ResolventSample:
    norms, arg = global_norms(_as_stack(params, sigma), [lam])
    return ResolventSample(lam=float(lam), norm=float(norms[0]), argmax_mode=int(arg[0]) + 1)


class PeakSeries(NamedTuple):
    """Per-mode resonance peaks.  ``lam_res`` is the predicted resonance
    frequency, ``lam_peak`` the refined location of the maximum."""

    mode: np.ndarray
    lam_res: np.ndarray
    peak: np.ndarray
    lam_peak: np.ndarray

    def __len__(self):
        return len(self.mode)


def _golden_max(f, lo, hi, rtol=GOLDEN_RTOL):
    """Vectorised golden-section maximisation of f on [lo, hi] (arrays)."""
    lo, hi = lo.copy(), hi.copy()
    for _ in range(200):
        if np.all(hi - lo <= rtol * 0.5 * (hi + lo)):
            break
        c = hi - _INVPHI * (hi - lo)
        d = lo + _INVPHI * (hi - lo)
        left = f(c) >= f(d)
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
    cands = np.stack([lo, 0.5 * (lo + hi), hi])
    vals = np.stack([f(x) for x in cands])
    k = np.argmax(vals, axis=0)
    cols = np.arange(len(lo))
    return cands[k, cols], vals[k, cols]


def _peak_bracket(params: ModelParams, sigma):
    _, fam_b = resonance_families(params, sigma)
    rho = max(math.sqrt(params.beta / params.alpha), 1.25)
    return fam_b, fam_b / rho, fam_b * rho


def track_peaks(params: ModelParams, sigma, modes=None, coarse=64, fine=256) -> PeakSeries:
    """Locate the maximum of each block resolvent norm near its resonance.

    The search bracket of mode n is ``[lb/rho, lb*rho]`` with ``lb`` the
    family-B frequency and ``rho = sqrt(beta/alpha)`` (at least 1.25), so it
    contains both matched families.  Seeds are a coarse log grid plus the
    imaginary parts of the block eigenvalues falling in the bracket; the best
    seed is refined by golden section.  If that ends below the seed value, a
    ``fine``-point grid over the seed interval is scanned, and the result is
    never lower than the best seed.
    """
    stack = _as_stack(params, sigma)
    idx = np.arange(len(stack)) if modes is None else np.asarray(modes, dtype=int)
    sub = stack.subset(idx)
    lam_res, lo_b, hi_b = _peak_bracket(params, sub.sigma)
    n = len(idx)

    def f(lams):
        return sub.resolvent_norms(lams)

    # coarse grid seeds
    t = np.linspace(0.0, 1.0, coarse)
    grid = lo_b[:, None] * (hi_b / lo_b)[:, None] ** t[None, :]
    gvals = np.stack([f(grid[:, k]) for k in range(coarse)], axis=1)
    k = np.argmax(gvals, axis=1)
    rows = np.arange(n)
    best_val = gvals[rows, k]
    best_lam = grid[rows, k]
    seed_lo = grid[rows, np.maximum(k - 1, 0)]
    seed_hi = grid[rows, np.minimum(k + 1, coarse - 1)]

    # eigenvalue seeds: a damped mode z gives a bump near Im z of width ~|Re z|
    z = np.linalg.eigvals(sub.B)
    for j in range(4):
        zi, zr = z[:, j].imag, np.abs(z[:, j].real)
        inside = (zi > lo_b) & (zi < hi_b)
        if not inside.any():
            continue
        cand = np.where(inside, zi, lam_res)
        val = f(cand)
        better = inside & (val > best_val)
        half = np.maximum(2.0 * zr, 1e-9 * cand)
        best_val = np.where(better, val, best_val)
        best_lam = np.where(better, cand, best_lam)
        seed_lo = np.where(better, np.maximum(cand - half, lo_b), seed_lo)
        seed_hi = np.where(better, np.minimum(cand + half, hi_b), seed_hi)

    lam_pk, peak = _golden_max(f, seed_lo, seed_hi)

    # golden section only finds a local maximum: where it ends below the best
    # seed, scan a fine grid over the seed interval and keep the best point seen
    worse = np.flatnonzero(peak < best_val)
    if len(worse):
        tf = np.linspace(0.0, 1.0, fine)
        lo_w, hi_w = seed_lo[worse], seed_hi[worse]
        fg = lo_w[:, None] + (hi_w - lo_w)[:, None] * tf[None, :]
        fsub = sub.subset(worse)
        fv = np.stack([fsub.resolvent_norms(fg[:, k]) for k in range(fine)], axis=1)
        kk = np.argmax(fv, axis=1)
        rr = np.arange(len(worse))
        cand_lam = np.stack([lam_pk[worse], best_lam[worse], fg[rr, kk]])
        cand_val = np.stack([peak[worse], best_val[worse], fv[rr, kk]])
        j = np.argmax(cand_val, axis=0)
        lam_pk[worse] = cand_lam[j, rr]
        peak[worse] = cand_val[j, rr]

    return PeakSeries(mode=idx + 1, lam_res=lam_res, peak=peak, lam_peak=lam_pk)


def log_grid(lam_min: float, lam_max: float, ppd: int = DEFAULT_PPD) -> np.ndarray:
    if not 0 < lam_min < lam_max:
        raise ValueError("need 0 < lam_min < lam_max")
    if ppd < 16:
        raise ValueError("points per decade must be at least 16")
    decades = math.log10(lam_max / lam_min)
    n = int(round(decades * ppd)) + 1
    return np.logspace(math.log10(lam_min), math.log10(lam_max), n)


class Sweep(NamedTuple):
    lam: np.ndarray
    norm: np.ndarray
    argmax_mode: np.ndarray
    n_base: int

    def __len__(self):
        return len(self.lam)

    def sample(self, i) -> ResolventSample:
        return ResolventSample(float(self.lam[i]), float(self.norm[i]), int(self.argmax_mode[i]))

    @property
    def sup(self) -> float:
        return float(self.norm.max())


def run_sweep(params: ModelParams, sigma, lam_min=1.0, lam_max=1e6, ppd=DEFAULT_PPD, refine=True) -> Sweep:
    """Global resolvent norm on a log grid plus every per-mode peak in range."""
    stack = _as_stack(params, sigma)
    base = log_grid(lam_min, lam_max, ppd)
    lams = base
    if refine:
        pk = track_peaks(params, stack)
        extra = pk.lam_peak[(pk.lam_peak >= lam_min) & (pk.lam_peak <= lam_max)]
        lams = np.unique(np.concatenate([base, extra]))
    norms, arg = global_norms(stack, lams)
    return Sweep(lam=lams, norm=norms, argmax_mode=arg + 1, n_base=len(base))


def default_window(lam_max: float, decades: float = 2.0, exclude_top: float = 0.5):
    """Top ``decades`` decades below ``lam_max``, after dropping ``exclude_top`` decades."""
    hi = lam_max / 10**exclude_top
    return (hi / 10**decades, hi)


def peak_window(lam_peak, decades: float = 2.0):
    """Top ``decades`` decades of a peak series.

    Nothing is dropped at the top: a peak is the maximum of its own block, so
    it carries no truncation-edge effect.
    """
    return default_window(float(np.max(lam_peak)), decades, 0.0)


def fit_exponent(lam, values, window=None, min_points=8, min_decades=2.0) -> FitResult:
    """Least-squares slope of log(values) against log(lam) inside ``window``."""
    lam = np.asarray(lam, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        window = (lam.min(), lam.max())
    lo, hi = window
    sel = (lam >= lo * (1 - 1e-12)) & (lam <= hi * (1 + 1e-12))
    x, y = lam[sel], values[sel]
    if len(x) < min_points:
        raise FitError(f"only {len(x)} points in window [{lo:g}, {hi:g}]; need {min_points}")
    span = math.log10(hi / lo)
    if span < min_decades - 1e-9:
        raise FitError(f"window spans {span:.3f} decades; need {min_decades}")
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise FitError("values must be positive and finite for a log-log fit")
    slope, intercept, r2 = linear_fit(np.log(x), np.log(y))
    return FitResult(slope=slope, intercept=intercept, r_squared=r2,
                     window=(float(x.min()), float(x.max())), n_points=int(len(x)))


class AnalyticityIndex(NamedTuple):
    sup: float
    running_sup: np.ndarray
    trend: FitResult


def analyticity_index(lam, norm, decades=2.0, exclude_top=0.0) -> AnalyticityIndex:
    """Sup of lam*norm and the log-log trend of lam*norm over the top decades.

    The trend window is :func:`default_window` below the largest sample; the
    default drops nothing at the top, as suits a peak series.  A
    trend slope near 0 is what a bounded ``lam * ||R(i lam)||`` looks like; a
    positive slope means it keeps growing.  Pass the peak series rather than
    a raw sweep, whose dips between resonances swamp the trend.
    """
    lam = np.asarray(lam, dtype=float)
    order = np.argsort(lam)
    lam = lam[order]
    prod = lam * np.asarray(norm, dtype=float)[order]
    if math.log10(lam[-1] / lam[0]) < decades - 1e-9:
        raise FitError(f"analyticity index needs samples spanning at least {decades:g} decades")
    trend = fit_exponent(lam, prod, default_window(lam[-1], decades, exclude_top), min_decades=decades)
    return AnalyticityIndex(sup=float(prod.max()), running_sup=np.maximum.accumulate(prod), trend=trend)

"""Counterexample sequences at matched frequencies.

Each regime fixes a forcing ``F_n`` and ties the mode eigenvalue to the probe
frequency, ``sigma_n = lam_n**2 / a**2`` (regime A) or
``sigma_n = alpha lam_n**2 / (a**2 beta)`` (regime B).  The exact modal
resolvent solve is the source of truth; the reduced 2x2 system for
``u_n = mu_n e_n, theta_n = nu_n e_n`` keeps only the leading powers of
``lam_n`` and is compared by growth rate only.

Regime A's reduced right-hand side is ``(1, 1)``, which is twice the one
obtained from its forcing ``(0, 0, -1/(2 alpha), 1/2)``, so the exact
components are about half of ``mu_n, nu_n``.  Rates are unaffected.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .blocknum import COND_LIMIT, REFINE_STEPS, ModalStack, SingularResolventError
from .model import ModelParams, NumericalDefect
from .sweep import FitError, fit_exponent

__all__ = [
    "Regime",
    "ProbeResult",
    "ProbeSeries",
    "SlopeRow",
    "DeltaUnderflowError",
    "probe_exact",
    "probe_asymptotic",
    "probe",
    "probe_series",
    "matched_lambdas",
    "predicted_slopes",
    "series_slopes",
    "scaling_report",
    "DELTA_FLOOR",
    "SLOPE_TOL",
]

DELTA_FLOOR = 1e-300
SLOPE_TOL = 0.05
RESIDUAL_TOL = 1e-9


class DeltaUnderflowError(NumericalDefect):
    pass


class Regime(enum.Enum):
    """Probe construction: forcing and frequency map are tied to the tag."""

    A = "A"
    B = "B"

    def forcing(self, params: ModelParams) -> np.ndarray:
        if self is Regime.A:
            return np.array([0, 0, -0.5 / params.alpha, 0.5], dtype=complex)
        return np.array([0, 0, -1.0 / params.alpha, 0], dtype=complex)

    def sigma_of(self, params: ModelParams, lam):
        lam = np.asarray(lam, dtype=float)
        if self is Regime.A:
            return lam**2 / params.a**2
        return params.alpha * lam**2 / (params.a**2 * params.beta)

    def lambda_of(self, params: ModelParams, sigma):
        sigma = np.asarray(sigma, dtype=float)
        if self is Regime.A:
            return params.a * np.sqrt(sigma)
        return np.sqrt(params.a**2 * params.beta * sigma / params.alpha)

    @property
    def claimed_intervals(self):
        """phi-intervals on which the construction is used, as (lo, hi, closed_lo, closed_hi)."""
        if self is Regime.A:
            return ((0.5, 0.75, False, True),)
        return ((0.0, 0.5, True, True), (0.75, 1.0, True, False))

    def applies(self, phi: float) -> bool:
        for lo, hi, clo, chi in self.claimed_intervals:
            above = phi >= lo if clo else phi > lo
            below = phi <= hi if chi else phi < hi
            if above and below:
                return True
        return False

    def label(self, phi: float) -> str:
        if self is Regime.B and phi == 0:
            return "B (phi=0 construction)"
        return self.value


def _as_regime(regime) -> Regime:
    return regime if isinstance(regime, Regime) else Regime(str(regime).upper())


@dataclass(frozen=True)
class ProbeResult:
    """One point of a probe sequence.  Exact fields are None when only the
    asymptotic part was computed, and vice versa."""

    n: int | None
    lambda_n: float
    sigma_n: float
    regime: Regime
    exact_state: np.ndarray | None = None
    exact_norm: float | None = None
    lambda_norm: float | None = None
    residual: float | None = None
    component_norms: tuple | None = None
    mu: complex | None = None
    nu: complex | None = None
    delta: complex | None = None
    delta_mu: complex | None = None
    delta_nu: complex | None = None
    delta_closed: complex | None = None


def _coefficients(params: ModelParams, regime: Regime, lam):
    """Entries c11, c12, c21, c22 and right-hand side of the reduced system."""
    al, be, a, eta, phi = params.alpha, params.beta, params.a, params.eta, params.phi
    lam = np.asarray(lam, dtype=float)
    a2p = a ** (2 * phi)
    if regime is Regime.A:
        c11 = 1j * (al - be) * lam**3
        c12 = (eta / a2p) * lam ** (2 * phi) + 0j
        c21 = 1j * (eta / a2p) * lam ** (2 * phi + 1) - (al * eta / a2p) * lam ** (2 + 2 * phi)
        c22 = 1j * lam + lam**2 / a**2
        rhs = (1.0, 1.0)
    else:
        k = al**phi / (a2p * be**phi)
        c11 = (be - al) / be * lam**2 + 0j
        c12 = eta * k * lam ** (2 * phi) + 0j
        c21 = 1j * eta * k * lam ** (1 + 2 * phi) - al * eta * k * lam ** (2 + 2 * phi)
        c22 = 1j * lam + al / (a**2 * be) * lam**2
        rhs = (1.0, 0.0)
    return c11, c12, c21, c22, rhs


def _delta_closed(params: ModelParams, regime: Regime, lam):
    """Expanded determinant of the reduced system."""
    al, be, a, eta, phi = params.alpha, params.beta, params.a, params.eta, params.phi
    lam = np.asarray(lam, dtype=float)
    a4p = a ** (4 * phi)
    if regime is Regime.A:
        re = (be - al) * lam**4 + al * eta**2 / a4p * lam ** (2 + 4 * phi)
        im = (be - al) / a**2 * lam**5 + eta**2 / a4p * lam ** (4 * phi + 1)
        return re - 1j * im
    k2 = al ** (2 * phi) / (a4p * be ** (2 * phi))
    re = al * (be - al) / (a**2 * be**2) * lam**4 + al * eta**2 * k2 * lam ** (2 + 4 * phi)
    im = (be - al) / be * lam**3 - eta**2 * k2 * lam ** (4 * phi + 1)
    return re + 1j * im


def _cramer(params, regime, lam):
    c11, c12, c21, c22, (r1, r2) = _coefficients(params, regime, lam)
    delta = c11 * c22 - c12 * c21
    if np.any(np.abs(delta) < DELTA_FLOOR):
        raise DeltaUnderflowError("reduced determinant below 1e-300; rescale lambda")
    d_mu = r1 * c22 - c12 * r2
    d_nu = c11 * r2 - c21 * r1
    return d_mu / delta, d_nu / delta, delta, d_mu, d_nu


def _component_norms(params: ModelParams, sigma, U):
    """Square roots of the four terms of the energy norm, last axis = terms."""
    al, be, a2 = params.alpha, params.beta, params.a**2
    sigma = np.asarray(sigma, dtype=float)
    u, v, w, th = U[..., 0], U[..., 1], U[..., 2], U[..., 3]
    return np.stack([
        np.sqrt(a2 * al * (be - al) * sigma) * np.abs(v),
        np.sqrt(a2 * sigma) * np.abs(u + al * v),
        np.abs(v + al * w),
        np.abs(th),
    ], axis=-1)


def _exact_batch(params: ModelParams, regime: Regime, lams):
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if np.any(lams <= 0) or not np.all(np.isfinite(lams)):
        raise ValueError("probe frequencies must be positive and finite")
    sigma = regime.sigma_of(params, lams)
    stack = ModalStack(params, sigma)
    F = regime.forcing(params)
    # solve in energy-orthonormal coordinates, see blocknum.resolvent_solve
    Mt = 1j * lams[:, None, None] * np.eye(4) - stack.Bt
    s = np.linalg.svd(Mt, compute_uv=False)
    cond = s[:, 0] / s[:, -1]
    if not np.all(cond < COND_LIMIT):
        bad = int(np.argmax(cond))
        raise SingularResolventError(f"resolvent numerically singular at lam={lams[bad]}", float(cond[bad]))
    Ft = np.einsum("nij,j->ni", stack.Lh, F)
    Ut = np.linalg.solve(Mt, Ft[..., None])[..., 0]
    U = np.stack([scipy.linalg.solve_triangular(L, x, lower=False) for L, x in zip(stack.Lh, Ut)])
    M = 1j * lams[:, None, None] * np.eye(4) - stack.B
    for _ in range(REFINE_STEPS):
        r = F - np.einsum("nij,nj->ni", M, U)
        U = U + np.linalg.solve(M, r[..., None])[..., 0]
    Ut = np.einsum("nij,nj->ni", stack.Lh, U)
    norm_u = np.linalg.norm(Ut, axis=-1)
    norm_f = np.linalg.norm(Ft, axis=-1)
    res = np.linalg.norm(np.einsum("nij,nj->ni", Mt, Ut) - Ft, axis=-1)
    if np.any(res > RESIDUAL_TOL * (norm_f + norm_u)):
        raise NumericalDefect("probe solve residual above tolerance")
    return sigma, U, norm_u, res


def probe_exact(params: ModelParams, regime, lambda_n: float, n: int | None = None) -> ProbeResult:
    """Solve ``(i lam_n I - B_n) U_n = F_n`` on the matched mode."""
    regime = _as_regime(regime)
    sigma, U, norm, res = _exact_batch(params, regime, [lambda_n])
    return ProbeResult(
        n=n, lambda_n=float(lambda_n), sigma_n=float(sigma[0]), regime=regime,
        exact_state=U[0], exact_norm=float(norm[0]), lambda_norm=float(lambda_n * norm[0]),
        residual=float(res[0]), component_norms=tuple(_component_norms(params, sigma[0], U[0])),
    )


def probe_asymptotic(params: ModelParams, regime, lambda_n: float, n: int | None = None) -> ProbeResult:
    """Leading-order 2x2 system solved by Cramer's rule."""
    regime = _as_regime(regime)
    if not lambda_n > 0:
        raise ValueError("lambda_n must be positive")
    mu, nu, delta, d_mu, d_nu = _cramer(params, regime, float(lambda_n))
    return ProbeResult(
        n=n, lambda_n=float(lambda_n), sigma_n=float(regime.sigma_of(params, lambda_n)), regime=regime,
        mu=complex(mu), nu=complex(nu), delta=complex(delta), delta_mu=complex(d_mu),
        delta_nu=complex(d_nu), delta_closed=complex(_delta_closed(params, regime, float(lambda_n))),
    )


def probe(params: ModelParams, regime, lambda_n: float, n: int | None = None) -> ProbeResult:
    """Exact and asymptotic parts together."""
    ex = probe_exact(params, regime, lambda_n, n)
    asy = probe_asymptotic(params, regime, lambda_n, n)
    return ProbeResult(**{**asy.__dict__, **{k: v for k, v in ex.__dict__.items() if v is not None}})


class ProbeSeries(NamedTuple):
    """A probe sequence as parallel arrays."""

    regime: Regime
    phi: float
    n: np.ndarray
    lam: np.ndarray
    sigma: np.ndarray
    state: np.ndarray
    norm: np.ndarray
    residual: np.ndarray
    components: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    delta: np.ndarray
    delta_mu: np.ndarray
    delta_nu: np.ndarray
    delta_closed: np.ndarray

    @property
    def lambda_norm(self):
        return self.lam * self.norm

    def __len__(self):
        return len(self.lam)


def probe_series(params: ModelParams, regime, lams, n=None) -> ProbeSeries:
    """Exact and reduced solutions along a sequence of probe frequencies."""
    regime = _as_regime(regime)
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    sigma, U, norm, res = _exact_batch(params, regime, lams)
    mu, nu, delta, d_mu, d_nu = _cramer(params, regime, lams)
    idx = np.arange(1, len(lams) + 1) if n is None else np.asarray(n, dtype=int)
    return ProbeSeries(
        regime=regime, phi=params.phi, n=idx, lam=lams, sigma=sigma, state=U, norm=norm,
        residual=res, components=_component_norms(params, sigma, U), mu=mu, nu=nu,
        delta=delta, delta_mu=d_mu, delta_nu=d_nu, delta_closed=_delta_closed(params, regime, lams),
    )


def matched_lambdas(params: ModelParams, regime, sigma) -> np.ndarray:
    """Probe frequencies whose matched eigenvalues are exactly ``sigma``."""
    return _as_regime(regime).lambda_of(params, sigma)


# Claimed exponents.  Each entry maps a quantity to (exponent, kind) where
# kind is "approx" (two-sided) or "lower" (lower bound), or None if no claim
# is made for that phi.
def predicted_slopes(regime, phi: float) -> dict:
    regime = _as_regime(regime)
    pred = {"abs_mu": None, "abs_nu": None, "abs_delta": None, "norm": None, "lambda_norm": None}
    if regime is Regime.A:
        if 0.5 <= phi <= 0.75:
            pred["abs_delta"] = (5.0, "approx")
            pred["abs_nu"] = (2 * phi - 3, "approx")
            pred["norm"] = (2 * phi - 2, "lower")
            pred["lambda_norm"] = (2 * phi - 1, "lower")
        elif phi >= 0.75:
            pred["abs_delta"] = (2 + 4 * phi, "approx")
        return pred
    pred["abs_delta"] = (4.0 if phi <= 0.5 else 2 + 4 * phi, "approx")
    pred["abs_nu"] = (2 * phi - 2 if phi <= 0.5 else -2 * phi, "approx")
    if phi <= 0.5:
        pred["abs_mu"] = (-2.0, "approx")
        pred["norm"] = (0.0, "approx")
        pred["lambda_norm"] = (2 * phi, "lower")
    else:
        pred["norm"] = (1 - 2 * phi, "lower")
        pred["lambda_norm"] = (2 - 2 * phi, "lower")
    return pred


class SlopeRow(NamedTuple):
    phi: float
    regime: str
    quantity: str
    measured: float
    predicted: float | None
    kind: str | None
    flag: str
    claimed_interval: bool


def _flag(measured, pred, tol=SLOPE_TOL):
    if pred is None:
        return "n/a"
    value, kind = pred
    if kind == "lower":
        return "PASS" if measured >= value - tol else "DISAGREE"
    return "PASS" if abs(measured - value) <= tol else "DISAGREE"


def series_slopes(series: ProbeSeries, window=None) -> dict:
    """Log-log slopes of the tabulated quantities along a probe sequence."""
    data = {
        "abs_mu": np.abs(series.mu),
        "abs_nu": np.abs(series.nu),
        "abs_delta": np.abs(series.delta),
        "norm": series.norm,
        "lambda_norm": series.lambda_norm,
    }
    return {k: fit_exponent(series.lam, v, window) for k, v in data.items()}


def scaling_report(params: ModelParams, regime, phi_list, lambda_range=(1e2, 1e5), points=64):
    """Measured against predicted exponents for every phi; disagreements are
    flagged, never raised."""
    regime = _as_regime(regime)
    lo, hi = lambda_range
    if not 0 < lo < hi or math.log10(hi / lo) < 3 - 1e-9:
        raise FitError("lambda_range must span at least 3 decades")
    lams = np.logspace(math.log10(lo), math.log10(hi), points)
    rows = []
    for phi in phi_list:
        q = params.replace(phi=float(phi))
        slopes = series_slopes(probe_series(q, regime, lams))
        pred = predicted_slopes(regime, float(phi))
        for key, fit in slopes.items():
            p = pred[key]
            rows.append(SlopeRow(
                phi=float(phi), regime=regime.label(float(phi)), quantity=key, measured=fit.slope,
                predicted=None if p is None else p[0], kind=None if p is None else p[1],
                flag=_flag(fit.slope, p), claimed_interval=regime.applies(float(phi)),
            ))
    return rows

"""Model parameters, the spectrum of A, and the per-mode generator blocks.

The operator A is represented only through its eigenvalues sigma_n.  On the
mode spanned by the n-th eigenvector the generator acts on the coefficient
vector ``(u, v, w, theta)`` through a 4x4 complex matrix, and the energy inner
product restricts to a 4x4 Hermitian Gram matrix.  State vectors are plain
complex numpy arrays of shape ``(..., 4)`` ordered ``(u, v, w, theta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "ParameterError",
    "SpectrumError",
    "NumericalDefect",
    "ModelParams",
    "SpectrumModel",
    "ModeBlock",
    "validate_params",
    "build_spectrum",
    "frac_power",
    "generator_matrix",
    "gram_matrix",
    "assemble_block",
    "mode_state",
    "mode_norm",
    "dissipation_rate",
]

PARAM_NAMES = ("alpha", "beta", "a", "eta", "phi")


class ParameterError(ValueError):
    """Invalid model coefficients. ``key`` names the offending parameter."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class SpectrumError(ValueError):
    pass


class NumericalDefect(ArithmeticError):
    """A runtime check that must hold for valid inputs failed."""


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    beta: float
    a: float
    eta: float
    phi: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in PARAM_NAMES}

    def replace(self, **changes) -> "ModelParams":
        d = self.as_dict()
        d.update(changes)
        return validate_params(d)


def validate_params(raw=None, **kwargs) -> ModelParams:
    """Check coefficients and return a :class:`ModelParams`.

    ``raw`` may be a mapping with keys ``alpha, beta, a, eta, phi``, a
    sequence of five numbers in that order, or omitted in favour of keyword
    arguments.
    """
    if raw is None:
        raw = kwargs
    if isinstance(raw, ModelParams):
        raw = raw.as_dict()
    if isinstance(raw, Mapping):
        missing = [k for k in PARAM_NAMES if k not in raw]
        if missing:
            raise ParameterError(f"missing parameter(s): {', '.join(missing)}", missing[0])
        values = {k: raw[k] for k in PARAM_NAMES}
    else:
        seq = list(raw)
        if len(seq) != 5:
            raise ParameterError("expected five coefficients (alpha, beta, a, eta, phi)")
        values = dict(zip(PARAM_NAMES, seq))

    for k, v in values.items():
        try:
            values[k] = float(v)
        except (TypeError, ValueError):
            raise ParameterError(f"{k} must be a real number, got {v!r}", k) from None
        if not math.isfinite(values[k]):
            raise ParameterError(f"{k} must be finite", k)

    if values["alpha"] <= 0:
        raise ParameterError("alpha must be positive", "alpha")
    if values["a"] <= 0:
        raise ParameterError("a must be positive", "a")
    if values["eta"] == 0:
        raise ParameterError("eta must be nonzero", "eta")
    if not 0.0 <= values["phi"] <= 1.0:
        raise ParameterError(f"phi out of range [0, 1]: {values['phi']}", "phi")
    if values["beta"] <= values["alpha"]:
        raise ParameterError(
            "beta must exceed alpha (subcritical condition; otherwise the "
            "energy form is not positive definite and the generator is not dissipative)",
            "beta",
        )
    return ModelParams(**values)


@dataclass(frozen=True)
class SpectrumModel:
    """Eigenvalues of A: ``power_law`` gives ``c * n**p``; ``explicit`` lists them."""

    kind: str = "power_law"
    count: int = 256
    c: float = math.pi**2
    p: float = 2.0
    values: tuple = field(default=())

    @classmethod
    def power_law(cls, c=math.pi**2, p=2.0, count=256):
        return cls(kind="power_law", count=count, c=c, p=p)

    @classmethod
    def explicit(cls, values, count=None):
        values = tuple(float(x) for x in values)
        return cls(kind="explicit", count=len(values) if count is None else count, values=values)


def build_spectrum(spec: SpectrumModel) -> np.ndarray:
    """Return sigma_1..sigma_N as a float array (positive, non-decreasing)."""
    if int(spec.count) != spec.count or spec.count < 1:
        raise SpectrumError(f"count must be a positive integer, got {spec.count!r}")
    n = int(spec.count)
    if spec.kind == "power_law":
        if not (spec.c > 0 and spec.p > 0):
            raise SpectrumError("power_law needs c > 0 and p > 0")
        sigma = spec.c * np.arange(1, n + 1, dtype=float) ** spec.p
    elif spec.kind == "explicit":
        if len(spec.values) < n:
            raise SpectrumError(f"explicit spectrum has {len(spec.values)} values, count is {n}")
        sigma = np.asarray(spec.values[:n], dtype=float)
        if np.any(~np.isfinite(sigma)) or np.any(sigma <= 0):
            raise SpectrumError("explicit spectrum must be finite and strictly positive")
        if np.any(np.diff(sigma) < 0):
            raise SpectrumError("explicit spectrum is non-monotone (must be non-decreasing)")
    else:
        raise SpectrumError(f"unknown spectrum kind {spec.kind!r}")
    if not np.isfinite(sigma[-1]):
        raise SpectrumError("spectrum overflows double precision")
    return sigma


def frac_power(sigma, phi):
    """sigma**phi as exp(phi*log(sigma)); phi=0 and phi=1 are exact."""
    sigma = np.asarray(sigma, dtype=float)
    if phi == 0:
        return np.ones_like(sigma)
    if phi == 1:
        return sigma.copy()
    return np.exp(phi * np.log(sigma))


def generator_matrix(params: ModelParams, sigma) -> np.ndarray:
    """Generator restricted to mode(s) ``sigma``; shape ``sigma.shape + (4, 4)``."""
    al, be, a2, eta = params.alpha, params.beta, params.a**2, params.eta
    s = np.asarray(sigma, dtype=float)
    sp = frac_power(s, params.phi)
    B = np.zeros(s.shape + (4, 4), dtype=complex)
    B[..., 0, 1] = 1.0
    B[..., 1, 2] = 1.0
    B[..., 2, 0] = -a2 * s / al
    B[..., 2, 1] = -a2 * be * s / al
    B[..., 2, 2] = -1.0 / al
    B[..., 2, 3] = eta * sp / al
    B[..., 3, 1] = -eta * sp
    B[..., 3, 2] = -al * eta * sp
    B[..., 3, 3] = -s
    return B


def gram_matrix(params: ModelParams, sigma) -> np.ndarray:
    """Gram matrix of the energy form
    a^2 al (be-al) s|v|^2 + a^2 s|u+al v|^2 + |v+al w|^2 + |theta|^2."""
    al, be, a2 = params.alpha, params.beta, params.a**2
    s = np.asarray(sigma, dtype=float)
    W = np.zeros(s.shape + (4, 4), dtype=complex)
    W[..., 0, 0] = a2 * s
    W[..., 0, 1] = W[..., 1, 0] = a2 * s * al
    W[..., 1, 1] = a2 * al * (be - al) * s + a2 * s * al**2 + 1.0
    W[..., 1, 2] = W[..., 2, 1] = al
    W[..., 2, 2] = al**2
    W[..., 3, 3] = 1.0
    return W


@dataclass(frozen=True, eq=False)
class ModeBlock:
    """One mode: eigenvalue, generator ``B``, Gram ``W`` and its lower Cholesky factor."""

    sigma: float
    B: np.ndarray
    W: np.ndarray
    W_chol: np.ndarray

    def __post_init__(self):
        for arr in (self.B, self.W, self.W_chol):
            arr.setflags(write=False)


def assemble_block(params: ModelParams, sigma: float) -> ModeBlock:
    sigma = float(sigma)
    if not sigma > 0:
        raise SpectrumError(f"sigma must be positive, got {sigma}")
    B = generator_matrix(params, sigma)
    W = gram_matrix(params, sigma)
    try:
        Lw = np.linalg.cholesky(W)
    except np.linalg.LinAlgError as exc:
        raise NumericalDefect(f"Gram matrix not positive definite at sigma={sigma}") from exc
    return ModeBlock(sigma=sigma, B=B, W=W, W_chol=Lw)


def mode_state(u=0.0, v=0.0, w=0.0, theta=0.0) -> np.ndarray:
    return np.array([u, v, w, theta], dtype=complex)


def mode_norm(block: ModeBlock, state) -> float:
    """Energy norm of a modal state, computed as ||W_chol^H U||."""
    U = np.asarray(state, dtype=complex)
    return np.linalg.norm(U @ block.W_chol.conj(), axis=-1)


def dissipation_rate(block: ModeBlock, params: ModelParams, state):
    """-a^2 (be-al) s |v|^2 - s |theta|^2, the real part of <B U, U> on the mode."""
    U = np.asarray(state, dtype=complex)
    s = block.sigma
    return -params.a**2 * (params.beta - params.alpha) * s * np.abs(U[..., 1]) ** 2 - s * np.abs(U[..., 3]) ** 2

"""Dense 4x4 kernels: resolvent solves, weighted norms, eigenvalues, propagators.

Weighted norms use the upper factor ``Lh = W_chol^H``: the energy norm of
``U`` is ``||Lh U||``, so a map ``M`` has energy-operator norm
``||Lh M Lh^{-1}||_2``.  :class:`ModalStack` keeps the generator of many modes
in these orthonormal coordinates, where the resolvent norm on the imaginary
axis is ``1 / s_min(i lam I - Bt)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .model import ModeBlock, ModelParams, NumericalDefect, generator_matrix, gram_matrix

__all__ = [
    "SingularResolventError",
    "ResolventSolveResult",
    "resolvent_solve",
    "weighted_map_norm",
    "block_resolvent_norm",
    "block_eigenvalues",
    "block_propagator",
    "ModalStack",
]

EIGVEC_COND_LIMIT = 1e8
COND_LIMIT = 1e14
REFINE_STEPS = 2
_I4 = np.eye(4)


class SingularResolventError(NumericalDefect):
    def __init__(self, message, cond=np.inf):
        super().__init__(message)
        self.cond = cond


@dataclass(frozen=True)
class ResolventSolveResult:
    state: np.ndarray
    residual: float


def _upper(block: ModeBlock):
    return block.W_chol.conj().T


def resolvent_solve(block: ModeBlock, lam: float, F) -> ResolventSolveResult:
    """Solve ``(i lam I - B) U = F`` by LU with partial pivoting.

    The system is solved in energy-orthonormal coordinates ``Lh U``, where
    the large entries of ``B`` at high modes no longer amplify rounding, then
    mapped back and polished by two steps of iterative refinement in the
    original coordinates, which restores relative accuracy of components
    carrying little energy.  The residual is measured in the energy norm.
    """
    F = np.asarray(F, dtype=complex)
    Lh = _upper(block)
    M = 1j * lam * _I4 - block.B
    Mt = _similar(Lh, M)
    sv = np.linalg.svd(Mt, compute_uv=False)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if not cond < COND_LIMIT:
        raise SingularResolventError(f"resolvent numerically singular at lam={lam} (cond={cond:.3e})", cond)
    try:
        lu_t = scipy.linalg.lu_factor(Mt, check_finite=True)
        lu = scipy.linalg.lu_factor(M, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularResolventError(f"resolvent at lam={lam} could not be factored", cond) from exc
    Ft = Lh @ F
    U = scipy.linalg.solve_triangular(Lh, scipy.linalg.lu_solve(lu_t, Ft), lower=False)
    for _ in range(REFINE_STEPS):
        U = U + scipy.linalg.lu_solve(lu, F - M @ U)
    residual = float(np.linalg.norm(Mt @ (Lh @ U) - Ft))
    return ResolventSolveResult(state=U, residual=residual)


def _similar(Lh, M):
    """Lh @ M @ inv(Lh) with Lh upper triangular."""
    T = Lh @ np.asarray(M, dtype=complex)
    return scipy.linalg.solve_triangular(Lh.T, T.T, lower=True).T


def weighted_map_norm(M, block: ModeBlock) -> float:
    """Operator norm of ``M`` on the mode with the energy inner product."""
    return float(np.linalg.svd(_similar(_upper(block), M), compute_uv=False)[0])


def block_resolvent_norm(block: ModeBlock, lam: float) -> float:
    M = 1j * lam * _I4 - block.B
    try:
        R = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise SingularResolventError(f"i*{lam} is an eigenvalue of the block") from exc
    return weighted_map_norm(R, block)


def block_eigenvalues(block: ModeBlock) -> np.ndarray:
    """Eigenvalues of ``B`` sorted by real part, descending."""
    z = np.linalg.eigvals(block.B)
    return z[np.lexsort((-z.imag, -z.real))]


def block_propagator(block: ModeBlock, t: float) -> np.ndarray:
    """``exp(t B)``.  Eigendecomposition when the eigenvector basis is well
    conditioned, scaling-and-squaring Pade otherwise."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return np.eye(4, dtype=complex)
    z, V = np.linalg.eig(block.B)
    if np.linalg.cond(V) < EIGVEC_COND_LIMIT:
        return (V * np.exp(t * z)) @ np.linalg.inv(V)
    return scipy.linalg.expm(t * block.B)


class ModalStack:
    """Generator blocks of many modes, batched along the first axis."""

    def __init__(self, params: ModelParams, sigma):
        self.params = params
        self.sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
        self.B = generator_matrix(params, self.sigma)
        W = gram_matrix(params, self.sigma)
        try:
            self.W_chol = np.linalg.cholesky(W)
        except np.linalg.LinAlgError as exc:
            raise NumericalDefect("Gram matrix not positive definite") from exc
        self.Lh = np.conj(np.swapaxes(self.W_chol, -1, -2))
        # Bt = Lh B Lh^{-1}, via Lh^H Bt^H = (Lh B)^H
        LB = self.Lh @ self.B
        self.Bt = np.conj(np.swapaxes(
            np.linalg.solve(np.conj(np.swapaxes(self.Lh, -1, -2)), np.conj(np.swapaxes(LB, -1, -2))),
            -1, -2))

    def __len__(self):
        return len(self.sigma)

    def subset(self, index) -> "ModalStack":
        new = object.__new__(ModalStack)
        new.params = self.params
        for name in ("sigma", "B", "W_chol", "Lh", "Bt"):
            setattr(new, name, getattr(self, name)[index])
        return new

    def resolvent_norms(self, lam) -> np.ndarray:
        """Block resolvent norms. ``lam`` scalar -> shape (N,); ``lam`` of
        shape (N,) pairs each mode with its own frequency."""
        lam = np.asarray(lam, dtype=float)
        M = -self.Bt.copy()
        idx = np.arange(4)
        M[..., idx, idx] += 1j * (lam[..., None] if lam.ndim else lam)
        s = np.linalg.svd(M, compute_uv=False)
        smin = s[..., -1]
        if np.any(smin <= 0):
            raise SingularResolventError("imaginary-axis point in the spectrum of a block")
        return 1.0 / smin

    def resolvent_norm_grid(self, lams) -> np.ndarray:
        """Norms for every (lam, mode) pair, shape (len(lams), N)."""
        return np.stack([self.resolvent_norms(l) for l in np.asarray(lams, dtype=float)])

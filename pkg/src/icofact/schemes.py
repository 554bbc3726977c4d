"""Factorization update schemes on the reduced problem (K, L, M).

All four schemes fit X ~ D B C (or X ~ D B B^T D^T X for the projective
scheme) but only ever touch the reduced products K = D^T D, L = X^T D and
M = L^T L, so one iteration costs O(n_k^2 n_d + n_k n_d n_s) regardless of
the mesh resolution:

  DL      min 1/2 ||X - DBC||^2 + lam(||B||_1 + ||C||_1), alternating
          proximal gradient with soft thresholding (PALM), signed factors
  PNNMF   min ||X - DBC||^2 + lam(||B||_F^2 + ||C||_F^2), B, C >= 0,
          multiplicative updates with the penalty joined to the numerator
  SPNNMF  min 1/2 ||X - DBC||^2 + lam(||B||_1 + ||C||_1), B, C >= 0,
          multiplicative updates with an all-ones penalty gradient
  PPNMF   min ||X - D B B^T D^T X||^2, B >= 0, loadings implicit, halved
          multiplicative update for stability

Both factor updates in one step use the freshly updated B for the C step.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DivergenceError

# Floor applied to multiplicative denominators. Keeps exact fixed points
# (numerator == denominator leaves Y unchanged) while preventing blow-up
# when a denominator entry collapses to zero.
EPS_DIV = 1e-12


class SchemeKind(str, Enum):
    DL = "dl"
    PNNMF = "pnnmf"
    SPNNMF = "spnnmf"
    PPNMF = "ppnmf"

    @property
    def has_loadings(self):
        return self is not SchemeKind.PPNMF


@dataclass
class FactorState:
    """Current factors in design coordinates; C is None for PPNMF."""

    B: np.ndarray  # (n_k, n_d)
    C: np.ndarray | None  # (n_d, n_s)
    iteration: int = 0

    def implicit_C(self, cp):
        """Loadings B^T D^T X = B^T L^T, the projection PPNMF never stores."""
        return self.B.T @ cp.L.T


def soft_threshold(Z, alpha):
    """Entrywise sign(z) * max(0, |z| - alpha)."""
    return np.sign(Z) * np.maximum(np.abs(Z) - alpha, 0.0)


def multiplicative_update(Y, Gplus, Gminus):
    """Y * G- / G+ entrywise, the gradient step with per-entry step Y/G+.

    Requires Y, G+, G- >= 0; the result is nonnegative and zeros of Y are
    absorbing. The denominator is floored at EPS_DIV.
    """
    return Y * Gminus / np.maximum(Gplus, EPS_DIV)


def spectral_norm(A, tol=1e-6, max_iter=100):
    """Largest singular value by power iteration on A^T A.

    Matrix-free (only products with A and A^T), deterministic start,
    relative tolerance on successive estimates.
    """
    A = np.asarray(A)
    v = np.random.default_rng(0x5EED).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = A @ v
        s = np.linalg.norm(w)
        if s == 0.0:
            return 0.0
        v = A.T @ w
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return s
        v /= nv
        if abs(s - sigma) <= tol * s:
            return s
        sigma = s
    return sigma


def _check_finite(factor, name, iteration):
    if not np.isfinite(factor).all():
        raise DivergenceError(name, iteration)


def step_dl(state, cp, lam, eta):
    """One PALM sweep: gradient step plus soft threshold on B, then C."""
    B, C = state.B, state.C
    it = state.iteration + 1
    CCt = C @ C.T
    B = soft_threshold(B - eta * (cp.K @ B @ CCt - cp.L.T @ C.T), lam * eta)
    _check_finite(B, "B", it)
    C = soft_threshold(C - eta * ((B.T @ (cp.K @ B)) @ C - B.T @ cp.L.T), lam * eta)
    _check_finite(C, "C", it)
    return FactorState(B, C, it)


def step_pnnmf(state, cp, lam):
    """Multiplicative sweep with the Frobenius penalty joined to the numerator.

    B <- B * [L^T C^T - lam B]_+ / [K B C C^T], then the symmetric C update
    using the new B.
    """
    B, C = state.B, state.C
    it = state.iteration + 1
    num = np.maximum(cp.L.T @ C.T - lam * B, 0.0)
    den = cp.K @ B @ (C @ C.T)
    B = multiplicative_update(B, den, num)
    _check_finite(B, "B", it)
    num = np.maximum(B.T @ cp.L.T - lam * C, 0.0)
    den = (B.T @ (cp.K @ B)) @ C
    C = multiplicative_update(C, den, num)
    _check_finite(C, "C", it)
    return FactorState(B, C, it)


def step_spnnmf(state, cp, lam):
    """Sparse variant: the penalty gradient is lam * ones in both numerators."""
    B, C = state.B, state.C
    it = state.iteration + 1
    num = np.maximum(cp.L.T @ C.T - lam, 0.0)
    den = cp.K @ B @ (C @ C.T)
    B = multiplicative_update(B, den, num)
    _check_finite(B, "B", it)
    num = np.maximum(B.T @ cp.L.T - lam, 0.0)
    den = (B.T @ (cp.K @ B)) @ C
    C = multiplicative_update(C, den, num)
    _check_finite(C, "C", it)
    return FactorState(B, C, it)


def step_ppnmf(state, cp):
    """Halved projective update B <- B * (1/2 + [MB] / [(KBB'M + MBB'K)B])."""
    B = state.B
    it = state.iteration + 1
    MB = cp.M @ B
    KB = cp.K @ B
    den = cp.K @ (B @ (B.T @ MB)) + cp.M @ (B @ (B.T @ KB))
    B = B * (0.5 + MB / np.maximum(den, EPS_DIV))
    _check_finite(B, "B", it)
    return FactorState(B, None, it)


def objective(kind, state, cp, lam, x_norm_sq):
    """Scheme objective evaluated through K, L, M only.

    Uses ||X - DBC||^2 = ||X||^2 - 2 tr(L B C) + <BC, K BC> (and the
    analogous expansion with P = B B^T for the projective scheme), so the
    data dimension never enters. Data-term weights follow each scheme's
    minimization problem: 1/2 for DL and SPNNMF, 1 for PNNMF and PPNMF.
    """
    B = state.B
    if kind is SchemeKind.PPNMF:
        P = B @ B.T
        PM = P @ cp.M
        return x_norm_sq - 2.0 * np.trace(PM) + np.vdot(cp.K @ P, PM)
    C = state.C
    BC = B @ C
    data = x_norm_sq - 2.0 * np.vdot(cp.L.T, BC) + np.vdot(BC, cp.K @ BC)
    if kind is SchemeKind.DL:
        return 0.5 * data + lam * (np.abs(B).sum() + np.abs(C).sum())
    if kind is SchemeKind.PNNMF:
        return data + lam * (np.vdot(B, B) + np.vdot(C, C))
    if kind is SchemeKind.SPNNMF:
        return 0.5 * data + lam * (np.abs(B).sum() + np.abs(C).sum())
    raise ValueError(f"unknown scheme {kind}")


def analytic_gradients(kind, state, cp, lam):
    """Gradients of each scheme's smooth objective part.

    Returns (grad_B, grad_C); grad_C is None for PPNMF. The nonsmooth L1
    penalties of DL and SPNNMF are excluded, the smooth Frobenius penalty
    of PNNMF is included.
    """
    B = state.B
    if kind is SchemeKind.PPNMF:
        MB = cp.M @ B
        KB = cp.K @ B
        gB = -4.0 * MB + 2.0 * (cp.K @ (B @ (B.T @ MB)) + cp.M @ (B @ (B.T @ KB)))
        return gB, None
    C = state.C
    gB = cp.K @ B @ (C @ C.T) - cp.L.T @ C.T
    gC = (B.T @ (cp.K @ B)) @ C - B.T @ cp.L.T
    if kind is SchemeKind.PNNMF:
        return 2.0 * (gB + lam * B), 2.0 * (gC + lam * C)
    if kind in (SchemeKind.DL, SchemeKind.SPNNMF):
        return gB, gC
    raise ValueError(f"unknown scheme {kind}")

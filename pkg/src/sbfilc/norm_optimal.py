"""Norm-optimal parameter update ``theta_next = Q theta + L e``.

The update minimises, over ``theta_next``::

    1/2 |e_next|^2_We + 1/2 |Psi theta_next|^2_Wf + 1/2 |Psi (theta_next - theta)|^2_Wdf

with ``e_next = e - J Psi (theta_next - theta)``.  All weights are diagonal.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from .errors import DimensionError, ParameterError, RankDeficiencyError

log = logging.getLogger(__name__)

# below this reciprocal condition number the Cholesky solve is not trusted
RCOND_MIN = 1e-14
# eigenvalues under EIG_THRESHOLD * max eigenvalue count as zero (rank checks)
EIG_THRESHOLD = 1e-10
# the norm-optimal pseudo-solve drops singular values of the stacked
# weighted design below SV_THRESHOLD * largest singular value
SV_THRESHOLD = 1e-10


@dataclass(frozen=True, eq=False)
class Weights:
    """Diagonals of ``W_e``, ``W_f`` and ``W_df``."""

    e: np.ndarray
    f: np.ndarray
    df: np.ndarray

    def __post_init__(self):
        arrs = []
        for name in ("e", "f", "df"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 1:
                raise DimensionError(f"weight {name} must be a 1-D diagonal")
            if np.any(a < 0) or not np.all(np.isfinite(a)):
                raise ParameterError(f"weight {name} must be finite and nonnegative")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
            arrs.append(a)
        if len({a.size for a in arrs}) != 1:
            raise DimensionError("weight diagonals differ in length")

    @classmethod
    def scalar(cls, N, e=1.0, f=0.0, df=0.0):
        return cls(np.full(N, float(e)), np.full(N, float(f)), np.full(N, float(df)))

    @property
    def N(self) -> int:
        return self.e.size


@dataclass(frozen=True, eq=False)
class UpdateMatrices:
    L: np.ndarray
    Q: np.ndarray
    pseudo: bool = False


def objective(theta_next, theta, e, J, psi, W: Weights) -> float:
    """Quadratic cost of choosing ``theta_next`` after measuring ``e`` at ``theta``."""
    P = psi.matrix
    dtheta = np.asarray(theta_next) - np.asarray(theta)
    e_next = e - J.matrix @ (P @ dtheta)
    f_next = P @ theta_next
    df = P @ dtheta
    return 0.5 * (e_next @ (W.e * e_next) + f_next @ (W.f * f_next) + df @ (W.df * df))


def dependent_columns(M, tol=EIG_THRESHOLD):
    """Columns of a PSD matrix that a pivoted QR deems numerically dependent."""
    _, R, piv = linalg.qr(M, pivoting=True, mode="economic")
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0.0:
        return list(range(M.shape[1]))
    rank = int(np.sum(d > tol * d[0]))
    return sorted(int(i) for i in piv[rank:])


def spd_solve(M, rhs, allow_pseudo=True, what="normal matrix"):
    """Solve ``M X = rhs`` for symmetric PSD ``M``.

    Returns ``(X, pseudo)``.  Cholesky is used when it succeeds with an
    acceptable condition estimate; otherwise either an eigenvalue-thresholded
    pseudo-solve is used or ``RankDeficiencyError`` is raised.
    """
    M = 0.5 * (M + M.T)
    try:
        c, lower = linalg.cho_factor(M, lower=True, check_finite=False)
        anorm = np.max(np.sum(np.abs(M), axis=0))
        rcond, info = lapack.dpocon(c, anorm, uplo="L")
        if info == 0 and rcond >= RCOND_MIN:
            return linalg.cho_solve((c, lower), rhs, check_finite=False), False
    except linalg.LinAlgError:
        pass
    if not allow_pseudo:
        raise RankDeficiencyError(f"singular {what}", dependent_columns(M))
    w, V = linalg.eigh(M)
    keep = w > EIG_THRESHOLD * max(w[-1], 0.0)
    if not np.any(keep):
        raise RankDeficiencyError(f"{what} is numerically zero", range(M.shape[1]))
    log.warning("%s ill-conditioned: pseudo-solve keeps %d of %d directions",
                what, int(keep.sum()), M.shape[0])
    Vk = V[:, keep]
    z = Vk.T @ rhs
    z /= w[keep].reshape((-1,) + (1,) * (z.ndim - 1))
    return Vk @ z, True


def _svd_update_matrices(JP, P, W: Weights) -> UpdateMatrices:
    """``L`` and ``Q`` from a truncated SVD of the stacked weighted design.

    With ``A = [sqrt(We) J Psi; sqrt(Wf) Psi; sqrt(Wdf) Psi] = U S V^T`` the
    pseudo-inverse of ``M = A^T A`` is ``V S^-2 V^T``, so::

        L = V S^-1 U_e^T sqrt(We)
        Q = V S^-1 (U_e^T A_e + U_df^T A_df)

    Both are formed from the same factors, so ``Q - L J Psi`` stays exactly
    the ``W_df`` part even when ``M`` is far too ill-conditioned to invert.
    """
    N = P.shape[0]
    se, sf, sdf = np.sqrt(W.e), np.sqrt(W.f), np.sqrt(W.df)
    Ae, Af, Adf = se[:, None] * JP, sf[:, None] * P, sdf[:, None] * P
    U, sv, Vt = linalg.svd(np.vstack([Ae, Af, Adf]), full_matrices=False)
    keep = sv > SV_THRESHOLD * (sv[0] if sv.size else 0.0)
    if not np.any(keep):
        raise RankDeficiencyError("norm-optimal design is numerically zero",
                                  range(P.shape[1]))
    log.warning("norm-optimal normal matrix ill-conditioned: pseudo-solve keeps "
                "%d of %d directions", int(keep.sum()), P.shape[1])
    Uk, Vk, inv = U[:, keep], Vt[keep].T, 1.0 / sv[keep]
    Ue, Udf = Uk[:N], Uk[2 * N:]
    L = Vk @ (inv[:, None] * (Ue.T * se))
    Q = Vk @ (inv[:, None] * (Ue.T @ Ae + Udf.T @ Adf))
    return UpdateMatrices(L, Q, True)


def lq_matrices(J, psi, W: Weights, allow_pseudo=True) -> UpdateMatrices:
    """Learning matrix ``L`` and robustness matrix ``Q`` of the norm-optimal update."""
    P = psi.matrix
    N = J.N
    if P.shape[0] != N or W.N != N:
        raise DimensionError(
            f"J is {N}x{N}, basis has {P.shape[0]} rows, weights have {W.N}")
    JP = J.matrix @ P
    WeJP = W.e[:, None] * JP
    A = JP.T @ WeJP
    B_f = P.T @ (W.f[:, None] * P)
    B_df = P.T @ (W.df[:, None] * P)
    M = A + B_f + B_df
    rhs = np.hstack([WeJP.T, A + B_df])
    try:
        X, _ = spd_solve(M, rhs, False, "norm-optimal normal matrix")
    except RankDeficiencyError:
        if not allow_pseudo:
            raise
        return _svd_update_matrices(JP, P, W)
    return UpdateMatrices(X[:, :N], X[:, N:], False)


def no_update(theta, e, M: UpdateMatrices) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    e = np.asarray(e, dtype=float)
    if theta.shape != (M.Q.shape[0],) or e.shape != (M.L.shape[1],):
        raise DimensionError(
            f"theta {theta.shape} / e {e.shape} do not match L {M.L.shape}")
    return M.Q @ theta + M.L @ e

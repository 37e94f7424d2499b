"""Sparse parameter learning: LASSO regression form, LARS path, debiasing.

The norm-optimal cost is rewritten as a least-squares problem
``|Y - X theta|^2`` with stacked blocks::

    X = [ sqrt(We) J ; -sqrt(Wf) ; -sqrt(Wdf) ] Psi
    Y = [ sqrt(We) (e + J Psi theta_j) ; 0 ; -sqrt(Wdf) Psi theta_j ]

so that ``|Y - X theta|^2 = 2 * cost(theta)``.  The penalised problem
``|Y - X theta|^2 + lam |theta|_1`` is traced with LARS (LASSO variant) until
a requested number of parameters is active, then refit by least squares on
that support.

Penalty convention: at a solution for ``lam``, every active column satisfies
``|x_i^T (Y - X theta)| = lam / 2``.  LARS runs on unit-norm columns, so the
``lam`` values it reports refer to the standardised problem; for a design
whose columns already have unit norm the two coincide.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import (
    CollinearityError,
    DimensionError,
    ParameterError,
    RankDeficiencyError,
    UnsupportedWeightsError,
)
from .norm_optimal import Weights

TIE_TOL = 1e-12
STEP_TOL = 1e-14
# active unit-norm columns whose pivoted-QR diagonal falls below this
# fraction of the largest are treated as linearly dependent
COLLINEAR_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RegressionProblem:
    X: np.ndarray
    Y: np.ndarray
    col_norms: np.ndarray = field(default=None)

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        Y = np.array(self.Y, dtype=float)
        if X.ndim != 2 or Y.shape != (X.shape[0],):
            raise DimensionError(f"X {X.shape} and Y {Y.shape} are inconsistent")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "col_norms", np.linalg.norm(X, axis=0))

    @property
    def n_params(self) -> int:
        return self.X.shape[1]

    def rss(self, theta) -> float:
        r = self.Y - self.X @ theta
        return float(r @ r)


def _diag_of(w, name):
    w = np.asarray(w, dtype=float)
    if w.ndim == 2:
        if w.shape[0] != w.shape[1] or np.any(w - np.diag(np.diag(w))):
            raise UnsupportedWeightsError(f"weight {name} is not diagonal")
        w = np.diag(w)
    return w


def as_weights(W) -> Weights:
    """Accept ``Weights`` or a triple of diagonals / diagonal matrices."""
    if isinstance(W, Weights):
        return W
    we, wf, wdf = W
    return Weights(_diag_of(we, "e"), _diag_of(wf, "f"), _diag_of(wdf, "df"))


def build_regression(e, theta, J, psi, W) -> RegressionProblem:
    """Stacked regressors for the next-trial cost at ``(theta, e)``."""
    W = as_weights(W)
    P = psi.matrix
    N = J.N
    e = np.asarray(e, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if e.shape != (N,) or theta.shape != (P.shape[1],) or P.shape[0] != N or W.N != N:
        raise DimensionError("e, theta, J, Psi and weights have inconsistent sizes")
    se, sf, sdf = np.sqrt(W.e), np.sqrt(W.f), np.sqrt(W.df)
    JP = J.matrix @ P
    X = np.vstack([se[:, None] * JP, -sf[:, None] * P, -sdf[:, None] * P])
    f = P @ theta
    Y = np.concatenate([se * (e + JP @ theta), np.zeros(N), -sdf * f])
    return RegressionProblem(X, Y)


@dataclass(frozen=True, eq=False)
class Breakpoint:
    lam: float
    active: tuple
    coef: np.ndarray
    signs: tuple


@dataclass(eq=False)
class LarsPath:
    breakpoints: list
    n_params: int

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([b.lam for b in self.breakpoints])

    @property
    def coef(self) -> np.ndarray:
        """Biased coefficients at the end of the path."""
        if not self.breakpoints:
            return np.zeros(self.n_params)
        return self.breakpoints[-1].coef

    @property
    def active(self) -> tuple:
        return self.breakpoints[-1].active if self.breakpoints else ()

    def coef_at(self, lam) -> np.ndarray:
        """Linear interpolation of the coefficients between breakpoints."""
        lams = self.lambdas
        if lams.size == 0 or lam >= lams[0]:
            return np.zeros(self.n_params)
        if lam <= lams[-1]:
            if lam < lams[-1]:
                raise ParameterError(f"lambda {lam} lies beyond the computed path")
            return self.coef
        k = int(np.searchsorted(-lams, -lam))  # lams[k-1] > lam >= lams[k]
        lo, hi = self.breakpoints[k - 1], self.breakpoints[k]
        t = (lo.lam - lam) / (lo.lam - hi.lam)
        return (1 - t) * lo.coef + t * hi.coef

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["breakpoint", "lambda", "active", "l1_norm"])
            for i, b in enumerate(self.breakpoints):
                w.writerow([i, format(b.lam, ".17g"), " ".join(map(str, b.active)),
                            format(float(np.abs(b.coef).sum()), ".17g")])


def _lowest_within(values, candidates, best):
    """Lowest index among ``candidates`` whose value ties with ``best``."""
    slack = TIE_TOL * max(abs(best), 1e-300)
    for i in candidates:
        if values[i] <= best + slack:
            return int(i)
    raise AssertionError("no candidate attains the minimum")


def _equiangular(XA, s, active):
    """Solve ``XA^T XA w = s`` from a pivoted QR of the (unit-norm) active columns.

    Working on ``XA`` instead of its Gram matrix keeps the conditioning at
    ``cond(XA)`` rather than its square.
    """
    _, R, piv = linalg.qr(XA, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    rank = int(np.sum(d > COLLINEAR_TOL * d[0])) if d.size else 0
    if rank < len(active):
        raise CollinearityError("equiangular direction undefined",
                                [active[i] for i in piv[rank:]])
    sp = s[piv]
    z = linalg.solve_triangular(R, sp, trans="T", check_finite=False)
    wp = linalg.solve_triangular(R, z, check_finite=False)
    w = np.empty_like(wp)
    w[piv] = wp
    return w


def lars_lasso(prob: RegressionProblem, n_theta: int) -> LarsPath:
    """LARS with the LASSO modification, limited to ``n_theta`` active columns.

    The path is followed until the segment on which ``n_theta`` coefficients
    are nonzero ends, i.e. up to the breakpoint where an ``n_theta + 1``-th
    column would enter, or to ``lam = 0`` if no further column enters.
    Breakpoints record the active set after the event at that ``lam``.
    """
    X, y = prob.X, prob.Y
    p = X.shape[1]
    if not 1 <= n_theta <= p:
        raise ParameterError(f"target cardinality must lie in [1, {p}], got {n_theta}")
    norms = prob.col_norms
    usable = norms > 0
    Xs = X / np.where(usable, norms, 1.0)

    def unscale(b):
        return np.where(usable, b / np.where(usable, norms, 1.0), 0.0)

    beta = np.zeros(p)
    c = Xs.T @ y
    c[~usable] = 0.0
    C = float(np.max(np.abs(c)))
    if C <= 0.0:
        return LarsPath([], p)

    first = _lowest_within(-np.abs(c), np.arange(p), -C)
    active = [first]
    signs = [float(np.sign(c[first]))]
    bps = [Breakpoint(2 * C, (first,), np.zeros(p), (signs[0],))]
    excluded = {}
    last_event = "add"

    while True:
        A = np.array(active)
        s = np.array(signs)
        XA = Xs[:, A]
        w = _equiangular(XA, s, active)
        a = Xs.T @ (XA @ w)

        inactive = usable.copy()
        inactive[A] = False
        gam = np.full(p, np.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            for sgn in (1.0, -1.0):
                num, den = C - sgn * c, 1.0 - sgn * a
                g = np.where(den > STEP_TOL, num / den, np.inf)
                g[(g <= STEP_TOL * C) | ~inactive] = np.inf
                # a just-dropped column may only come back with the other sign
                for j, dropped in excluded.items():
                    if dropped == sgn:
                        g[j] = np.inf
                gam = np.minimum(gam, g)
        candidates = np.flatnonzero(inactive)
        gamma_enter = float(np.min(gam)) if candidates.size else np.inf
        j_enter = (_lowest_within(gam, candidates, gamma_enter)
                   if np.isfinite(gamma_enter) else None)

        gamma_drop, k_drop = np.inf, None
        for k, i in enumerate(A):
            if w[k] != 0.0:
                g = -beta[i] / w[k]
                if g > 0.0 and g < gamma_drop:
                    gamma_drop, k_drop = g, k
        if gamma_drop < STEP_TOL * C:
            gamma_drop = 0.0

        gamma = min(gamma_enter, gamma_drop, C)
        beta[A] += gamma * w
        C = C - gamma
        c = Xs.T @ (y - Xs @ beta)
        c[~usable] = 0.0

        if gamma == gamma_drop:
            i = active.pop(k_drop)
            dropped_sign = signs.pop(k_drop)
            beta[i] = 0.0
            excluded = {i: dropped_sign}
            last_event = "drop"
        elif gamma == gamma_enter and len(active) >= n_theta:
            # segment with n_theta nonzero coefficients ends here
            last_event = "end"
        elif gamma == gamma_enter:
            active.append(j_enter)
            signs.append(float(np.sign(c[j_enter])) or 1.0)
            excluded = {}
            last_event = "add"
        else:
            C = 0.0
            last_event = "end"

        bp = Breakpoint(2 * C, tuple(active), unscale(beta), tuple(signs))
        if bps and bp.lam >= bps[-1].lam * (1 - STEP_TOL):
            bps[-1] = bp  # zero-length step: same breakpoint
        else:
            bps.append(bp)
        if last_event == "end" or C <= 0.0:
            break
    return LarsPath(bps, p)


@dataclass(frozen=True, eq=False)
class SparseSolution:
    support: tuple
    biased: np.ndarray
    theta: np.ndarray

    @property
    def n_theta(self) -> int:
        return len(self.support)


def debias(prob: RegressionProblem, biased) -> SparseSolution:
    """Unpenalised least-squares refit on the support of ``biased``."""
    biased = np.asarray(biased, dtype=float)
    support = np.flatnonzero(biased)
    if support.size == 0:
        raise ParameterError("cannot debias an all-zero coefficient vector")
    XA = prob.X[:, support]
    Qm, R, piv = linalg.qr(XA, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    tol = max(XA.shape) * np.finfo(float).eps * d[0]
    rank = int(np.sum(d > tol))
    if rank < support.size:
        raise RankDeficiencyError("active columns are linearly dependent",
                                  support[piv[rank:]])
    z = linalg.solve_triangular(R, Qm.T @ prob.Y)
    theta = np.zeros(prob.n_params)
    theta[support[piv]] = z
    return SparseSolution(tuple(int(i) for i in support), biased.copy(), theta)


def sparse_update(prob: RegressionProblem, n_theta: int):
    """LARS to ``n_theta`` active columns followed by debiasing.

    Returns ``(theta_next, solution, path)``; an all-zero response gives
    ``theta_next = 0`` with ``solution=None``.
    """
    path = lars_lasso(prob, n_theta)
    if not np.any(path.coef):
        return np.zeros(prob.n_params), None, path
    sol = debias(prob, path.coef)
    return sol.theta, sol, path


def _soft(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _lasso_obj(X, Y, theta, lam, w):
    r = Y - X @ theta
    return float(r @ r + lam * np.sum(w * np.abs(theta)))


def duality_gap(X, Y, theta, lam, weights=None):
    """Gap between ``|Y - X theta|^2 + lam sum w|theta|`` and its dual bound."""
    w = np.ones(X.shape[1]) if weights is None else np.asarray(weights, float)
    r = Y - X @ theta
    corr = np.max(np.abs(2 * (X.T @ r)) / w)
    scale = 1.0 if corr <= lam else lam / corr
    u = 2 * r * scale
    dual = float(u @ Y - 0.25 * u @ u)
    return _lasso_obj(X, Y, theta, lam, w) - dual


def _polish(X, Y, theta, lam, w):
    """Solve the stationarity equations exactly on the current support."""
    S = np.flatnonzero(theta)
    for _ in range(len(S) + 1):
        if S.size == 0:
            return np.zeros_like(theta)
        s = np.sign(theta[S])
        XS = X[:, S]
        try:
            zS = np.linalg.solve(XS.T @ XS, XS.T @ Y - 0.5 * lam * w[S] * s)
        except np.linalg.LinAlgError:
            return None
        ok = np.sign(zS) == s
        if np.all(ok):
            out = np.zeros_like(theta)
            out[S] = zS
            return out
        S = S[ok]
    return None


def lasso_oracle(X, Y, lam, weights=None, tol=1e-10, max_iter=200_000):
    """Reference LASSO solver by accelerated proximal gradient.

    Minimises ``|Y - X theta|^2 + lam * sum(weights * |theta|)`` with
    backtracking step sizes and adaptive restart, stopping once the duality
    gap is below ``tol * max(1, |Y|^2)``; the result is then polished by an
    exact solve of the stationarity equations on its support, kept only if
    it is at least as good.  The polish is also tried periodically during the
    iterations and accepted early when its own duality gap meets ``tol``.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    p = X.shape[1]
    w = np.ones(p) if weights is None else np.asarray(weights, dtype=float)
    if lam < 0:
        raise ParameterError("lambda must be nonnegative")
    if lam == 0:
        return np.linalg.lstsq(X, Y, rcond=None)[0]
    target = tol * max(1.0, float(Y @ Y))

    def smooth(t):
        r = Y - X @ t
        return float(r @ r), -2 * (X.T @ r)

    L = 2 * np.sum(X * X) / max(p, 1)
    theta = np.zeros(p)
    z = theta.copy()
    t_k = 1.0
    for it in range(max_iter):
        fz, gz = smooth(z)
        while True:
            cand = _soft(z - gz / L, lam * w / L)
            d = cand - z
            fc, _ = smooth(cand)
            if fc <= fz + gz @ d + 0.5 * L * (d @ d) + 1e-15 * abs(fz):
                break
            L *= 2.0
        t_next = 0.5 * (1 + np.sqrt(1 + 4 * t_k * t_k))
        if (cand - theta) @ (z - cand) > 0:  # restart momentum
            t_k, t_next = 1.0, 1.0
            z = cand.copy()
        else:
            z = cand + ((t_k - 1) / t_next) * (cand - theta)
        theta, t_k = cand, t_next
        if it % 10 == 0 and duality_gap(X, Y, theta, lam, w) < target:
            break
        if it % 200 == 199:
            # on ill-conditioned designs the support settles long before the
            # iterates converge; accept an exact solve once it is certified
            pol = _polish(X, Y, theta, lam, w)
            if pol is not None and duality_gap(X, Y, pol, lam, w) < target:
                return pol

    best = theta
    pol = _polish(X, Y, theta, lam, w)
    if pol is not None and duality_gap(X, Y, pol, lam, w) <= duality_gap(X, Y, theta, lam, w):
        best = pol
    return best

"""Finite-time (lifted) representations of discrete SISO LTI systems.

Transfer functions use ascending powers of ``z^-1``::

    H(z) = (b0 + b1 z^-1 + ...) / (a0 + a1 z^-1 + ...)

Over a trial of ``N`` samples a causal system acts as an ``N x N``
lower-triangular Toeplitz matrix whose first column is its impulse response.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, signal

from .errors import DimensionError, IllPosedLoopError, InvalidSystemError


def _poly_add(a, b):
    n = max(len(a), len(b))
    out = np.zeros(n)
    out[: len(a)] += a
    out[: len(b)] += b
    return out


@dataclass(frozen=True)
class DiscreteTransferFunction:
    num: tuple
    den: tuple
    dt: float = 1.0

    def __post_init__(self):
        num = np.atleast_1d(np.asarray(self.num, dtype=float))
        den = np.atleast_1d(np.asarray(self.den, dtype=float))
        if num.ndim != 1 or den.ndim != 1 or num.size == 0 or den.size == 0:
            raise InvalidSystemError("numerator and denominator must be non-empty 1-D")
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise InvalidSystemError("coefficients must be finite")
        if den[0] == 0.0:
            raise InvalidSystemError("leading denominator coefficient is zero")
        if not self.dt > 0:
            raise InvalidSystemError("sample time must be positive")
        # pad to equal length so that len(num) <= len(den) always holds
        n = max(num.size, den.size)
        num = np.concatenate([num, np.zeros(n - num.size)])
        den = np.concatenate([den, np.zeros(n - den.size)])
        object.__setattr__(self, "num", tuple(num.tolist()))
        object.__setattr__(self, "den", tuple(den.tolist()))

    @classmethod
    def gain(cls, k, dt=1.0):
        return cls((k,), (1.0,), dt)

    @classmethod
    def delay(cls, n=1, dt=1.0):
        num = np.zeros(n + 1)
        num[n] = 1.0
        return cls(num, (1.0,), dt)

    @property
    def feedthrough(self) -> float:
        return self.num[0] / self.den[0]

    def is_zero(self) -> bool:
        return not any(self.num)


def impulse_response(sys: DiscreteTransferFunction, N: int) -> np.ndarray:
    """First ``N`` impulse-response samples of ``sys``.

    The difference equation is recursed directly (``scipy.signal.lfilter``),
    so unstable systems are allowed and simply grow.
    """
    if int(N) != N or N < 1:
        raise DimensionError(f"sample count must be a positive integer, got {N}")
    if sys.den[0] == 0.0:
        raise InvalidSystemError("leading denominator coefficient is zero")
    pulse = np.zeros(int(N))
    pulse[0] = 1.0
    return signal.lfilter(np.asarray(sys.num), np.asarray(sys.den), pulse)


@dataclass(frozen=True, eq=False)
class LiftedOperator:
    """Dense ``N x N`` convolution matrix of one trial."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"lifted operator must be square, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    @property
    def impulse(self) -> np.ndarray:
        return self.matrix[:, 0]

    def is_lower_toeplitz(self, atol=0.0) -> bool:
        expected = linalg.toeplitz(self.matrix[:, 0], np.zeros(self.N))
        return bool(np.allclose(self.matrix, expected, rtol=0.0, atol=atol))

    def apply(self, u):
        return apply(self, u)

    def __matmul__(self, other):
        if isinstance(other, LiftedOperator):
            return LiftedOperator(self.matrix @ other.matrix)
        return self.matrix @ other


def toeplitz_from_impulse(h, N: int) -> LiftedOperator:
    h = np.asarray(h, dtype=float)
    if h.ndim != 1 or h.size != N:
        raise DimensionError(f"impulse response has length {h.size}, expected {N}")
    return LiftedOperator(linalg.toeplitz(h, np.zeros(N)))


def lift(sys: DiscreteTransferFunction, N: int) -> LiftedOperator:
    return toeplitz_from_impulse(impulse_response(sys, N), N)


def identity(N: int) -> LiftedOperator:
    return LiftedOperator(np.eye(N))


def sensitivity_tfs(P: DiscreteTransferFunction, C: DiscreteTransferFunction):
    """Return ``(S, J)`` as transfer functions, ``S = 1/(1+PC)`` and ``J = PS``."""
    pn, pd = np.asarray(P.num), np.asarray(P.den)
    cn, cd = np.asarray(C.num), np.asarray(C.den)
    open_num = np.convolve(pn, cn)
    open_den = np.convolve(pd, cd)
    den = _poly_add(open_den, open_num)
    scale = abs(open_den[0]) + abs(open_num[0])
    if abs(den[0]) <= 1e-12 * scale:
        raise IllPosedLoopError(
            "algebraic loop: direct feedthrough of P*C equals -1 "
            f"(p0*c0 = {P.feedthrough * C.feedthrough:.6g})"
        )
    dt = P.dt
    S = DiscreteTransferFunction(open_den, den, dt)
    J = DiscreteTransferFunction(np.convolve(pn, cd), den, dt)
    return S, J


def closed_loop_operators(P, C, N: int):
    """Lifted sensitivity ``S`` and process sensitivity ``J`` over ``N`` samples."""
    S_tf, J_tf = sensitivity_tfs(P, C)
    return lift(S_tf, N), lift(J_tf, N)


def apply(op: LiftedOperator, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (op.N,):
        raise DimensionError(f"signal has shape {u.shape}, operator expects ({op.N},)")
    return op.matrix @ u

"""Feedforward basis matrices ``Psi(r)`` with ``f = Psi @ theta``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError

KINDS = ("physical", "fir", "identity", "custom")


@dataclass(frozen=True, eq=False)
class BasisMatrix:
    matrix: np.ndarray
    kind: str = "custom"
    preview: int = 0
    labels: tuple = ()

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2:
            raise DimensionError(f"basis must be 2-D, got shape {m.shape}")
        if self.kind not in KINDS:
            raise ParameterError(f"unknown basis kind {self.kind!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(m.shape[1])))

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_params(self) -> int:
        return self.matrix.shape[1]

    def feedforward(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise DimensionError(
                f"theta has shape {theta.shape}, basis has {self.n_params} columns")
        return self.matrix @ theta


def physical_basis(ref) -> BasisMatrix:
    """Velocity, acceleration and snap columns, in that order."""
    cols = [np.asarray(ref.v, float), np.asarray(ref.a, float), np.asarray(ref.snap, float)]
    if len({c.shape for c in cols}) != 1 or cols[0].ndim != 1:
        raise DimensionError("reference channels must be 1-D and equally long")
    return BasisMatrix(np.column_stack(cols), "physical", 0, ("v", "a", "s"))


def fir_basis(r, n_theta: int, preview: int) -> BasisMatrix:
    """Toeplitz basis of shifted copies of ``r``.

    Column ``i`` holds ``r`` delayed by ``i - preview`` samples, so columns
    ``i < preview`` advance the reference. Samples outside ``[0, N)`` are zero.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 1:
        raise DimensionError("reference must be 1-D")
    N = r.size
    if not (0 <= preview < n_theta <= N):
        raise ParameterError(
            f"need 0 <= preview < n_theta <= N, got preview={preview}, "
            f"n_theta={n_theta}, N={N}")
    psi = np.zeros((N, n_theta))
    for i in range(n_theta):
        shift = i - preview
        if shift >= 0:
            psi[shift:, i] = r[: N - shift]
        else:
            psi[: N + shift, i] = r[-shift:]
    labels = tuple(f"z^{-(i - preview)}" for i in range(n_theta))
    return BasisMatrix(psi, "fir", preview, labels)


def identity_basis(N: int) -> BasisMatrix:
    if int(N) != N or N < 1:
        raise DimensionError(f"N must be a positive integer, got {N}")
    return BasisMatrix(np.eye(int(N)), "identity", 0)


def custom_basis(matrix, labels=()) -> BasisMatrix:
    return BasisMatrix(matrix, "custom", 0, tuple(labels))

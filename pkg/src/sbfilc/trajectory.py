"""Fourth-order (snap-limited) point-to-point references.

The snap signal is a bang-bang train of eight equal-length pulses separated
by constant-jerk, constant-acceleration and constant-velocity phases.
Position, velocity, acceleration and jerk are obtained from it by exact
discrete integration ``x[k+1] = x[k] + Ts * dx[k]``.

Phase durations are first solved in continuous time, then rounded up to
whole samples.  The discrete train is linear in the snap amplitude, so the
amplitude is rescaled to hit the displacement exactly; if rescaling would
violate a bound, the constant-velocity phase is stretched instead.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError


@dataclass(frozen=True)
class MotionProfile:
    displacement: float
    max_velocity: float
    max_acceleration: float
    max_jerk: float
    max_snap: float
    dt: float = 1e-3

    def __post_init__(self):
        for name in ("max_velocity", "max_acceleration", "max_jerk", "max_snap", "dt"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be strictly positive")
        if not math.isfinite(self.displacement):
            raise ParameterError("displacement must be finite")


@dataclass(frozen=True, eq=False)
class ReferenceSignal:
    r: np.ndarray
    v: np.ndarray
    a: np.ndarray
    jerk: np.ndarray
    snap: np.ndarray
    dt: float
    motion_samples: int = 0

    @property
    def N(self) -> int:
        return self.r.size

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "r", "v", "a", "jk", "s"])
            for k in range(self.N):
                w.writerow([k] + [format(float(x[k]), ".17g") for x in
                                  (self.r, self.v, self.a, self.jerk, self.snap)])


def integrate(snap, dt):
    """Four-fold forward-Euler integration of a snap train."""
    jerk = np.concatenate([[0.0], np.cumsum(snap[:-1]) * dt])
    acc = np.concatenate([[0.0], np.cumsum(jerk[:-1]) * dt])
    vel = np.concatenate([[0.0], np.cumsum(acc[:-1]) * dt])
    pos = np.concatenate([[0.0], np.cumsum(vel[:-1]) * dt])
    return pos, vel, acc, jerk


def _accel_pulse(a, j, s):
    """Snap/jerk phase lengths (t1, t2) for an acceleration ramp to ``a``."""
    t1 = min(j / s, math.sqrt(a / s))
    t2 = max(a / (s * t1) - t1, 0.0)
    return t1, t2


def _phases_for_velocity(vpk, a, j, s):
    """Continuous phase lengths (t1, t2, t3) reaching peak velocity ``vpk``."""
    t1, t2 = _accel_pulse(a, j, s)
    if a * (2 * t1 + t2) <= vpk:
        return t1, t2, vpk / a - (2 * t1 + t2)
    # cannot reach full acceleration: shrink it until the pulse area matches
    lo, hi = 0.0, a
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        t1, t2 = _accel_pulse(mid, j, s)
        if mid * (2 * t1 + t2) > vpk:
            hi = mid
        else:
            lo = mid
    t1, t2 = _accel_pulse(lo, j, s)
    return t1, t2, 0.0


def continuous_phases(profile: MotionProfile):
    """Solve (t1, t2, t3, t4) for |displacement| under all bounds."""
    p = abs(profile.displacement)
    a, j, s = profile.max_acceleration, profile.max_jerk, profile.max_snap

    def travel(vpk):
        t1, t2, t3 = _phases_for_velocity(vpk, a, j, s)
        return vpk * (4 * t1 + 2 * t2 + t3), (t1, t2, t3)

    vpk = profile.max_velocity
    d, (t1, t2, t3) = travel(vpk)
    if d > p:
        lo, hi = 0.0, vpk
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if travel(mid)[0] > p:
                hi = mid
            else:
                lo = mid
        vpk = lo
        d, (t1, t2, t3) = travel(vpk)
    t4 = max(p - d, 0.0) / vpk if vpk > 0 else 0.0
    return t1, t2, t3, t4


def snap_train(n1, n2, n3, n4, amplitude=1.0):
    """Symmetric eight-pulse snap sequence for integer phase lengths."""
    up = np.concatenate([np.ones(n1), np.zeros(n2), -np.ones(n1)])
    acc_phase = np.concatenate([up, np.zeros(n3), -up])
    return amplitude * np.concatenate([acc_phase, np.zeros(n4), -acc_phase])


def fourth_order_reference(profile: MotionProfile, n_samples=None) -> ReferenceSignal:
    """Generate the reference for ``profile``, padded to ``n_samples``.

    The motion starts at sample 0; the trailing samples hold the end
    position. Raises ``ParameterError`` if the motion does not fit.
    """
    dt = profile.dt
    sign = 1.0 if profile.displacement >= 0 else -1.0
    p = abs(profile.displacement)
    if p == 0.0:
        n = 1 if n_samples is None else int(n_samples)
        z = np.zeros(n)
        return ReferenceSignal(z, z.copy(), z.copy(), z.copy(), z.copy(), dt, 0)

    t1, t2, t3, t4 = continuous_phases(profile)
    n1 = max(1, math.ceil(t1 / dt - 1e-9))
    n2 = max(0, math.ceil(t2 / dt - 1e-9))
    n3 = max(0, math.ceil(t3 / dt - 1e-9))
    n4 = max(0, math.ceil(t4 / dt - 1e-9))

    # unit-amplitude shape; everything below is linear in the amplitude
    unit = snap_train(n1, n2, n3, 0)
    pos, vel, acc, jerk = integrate(np.concatenate([unit, [0.0]]), dt)
    travel0 = pos[-1]
    v_unit = np.max(np.abs(vel))
    limit = min(
        profile.max_snap,
        profile.max_jerk / np.max(np.abs(jerk)),
        profile.max_acceleration / np.max(np.abs(acc)),
        profile.max_velocity / v_unit,
    )
    # travel(n4) = amplitude * (travel0 + n4 * dt * v_unit); the margin keeps
    # rounding from pushing a peak past its bound
    needed = p / (limit * (1.0 - 1e-12))
    if travel0 + n4 * dt * v_unit < needed:
        n4 = math.ceil((needed - travel0) / (dt * v_unit) - 1e-12)
    amplitude = p / (travel0 + n4 * dt * v_unit)

    snap = snap_train(n1, n2, n3, n4, amplitude)
    motion = snap.size + 1
    n = motion if n_samples is None else int(n_samples)
    if motion > n:
        raise ParameterError(f"profile needs {motion} samples, only {n} available")
    s = np.zeros(n)
    s[: snap.size] = sign * snap
    r, v, a, jk = integrate(s, dt)
    return ReferenceSignal(r, v, a, jk, s, dt, motion)


def finite_difference(x, dt, order=1):
    """Causal backward difference of the given order, scaled by ``dt**-order``.

    The first ``order`` samples are set to zero.
    """
    if order not in (1, 2, 4):
        raise ParameterError(f"order must be 1, 2 or 4, got {order}")
    x = np.asarray(x, dtype=float)
    if x.size < order + 1:
        raise DimensionError(f"need at least {order + 1} samples, got {x.size}")
    out = np.zeros_like(x)
    out[order:] = np.diff(x, n=order) / dt**order
    return out

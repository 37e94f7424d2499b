"""Derive the discrete plant/controller coefficients shipped in the presets.

Two-mass-spring-damper, force on the carriage mass, carriage position
measured (collocated).  Zero-order-hold discretisation at 1 kHz; the
one-sample input delay of the ZOH model is compensated by aligning the
measurement with the input (multiply by z), which gives a biproper model
with an invertible lifted process sensitivity.  The feedback is a discrete
lead controller (Tustin) with unit proportional gain; the actuator gain is
chosen to put the crossover near 20 Hz.

Usage:  python scripts/design_default_plant.py
"""

import numpy as np
from scipy import signal

TS = 1e-3
M1, M2 = 4.0, 1.0           # carriage and print-head mass [kg]
F_RES = 60.0               # coupling resonance of the head alone [Hz]
K = M2 * (2 * np.pi * F_RES) ** 2 * 4.0
D = 2.0                     # coupling damping [N s/m]
B = 20.0                    # viscous friction on the carriage [N s/m]
F_BW = 20.0                 # target bandwidth [Hz]


def plant_continuous():
    wb = 2 * np.pi * F_BW
    gain = (M1 + M2) * wb ** 2 / 3
    A = np.array([[0, 1, 0, 0],
                  [-K / M1, -(D + B) / M1, K / M1, D / M1],
                  [0, 0, 0, 1],
                  [K / M2, D / M2, -K / M2, -D / M2]])
    Bm = np.array([[0], [gain / M1], [0], [0]])
    C = np.array([[1.0, 0, 0, 0]])
    return signal.ss2tf(A, Bm, C, [[0.0]])


def plant_discrete():
    num, den = plant_continuous()
    sysd = signal.cont2discrete((num.ravel(), den), TS, method="zoh")
    numd = np.trim_zeros(np.ravel(sysd[0]), "f")
    dend = np.ravel(sysd[1])
    # descending powers of z: num has degree len(den)-2 (one-sample delay);
    # dropping that delay leaves the same coefficient order in z^-1
    return numd / dend[0], dend / dend[0]


def controller_discrete():
    wb = 2 * np.pi * F_BW
    wz, wp = wb / 3, wb * 3
    num, den, _ = signal.cont2discrete(([1 / wz, 1.0], [1 / wp, 1.0]), TS, method="bilinear")
    return np.ravel(num) / den[0], np.ravel(den) / den[0]


if __name__ == "__main__":
    pn, pd = plant_discrete()
    cn, cd = controller_discrete()
    np.set_printoptions(precision=17)
    print("plant num:", [float(x) for x in pn])
    print("plant den:", [float(x) for x in pd])
    print("controller num:", [float(x) for x in cn])
    print("controller den:", [float(x) for x in cd])
    # ascending powers of z^-1: pad the shorter polynomial at the end
    open_den, open_num = np.convolve(pd, cd), np.convolve(pn, cn)
    cl = open_den.copy()
    cl[: open_num.size] += open_num
    print("closed-loop pole radii:", np.sort(np.abs(np.roots(cl))))

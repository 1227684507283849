"""Build almost-normal maps between nearby open curves.

A quarter circle is mapped onto perturbed copies of itself: pure radial
offsets (no tangential motion at all) and tangential endpoint slides (the
tangential part decays away from the endpoints and vanishes outside the
collar).  The tangential-to-endpoint ratio stays below the frozen
calibration constant in every case.
"""

import math

import numpy as np

from planarclusters.diffeo import (
    CALIBRATED_TANGENTIAL_RATIO,
    build_diffeo,
    diffeo_norms,
)
from planarclusters.geom import Curve

MU = 0.2


def quarter_arc(r=1.0, shift=0.0, n=400):
    th = np.linspace(shift, math.pi / 2.0 + shift, n)
    return Curve(np.stack([r * np.cos(th), r * np.sin(th)], axis=1), closed=False)


source = quarter_arc()
print(f"frozen calibration constant: {CALIBRATED_TANGENTIAL_RATIO}")
print()
print("kind        size     |f-Id|_C0  |f-Id|_C1  tangential_C1  ratio")

for eps in (1e-2, 5e-3, 2.5e-3):
    target = quarter_arc(r=1.0 + eps)
    f0 = np.stack([target.points[0], target.points[-1]])
    n = diffeo_norms(build_diffeo(source, target, f0, mu=MU))
    print(f"radial     {eps:7.4f}   {n.c0:.3e}  {n.c1:.3e}  {n.tangential_c1:.3e}      {n.ratio:.3f}")

for s in (1e-2, 5e-3, 2.5e-3):
    target = quarter_arc(shift=s)
    f0 = np.stack([target.points[0], target.points[-1]])
    n = diffeo_norms(build_diffeo(source, target, f0, mu=MU))
    ok = "ok" if n.ratio <= CALIBRATED_TANGENTIAL_RATIO else "EXCEEDED"
    print(f"slide      {s:7.4f}   {n.c0:.3e}  {n.c1:.3e}  {n.tangential_c1:.3e}      {n.ratio:.3f}  {ok}")

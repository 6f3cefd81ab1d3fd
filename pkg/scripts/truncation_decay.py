"""Reconstruction error of the packet decomposition vs the translation window radius."""
import argparse
import math

import numpy as np

from oscillab import phase_core as pc
from oscillab import wavepackets as wp

ap = argparse.ArgumentParser()
ap.add_argument("--lam", type=float, default=1024.0)
ap.add_argument("--r", type=float, default=64.0)
ap.add_argument("--grid", type=int, default=8192)
ap.add_argument("--radii", type=float, nargs="+", default=[60, 120, 240, 480, 960])
args = ap.parse_args()


def bump(s):
    out = np.zeros_like(s)
    m = np.abs(s) < 1
    out[m] = np.exp(1 - 1 / (1 - s[m] ** 2))
    return out


pf = pc.PhaseField(args.lam, 4.0)
x0 = pc.SpaceTimePoint((0.5 * args.lam,), args.lam)
g = pc.GridFunction.from_callable(lambda p: bump((p[:, 0] - 0.5) / 0.3) * (1 + 1j * p[:, 0]),
                                  (args.grid,))
prev = None
for vr in args.radii:
    rec = wp.reconstruct(wp.decompose(g, args.r, x0, pf, v_radius=vr))
    err = np.linalg.norm(rec.samples - g.samples) / np.linalg.norm(g.samples)
    slope = "" if prev is None else f"  local slope {math.log(err / prev[1]) / math.log(vr / prev[0]):+.2f}"
    print(f"v_radius={vr:7.1f}  rel error={err:.3e}{slope}")
    prev = (vr, err)

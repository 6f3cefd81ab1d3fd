"""How the fitted transverse exponent depends on the width of the w-window.

kmax is the number of r^(1/2) steps allowed between a tube's v and w.
"""
import argparse

from oscillab.explab.config import default_config
from oscillab.explab.experiments import run

ap = argparse.ArgumentParser()
ap.add_argument("--kmax", type=int, nargs="+", default=[0, 1, 2])
ap.add_argument("--samples", type=int, default=10)
ap.add_argument("--z", default="hyperplane", choices=["hyperplane", "sphere", "whole"])
args = ap.parse_args()

for km in args.kmax:
    cfg = default_config("transequi", samples=args.samples, extra={"kmax": km, "z": args.z})
    rows = run(cfg)
    ratios = [f"{r.measured:.4f}" for r in rows if r.check == "mass_ratio"]
    slope = next(r.measured for r in rows if r.check == "fitted_exponent")
    print(f"kmax={km}  ratios={ratios}  exponent={slope:+.3f}")

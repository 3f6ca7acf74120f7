#!/usr/bin/env python3
"""Residual of Tr (P_n A P_n)^m - Tr P_n A^m P_n after subtracting the calibrated
second- and third-order terms; prints R(n) and the halving ratio R(n)/R(2n)."""
import argparse
from dataclasses import dataclass, field

from szegolab.circle_op import c_cos, one_plus_c_cos
from szegolab.szego import calibrate_scales, theorem12_residual


@dataclass
class OrderConfig:
    degrees: list = field(default_factory=lambda: [2, 3, 4, 5])
    sizes: list = field(default_factory=lambda: [8, 16, 32, 64])
    c0: float = 0.2
    csub: float = 0.1


def main():
    d = OrderConfig()
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degrees", type=int, nargs="+", default=d.degrees)
    ap.add_argument("--sizes", type=int, nargs="+", default=d.sizes)
    ap.add_argument("--c0", type=float, default=d.c0)
    ap.add_argument("--csub", type=float, default=d.csub)
    a = ap.parse_args()
    cfg = OrderConfig(a.degrees, a.sizes, a.c0, a.csub)
    print("calibrated scales:", calibrate_scales())
    b0, bsub = one_plus_c_cos(cfg.c0), c_cos(cfg.csub)
    print(f"{'m':>3} {'n':>5} {'R(n)':>12} {'R(n)/R(2n)':>11}")
    for m in cfg.degrees:
        for n in cfg.sizes:
            r1 = theorem12_residual(m, b0, bsub, n)
            r2 = theorem12_residual(m, b0, bsub, 2 * n)
            print(f"{m:3d} {n:5d} {abs(r1):12.4e} {abs(r1 / r2):11.4f}")


if __name__ == "__main__":
    main()

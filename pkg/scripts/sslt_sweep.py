#!/usr/bin/env python3
"""Convergence of log det P_n T(b) P_n to its strong Szego limit for b = exp(a cos x)."""
import argparse
from dataclasses import dataclass, field

from szegolab.circle_op import TrigPoly, build_operator, exp_cos, logdet_lu
from szegolab.szego import sslt_constant


@dataclass
class SweepConfig:
    amplitudes: list = field(default_factory=lambda: [0.1, 0.4, 0.8, 1.2])
    sizes: list = field(default_factory=lambda: [4, 8, 16, 32, 64])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--amplitudes", type=float, nargs="+", default=SweepConfig().amplitudes)
    ap.add_argument("--sizes", type=int, nargs="+", default=SweepConfig().sizes)
    args = ap.parse_args()
    cfg = SweepConfig(args.amplitudes, args.sizes)
    print(f"{'a':>6} {'n':>5} {'residual':>12}")
    for a in cfg.amplitudes:
        b = exp_cos(a)  # mean of log b is 0, so no (2n+1) term
        limit = sslt_constant(b)
        for n in cfg.sizes:
            op = build_operator(b, TrigPoly.constant(0.0), n + b.effective_degree() + 1)
            print(f"{a:6.2f} {n:5d} {logdet_lu(op, n).real - limit:12.3e}")


if __name__ == "__main__":
    main()

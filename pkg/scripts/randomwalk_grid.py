#!/usr/bin/env python3
"""Compare path enumeration with the block formula for E exp(i a S_p + i b T_{p+q})."""
import argparse
import json
from dataclasses import dataclass

import numpy as np

from szegolab.randwalk import StepDist, enumerate_lhs, formula_rhs_coeff


@dataclass
class GridConfig:
    max_total: int = 6
    grid: int = 5
    freq_range: float = 2.5
    dist: str = '{"support": [-1, 1], "probs": [0.5, 0.5]}'


def main():
    d = GridConfig()
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-total", type=int, default=d.max_total)
    ap.add_argument("--grid", type=int, default=d.grid)
    ap.add_argument("--freq-range", type=float, default=d.freq_range)
    ap.add_argument("--dist", default=d.dist, help="step law as JSON")
    cfg = GridConfig(**vars(ap.parse_args()))
    dist = StepDist.from_json(cfg.dist)
    freqs = np.linspace(-cfg.freq_range, cfg.freq_range, cfg.grid)
    out = {}
    for p in range(1, cfg.max_total):
        for q in range(1, cfg.max_total - p + 1):
            out[f"{p},{q}"] = max(abs(enumerate_lhs(dist, p, q, a, b) - formula_rhs_coeff(dist, p, q, a, b))
                                  for a in freqs for b in freqs)
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Random-vector sweep of the generalized Hunt-Dyson identity; prints worst relative errors."""
import argparse
import time
from dataclasses import dataclass

import numpy as np

from szegolab.combinatorics import ghd_lhs, ghd_rhs, ghd_scale


@dataclass
class GHDConfig:
    m_max: int = 6
    n_max: int = 4
    samples: int = 50
    seed: int = 0


def main():
    d = GHDConfig()
    ap = argparse.ArgumentParser(description=__doc__)
    for f in ("m_max", "n_max", "samples", "seed"):
        ap.add_argument("--" + f.replace("_", "-"), type=int, default=getattr(d, f))
    cfg = GHDConfig(**vars(ap.parse_args()))
    rng = np.random.default_rng(cfg.seed)
    for m in range(1, cfg.m_max + 1):
        t0 = time.perf_counter()
        vs = rng.normal(size=(cfg.samples, m))
        worst = [max(abs(ghd_lhs(v, n) - ghd_rhs(v, n)) / max(ghd_scale(v, n), 1e-300) for v in vs)
                 for n in range(1, cfg.n_max + 1)]
        print(f"m={m}: " + " ".join(f"{w:.1e}" for w in worst) + f"  ({time.perf_counter() - t0:.2f}s)")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Fit log det P_n T P_n over a range of n and compare with the predicted expansion."""
import argparse
import json
from dataclasses import asdict

from szegolab.cli import parse_symbol
from szegolab.szego import PipelineConfig, corollary4_pipeline


def main():
    d = PipelineConfig()
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--b0", default='{"preset": "one_plus_c_cos", "c": 0.2}', help="symbol as JSON")
    ap.add_argument("--bsub", default='{"preset": "c_cos", "c": 0.1}', help="symbol as JSON")
    ap.add_argument("--n-min", type=int, default=d.n_min)
    ap.add_argument("--n-max", type=int, default=d.n_max)
    ap.add_argument("--out", help="write the fit report JSON here")
    a = ap.parse_args()
    cfg = PipelineConfig(n_min=a.n_min, n_max=a.n_max)
    b0, bsub = parse_symbol(json.loads(a.b0)), parse_symbol(json.loads(a.bsub))
    report, _, _ = corollary4_pipeline(b0, bsub, cfg, {"n": 1e-3, "log n": 5e-2, "1": 5e-2, "1/n": 1e-2})
    print(json.dumps(asdict(cfg), indent=1))
    print(report.dumps())
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(report.dumps())


if __name__ == "__main__":
    main()

"""Command-line driver: every verification suite as a subcommand with a JSON report.

Report schema (all commands):

    {"command": str, "config_echo": {...},
     "cases": [{"name", "paper_ref", "lhs", "rhs", "residual", "tolerance", "verdict"}]}

``paper_ref`` names the identity a case checks.  The exit code is 0 iff every
verdict is "pass".  Configs are JSON; missing keys fall back to the defaults
of the matching dataclass.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .circle_op import (
    TrigPoly,
    build_operator,
    c_cos,
    exp_cos,
    one_plus_c_cos,
    trace_pow,
    write_series_csv,
)
from .combinatorics import (
    EnumerationBudgetError,
    MAX_ENUMERATION_LENGTH,
    cf_bst_both_sides,
    ghd_lhs,
    ghd_rhs,
    ghd_scale,
    hd_classic_rhs,
)
from .funcmaps import phi_merge_check, w2_integral, w2_log
from .omega import OmegaArgs, omega1, omega1_blocks, omega2, omega2_blocks, omega3, omega3_blocks, split_one, split_two
from .randwalk import StepDist, enumerate_lhs, formula_rhs_coeff
from .szego import PipelineConfig, corollary4_pipeline, log_symbol, sslt_constant, sslt_residual, theorem12_residual
from .tracesum import power_sum, prop3_predict, partial_sum, remainder_order, synthetic_sequence


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ configs

@dataclass
class CombinatoricsConfig:
    m_max: int = 7
    n_max: int = 4
    samples: int = 50
    cf_m_max: int = 6
    tolerance: float = 1e-9


@dataclass
class SzegoConfig:
    b0: dict = field(default_factory=lambda: {"preset": "one_plus_c_cos", "c": 0.2})
    bsub: dict = field(default_factory=lambda: {"preset": "c_cos", "c": 0.1})
    sslt_symbol: dict = field(default_factory=lambda: {"preset": "exp_cos", "a": 0.4})
    sslt_n: int = 64
    sslt_tolerance: float = 1e-6
    degrees: list = field(default_factory=lambda: [2, 3, 4])
    order_n: list = field(default_factory=lambda: [32, 64])
    ratio_window: list = field(default_factory=lambda: [2.8, 5.5])
    n_min: int = 32
    n_max: int = 256
    tolerances: dict = field(default_factory=lambda: {"n": 1e-3, "log n": 5e-2, "1": 5e-2, "1/n": 1e-2})


@dataclass
class Prop3Config:
    residues: list = field(default_factory=lambda: [1.5, -0.7, 0.3, 0.2])
    n_min: int = 16
    n_max: int = 256
    tail_base: float = 0.5
    remainder_bound: float = 10.0
    lemma_n: int = 100
    lemma_tolerance: float = 1e-4


@dataclass
class RandomWalkConfig:
    max_total: int = 6
    grid: int = 5
    freq_range: float = 2.5
    tolerance: float = 1e-9
    dists: list = field(default_factory=lambda: [
        {"support": [-1, 1], "probs": [0.5, 0.5]},
        {"support": [-1, 0, 2], "probs": [0.5, 0.3, 0.2]},
    ])


@dataclass
class FuncmapsConfig:
    merge_p_max: int = 8
    merge_samples: int = 20
    merge_tolerance: float = 1e-12
    w2_grid: int = 10
    w2_tolerance: float = 1e-8
    split_max_len: int = 6
    split_entry: int = 3
    omega_samples: int = 2000


CONFIGS = {
    "combinatorics": CombinatoricsConfig,
    "szego": SzegoConfig,
    "prop3": Prop3Config,
    "randomwalk": RandomWalkConfig,
    "funcmaps": FuncmapsConfig,
}


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    return obj


def make_config(command: str, raw: dict):
    cls = CONFIGS[command]
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    return cls(**raw)


def parse_symbol(spec) -> TrigPoly:
    """Preset dict, explicit modes {"modes": {"k": value}}, or the serialized TrigPoly form."""
    if isinstance(spec, dict) and "preset" in spec:
        name = spec["preset"]
        if name == "exp_cos":
            return exp_cos(float(spec["a"]), int(spec.get("k", 1)))
        if name == "one_plus_c_cos":
            return one_plus_c_cos(float(spec["c"]))
        if name == "c_cos":
            return c_cos(float(spec["c"]))
        if name == "zero":
            return TrigPoly.constant(0.0)
        raise ConfigError(f"unknown preset {name!r}")
    if isinstance(spec, dict) and "modes" in spec:
        modes = {}
        for k, v in spec["modes"].items():
            modes[int(k)] = complex(v[0], v[1]) if isinstance(v, list) else complex(v)
        return TrigPoly.from_modes(modes)
    if isinstance(spec, dict) and "degree" in spec:
        return TrigPoly.from_json(spec)
    raise ConfigError(f"cannot interpret symbol {spec!r}")


# ------------------------------------------------------------------- cases

def _num(x):
    x = complex(x)
    return x.real if x.imag == 0 else [x.real, x.imag]


def case(name: str, ref: str, lhs, rhs, residual: float, tolerance: float, scale: float = 1.0) -> dict:
    tol = tolerance * scale
    ok = bool(np.isfinite(residual) and residual <= tol)
    return {
        "name": name,
        "paper_ref": ref,
        "lhs": _num(lhs),
        "rhs": _num(rhs),
        "residual": float(residual),
        "tolerance": float(tol),
        "verdict": "pass" if ok else "fail",
    }


def window_case(name: str, ref: str, lhs, rhs, value: float, window) -> dict:
    """Pass iff ``value`` lies in the closed interval ``window`` (not scaled)."""
    lo, hi = window
    return {"name": name, "paper_ref": ref, "lhs": _num(lhs), "rhs": _num(rhs), "residual": float(value),
            "tolerance": [float(lo), float(hi)], "verdict": "pass" if lo <= value <= hi else "fail"}


def error_case(name: str, ref: str, message: str) -> dict:
    return {"name": name, "paper_ref": ref, "lhs": None, "rhs": None, "residual": None,
            "tolerance": None, "verdict": "error", "message": message}


# ---------------------------------------------------------------- commands

def _combinatorics_case(m, n, variant, vectors, tol):
    worst, wl, wr = 0.0, 0.0, 0.0
    for v in vectors:
        l, r = ghd_lhs(v, n, variant), ghd_rhs(v, n, variant)
        rel = abs(l - r) / max(ghd_scale(v, n, variant), 1e-300)
        if rel >= worst:
            worst, wl, wr = rel, l, r
    return worst, wl, wr


def cmd_combinatorics(cfg: CombinatoricsConfig, rng, scale, out, jobs):
    cases = []
    tests = {
        "exp": np.exp,
        "cos": np.cos,
        "square": np.square,
        "cubic": lambda x: x**3 - 2 * x,
    }
    for m in range(2, cfg.m_max + 1):
        if m > MAX_ENUMERATION_LENGTH:
            cases.append(error_case(f"ghd m={m}", "generalized Hunt-Dyson identity",
                                    f"length {m} exceeds the enumeration cap {MAX_ENUMERATION_LENGTH}"))
            continue
        vectors = [_mixed_vector(rng, m) for _ in range(cfg.samples)]
        for n in range(1, cfg.n_max + 1):
            for variant in ("min", "max"):
                try:
                    worst, l, r = _combinatorics_case(m, n, variant, vectors, cfg.tolerance)
                    cases.append(case(f"ghd m={m} n={n} {variant}", "generalized Hunt-Dyson identity",
                                      l, r, worst, cfg.tolerance, scale))
                except EnumerationBudgetError as e:
                    cases.append(error_case(f"ghd m={m} n={n} {variant}", "generalized Hunt-Dyson identity", str(e)))
        v = vectors[0]
        l, r = ghd_lhs(v, 1, "min"), hd_classic_rhs(v)
        cases.append(case(f"hunt-dyson n=1 m={m}", "classical Hunt-Dyson identity", l, r, abs(l - r),
                          cfg.tolerance * max(1.0, abs(r)), scale))
        if m <= cfg.cf_m_max:
            for fname, f in tests.items():
                worst, wl, wr = 0.0, 0.0, 0.0
                for v in vectors[:10]:
                    l, r = cf_bst_both_sides(v, f)
                    if abs(l - r) >= worst:
                        worst, wl, wr = abs(l - r), l, r
                cases.append(case(f"cf-bst m={m} f={fname}", "combinatorial Bohnenblust-Spitzer identity",
                                  wl, wr, worst, cfg.tolerance, scale))
    return cases


def _mixed_vector(rng, m):
    """Gaussian vector shifted so that its sum is negative (the identities are trivial otherwise)."""
    v = rng.normal(size=m)
    return v - abs(v.sum()) / m - 0.1 * rng.random()


def cmd_szego(cfg: SzegoConfig, rng, scale, out, jobs):
    cases = []
    try:
        b0, bsub, bs = parse_symbol(cfg.b0), parse_symbol(cfg.bsub), parse_symbol(cfg.sslt_symbol)
        log_symbol(b0)
        log_symbol(bs)
    except (ConfigError, KeyError, ValueError) as e:
        raise ConfigError(f"bad symbol: {e}") from None
    res = sslt_residual(bs, cfg.sslt_n)
    const = sslt_constant(bs)
    cases.append(case(f"sslt n={cfg.sslt_n}", "strong Szego limit theorem", const + res, const, abs(res),
                      cfg.sslt_tolerance, scale))
    lo, hi = cfg.ratio_window
    diff_rows = []
    for m in cfg.degrees:
        for n in cfg.order_n:
            r1, r2 = theorem12_residual(m, b0, bsub, n), theorem12_residual(m, b0, bsub, 2 * n)
            ratio = abs(r1 / r2) if r2 != 0 else float("inf")
            cases.append(window_case(f"order m={m} n={n}", "second-order trace asymptotics (R(n)/R(2n))",
                                     r1, r2, ratio, (lo, hi)))
        bw = max(b0.effective_degree(), bsub.effective_degree())
        op = build_operator(b0, bsub, cfg.n_max + m * bw + 1)
        for n in range(cfg.n_min, cfg.n_max + 1, max(1, (cfg.n_max - cfg.n_min) // 16)):
            lhs, rhs = trace_pow(op, n, m)
            diff_rows.append((m, n, (lhs - rhs).real))
    pcfg = PipelineConfig(n_min=cfg.n_min, n_max=cfg.n_max)
    tol = {k: v * scale for k, v in cfg.tolerances.items()}
    try:
        report, series, ts = corollary4_pipeline(b0, bsub, pcfg, tol)
    except ValueError as e:
        cases.append(error_case("determinant expansion", "log-determinant expansion", str(e)))
        report = None
    if report is not None:
        for name, v in report.verdict.items():
            cases.append(case(f"determinant coefficient {name}", "log-determinant expansion",
                              report.coefficients[name], report.predicted[name], v["relative_error"],
                              cfg.tolerances[name], scale))
    if out is not None:
        if report is not None:
            write_series_csv(out / "logdet_series.csv", series, "n,logdet")
            (out / "fit_report.json").write_text(report.dumps() + "\n")
            ts.save(out / "log_traces.csv", out / "log_residues.json")
        write_series_csv(out / "trace_difference.csv", diff_rows, "m,n,difference")
    return cases


def cmd_prop3(cfg: Prop3Config, rng, scale, out, jobs):
    cases = []
    tail = lambda k: cfg.tail_base**k
    for d in (1, 2, 3):
        R = list(cfg.residues)
        if d >= 3:
            R = R + [0.0] * max(0, d + 1 - len(R))
        ts = synthetic_sequence(R, d, cfg.n_max, tail=tail, trace0=0.25)
        order = remainder_order(d)
        worst, wl, wr = 0.0, 0, 0
        for n in range(cfg.n_min, cfg.n_max + 1):
            exact, pred = partial_sum(ts, n), prop3_predict(ts, n)
            scaled = abs(exact - pred) / float(n) ** order
            if scaled >= worst:
                worst, wl, wr = scaled, exact, pred
        cases.append(case(f"partial sums d={d} (remainder n^{order})", "partial-sum asymptotics",
                          wl, wr, worst, cfg.remainder_bound, scale))
    for m in (-1, -2, -3, 1, 2):
        exact, pred = power_sum(cfg.lemma_n, m)
        cases.append(case(f"power sum m={m} n={cfg.lemma_n}", "power-sum asymptotics", exact, pred,
                          abs(exact - pred), cfg.lemma_tolerance, scale))
    return cases


def cmd_randomwalk(cfg: RandomWalkConfig, rng, scale, out, jobs):
    cases = []
    grid = np.linspace(-cfg.freq_range, cfg.freq_range, cfg.grid)
    for i, spec in enumerate(cfg.dists):
        dist = StepDist(tuple(spec["support"]), tuple(spec["probs"]))
        for p in range(1, cfg.max_total):
            for q in range(1, cfg.max_total - p + 1):
                pts = [(a, b) for a in grid for b in grid]

                def one(ab, p=p, q=q):
                    return enumerate_lhs(dist, p, q, *ab), formula_rhs_coeff(dist, p, q, *ab)

                with ThreadPoolExecutor(max_workers=max(1, jobs)) as ex:
                    vals = list(ex.map(one, pts))
                errs = [abs(l - r) for l, r in vals]
                k = int(np.argmax(errs))
                cases.append(case(f"walk dist={i} p={p} q={q}", "joint law of (S_p, T_(p+q))",
                                  vals[k][0], vals[k][1], errs[k], cfg.tolerance, scale))
    return cases


def cmd_funcmaps(cfg: FuncmapsConfig, rng, scale, out, jobs):
    cases = []
    for p in range(3, cfg.merge_p_max + 1):
        worst, wl, wr = 0.0, 0, 0
        for _ in range(cfg.merge_samples):
            draw = lambda: tuple(0.6 * (rng.normal(size=p - 2) + 1j * rng.normal(size=p - 2)))
            l, r = phi_merge_check(p, draw(), draw(), draw())
            if abs(l - r) >= worst:
                worst, wl, wr = abs(l - r), l, r
        cases.append(case(f"phi merge p={p}", "Phi-map merge identity", wl, wr, worst, cfg.merge_tolerance, scale))
    xs = np.linspace(0.5, 2.0, cfg.w2_grid)
    worst, wl, wr = 0.0, 0, 0
    for x1 in xs:
        for x2 in xs:
            l = w2_integral(lambda z: 1 / z, lambda z: -1 / z**2, x1, x2, base=1.0)
            r = w2_log(x1, x2)
            if abs(l - r) >= worst:
                worst, wl, wr = abs(l - r), l, r
    cases.append(case("W2 integral for log", "W2 closed form for log", wl, wr, worst, cfg.w2_tolerance, scale))
    e = cfg.split_entry
    for length in range(2, cfg.split_max_len + 1):
        grid = np.array(np.meshgrid(*[np.arange(-e, e + 1)] * length, indexing="ij")).reshape(length, -1).T
        bad = 0
        for j in range(1, length):
            l, r = split_one(grid, j)
            bad += int(np.sum(l != r))
        for j in range(1, length - 1):
            l, r = split_two(grid, j)
            bad += int(np.sum(l != r))
        cases.append(case(f"min splitting length={length}", "running-minimum splitting identities",
                          0, bad, float(bad), 0.0, 1.0))
    bad = 0
    for _ in range(cfg.omega_samples):
        k = tuple(int(x) for x in rng.integers(-4, 5, size=2))
        mu, nu, rho = (tuple(int(x) for x in rng.integers(-4, 5, size=rng.integers(1, 4))) for _ in range(3))
        a = OmegaArgs(k, mu, nu, rho)
        bad += (omega1(a) != omega1_blocks(a)) + (omega2(a) != omega2_blocks(a)) + (omega3(a) != omega3_blocks(a))
    cases.append(case("omega literal vs block forms", "Omega running-minimum representation", 0, bad,
                      float(bad), 0.0, 1.0))
    return cases


COMMANDS = {
    "combinatorics": cmd_combinatorics,
    "szego": cmd_szego,
    "prop3": cmd_prop3,
    "randomwalk": cmd_randomwalk,
    "funcmaps": cmd_funcmaps,
}


def run(command: str, raw_config: dict, seed: int = 0, tolerance_scale: float = 1.0,
        out: Path | None = None, jobs: int = 1) -> dict:
    cfg = make_config(command, raw_config)
    rng = np.random.default_rng(seed)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    cases = COMMANDS[command](cfg, rng, tolerance_scale, out, jobs)
    echo = asdict(cfg)
    echo.update({"seed": seed, "tolerance_scale": tolerance_scale})
    return {"command": command, "config_echo": echo, "cases": cases}


def all_pass(report: dict) -> bool:
    return all(c["verdict"] == "pass" for c in report["cases"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="szegolab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", help="output directory for the report and CSV series")
        sp.add_argument("--tolerance-scale", type=float, default=1.0)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--jobs", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = load_config(args.config)
        out = Path(args.out) if args.out else None
        report = run(args.command, raw, args.seed, args.tolerance_scale, out, args.jobs)
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    text = json.dumps(report, indent=2, sort_keys=True)
    if out is not None:
        (out / f"{args.command}_report.json").write_text(text + "\n")
    print(text)
    for c in report["cases"]:
        print(f"[{c['verdict'].upper()}] {c['name']}", file=sys.stderr)
    return 0 if all_pass(report) else 1


if __name__ == "__main__":
    sys.exit(main())

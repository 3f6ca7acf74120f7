"""Partial sums of per-level traces and their asymptotic expansions.

A trace sequence t_k = Tr(pi_k G), k = 0..K_max, is modelled for k >= 1 by

    t_k ~ sum_{l=0}^{L} R_l k^{d-1-l} + eps_k.

The regularized constant is C = sum_{k>=1} eps_k.  The mode-0 trace t_0 is
not part of the model; it is folded into the constant term of every
prediction (``c_constant`` adds it), so the level convention cancels in any
comparison made with the same sequence on both sides.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
import numpy as np
from scipy.special import zeta as _zeta

EULER_GAMMA = 0.5772156649015329


def zeta(s: int) -> float:
    if s < 2:
        raise ValueError("zeta(s) needs s >= 2 here")
    return float(_zeta(s))


class NonDecayingTailError(ValueError):
    """The residual tail does not decay fast enough for the constant to converge."""


class IllConditionedFitError(ValueError):
    pass


@dataclass
class TraceSequence:
    traces: np.ndarray
    residues: tuple = ()
    d: int = 1
    tail: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.traces = np.asarray(self.traces, dtype=complex)
        self.residues = tuple(complex(r) for r in self.residues)
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.residues:
            self.tail = self.traces - residue_model(self.residues, self.d, self.K_max)
            self.tail[0] = 0.0

    @property
    def K_max(self) -> int:
        return self.traces.size - 1

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "trace_re", "trace_im"])
            for k, t in enumerate(self.traces):
                w.writerow([k, repr(float(t.real)), repr(float(t.imag))])

    def residue_sidecar(self) -> dict:
        return {
            "d": self.d,
            "residues_re": [r.real for r in self.residues],
            "residues_im": [r.imag for r in self.residues],
        }

    def save(self, csv_path, json_path) -> None:
        self.to_csv(csv_path)
        with open(json_path, "w") as fh:
            json.dump(self.residue_sidecar(), fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, csv_path, json_path) -> "TraceSequence":
        with open(csv_path) as fh:
            rows = list(csv.DictReader(fh))
        traces = np.array([float(r["trace_re"]) + 1j * float(r["trace_im"]) for r in rows])
        with open(json_path) as fh:
            side = json.load(fh)
        res = [a + 1j * b for a, b in zip(side["residues_re"], side["residues_im"])]
        return cls(traces, tuple(res), int(side["d"]))


def residue_model(residues, d: int, k_max: int) -> np.ndarray:
    """sum_l R_l k^{d-1-l} for k = 0..k_max (entry 0 is left at zero)."""
    out = np.zeros(k_max + 1, dtype=complex)
    k = np.arange(1, k_max + 1, dtype=float)
    for l, R in enumerate(residues):
        out[1:] += R * k ** (d - 1 - l)
    return out


# --------------------------------------------------------------- power sums

def power_sum_exact(n: int, m: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(1, n + 1, dtype=float)
    return float(np.sum(k ** m)) if m >= 0 else float(np.sum(1.0 / k ** (-m)))


def power_sum_prediction(n: int, m: int) -> float:
    """Leading terms of sum_{k<=n} k^m.

    m >= 1 : n^{m+1}/(m+1) + n^m/2 + (m/12) n^{m-1}, the last term only for m >= 2
             (Faulhaber; for m = 1 the sum is exactly n^2/2 + n/2)
    m = 0  : n
    m = -1 : log n + gamma + 1/(2n)
    m = -2 : zeta(2) - 1/n
    m <= -3: zeta(-m)
    """
    if m >= 1:
        val = n ** (m + 1) / (m + 1) + n**m / 2
        if m >= 2:
            val += m / 12 * n ** (m - 1)
        return float(val)
    if m == 0:
        return float(n)
    if m == -1:
        return float(np.log(n) + EULER_GAMMA + 0.5 / n)
    if m == -2:
        return zeta(2) - 1.0 / n
    return zeta(-m)


def power_sum(n: int, m: int) -> tuple[float, float]:
    """(exact partial sum, asymptotic prediction)."""
    return power_sum_exact(n, m), power_sum_prediction(n, m)


# ------------------------------------------------------------- constant C

def _tail_estimate(eps: np.ndarray, k0: int) -> float:
    """Sum of eps_k beyond the last index, from a power-law fit of the last half."""
    K = eps.size - 1 + k0  # eps[i] is index k0 + i
    half = eps[eps.size // 2 :]
    mag = np.abs(half)
    scale = max(np.abs(eps).max(), 1e-300)
    if mag.max() <= 1e-15 * scale or mag.max() == 0:
        return 0.0
    if np.any(mag == 0) or np.any(np.sign(half.real) != np.sign(half.real[-1])):
        # oscillating or partly vanishing: no extrapolation, the tail is bounded by its size
        return 0.0
    ks = np.arange(K - half.size + 1, K + 1, dtype=float)
    slope = np.polyfit(np.log(ks), np.log(mag), 1)[0]
    p = -slope
    if p <= 1.05:
        raise NonDecayingTailError(f"residual tail decays like k^-{p:.2f}; constant does not converge")
    last = half[-1]
    # sum_{k>K} a k^-p  ~  a K^{1-p}/(p-1) - a K^{-p}/2
    return float(np.real(last * (K / (p - 1) - 0.5)))


def c_constant(ts: TraceSequence, tail_correction: bool = True) -> complex:
    """Regularized constant: sum_{k>=1} eps_k (tail-extrapolated) plus the mode-0 trace."""
    if ts.tail is None:
        raise ValueError("trace sequence has no residue model")
    eps = ts.tail[1:]
    total = eps.sum()
    if tail_correction and eps.size > 8:
        total += _tail_estimate(eps, 1)
    return complex(total + ts.traces[0])


def regularized_constant(ts: TraceSequence) -> complex:
    """C + gamma R_1 + sum_{l>=2} zeta(l) R_l for d = 1 (C + gamma R_2 + sum zeta(l) R_{l+1} for d = 2).

    With fitted residues the individual R_l, l >= 2, and hence C itself depend
    on the truncation order of the fit; this combination does not (the
    zeta-weighted residues cancel the model terms subtracted inside C).
    """
    R = list(ts.residues)
    if ts.d not in (1, 2):
        raise ValueError("the regularized constant is defined for d = 1, 2")
    s = ts.d - 1  # index shift for d = 2
    r = lambda l: R[l] if l < len(R) else 0.0
    return complex(c_constant(ts) + EULER_GAMMA * r(1 + s) + sum(zeta(l) * r(l + s) for l in range(2, len(R) - s)))


# ------------------------------------------------------------- predictions

def prop3_predict(ts: TraceSequence, n: int) -> complex:
    """Asymptotic value of Tr P_n G = sum_{k=0}^{n} t_k.

    d = 1:  n R0 + log n R1 + (C + gamma R1 + sum_{l>=2} zeta(l) R_l) + (R1/2 - R2)/n
    d = 2:  n^2 R0/2 + n (R0/2 + R1) + log n R2 + (C + gamma R2 + sum_{l>=2} zeta(l) R_{l+1})
    d >= 3: n^d R0/d + n^{d-1}(R0/2 + R1/(d-1)) + n^{d-2}((d-1)/12 R0 + R1/2 + R2/(d-2)) + log n R_d

    For d >= 3 only the terms up to order n^{d-2} and the log are kept.
    """
    R = list(ts.residues)
    d = ts.d
    if not R:
        raise ValueError("missing residues")

    def r(l):
        return R[l] if l < len(R) else 0.0

    logn = np.log(n)
    if d == 1:
        const = regularized_constant(ts)
        return complex(n * r(0) + logn * r(1) + const + (0.5 * r(1) - r(2)) / n)
    if d == 2:
        const = regularized_constant(ts)
        return complex(n**2 * r(0) / 2 + n * (r(0) / 2 + r(1)) + logn * r(2) + const)
    val = n**d * r(0) / d + n ** (d - 1) * (r(0) / 2 + r(1) / (d - 1))
    val += n ** (d - 2) * ((d - 1) / 12 * r(0) + r(1) / 2 + r(2) / (d - 2))
    val += logn * r(d)
    return complex(val)


def remainder_order(d: int) -> int:
    """Exponent of n in the remainder of prop3_predict."""
    return {1: -2, 2: -1}.get(d, d - 3)


def partial_sum(ts: TraceSequence, n: int) -> complex:
    if n > ts.K_max:
        raise ValueError("n beyond the computed levels")
    return complex(ts.traces[: n + 1].sum())


# ---------------------------------------------------------------- fitting

def fit_residues(traces, d: int, window: tuple[int, int], L: int, n_points: int | None = None,
                 cond_limit: float = 1e12) -> tuple[np.ndarray, float]:
    """Least-squares R_0..R_L of t_k ~ sum_l R_l k^{d-1-l} on a log-spaced window.

    Returns (residues, condition number of the column-scaled design matrix).
    """
    traces = np.asarray(traces, dtype=complex)
    k_lo, k_hi = window
    if k_lo < 1 or k_hi > traces.size - 1 or k_hi <= k_lo:
        raise ValueError("window outside the computed levels")
    size = k_hi - k_lo + 1
    if L + 1 > size / 2:
        raise ValueError("L too large for the window")
    npts = min(size, n_points or size)
    ks = np.unique(np.round(np.geomspace(k_lo, k_hi, npts)).astype(int))
    A = np.array([[float(k) ** (d - 1 - l) for l in range(L + 1)] for k in ks])
    norms = np.linalg.norm(A, axis=0)
    As = A / norms
    cond = float(np.linalg.cond(As))
    if cond > cond_limit:
        raise IllConditionedFitError(f"condition number {cond:.3g} exceeds {cond_limit:.3g}")
    sol, *_ = np.linalg.lstsq(As, traces[ks], rcond=None)
    return sol / norms, cond


def synthetic_sequence(residues, d: int, k_max: int, tail=None, trace0: complex = 0.0) -> TraceSequence:
    """Traces built exactly as model + tail (tail is a callable of k or None)."""
    t = residue_model(residues, d, k_max)
    if tail is not None:
        k = np.arange(1, k_max + 1)
        t[1:] += np.asarray([tail(int(x)) for x in k])
    t[0] = trace0
    return TraceSequence(t, tuple(residues), d)


"""Joint characteristic function of (S_p, T_{p+q}) for discrete random walks.

S_t is the partial sum of i.i.d. steps and T_t = max(0, S_1, ..., S_t).
Two independent evaluations of E exp(i alpha S_p + i beta T_{p+q}):

* ``enumerate_lhs``: literal enumeration of all |support|^{p+q} paths;
* ``formula_rhs_coeff``: the a^p b^q coefficient of the block formula

      sum_{j<=p, k<=q} 1/(j! k!) sum_{l |= p into j} sum_{m |= q into k}
          prod 1/l_i prod 1/m_i  E exp(i alpha sum Y + i beta Omega(Y, Z)),

  with independent blocks Y_i ~ step^{*l_i}, Z_i ~ step^{*m_i} and Omega
  from :func:`szegolab.omega.omega_rw`.
"""
from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass
from math import factorial, prod

import numpy as np

from .combinatorics import compositions
from .omega import omega_rw

DEFAULT_PATH_BUDGET = 10**7
_KEY_DIGITS = 12


class PathBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class StepDist:
    support: tuple
    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(float(s) for s in self.support))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if len(self.support) != len(self.probs) or not self.support:
            raise ValueError("support and probs must be nonempty and of equal length")
        if min(self.probs) < 0 or abs(sum(self.probs) - 1) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")

    @classmethod
    def symmetric_pm1(cls) -> "StepDist":
        return cls((-1, 1), (0.5, 0.5))

    def to_json(self) -> str:
        return json.dumps({"support": list(self.support), "probs": list(self.probs)})

    @classmethod
    def from_json(cls, text: str) -> "StepDist":
        obj = json.loads(text)
        return cls(tuple(obj["support"]), tuple(obj["probs"]))

    def law(self) -> dict:
        out: dict = defaultdict(float)
        for s, p in zip(self.support, self.probs):
            out[round(s, _KEY_DIGITS)] += p
        return dict(out)

    def char(self, alpha: float) -> complex:
        return complex(sum(p * np.exp(1j * alpha * s) for s, p in zip(self.support, self.probs)))


@dataclass(frozen=True)
class WalkMoment:
    p: int
    q: int
    alpha: float
    beta: float
    value: complex


def _convolve(a: dict, b: dict) -> dict:
    out: dict = defaultdict(float)
    for x, px in a.items():
        for y, py in b.items():
            out[round(x + y, _KEY_DIGITS)] += px * py
    return dict(out)


def block_laws(dist: StepDist, n: int) -> list[dict]:
    """laws[l] = law of the sum of l steps, l = 1..n (laws[0] is the point mass at 0)."""
    laws = [{0.0: 1.0}]
    base = dist.law()
    for _ in range(n):
        laws.append(_convolve(laws[-1], base))
    return laws


def _check(p: int, q: int) -> None:
    if p < 1 or q < 1:
        raise ValueError("p and q must be >= 1")


def enumerate_lhs(dist: StepDist, p: int, q: int, alpha: float, beta: float,
                  budget: int = DEFAULT_PATH_BUDGET) -> complex:
    """E exp(i alpha S_p + i beta T_{p+q}) by visiting every path."""
    _check(p, q)
    n_paths = len(dist.support) ** (p + q)
    if n_paths > budget:
        raise PathBudgetError(f"{n_paths} paths exceed the budget {budget}")
    steps = np.array(dist.support)
    probs = np.array(dist.probs)
    idx = np.array(list(itertools.product(range(len(steps)), repeat=p + q)), dtype=int)
    walk = np.cumsum(steps[idx], axis=1)
    weight = np.prod(probs[idx], axis=1)
    T = np.maximum(0.0, walk.max(axis=1))
    return complex(np.sum(weight * np.exp(1j * (alpha * walk[:, p - 1] + beta * T))))


def _y_statistics(laws: list[dict], parts: tuple) -> dict:
    """Joint law of (sum pos(Y_i), sum neg(Y_i)) for independent blocks."""
    state = {(0.0, 0.0): 1.0}
    for l in parts:
        nxt: dict = defaultdict(float)
        for (sp, sn), w in state.items():
            for y, py in laws[l].items():
                key = (round(sp + max(y, 0.0), _KEY_DIGITS), round(sn + min(y, 0.0), _KEY_DIGITS))
                nxt[key] += w * py
        state = dict(nxt)
    return state


def _z_statistics(laws: list[dict], parts: tuple) -> dict:
    """Law of sum pos(Z_i)."""
    state = {0.0: 1.0}
    for m in parts:
        nxt: dict = defaultdict(float)
        for sp, w in state.items():
            for z, pz in laws[m].items():
                nxt[round(sp + max(z, 0.0), _KEY_DIGITS)] += w * pz
        state = dict(nxt)
    return state


def formula_rhs_coeff(dist: StepDist, p: int, q: int, alpha: float, beta: float,
                      budget: int = DEFAULT_PATH_BUDGET) -> complex:
    """a^p b^q coefficient of the block formula (see module docstring)."""
    _check(p, q)
    if len(dist.support) ** (p + q) > budget:
        raise PathBudgetError("p + q too large for the configured budget")
    laws = block_laws(dist, max(p, q))
    total = 0j
    for j in range(1, p + 1):
        for ls in compositions(p, j):
            wy = 1.0 / prod(ls)
            ystat = _y_statistics(laws, ls)
            for k in range(1, q + 1):
                for ms in compositions(q, k):
                    w = wy / prod(ms) / (factorial(j) * factorial(k))
                    zstat = _z_statistics(laws, ms)
                    e = 0j
                    for (sp, sn), py in ystat.items():
                        for zp, pz in zstat.items():
                            om = omega_rw((sp, sn), (zp,))
                            e += py * pz * np.exp(1j * (alpha * (sp + sn) + beta * om))
                    total += w * e
    return complex(total)


def moment(dist: StepDist, p: int, q: int, alpha: float, beta: float) -> WalkMoment:
    return WalkMoment(p, q, alpha, beta, enumerate_lhs(dist, p, q, alpha, beta))

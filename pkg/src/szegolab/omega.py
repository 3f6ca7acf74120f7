"""Piecewise-linear functionals built from running minima.

Convention: the source formulas are written with the symbols (x)_+ and
(x)_-, where (x)_+ = max(0, x) and -(x)_- = min(0, x).  Here we only use

    neg(x) = min(0, x)   (that is, -(x)_-)
    pos(x) = max(0, x)   (that is,  (x)_+)

so a term "- (E)_-" in a displayed formula becomes ``neg(E)`` and a term
"(E)_-" becomes ``-neg(E)``.

Each Omega functional has two evaluators:

* ``omega1/omega2/omega3``: direct transcription of the nested expressions;
* ``omega*_blocks``: reconstruction as a sum of running minima of explicit
  vectors, where each list argument (mu, nu, rho) is replaced by a block
  whose running minimum equals sum_i neg(mu_i) (negatives first, then
  positives).

The test-suite demands that the two agree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .combinatorics import min_partial_sum


def neg(x):
    return min(0, x)


def pos(x):
    return max(0, x)


def _sneg(values) -> float:
    return sum(neg(v) for v in values)


def _spos(values) -> float:
    return sum(pos(v) for v in values)


@dataclass(frozen=True)
class OmegaArgs:
    kappa: tuple
    mu: tuple = ()
    nu: tuple = ()
    rho: tuple = field(default=())

    def __post_init__(self):
        if len(self.kappa) != 2:
            raise ValueError("kappa must be a pair")
        for name in ("kappa", "mu", "nu", "rho"):
            object.__setattr__(self, name, tuple(getattr(self, name)))


def m2(x, y):
    """M_2(x, y) = min(0, x, x + y)."""
    return min(0, x, x + y)


def _require(args: OmegaArgs, nonempty: Sequence[str]) -> None:
    for name in nonempty:
        if len(getattr(args, name)) < 1:
            raise ValueError(f"{name} must have at least one entry for this variant")


# ------------------------------------------------------------ literal forms

def omega1(args: OmegaArgs):
    _require(args, ["mu"])
    k1, k2 = args.kappa
    mn, mp = _sneg(args.mu), _spos(args.mu)
    M = m2(k1, k2)
    first = M + neg(k1 + k2 - M + mn)
    second = neg(k1) + neg(pos(k1) + mn + neg(mp + k2))
    third = mn + neg(mp + M)
    return first + second + third


def omega2(args: OmegaArgs):
    _require(args, ["mu", "nu"])
    k1, k2 = args.kappa
    mn, mp = _sneg(args.mu), _spos(args.mu)
    nn, np_ = _sneg(args.nu), _spos(args.nu)
    first = neg(k1) + neg(pos(k1) + mn + neg(mp + k2 + nn))
    second = mn + neg(mp + k1 + neg(k2) + neg(pos(k2) + nn))
    third = mn + neg(mp + k1 + nn + neg(np_ + k2))
    return first + second + third


def omega3(args: OmegaArgs):
    _require(args, ["mu", "nu", "rho"])
    k1, k2 = args.kappa
    mn, mp = _sneg(args.mu), _spos(args.mu)
    nn, np_ = _sneg(args.nu), _spos(args.nu)
    rn = _sneg(args.rho)
    return mn + neg(mp + k1 + nn + neg(np_ + k2 + rn))


# ------------------------------------------------- block reconstructions

def _sorted_block(values) -> list:
    """Arrangement of ``values`` whose running minimum is sum_i neg(v_i)."""
    return sorted([v for v in values if v < 0]) + [v for v in values if v >= 0]


def omega1_blocks(args: OmegaArgs):
    _require(args, ["mu"])
    k1, k2 = args.kappa
    w = _sorted_block(args.mu)
    return (
        min_partial_sum([k1, k2] + w)
        + min_partial_sum([k1] + w + [k2])
        + min_partial_sum(w + [k1, k2])
    )


def omega2_blocks(args: OmegaArgs):
    _require(args, ["mu", "nu"])
    k1, k2 = args.kappa
    wm, wn = _sorted_block(args.mu), _sorted_block(args.nu)
    return (
        min_partial_sum([k1] + wm + [k2] + wn)
        + min_partial_sum(wm + [k1, k2] + wn)
        + min_partial_sum(wm + [k1] + wn + [k2])
    )


def omega3_blocks(args: OmegaArgs):
    _require(args, ["mu", "nu", "rho"])
    k1, k2 = args.kappa
    return min_partial_sum(
        _sorted_block(args.mu) + [k1] + _sorted_block(args.nu) + [k2] + _sorted_block(args.rho)
    )


# ------------------------------------------------------ random-walk Omega

def omega_rw(y: Sequence[float], z: Sequence[float]) -> float:
    """Omega_{j,k}(y, z) = sum pos(y_i) + pos(sum neg(y_i) + sum pos(z_i)).

    This is the value of max(0, S_1, ..., S_{p+q}) after the first segment of
    the walk has been replaced by blocks y and the second by blocks z.
    """
    if len(y) < 1 or len(z) < 1:
        raise ValueError("y and z must be nonempty")
    return float(_spos(y) + pos(_sneg(y) + _spos(z)))


def omega_rw_array(y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Vectorized omega_rw over the last axis: y (..., j), z (..., k)."""
    ypos = np.maximum(y, 0).sum(axis=-1)
    yneg = np.minimum(y, 0).sum(axis=-1)
    zpos = np.maximum(z, 0).sum(axis=-1)
    return ypos + np.maximum(0, yneg + zpos)


# -------------------------------------------------- min-splitting identities

def _mps(v) -> np.ndarray:
    """Running minimum min(0, prefix sums) along the last axis; empty -> 0."""
    v = np.asarray(v)
    if v.shape[-1] == 0:
        return np.zeros(v.shape[:-1], dtype=v.dtype)
    return np.minimum(0, np.cumsum(v, axis=-1).min(axis=-1))


def _finish(mu: np.ndarray, lhs, rhs):
    if mu.ndim == 1:
        cast = int if np.issubdtype(mu.dtype, np.integer) else float
        return cast(lhs), cast(rhs)
    return lhs, rhs


def split_one(mu, j: int):
    """M_p(mu) versus M_j(mu_1..mu_j) + neg(s_j - M_j + M_{p-j}(mu_{j+1}..mu_p)).

    Works on a single vector or a batch (rows along the first axis).
    """
    mu = np.asarray(mu)
    p = mu.shape[-1]
    if not 1 <= j <= p - 1:
        raise ValueError(f"split point must satisfy 1 <= j <= p-1 (p={p})")
    head, tail = mu[..., :j], mu[..., j:]
    mj = _mps(head)
    rhs = mj + np.minimum(0, head.sum(axis=-1) - mj + _mps(tail))
    return _finish(mu, _mps(mu), rhs)


def split_two(mu, j: int):
    """M_p(mu) versus M_j + neg(s_j - M_j + mu_{j+1} + M_{p-j-1}(mu_{j+2}..mu_p))."""
    mu = np.asarray(mu)
    p = mu.shape[-1]
    if not 1 <= j <= p - 2:
        raise ValueError(f"split point must satisfy 1 <= j <= p-2 (p={p})")
    head, mid, tail = mu[..., :j], mu[..., j], mu[..., j + 1:]
    mj = _mps(head)
    rhs = mj + np.minimum(0, head.sum(axis=-1) - mj + mid + _mps(tail))
    return _finish(mu, _mps(mu), rhs)

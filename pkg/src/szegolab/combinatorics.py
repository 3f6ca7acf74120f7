"""Running minima of partial sums and the permutation identities built on them.

Sign convention used throughout the package: ``neg(x) = min(0, x)`` and
``pos(x) = max(0, x)``.  Every formula below is written with these two
helpers only, so no double negations appear anywhere.

The functionals sum over the full symmetric group, which is enumerated
literally.  That is only feasible for short vectors, so every entry point
enforces ``len(v) <= max_len`` (default 9).
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from math import factorial
from typing import Callable, Iterator, Sequence

import numpy as np

MAX_ENUMERATION_LENGTH = 9


class EnumerationBudgetError(ValueError):
    """Raised when a brute-force sum over permutations would be too large."""


def neg(x):
    return np.minimum(0, x)


def pos(x):
    return np.maximum(0, x)


def _check_length(m: int, max_len: int) -> None:
    if m < 1:
        raise ValueError("vector must have at least one entry")
    if m > max_len:
        raise EnumerationBudgetError(
            f"length {m} exceeds enumeration cap {max_len} ({factorial(m)} permutations)"
        )


def _as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ValueError("expected a flat vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    return arr


def compositions(m: int, j: int | None = None) -> Iterator[tuple[int, ...]]:
    """Compositions of ``m`` (ordered tuples of positive parts).

    With ``j`` given only compositions with exactly ``j`` parts are produced.
    """
    if m < 0:
        return
    if m == 0:
        if j in (None, 0):
            yield ()
        return
    parts = range(1, m + 1) if j is None else [j]
    for nparts in parts:
        if nparts < 1 or nparts > m:
            continue
        # choose nparts-1 cut points among m-1 gaps
        for cuts in itertools.combinations(range(1, m), nparts - 1):
            bounds = (0,) + cuts + (m,)
            yield tuple(bounds[i + 1] - bounds[i] for i in range(nparts))


@lru_cache(maxsize=None)
def _compositions_by_parts(m: int) -> dict[int, tuple[tuple[int, ...], ...]]:
    out: dict[int, list] = {}
    for c in compositions(m):
        out.setdefault(len(c), []).append(c)
    return {k: tuple(v) for k, v in out.items()}


@lru_cache(maxsize=16)
def _permutation_table(m: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(m))), dtype=np.intp)


def min_partial_sum(v) -> float:
    """M_m(v) = min(0, v1, v1+v2, ..., v1+...+vm)."""
    arr = _as_vector(v)
    if arr.size == 0:
        raise ValueError("empty vector")
    return float(min(0.0, np.cumsum(arr).min()))


def max_partial_sum(v) -> float:
    arr = _as_vector(v)
    if arr.size == 0:
        raise ValueError("empty vector")
    return float(max(0.0, np.cumsum(arr).max()))


def block_sums(v, c: Sequence[int], perm: Sequence[int] | None = None) -> list[float]:
    """Sums of consecutive blocks of ``v`` permuted by ``perm``.

    ``perm`` is zero-based: the permuted vector is ``(v[perm[0]], v[perm[1]], ...)``.
    """
    arr = _as_vector(v)
    if any(int(p) < 1 for p in c) or sum(c) != arr.size:
        raise ValueError("composition must have positive parts summing to len(v)")
    if perm is not None:
        perm = list(perm)
        if sorted(perm) != list(range(arr.size)):
            raise ValueError("perm is not a permutation of range(len(v))")
        arr = arr[perm]
    edges = np.concatenate(([0], np.cumsum(c)))
    return [float(arr[edges[i]:edges[i + 1]].sum()) for i in range(len(c))]


def _permuted_prefix(arr: np.ndarray) -> np.ndarray:
    """Prefix sums of every permutation of arr, shape (m!, m)."""
    table = _permutation_table(arr.size)
    return np.cumsum(arr[table], axis=1)


def _running_extreme(prefix: np.ndarray, upto: int, variant: str) -> np.ndarray:
    if upto == 0:
        return np.zeros(prefix.shape[0])
    part = prefix[:, :upto]
    if variant == "min":
        return np.minimum(0.0, part.min(axis=1))
    return np.maximum(0.0, part.max(axis=1))


def _check_variant(variant: str) -> None:
    if variant not in ("min", "max"):
        raise ValueError("variant must be 'min' or 'max'")


def ghd_terms(v, n: int, variant: str = "min", max_len: int = MAX_ENUMERATION_LENGTH):
    """Per-permutation terms M_m^n - M_{m-1}^n (array over the symmetric group)."""
    _check_variant(variant)
    arr = _as_vector(v)
    _check_length(arr.size, max_len)
    if n < 1:
        raise ValueError("n must be a positive integer")
    prefix = _permuted_prefix(arr)
    m = arr.size
    return _running_extreme(prefix, m, variant) ** n - _running_extreme(prefix, m - 1, variant) ** n


def ghd_lhs(v, n: int, variant: str = "min", max_len: int = MAX_ENUMERATION_LENGTH) -> float:
    """Sum over permutations of M_m(v_tau)^n - M_{m-1}(v_tau)^n.

    ``variant='max'`` replaces running minima by running maxima.
    """
    return float(ghd_terms(v, n, variant, max_len).sum())


def _block_values(prefix: np.ndarray, comp: Sequence[int]) -> np.ndarray:
    """Block sums for every permutation: shape (m!, len(comp))."""
    ends = np.cumsum(comp) - 1
    at_end = prefix[:, ends]
    before = np.concatenate([np.zeros((prefix.shape[0], 1)), at_end[:, :-1]], axis=1)
    return at_end - before


def ghd_rhs(v, n: int, variant: str = "min", max_len: int = MAX_ENUMERATION_LENGTH) -> float:
    """Composition side of the generalized Hunt-Dyson identity.

    sum_tau sum_j 1/j! sum_{k |= m, j parts} sum_{l |= n, j parts}
        n!/(l_1!...l_j!) prod_i part(k_i-block)^{l_i} / k_i

    where ``part`` is ``neg`` for the min variant and ``pos`` for the max one.
    """
    _check_variant(variant)
    arr = _as_vector(v)
    m = arr.size
    _check_length(m, max_len)
    if n < 1:
        raise ValueError("n must be a positive integer")
    part = neg if variant == "min" else pos
    prefix = _permuted_prefix(arr)
    total = 0.0
    kcomps = _compositions_by_parts(m)
    lcomps = _compositions_by_parts(n)
    for j in range(1, min(m, n) + 1):
        jsum = 0.0
        for k in kcomps[j]:
            blocks = part(_block_values(prefix, k))
            kprod = float(np.prod(k))
            for l in lcomps[j]:
                coef = factorial(n) / float(np.prod([factorial(x) for x in l]))
                jsum += coef / kprod * np.prod(blocks ** np.array(l), axis=1).sum()
        total += jsum / factorial(j)
    return float(total)


def ghd_scale(v, n: int, variant: str = "min", max_len: int = MAX_ENUMERATION_LENGTH) -> float:
    """Magnitude of the summands of ghd_lhs; the natural denominator for relative errors."""
    _check_variant(variant)
    arr = _as_vector(v)
    _check_length(arr.size, max_len)
    prefix = _permuted_prefix(arr)
    m = arr.size
    return float(
        np.abs(_running_extreme(prefix, m, variant) ** n).sum()
        + np.abs(_running_extreme(prefix, m - 1, variant) ** n).sum()
    )


def hd_classic_rhs(v, max_len: int = MAX_ENUMERATION_LENGTH) -> float:
    """(m-1)! * neg(v1 + ... + vm): the n = 1 case of ghd_rhs in closed form."""
    arr = _as_vector(v)
    _check_length(arr.size, max_len)
    return float(factorial(arr.size - 1) * min(0.0, arr.sum()))


def cf_bst_both_sides(
    v, f: Callable[[np.ndarray], np.ndarray], max_len: int = MAX_ENUMERATION_LENGTH
) -> tuple[float, float]:
    """Both sides of the Bohnenblust-Spitzer (combinatorial) identity.

    LHS = sum_tau f(M_m(v_tau))
    RHS = sum_tau sum_j 1/j! sum_{k |= m, j parts} f(sum_i neg(block_i)) / (k_1...k_j)

    ``f`` must accept numpy arrays.
    """
    arr = _as_vector(v)
    m = arr.size
    _check_length(m, max_len)
    prefix = _permuted_prefix(arr)
    lhs = float(np.sum(f(_running_extreme(prefix, m, "min"))))
    rhs = 0.0
    for j, comps in _compositions_by_parts(m).items():
        jsum = 0.0
        for k in comps:
            arg = neg(_block_values(prefix, k)).sum(axis=1)
            jsum += np.sum(f(arg)) / float(np.prod(k))
        rhs += jsum / factorial(j)
    return lhs, float(rhs)

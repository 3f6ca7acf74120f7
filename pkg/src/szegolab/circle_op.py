"""The circle model.

Symbols are trigonometric polynomials; the operator

    B = T(b0) + T(bsub) D,      D e^{ikx} = e^{ikx}/|k|  (D e^{i0x} = 0)

is stored as a dense matrix over the Fourier modes -N..N, i.e. entry
(j, k) = b0^_{j-k} + bsub^_{j-k} d_k.

Levels: mode j sits at level |j|.  pi_k gathers the modes {+k, -k} for
k >= 1 and {0} for k = 0; P_n = pi_0 + ... + pi_n spans the modes |j| <= n.
The Fourier block B_kappa keeps the entries whose row level minus column
level equals kappa, so that B_kappa P_n = P_{n+kappa} B_kappa.

Every computation that has to agree with the infinite operator checks an
interior budget and raises InteriorBudgetError instead of silently
truncating.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .combinatorics import min_partial_sum


class InteriorBudgetError(ValueError):
    """The requested computation would feel the finite cutoff N."""


class SeriesDivergenceError(ValueError):
    """A Neumann series was requested outside its disc of convergence."""


class BranchAmbiguityError(ValueError):
    """An LU pivot has nonpositive real part: the principal log is ambiguous."""


# ----------------------------------------------------------------- TrigPoly

@dataclass(frozen=True)
class TrigPoly:
    """Fourier coefficients on modes -K..K (``coeffs[i]`` is mode ``i - K``)."""

    coeffs: np.ndarray
    real: bool = field(default=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("coefficient array must have odd length 2K+1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        is_real = bool(np.allclose(c, np.conj(c[::-1]), rtol=0, atol=1e-14 * max(1.0, np.abs(c).max())))
        object.__setattr__(self, "real", is_real)

    @property
    def K(self) -> int:
        return (self.coeffs.size - 1) // 2

    @classmethod
    def from_modes(cls, modes: dict) -> "TrigPoly":
        K = max((abs(k) for k in modes), default=0)
        c = np.zeros(2 * K + 1, dtype=complex)
        for k, v in modes.items():
            c[k + K] += v
        return cls(c)

    @classmethod
    def constant(cls, c: complex) -> "TrigPoly":
        return cls(np.array([c], dtype=complex))

    def coeff(self, k: int) -> complex:
        if abs(k) > self.K:
            return 0j
        return complex(self.coeffs[k + self.K])

    def padded(self, K: int) -> np.ndarray:
        if K < self.K:
            raise ValueError("cannot pad to a smaller degree")
        out = np.zeros(2 * K + 1, dtype=complex)
        out[K - self.K : K + self.K + 1] = self.coeffs
        return out

    def effective_degree(self, tol: float = 0.0) -> int:
        nz = np.nonzero(np.abs(self.coeffs) > tol)[0]
        if nz.size == 0:
            return 0
        return int(max(abs(nz[0] - self.K), abs(nz[-1] - self.K)))

    def trimmed(self, tol: float = 0.0) -> "TrigPoly":
        k = self.effective_degree(tol)
        return TrigPoly(self.coeffs[self.K - k : self.K + k + 1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.arange(-self.K, self.K + 1)
        return np.exp(1j * np.multiply.outer(x, k)) @ self.coeffs

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        K = max(self.K, other.K)
        return TrigPoly(self.padded(K) + other.padded(K))

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + other.scale(-1.0)

    def __mul__(self, other: "TrigPoly") -> "TrigPoly":
        return TrigPoly(np.convolve(self.coeffs, other.coeffs))

    def scale(self, alpha: complex) -> "TrigPoly":
        return TrigPoly(alpha * self.coeffs)

    def power(self, j: int) -> "TrigPoly":
        if j < 0:
            raise ValueError("negative power")
        out = TrigPoly.constant(1.0)
        for _ in range(j):
            out = out * self
        return out

    def apply(self, func: Callable[[np.ndarray], np.ndarray], tol: float = 1e-16, max_degree: int = 4096) -> "TrigPoly":
        """Spectral approximation of func(self(x)) as a TrigPoly.

        The degree is doubled until the coefficients in the outer half fall
        below ``tol`` relative to the largest one.
        """
        K = max(8, 2 * self.K)
        while True:
            c = fourier_coeffs(lambda x: func(self(x)), K).coeffs
            scale = np.abs(c).max() if np.abs(c).max() > 0 else 1.0
            outer = np.concatenate([c[: K // 2], c[-(K // 2):]])
            if np.abs(outer).max() <= tol * scale or K >= max_degree:
                if K >= max_degree and np.abs(outer).max() > 1e-12 * scale:
                    raise ValueError("symbol is not resolved by a trigonometric polynomial of degree <= max_degree")
                return TrigPoly(c).trimmed(tol * scale * 1e-3)
            K *= 2

    def to_json(self) -> dict:
        return {"degree": self.K, "re": self.coeffs.real.tolist(), "im": self.coeffs.imag.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "TrigPoly":
        K = int(obj["degree"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", [0.0] * (2 * K + 1)), dtype=float)
        if re.size != 2 * K + 1 or im.size != 2 * K + 1:
            raise ValueError("TrigPoly JSON: 're' and 'im' need 2*degree+1 entries")
        return cls(re + 1j * im)


def fourier_coeffs(f, K: int, n_points: int | None = None) -> TrigPoly:
    """f^_k for |k| <= K by the trapezoid rule on ``n_points`` uniform nodes.

    ``f`` is a callable of x or an array of samples on the grid 2 pi j / P.
    At least 4K + 8 nodes are required.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    needed = 4 * K + 8
    if callable(f):
        P = needed if n_points is None else int(n_points)
        if P < needed:
            raise ValueError(f"insufficient sampling: {P} points < 4K+8 = {needed}")
        x = 2 * np.pi * np.arange(P) / P
        samples = np.asarray(f(x), dtype=complex)
    else:
        samples = np.asarray(f, dtype=complex)
        P = samples.size
        if P < needed:
            raise ValueError(f"insufficient sampling: {P} samples < 4K+8 = {needed}")
    c = np.fft.fft(samples) / P
    k = np.arange(-K, K + 1)
    return TrigPoly(c[k % P])


def exp_cos(a: float, k: int = 1) -> TrigPoly:
    """exp(a cos(kx)), resolved to machine precision."""
    return TrigPoly.from_modes({k: a / 2, -k: a / 2}).apply(np.exp)


def one_plus_c_cos(c: float) -> TrigPoly:
    return TrigPoly.from_modes({0: 1.0, 1: c / 2, -1: c / 2})


def c_cos(c: float) -> TrigPoly:
    return TrigPoly.from_modes({1: c / 2, -1: c / 2})


def geodesic_coeff(f: TrigPoly, k: int, x, component: int):
    """int e^{-ikt} f(x + component*t) dt/2pi = f^_{ck} e^{ickx} for component c = +-1."""
    if component not in (1, -1):
        raise ValueError("component must be +1 or -1")
    return f.coeff(component * k) * np.exp(1j * component * k * np.asarray(x, dtype=float))


def cotangent_pairing(f: TrigPoly, g: TrigPoly, nu: int, n_points: int | None = None) -> complex:
    """sum over both components of int f^_nu(x, c) g^_{-nu}(x, c) dx/2pi (trapezoid in x)."""
    P = n_points or 4 * (f.K + g.K + abs(nu)) + 8
    x = 2 * np.pi * np.arange(P) / P
    total = 0j
    for c in (1, -1):
        total += np.mean(geodesic_coeff(f, nu, x, c) * geodesic_coeff(g, -nu, x, c))
    return complex(total)


# ----------------------------------------------------------- BandedOperator

@dataclass(frozen=True)
class BandedOperator:
    entries: np.ndarray
    N: int
    bandwidth: int = -1

    def __post_init__(self):
        E = np.array(self.entries, dtype=complex)
        if E.shape != (2 * self.N + 1, 2 * self.N + 1):
            raise ValueError("entries must be (2N+1) x (2N+1)")
        E.setflags(write=False)
        object.__setattr__(self, "entries", E)
        rows, cols = np.nonzero(E)
        bw = int(np.abs(rows - cols).max()) if rows.size else 0
        if self.bandwidth >= 0 and bw > self.bandwidth:
            raise ValueError("entries exceed the declared bandwidth")
        if self.bandwidth < 0:
            object.__setattr__(self, "bandwidth", bw)
        if self.bandwidth > self.N:
            raise InteriorBudgetError(f"bandwidth {self.bandwidth} exceeds cutoff N={self.N}")

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def levels(self) -> np.ndarray:
        return np.abs(self.modes)

    def level_mask(self, n: int) -> np.ndarray:
        return self.levels <= n

    def __matmul__(self, other: "BandedOperator") -> "BandedOperator":
        _same_cutoff(self, other)
        return BandedOperator(self.entries @ other.entries, self.N)


def _same_cutoff(a: BandedOperator, b: BandedOperator) -> None:
    if a.N != b.N:
        raise ValueError("operators live on different cutoffs")


def build_operator(b0: TrigPoly, bsub: TrigPoly, N: int) -> BandedOperator:
    K = max(b0.effective_degree(), bsub.effective_degree())
    if N < K:
        raise InteriorBudgetError(f"cutoff N={N} below symbol degree {K}")
    modes = np.arange(-N, N + 1)
    diff = modes[:, None] - modes[None, :]
    inside = np.abs(diff) <= K
    Kp = max(K, b0.K, bsub.K)
    c0, cs = b0.padded(Kp), bsub.padded(Kp)
    idx = np.clip(diff + Kp, 0, 2 * Kp)
    d = np.zeros(modes.size)
    d[modes != 0] = 1.0 / np.abs(modes[modes != 0])
    E = np.where(inside, c0[idx] + cs[idx] * d[None, :], 0.0)
    return BandedOperator(E, N, K)


def identity_operator(N: int) -> BandedOperator:
    return BandedOperator(np.eye(2 * N + 1), N, 0)


def project(op: BandedOperator, n: int) -> BandedOperator:
    """P_n op P_n on the same ambient cutoff (n < 0 gives zero)."""
    if n > op.N:
        raise InteriorBudgetError(f"level {n} exceeds cutoff N={op.N}")
    mask = op.level_mask(n).astype(float)
    return BandedOperator(op.entries * mask[:, None] * mask[None, :], op.N, op.bandwidth)


def _projector(op: BandedOperator, n: int) -> np.ndarray:
    return np.diag(op.level_mask(n).astype(float))


def level_shift(op: BandedOperator) -> np.ndarray:
    """Matrix of level(row) - level(col)."""
    lv = op.levels
    return lv[:, None] - lv[None, :]


def block_matrix(entries: np.ndarray, shift: np.ndarray, kappa: int) -> np.ndarray:
    return np.where(shift == kappa, entries, 0.0)


def fourier_block(op: BandedOperator, kappa: int) -> BandedOperator:
    return BandedOperator(block_matrix(op.entries, level_shift(op), kappa), op.N, op.bandwidth)


def commutation_residual(op: BandedOperator, kappa: int, n: int) -> float:
    """max |B_kappa P_n - P_{n+kappa} B_kappa|."""
    if n + abs(kappa) + op.bandwidth > op.N:
        raise InteriorBudgetError("n + |kappa| + bandwidth exceeds the cutoff")
    Bk = fourier_block(op, kappa).entries
    lhs = Bk @ _projector(op, n)
    rhs = _projector(op, n + kappa) @ Bk
    return float(np.abs(lhs - rhs).max())


def ad_a_block_residual(op: BandedOperator, nu: int) -> float:
    """max |nu G_nu - [A, G]_nu| with A = diag(level)."""
    G = op.entries
    A = np.diag(op.levels.astype(float))
    comm = A @ G - G @ A
    shift = level_shift(op)
    return float(np.abs(nu * block_matrix(G, shift, nu) - block_matrix(comm, shift, nu)).max())


def power_block(op: BandedOperator, j: int, nu: int, form: str = "matrix") -> BandedOperator:
    """The nu-block of op^j.

    ``form='matrix'`` extracts the block of the matrix power;
    ``form='convolution'`` sums B_{k1} ... B_{kj} over k1 + ... + kj = nu.
    """
    if j < 1:
        raise ValueError("power must be >= 1")
    if j * op.bandwidth > op.N:
        raise InteriorBudgetError("j * bandwidth exceeds the cutoff")
    shift = level_shift(op)
    if form == "matrix":
        P = np.linalg.matrix_power(op.entries, j)
        return BandedOperator(block_matrix(P, shift, nu), op.N)
    if form != "convolution":
        raise ValueError("form must be 'matrix' or 'convolution'")
    bw = op.bandwidth
    blocks = {k: block_matrix(op.entries, shift, k) for k in range(-bw, bw + 1)}
    total = np.zeros_like(op.entries)
    for ks in itertools.product(range(-bw, bw + 1), repeat=j):
        if sum(ks) != nu:
            continue
        prod = blocks[ks[0]]
        for k in ks[1:]:
            prod = prod @ blocks[k]
        total = total + prod
    return BandedOperator(total, op.N)


def blocks_of(op: BandedOperator) -> dict[int, np.ndarray]:
    shift = level_shift(op)
    bw = op.bandwidth
    return {k: block_matrix(op.entries, shift, k) for k in range(-bw, bw + 1)}


def plus_minus_parts(op: BandedOperator, max_power: int):
    """Signed convolution powers.

    minus[1] = {kappa: B_kappa, kappa < 0},  minus[j+1] = (B * minus[j])_-
    plus[1]  = {kappa: B_kappa, kappa >= 0}, plus[j+1]  = (plus[j] * B)_+

    where (F * G)_nu = sum_{a+b=nu} F_a G_b, and (.)_- keeps nu < 0,
    (.)_+ keeps nu >= 0.  Families are dicts nu -> matrix.
    """
    if max_power * op.bandwidth > op.N:
        raise InteriorBudgetError("max_power * bandwidth exceeds the cutoff")
    B = blocks_of(op)
    minus = {1: {k: v for k, v in B.items() if k < 0}}
    plus = {1: {k: v for k, v in B.items() if k >= 0}}
    for j in range(1, max_power):
        minus[j + 1] = _convolve(B, minus[j], keep=lambda nu: nu < 0)
        plus[j + 1] = _convolve(plus[j], B, keep=lambda nu: nu >= 0)
    return minus, plus


def _convolve(F: dict, G: dict, keep) -> dict:
    out: dict[int, np.ndarray] = {}
    for a, Fa in F.items():
        for b, Gb in G.items():
            nu = a + b
            if not keep(nu):
                continue
            prod = Fa @ Gb
            out[nu] = out[nu] + prod if nu in out else prod
    return out


# ------------------------------------------------------------------ traces

def level_trace(X: np.ndarray, N: int, k: int) -> complex:
    """Tr(pi_k X) for a matrix over modes -N..N."""
    if k < 0:
        return 0j
    if k == 0:
        return complex(X[N, N])
    return complex(X[N + k, N + k] + X[N - k, N - k])


def level_traces(X: np.ndarray, N: int, k_max: int | None = None) -> np.ndarray:
    k_max = N if k_max is None else k_max
    d = np.diag(X)
    out = np.empty(k_max + 1, dtype=complex)
    out[0] = d[N]
    k = np.arange(1, k_max + 1)
    out[1:] = d[N + k] + d[N - k]
    return out


def _range_indices(op: BandedOperator, n: int) -> np.ndarray:
    return np.nonzero(op.level_mask(n))[0]


def trace_pow(op: BandedOperator, n: int, m: int) -> tuple[complex, complex]:
    """(Tr (P_n B P_n)^m, Tr P_n B^m P_n)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if n + m * op.bandwidth > op.N:
        raise InteriorBudgetError(f"n + m*bandwidth = {n + m * op.bandwidth} exceeds N={op.N}")
    idx = _range_indices(op, n)
    E = op.entries
    A = E[np.ix_(idx, idx)]
    lhs = np.trace(np.linalg.matrix_power(A, m))
    rows = E[idx, :]
    for _ in range(m - 1):
        rows = rows @ E
    rhs = np.trace(rows[:, idx])
    return complex(lhs), complex(rhs)


def block_identity_rhs(op: BandedOperator, n: int, m: int) -> complex:
    """- sum_{sum kappa = 0} sum_{j = M_m(kappa)+1}^{0} Tr(pi_{n+j} B_k1 ... B_km).

    Computed from products of Fourier blocks, independently of trace_pow.
    """
    if n + m * op.bandwidth > op.N:
        raise InteriorBudgetError("n + m*bandwidth exceeds the cutoff")
    B = blocks_of(op)
    bw = op.bandwidth
    total = 0j
    for ks in itertools.product(range(-bw, bw + 1), repeat=m - 1):
        last = -sum(ks)
        if abs(last) > bw:
            continue
        kappa = ks + (last,)
        M = int(min_partial_sum(kappa))
        if M == 0:
            continue
        prod = B[kappa[0]]
        for k in kappa[1:]:
            prod = prod @ B[k]
        total += sum(level_trace(prod, op.N, n + j) for j in range(M + 1, 1))
    return -total


def _neumann_terms(r: float, dim: int, tol: float) -> int:
    if r >= 1:
        raise SeriesDivergenceError(f"norm of I - B is {r:.3g} >= 1")
    if r == 0:
        return 1
    M = 1
    while dim * r ** (M + 1) / ((M + 1) * (1 - r)) >= tol:
        M += 1
    return M


def trace_log(op: BandedOperator, n: int, series_terms: int | None = None, tol: float = 1e-12) -> complex:
    """Tr log(P_n B P_n) on the range of P_n by the Neumann series.

    -sum_{m=1}^{M} Tr((I - P_n B P_n)^m)/m, with M the smallest integer for
    which dim * r^{M+1} / ((M+1)(1-r)) < tol, r = ||I - P_n B P_n||_2.
    An explicit ``series_terms`` overrides the automatic choice.
    """
    idx = _range_indices(op, n)
    X = np.eye(idx.size) - op.entries[np.ix_(idx, idx)]
    r = float(np.linalg.norm(X, 2))
    M = _neumann_terms(r, idx.size, tol) if series_terms is None else int(series_terms)
    if r >= 1:
        raise SeriesDivergenceError(f"norm of I - P_nBP_n is {r:.3g} >= 1")
    total = 0j
    power = np.eye(idx.size, dtype=complex)
    for m in range(1, M + 1):
        power = power @ X
        total -= np.trace(power) / m
    return complex(total)


def logdet_lu(op: BandedOperator, n: int) -> complex:
    """sum of principal logs of the LU pivots of P_n B P_n (plus the permutation sign)."""
    idx = _range_indices(op, n)
    A = op.entries[np.ix_(idx, idx)]
    lu, piv = scipy.linalg.lu_factor(A)
    u = np.diag(lu)
    if np.any(u.real <= 0):
        raise BranchAmbiguityError("an LU pivot has nonpositive real part")
    swaps = int(np.sum(piv != np.arange(piv.size)))
    return complex(np.sum(np.log(u.astype(complex))) + (1j * np.pi if swaps % 2 else 0))


def operator_log(op: BandedOperator, tol: float = 1e-15) -> np.ndarray:
    """log B on the full cutoff by the Neumann series -sum (I - B)^m / m.

    Entries at levels within ~|log tol| / |log r| of the cutoff feel the
    truncation; use only the interior.
    """
    X = np.eye(2 * op.N + 1) - op.entries
    r = float(np.linalg.norm(X, 2))
    M = _neumann_terms(r, 1, tol)
    out = np.zeros_like(X)
    power = np.eye(X.shape[0], dtype=complex)
    for m in range(1, M + 1):
        power = power @ X
        out -= power / m
    return out


def write_series_csv(path, rows: Sequence[tuple], header: str = "n,value") -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, complex):
        if v.imag == 0:
            return repr(v.real)
        return repr(v)
    return repr(v)


def dump_trigpoly(t: TrigPoly) -> str:
    return json.dumps(t.to_json())

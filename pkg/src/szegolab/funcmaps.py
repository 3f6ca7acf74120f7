"""Linear j-maps acting on power series without constant term.

All maps are defined on monomials z^m and extended by linearity.  The
integral representations are only used as numerical cross-checks.

    W2[z^m](x1, x2)      = (m/2) sum_{j=1}^{m-1} x1^j x2^(m-j) / (j (m-j))
    W2~[z^m](x1, x2)     = (m/2) sum_{j=1}^{m-1} x1^j x2^(m-1-j) / j
    F_j[z^m](x1..xj)     = sum_{k |= m, j parts} prod_{i<j} x_i^k_i / k_i * x_j^k_j
    W3                   = F_3
    Phi_j[z^m](x1..xj)   = sum_{l |= m, j parts} prod_i x_i^l_i / l_i
    Phi~_j[z^m](x1..xj)  = h_m(x1..xj)   (complete homogeneous symmetric polynomial)
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .combinatorics import compositions

# literal enumeration of compositions up to this degree, dynamic programming above
ENUMERATION_DEGREE = 20


@dataclass(frozen=True)
class PowerSeries:
    """f(z) = sum_{m=1}^{M} c_m z^m.  ``coeffs[0]`` is c_1."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(complex(x) for x in self.coeffs)
        if len(c) < 1:
            raise ValueError("power series needs at least the z^1 coefficient")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def monomial(cls, m: int, c: complex = 1.0) -> "PowerSeries":
        if m < 1:
            raise ValueError("monomial degree must be >= 1")
        coeffs = [0.0] * m
        coeffs[-1] = c
        return cls(tuple(coeffs))

    @classmethod
    def log1p(cls, M: int) -> "PowerSeries":
        """Truncation of log(1+w) = -sum (-w)^m / m."""
        return cls(tuple(-((-1.0) ** m) / m for m in range(1, M + 1)))

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def items(self):
        """(m, c_m) for the nonzero coefficients."""
        return [(m, c) for m, c in enumerate(self.coeffs, start=1) if c != 0]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return sum(c * z**m for m, c in self.items()) + 0 * z

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return sum(m * c * z ** (m - 1) for m, c in self.items()) + 0 * z

    def taylor_remainder(self, j: int) -> "PowerSeries | None":
        """z^{-2} (f - T_j f): the coefficients of degree > j shifted down by two."""
        tail = [c if m > j else 0.0 for m, c in enumerate(self.coeffs, start=1)]
        shifted = tail[2:]
        if not any(shifted):
            return None
        return PowerSeries(tuple(shifted))

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = max(self.degree, other.degree)
        a = list(self.coeffs) + [0.0] * (n - self.degree)
        b = list(other.coeffs) + [0.0] * (n - other.degree)
        return PowerSeries(tuple(x + y for x, y in zip(a, b)))

    def scale(self, alpha: complex) -> "PowerSeries":
        return PowerSeries(tuple(alpha * c for c in self.coeffs))


# ---------------------------------------------------------------- two-maps

def w2_monomial(m: int, x1, x2) -> complex:
    if m < 1:
        raise ValueError("m must be >= 1")
    return (m / 2) * sum(x1**j * x2 ** (m - j) / (j * (m - j)) for j in range(1, m))


def w2_log(x1: float, x2: float) -> float:
    """W2[log] with base point 1: -1/2 log x1 log x2."""
    if x1 <= 0 or x2 <= 0:
        raise ValueError("w2_log needs positive arguments")
    return -0.5 * np.log(x1) * np.log(x2)


def w2_tilde_monomial(m: int, x1, x2) -> complex:
    if m < 1:
        raise ValueError("m must be >= 1")
    return (m / 2) * sum(x1**j * x2 ** (m - 1 - j) / j for j in range(1, m))


def w2_series(f: PowerSeries, x1, x2):
    return sum(c * w2_monomial(m, x1, x2) for m, c in f.items())


def w2_tilde_series(f: PowerSeries, x1, x2):
    return sum(c * w2_tilde_monomial(m, x1, x2) for m, c in f.items())


# ------------------------------------------------------ composition sums

def _weighted_composition_sum(m: int, weights: Sequence[Callable[[int], complex]]) -> complex:
    """sum over compositions (l_1..l_j) of m of prod_i weights[i](l_i)."""
    j = len(weights)
    if j == 0:
        return 1.0 if m == 0 else 0.0
    if m < j:
        return 0.0
    if m <= ENUMERATION_DEGREE:
        total = 0.0
        for comp in compositions(m, j):
            term = 1.0
            for w, l in zip(weights, comp):
                term = term * w(l)
            total = total + term
        return total
    # dynamic programming: poly[d] = sum over prefixes with total degree d
    poly = np.zeros(m + 1, dtype=complex)
    poly[0] = 1.0
    for i, w in enumerate(weights):
        remaining = j - i - 1  # parts still to place, each at least 1
        wl = np.array([0.0] + [w(l) for l in range(1, m + 1)], dtype=complex)
        new = np.zeros_like(poly)
        for d in range(m + 1 - remaining):
            # new[d] = sum_{l>=1} poly[d-l] w(l)
            new[d] = np.dot(poly[: d][::-1], wl[1 : d + 1]) if d > 0 else 0.0
        poly = new
    return poly[m]


def f_map_monomial(j: int, m: int, x: Sequence) -> complex:
    """F_j[z^m]: the last variable carries no 1/k weight."""
    if j < 2:
        raise ValueError("F_j needs arity >= 2")
    if len(x) != j:
        raise ValueError(f"expected {j} arguments")
    weights = [(lambda l, xi=xi: xi**l / l) for xi in x[:-1]]
    weights.append(lambda l, xi=x[-1]: xi**l)
    return _weighted_composition_sum(m, weights)


def w3_monomial(m: int, x1, x2, x3) -> complex:
    return f_map_monomial(3, m, (x1, x2, x3))


def w3_series(f: PowerSeries, x1, x2, x3):
    return sum(c * w3_monomial(m, x1, x2, x3) for m, c in f.items())


def phi_monomial(j: int, m: int, x: Sequence) -> complex:
    if j < 1:
        raise ValueError("arity must be >= 1")
    if len(x) != j:
        raise ValueError(f"expected {j} arguments")
    weights = [(lambda l, xi=xi: xi**l / l) for xi in x]
    return _weighted_composition_sum(m, weights)


def phi_series(j: int, f: PowerSeries, x: Sequence) -> complex:
    return sum(c * phi_monomial(j, m, x) for m, c in f.items())


def phi_tilde(j: int, m: int, x: Sequence) -> complex:
    """Complete homogeneous symmetric polynomial h_m(x1..xj) by the recurrence
    h_m(x1..xj) = h_m(x1..x_{j-1}) + x_j h_{m-1}(x1..xj)."""
    if m < 0:
        raise ValueError("degree must be >= 0")
    if len(x) != j or j < 1:
        raise ValueError(f"expected {j} arguments")
    h = np.zeros(m + 1, dtype=complex)
    h[0] = 1.0  # zero variables: h_0 = 1, h_{>0} = 0
    for xi in x:
        for d in range(1, m + 1):
            h[d] = h[d] + xi * h[d - 1]
    return h[m]


def phi_merge_check(p: int, x: Sequence, y: Sequence, z: Sequence) -> tuple[complex, complex]:
    """Both sides of the merge identity for Phi maps.

    LHS = sum_{a+b+c=p} sum_{al<=a, be<=b, ga<=c} Phi_al[z^a](x) Phi_be[z^b](y) Phi_ga[z^c](z) / (al! be! ga!)
    RHS = sum_{al,be,ga>=1} Phi_{al+be+ga}[z^p](x_1..x_al, y_1..y_be, z_1..z_ga) / (al! be! ga!)

    Each of x, y, z needs at least p-2 entries.
    """
    if p < 3:
        raise ValueError("p must be >= 3")
    for name, arr in (("x", x), ("y", y), ("z", z)):
        if len(arr) < p - 2:
            raise ValueError(f"{name} needs at least p-2 = {p - 2} values")
    lhs = 0.0
    for a in range(1, p - 1):
        for b in range(1, p - a):
            c = p - a - b
            for al in range(1, a + 1):
                pa = phi_monomial(al, a, x[:al]) / factorial(al)
                for be in range(1, b + 1):
                    pb = phi_monomial(be, b, y[:be]) / factorial(be)
                    for ga in range(1, c + 1):
                        pc = phi_monomial(ga, c, z[:ga]) / factorial(ga)
                        lhs += pa * pb * pc
    rhs = 0.0
    for al in range(1, p - 1):
        for be in range(1, p - al):
            for ga in range(1, p - al - be + 1):
                args = list(x[:al]) + list(y[:be]) + list(z[:ga])
                rhs += phi_monomial(al + be + ga, p, args) / (
                    factorial(al) * factorial(be) * factorial(ga)
                )
    return complex(lhs), complex(rhs)


# ---------------------------------------------------- integral cross-checks

def _divided_difference(fprime, fsecond, a, b, eps=1e-7):
    if abs(a - b) < eps * max(1.0, abs(a), abs(b)):
        return fsecond(0.5 * (a + b))
    return (fprime(a) - fprime(b)) / (a - b)


def w2_integral(fprime, fsecond, x1: float, x2: float, base: float = 0.0, tol: float = 1e-11) -> float:
    """1/2 int_base^x1 int_base^x2 (f'(s1) - f'(s2)) / (s1 - s2) ds2 ds1 by adaptive quadrature.

    The integrand is replaced by f'' on (a neighbourhood of) the diagonal.
    Real arguments only.
    """
    def integrand(s2, s1):
        return _divided_difference(fprime, fsecond, s1, s2)

    val, _ = integrate.dblquad(integrand, base, x1, base, x2, epsabs=tol, epsrel=tol)
    return 0.5 * val


def w2_tilde_integral(fprime, fsecond, x1: float, x2: float, base: float = 0.0, tol: float = 1e-11) -> float:
    val, _ = integrate.quad(
        lambda s: _divided_difference(fprime, fsecond, s, x2), base, x1, epsabs=tol, epsrel=tol
    )
    return 0.5 * val


def phi2_integral(f: PowerSeries, x1: float, x2: float, tol: float = 1e-11) -> float:
    """int_0^x1 int_0^x2 (f(s1)/s1 - f(s2)/s2) / (s1 - s2): residue form of Phi_2[f].

    Real coefficients and real arguments only.
    """
    g = PowerSeries(f.coeffs[1:]) if f.degree > 1 else None
    if g is None:
        return 0.0

    def gval(s):
        # f(s)/s = c1 + g(s)
        return (f.coeffs[0] + g(s)).real

    def gprime(s):
        return g.derivative(s).real

    def integrand(s2, s1):
        if abs(s1 - s2) < 1e-7:
            return gprime(0.5 * (s1 + s2))
        return (gval(s1) - gval(s2)) / (s1 - s2)

    val, _ = integrate.dblquad(integrand, 0.0, x1, 0.0, x2, epsabs=tol, epsrel=tol)
    return val


def w3_integral(f: PowerSeries, x1: float, x2: float, x3: complex, tol: float = 1e-10) -> complex:
    """Three-term residue integral representation of W3[f].

    Intended for x1 > 0 > x2 (so the diagonal s1 = s2 meets the square only at
    the origin) and non-real x3 (so no denominator s - x3 vanishes).
    """
    def term(s1, s2):
        return x3 * (
            f(s1) / (s1 * (s1 - x3) * (s1 - s2))
            - f(s2) / (s2 * (s2 - x3) * (s1 - s2))
            + f(x3) / (x3 * (s1 - x3) * (s2 - x3))
        )

    def part(fn):
        val, _ = integrate.dblquad(lambda s2, s1: fn(term(s1, s2)), 0.0, x1, 0.0, x2, epsabs=tol, epsrel=tol)
        return val

    return complex(part(np.real), part(np.imag))

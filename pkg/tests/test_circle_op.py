import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from szegolab.circle_op import (
    BandedOperator,
    BranchAmbiguityError,
    InteriorBudgetError,
    SeriesDivergenceError,
    TrigPoly,
    ad_a_block_residual,
    block_identity_rhs,
    blocks_of,
    build_operator,
    c_cos,
    commutation_residual,
    cotangent_pairing,
    dump_trigpoly,
    exp_cos,
    fourier_block,
    fourier_coeffs,
    geodesic_coeff,
    identity_operator,
    level_trace,
    level_traces,
    logdet_lu,
    one_plus_c_cos,
    operator_log,
    plus_minus_parts,
    power_block,
    project,
    trace_log,
    trace_pow,
    write_series_csv,
)


def random_symbol(rng, K, scale=0.15):
    modes = {k: scale * (rng.normal() + 1j * rng.normal()) / (1 + abs(k)) for k in range(-K, K + 1) if k}
    modes[0] = 1.0
    return TrigPoly.from_modes(modes)


# ----------------------------------------------------------------- TrigPoly

def test_fourier_coeffs_cosine():
    t = fourier_coeffs(lambda x: 1 + np.cos(x), 2)
    np.testing.assert_allclose(t.coeffs, [0, 0.5, 1, 0.5, 0], atol=1e-15)
    c = fourier_coeffs(lambda x: 3.0 + 0 * x, 3)
    np.testing.assert_allclose(c.coeffs, [0, 0, 0, 3, 0, 0, 0], atol=1e-15)


def test_fourier_coeffs_exp_cos_against_quadrature():
    t = fourier_coeffs(lambda x: np.exp(0.4 * np.cos(x)), 8)
    quad, _ = integrate.quad(lambda x: np.exp(0.4 * np.cos(x)) / (2 * np.pi), 0, 2 * np.pi, epsabs=1e-14)
    assert t.coeff(0).real == pytest.approx(quad, abs=1e-14)
    assert t.coeff(0).real == pytest.approx(1.0404, abs=1e-4)


def test_fourier_coeffs_sampling_guard():
    with pytest.raises(ValueError):
        fourier_coeffs(np.cos, 10, n_points=20)


def test_trigpoly_algebra(rng):
    a, b = random_symbol(rng, 2), random_symbol(rng, 3)
    x = np.linspace(0, 2 * np.pi, 17)
    np.testing.assert_allclose((a * b)(x), a(x) * b(x), atol=1e-13)
    np.testing.assert_allclose((a - b)(x), a(x) - b(x), atol=1e-13)
    np.testing.assert_allclose(a.power(3)(x), a(x) ** 3, atol=1e-13)
    assert one_plus_c_cos(0.3).real and not TrigPoly.from_modes({1: 1.0}).real


def test_trigpoly_json_roundtrip(rng):
    a = random_symbol(rng, 3)
    back = TrigPoly.from_json(json.loads(json.dumps(a.to_json())))
    np.testing.assert_array_equal(back.coeffs, a.coeffs)
    assert json.loads(dump_trigpoly(a))["degree"] == 3
    with pytest.raises(ValueError):
        TrigPoly.from_json({"degree": 2, "re": [1, 2], "im": [0, 0]})


def test_apply_resolves_log():
    b = exp_cos(0.4)
    lam = b.apply(lambda z: np.log(z.real).astype(complex))
    assert lam.coeff(1) == pytest.approx(0.2, abs=1e-14)
    assert lam.coeff(0) == pytest.approx(0.0, abs=1e-14)
    assert abs(lam.coeff(2)) < 1e-14


def test_geodesic_coefficients():
    f = TrigPoly.from_modes({0: 1.0, 2: 0.3j, -1: 0.2})
    assert geodesic_coeff(f, 2, 0.0, 1) == pytest.approx(0.3j)
    assert geodesic_coeff(f, 1, 0.0, -1) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        geodesic_coeff(f, 1, 0.0, 0)


def test_cotangent_pairing_symmetry(rng):
    f, g = random_symbol(rng, 3), random_symbol(rng, 2)
    for nu in (1, 2):
        assert cotangent_pairing(f, g, nu) == pytest.approx(cotangent_pairing(g, f, -nu), abs=1e-14)
        expected = f.coeff(nu) * g.coeff(-nu) + f.coeff(-nu) * g.coeff(nu)
        assert cotangent_pairing(f, g, nu) == pytest.approx(expected, abs=1e-14)


# ------------------------------------------------------------- operators

def test_build_operator_entries():
    op = build_operator(one_plus_c_cos(0.3), c_cos(0.2), 6)
    N = op.N
    assert op.entries[N + 2, N + 1] == pytest.approx(0.25)
    assert op.entries[N + 1, N + 0] == pytest.approx(0.15)
    toe = build_operator(one_plus_c_cos(0.3), TrigPoly.constant(0.0), 6)
    assert np.allclose(toe.entries, toe.entries.T) and toe.bandwidth == 1


def test_operator_guards():
    with pytest.raises(InteriorBudgetError):
        build_operator(TrigPoly.from_modes({0: 1, 3: 0.1}), TrigPoly.constant(0.0), 2)
    with pytest.raises(ValueError):
        BandedOperator(np.eye(3), 2)
    op = identity_operator(3)
    with pytest.raises(InteriorBudgetError):
        project(op, 4)
    with pytest.raises(ValueError):
        identity_operator(3) @ identity_operator(4)


def test_project():
    op = build_operator(one_plus_c_cos(0.3), c_cos(0.2), 5)
    assert np.array_equal(project(op, 5).entries, op.entries)
    assert not project(op, -1).entries.any()
    P = project(op, 2).entries
    assert np.array_equal(P[3:8, 3:8], op.entries[3:8, 3:8]) and P[:3].sum() == 0


def test_fourier_blocks_partition(rng):
    op = build_operator(random_symbol(rng, 2), random_symbol(rng, 1), 8)
    B = blocks_of(op)
    assert np.allclose(sum(B.values()), op.entries)
    diag = BandedOperator(np.diag(rng.normal(size=9)), 4)
    assert np.array_equal(fourier_block(diag, 0).entries, diag.entries)
    assert not fourier_block(diag, 1).entries.any()
    # bandwidth one: the +1 block collects entries with |row| = |col| + 1
    op1 = build_operator(one_plus_c_cos(0.4), TrigPoly.constant(0.0), 5)
    B1 = fourier_block(op1, 1).entries
    rows, cols = np.nonzero(B1)
    assert np.all(np.abs(rows - 5) == np.abs(cols - 5) + 1)


@pytest.mark.parametrize("K, kappa, n", [(1, 1, 3), (2, -2, 5), (3, 1, 4)])
def test_commutation_exact(rng, K, kappa, n):
    op = build_operator(random_symbol(rng, K), random_symbol(rng, K), 14)
    assert commutation_residual(op, kappa, n) <= 1e-14


def test_ad_a_block(rng):
    for K in (1, 2, 3):
        op = build_operator(random_symbol(rng, K), random_symbol(rng, K), 10)
        for nu in range(-K, K + 1):
            assert ad_a_block_residual(op, nu) <= 1e-13


def test_power_block_forms(rng):
    op = build_operator(random_symbol(rng, 1), random_symbol(rng, 1), 9)
    assert np.array_equal(power_block(op, 1, 1).entries, fourier_block(op, 1).entries)
    for nu in (-2, 0, 1, 2):
        a = power_block(op, 2, nu).entries
        b = power_block(op, 2, nu, form="convolution").entries
        assert np.abs(a - b).max() < 1e-14
    assert not power_block(op, 2, 3).entries.any()


def test_plus_minus_parts(rng):
    op = build_operator(random_symbol(rng, 2), random_symbol(rng, 1), 10)
    minus, plus = plus_minus_parts(op, 2)
    B = blocks_of(op)
    assert np.allclose(sum(minus[1].values()) + sum(plus[1].values()), op.entries)
    assert set(minus[1]) == {-2, -1}
    # B_-^2 by a literal double sum
    for nu in minus[2]:
        lit = sum(B[a] @ B[b] for a in range(-2, 3) for b in range(-2, 0) if a + b == nu)
        assert np.allclose(minus[2][nu], lit)
    with pytest.raises(InteriorBudgetError):
        plus_minus_parts(op, 6)


# ------------------------------------------------------------------ traces

def test_level_traces():
    X = np.diag(np.arange(7.0))
    assert level_trace(X, 3, 0) == 3
    assert level_trace(X, 3, 2) == 1 + 5
    np.testing.assert_allclose(level_traces(X, 3), [3, 6, 6, 6])


def test_trace_pow_trivial_cases(rng):
    op = build_operator(random_symbol(rng, 2), random_symbol(rng, 2), 12)
    lhs, rhs = trace_pow(op, 5, 1)
    assert lhs == pytest.approx(rhs)
    diag = BandedOperator(np.diag(rng.normal(size=13)), 6)
    lhs, rhs = trace_pow(diag, 3, 3)
    assert lhs == pytest.approx(rhs)


@pytest.mark.parametrize("c", [0.1, 0.3, 0.7])
@pytest.mark.parametrize("n", [1, 4, 9])
def test_toeplitz_witness(c, n):
    op = build_operator(one_plus_c_cos(c), TrigPoly.constant(0.0), n + 3)
    lhs, rhs = trace_pow(op, n, 2)
    assert (lhs - rhs).real == pytest.approx(-c * c / 2, abs=1e-14)


@given(st.integers(1, 3), st.integers(2, 3), st.integers(4, 12), st.integers(0, 2**32 - 1))
def test_block_identity(K, m, n, seed):
    rng = np.random.default_rng(seed)
    op = build_operator(random_symbol(rng, K, 0.3), random_symbol(rng, K, 0.3), n + m * K + 1)
    lhs, rhs = trace_pow(op, n, m)
    assert abs((lhs - rhs) - block_identity_rhs(op, n, m)) < 1e-10


def test_trace_pow_budget():
    op = build_operator(one_plus_c_cos(0.2), TrigPoly.constant(0.0), 6)
    with pytest.raises(InteriorBudgetError):
        trace_pow(op, 5, 3)


# ------------------------------------------------------------- logarithms

def test_trace_log_trivial(rng):
    assert trace_log(identity_operator(4), 3) == 0
    d = 1 + 0.3 * rng.random(11)
    op = BandedOperator(np.diag(d), 5)
    assert trace_log(op, 3).real == pytest.approx(np.log(d[2:9]).sum(), abs=1e-12)


def test_trace_log_matches_lu():
    op = build_operator(exp_cos(0.4), TrigPoly.constant(0.0), 40)
    assert trace_log(op, 32) == pytest.approx(logdet_lu(op, 32), abs=1e-10)


def test_trace_log_divergence():
    op = build_operator(one_plus_c_cos(2.5), TrigPoly.constant(0.0), 6)
    with pytest.raises(SeriesDivergenceError):
        trace_log(op, 4)


def test_logdet_branch_guard():
    op = BandedOperator(np.diag([1.0, -2.0, 1.0]), 1)
    with pytest.raises(BranchAmbiguityError):
        logdet_lu(op, 1)


def test_operator_log_exponentiates_back(rng):
    from scipy.linalg import expm

    op = build_operator(random_symbol(rng, 1, 0.2), c_cos(0.1), 10)
    G = operator_log(op)
    assert np.abs(expm(G) - op.entries).max() < 1e-12


def test_series_csv(tmp_path):
    p = tmp_path / "s.csv"
    write_series_csv(p, [(1, 0.5), (2, 0.25 + 1e-3j)])
    lines = p.read_text().splitlines()
    assert lines[0] == "n,value" and len(lines) == 3

"""Eigen-data construction: eigenvalues, norms, the L-value, and the disk cache."""

import math

import numpy as np
import pytest

from vertmass.forms import (
    EigenStore,
    Eigenform,
    default_truncation,
    fourier_eval,
    hecke_matrix,
    l_sym2_at_1,
    lambda_extended,
    normalized_hecke_matrix,
    petersson_norm,
    victor_miller,
)
from vertmass.qexp import delta_qexp, dim_cusp_forms

# first Fourier coefficients of the weight-12 discriminant form, a(1) = 1
TAU = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]


def _divisor_count(n: int) -> int:
    return sum(1 for d in range(1, n + 1) if n % d == 0)


def test_weight_12_eigenvalue_at_2(delta):
    assert delta.lambda_at(2) == pytest.approx(-24 / 2**5.5, rel=1e-12)
    assert delta.lambda_at(2) == pytest.approx(-0.5303300858899106, rel=1e-12)


def test_weight_12_matches_integer_expansion(delta):
    for n in range(1, 11):
        assert delta.lambda_at(n) * n**5.5 == pytest.approx(TAU[n - 1], rel=1e-10, abs=1e-10)


def test_lambda_one_is_one(store):
    for k in (12, 24, 36):
        for f in store.get(k):
            assert f.lambda_at(1) == pytest.approx(1.0, abs=1e-9)


def test_hecke_recursion_at_prime_powers(store):
    """lambda(p) lambda(p^j) = lambda(p^(j+1)) + lambda(p^(j-1))."""
    for f in store.get(24):
        for p in (2, 3, 5):
            for j in (1, 2, 3):
                lhs = f.lambda_at(p) * f.lambda_at(p**j)
                rhs = f.lambda_at(p ** (j + 1)) + f.lambda_at(p ** (j - 1))
                assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_multiplicativity(store):
    for k in (12, 24):
        for f in store.get(k):
            assert f.lambda_at(6) == pytest.approx(f.lambda_at(2) * f.lambda_at(3), rel=1e-9, abs=1e-9)
            assert f.lambda_at(35) == pytest.approx(f.lambda_at(5) * f.lambda_at(7), rel=1e-9, abs=1e-9)
            assert f.lambda_at(12) == pytest.approx(f.lambda_at(4) * f.lambda_at(3), rel=1e-9, abs=1e-9)


def test_deligne_bound(store):
    for k in (12, 24, 40):
        for f in store.get(k):
            for n in range(1, 201):
                assert abs(f.lambda_at(n)) <= _divisor_count(n) * (1 + 1e-9)


def test_dimension_per_weight(store):
    for k in (12, 16, 24, 26, 36, 48):
        assert len(store.get(k)) == dim_cusp_forms(k)


def test_conjugacy_ordering(store):
    forms = store.get(24)
    assert [f.conjugacy_id for f in forms] == [0, 1]
    assert forms[0].lambda_at(2) < forms[1].lambda_at(2)


def test_default_truncation_floor():
    assert default_truncation(12) == 2000
    assert default_truncation(96) == 2000
    assert default_truncation(400) == 3200


def test_normalized_trace_matches_eigenvalue_sum(store):
    basis = victor_miller(24, 40)
    t2 = normalized_hecke_matrix(basis, 2)
    lam_sum = sum(f.lambda_at(2) for f in store.get(24))
    assert np.trace(t2) == pytest.approx(lam_sum, rel=1e-10)


def test_hecke_matrix_needs_long_enough_basis():
    basis = victor_miller(24, 10)
    with pytest.raises(ValueError, match="truncation"):
        hecke_matrix(basis, 7)


def test_qexpansion_index_guard():
    basis = victor_miller(12, 20)
    with pytest.raises(IndexError):
        basis[0].a(21)
    with pytest.raises(IndexError):
        basis[0].a(0)
    assert [basis[0].a(n) for n in range(1, 11)] == TAU


def test_a1_sq_ties_to_l_value(delta, store):
    for f in (delta, store.get(24)[0]):
        want = math.log(2 * math.pi**2) - math.lgamma(f.weight) - math.log(f.l_sym2)
        assert f.log_a1_sq == pytest.approx(want, rel=1e-12)
        assert f.a1_sq == pytest.approx(math.exp(want), rel=1e-12)


def test_quadrature_norm_inverts_a1_sq(delta):
    """The fundamental-domain quadrature and the L-value route agree on |a_f(1)|^2."""
    exact = victor_miller(12, delta.truncation)[0]
    norm = petersson_norm(exact, delta)
    assert norm * delta.a1_sq == pytest.approx(1.0, rel=2e-6)
    # same integral in the a(1) = 1 normalization, frozen
    assert norm / (4 * math.pi) ** 11 == pytest.approx(1.035361302e-6, rel=1e-5)


def test_quadrature_norm_rejects_short_truncation(store):
    # at weight 96 the coefficient profile peaks near n = 9, so 15 terms
    # leave a tail well above the 1e-12 threshold
    short = victor_miller(96, 15)[0]
    with pytest.raises(ValueError, match="tail"):
        petersson_norm(short, store.get(96)[0])


def test_smoothed_dirichlet_route_reports_nonconvergence(delta):
    """The c/X tail outruns stored eigen-data before the doubling criterion bites."""
    with pytest.raises(ArithmeticError, match="convergence"):
        l_sym2_at_1(delta)


def test_lambda_extended_prime_product(delta):
    lam = delta.lam
    assert lambda_extended(lam, 2501) == pytest.approx(lam[40] * lam[60], rel=1e-12)
    assert lambda_extended(lam, 150) == lam[149]


def test_lambda_extended_prime_power(delta):
    lam = delta.lam
    l2 = float(lam[1])
    vals = [1.0, l2]
    for _ in range(2, 12):
        vals.append(l2 * vals[-1] - vals[-2])
    assert lambda_extended(lam, 2**11) == pytest.approx(vals[11], rel=1e-12)


def test_lambda_extended_guards(delta):
    with pytest.raises(ValueError):
        lambda_extended(delta.lam, 0)
    with pytest.raises(ValueError, match="prime"):
        lambda_extended(delta.lam, 2003)  # prime past the stored range


def test_fourier_eval_profile(delta):
    low = fourier_eval(delta, 0.3, 1.0)
    high = fourier_eval(delta, 0.3, 3.0)
    assert abs(high) < abs(low)
    on_axis = fourier_eval(delta, 0.0, 1.2)
    assert on_axis.imag == pytest.approx(0.0, abs=1e-12 * abs(on_axis))


def test_store_roundtrip(tmp_path):
    store = EigenStore(str(tmp_path))
    built = store.get(16, 300)
    assert len(built) == 1
    again = EigenStore(str(tmp_path))
    assert again.has(16, 300)
    loaded = again.get(16, 300)
    assert np.array_equal(loaded[0].lam, built[0].lam)
    assert loaded[0].l_sym2 == built[0].l_sym2
    assert loaded[0].log_a1_sq == built[0].log_a1_sq


def test_store_memory_hit(tmp_path):
    store = EigenStore(str(tmp_path))
    first = store.get(16, 300)
    assert store.get(16, 300) is first


def test_store_rebuilds_on_version_mismatch(tmp_path):
    store = EigenStore(str(tmp_path))
    built = store.get(16, 300)
    path = tmp_path / "eigen_k16_N300.txt"
    body = path.read_text().splitlines()
    body[0] = "eigencache some-older-tag k=16 N=300 dim=1"
    path.write_text("\n".join(body) + "\n")
    fresh = EigenStore(str(tmp_path))
    assert not fresh.has(16, 300)
    rebuilt = fresh.get(16, 300)
    assert np.array_equal(rebuilt[0].lam, built[0].lam)
    assert fresh.has(16, 300)


def test_store_miss_reports_false(tmp_path):
    store = EigenStore(str(tmp_path))
    assert not store.has(18, 300)

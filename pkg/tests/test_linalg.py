import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabcert.linalg import (
    eig2_general,
    eigvals_sym,
    extreme_eig_sym,
    is_psd,
    loewner_leq,
    sym_eigen,
)


def _random_sym(rng, dim):
    m = rng.uniform(-10.0, 10.0, size=(dim, dim))
    return 0.5 * (m + m.T)


def test_jacobi_against_lapack_bulk():
    # Module invariant: ascending values, orthonormal vectors, exact
    # reconstruction, across 10^4 random symmetric matrices of dim <= 8.
    rng = np.random.default_rng(12345)
    for _ in range(10_000):
        dim = int(rng.integers(1, 9))
        m = _random_sym(rng, dim)
        spec = sym_eigen(m)
        assert np.all(np.diff(spec.values) >= -1e-12)
        np.testing.assert_allclose(spec.values, np.linalg.eigvalsh(m), atol=1e-9)
        scale = max(1.0, float(np.abs(m).max()))
        recon = spec.vectors @ np.diag(spec.values) @ spec.vectors.T
        assert np.max(np.abs(recon - m)) <= 1e-10 * scale
        gram = spec.vectors.T @ spec.vectors
        assert np.max(np.abs(gram - np.eye(dim))) <= 1e-12


def test_sym_eigen_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        sym_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        sym_eigen(np.zeros((2, 3)))


def test_sym_eigen_zero_and_scalar():
    spec = sym_eigen(np.zeros((3, 3)))
    assert np.all(spec.values == 0.0)
    spec = sym_eigen(np.array([[4.5]]))
    assert spec.values[0] == 4.5


def test_is_psd_and_loewner():
    assert is_psd(np.eye(3))
    assert not is_psd(np.diag([1.0, -1e-6]))
    assert is_psd(np.diag([1.0, -1e-12]))  # inside default tolerance
    a = np.diag([1.0, 2.0])
    b = np.diag([1.0, 3.0])
    assert loewner_leq(a, b)
    assert not loewner_leq(b, a)
    with pytest.raises(ValueError):
        loewner_leq(np.eye(2), np.eye(3))


def test_eig2_general_real_and_complex():
    # rotation: tr 0, det 1 -> +-i; companion of (z+3)(z-2): tr -1, det -6
    pair = eig2_general(0.0, 1.0)
    assert np.allclose(sorted(v.imag for v in pair.values), [-1.0, 1.0])
    assert pair.radius == pytest.approx(1.0)
    pair = eig2_general(-1.0, -6.0)
    assert np.allclose(pair.values, [-3.0, 2.0])
    assert pair.radius == pytest.approx(3.0)
    with pytest.raises(ValueError):
        eig2_general(np.nan, 1.0)
    with pytest.raises(ValueError):
        eig2_general(1.0, np.inf)


@given(st.floats(-5, 5), st.floats(-5, 5))
@settings(max_examples=200, deadline=None)
def test_eig2_general_satisfies_characteristic_polynomial(tr, det):
    pair = eig2_general(tr, det)
    for lam in pair.values:
        char = lam * lam - tr * lam + det
        assert abs(char) <= 1e-8 * max(1.0, abs(lam) ** 2)
    assert pair.radius == pytest.approx(max(abs(v) for v in pair.values))


def test_eig2_radius_matches_dense_eig():
    rng = np.random.default_rng(7)
    for _ in range(500):
        m = rng.uniform(-3, 3, size=(2, 2))
        tr = m[0, 0] + m[1, 1]
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        want = max(abs(v) for v in np.linalg.eigvals(m))
        assert abs(eig2_general(tr, det).radius - want) <= 1e-10


def test_eig2_double_root_clamp():
    # (tr, det) pairs a few ulps off a perfect square land on the double
    # root instead of picking up a sqrt(eps)-sized spurious splitting.
    for root in (0.5, -1.25, 3.0):
        tr = 2.0 * root
        det = root * root * (1.0 + np.finfo(float).eps)
        pair = eig2_general(tr, det)
        assert pair.values[0] == pair.values[1] == pytest.approx(root)
        assert pair.radius == pytest.approx(abs(root))


def test_extreme_eig_fast_path_matches_jacobi():
    rng = np.random.default_rng(11)
    for _ in range(2000):
        dim = int(rng.integers(1, 4))
        m = _random_sym(rng, dim)
        full = sym_eigen(m)
        for which, k in (("max", -1), ("min", 0)):
            val, vec = extreme_eig_sym(m, which)
            assert abs(val - full.values[k]) <= 1e-10
            assert np.linalg.norm(m @ vec - val * vec) <= 1e-8
            assert abs(np.linalg.norm(vec) - 1.0) <= 1e-12


def test_extreme_eig_degenerate_cases():
    val, vec = extreme_eig_sym(2.5 * np.eye(3), "max")
    assert val == pytest.approx(2.5)
    assert np.linalg.norm(vec) == pytest.approx(1.0)
    val, _ = extreme_eig_sym(np.diag([1.0, 1.0]), "min")
    assert val == pytest.approx(1.0)
    with pytest.raises(ValueError):
        extreme_eig_sym(np.eye(2), "top")


def test_eigvals_sym_sorted():
    vals = eigvals_sym(np.diag([3.0, -1.0, 2.0]))
    assert np.allclose(vals, [-1.0, 2.0, 3.0])

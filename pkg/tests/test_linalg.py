import numpy as np
import pytest

from modcmalab.linalg import gram_schmidt_qr, jacobi_eigh


@pytest.mark.parametrize("n,seed", [(2, 0), (3, 1), (5, 2), (8, 3), (12, 4)])
def test_jacobi_matches_lapack(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    sym = (a + a.T) / 2
    w, v = jacobi_eigh(sym)
    w_ref = np.linalg.eigvalsh(sym)
    assert np.allclose(w, w_ref, atol=1e-10)
    # eigenvector columns reconstruct the matrix
    assert np.allclose(v @ np.diag(w) @ v.T, sym, atol=1e-10)
    assert np.allclose(v.T @ v, np.eye(n), atol=1e-10)


def test_jacobi_sorted_ascending():
    w, _ = jacobi_eigh(np.diag([3.0, 1.0, 2.0]))
    assert np.array_equal(w, [1.0, 2.0, 3.0])


def test_jacobi_handles_large_scale():
    sym = np.diag([1.0, 1e8])
    sym[0, 1] = sym[1, 0] = 1e3
    w, v = jacobi_eigh(sym)
    assert np.allclose(v @ np.diag(w) @ v.T, sym, rtol=1e-12)


def test_jacobi_deterministic():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((6, 6))
    sym = a @ a.T
    w1, v1 = jacobi_eigh(sym)
    w2, v2 = jacobi_eigh(sym)
    assert np.array_equal(w1, w2) and np.array_equal(v1, v2)


def test_gram_schmidt_qr_orthogonal():
    rng = np.random.default_rng(11)
    q = gram_schmidt_qr(rng.standard_normal((6, 6)))
    assert np.abs(q.T @ q - np.eye(6)).max() <= 1e-10

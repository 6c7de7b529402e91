"""Deterministic dense linear algebra for small symmetric problems.

A cyclic Jacobi eigensolver is used instead of LAPACK so that runs are
bit-reproducible regardless of the BLAS backend; the strategy matrices here
are tiny (d <= 40), where Jacobi is entirely adequate.
"""

from __future__ import annotations

import numpy as np


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and eigenvectors in
    the columns of ``v``.  Iterates until every off-diagonal entry is below
    ``tol`` relative to the diagonal scale.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    v = np.eye(n)
    if n == 1:
        return a[0, :1].copy(), v
    # absolute threshold anchored to the matrix scale
    scale = max(1.0, float(np.abs(np.diag(a)).max()))
    thresh = tol * scale

    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= thresh:
                    off = max(off, abs(apq))
                    continue
                off = max(off, abs(apq))
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # rotate rows/columns p and q
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if off <= thresh:
            break

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def gram_schmidt_qr(a: np.ndarray) -> np.ndarray:
    """Orthonormal matrix from modified Gram-Schmidt on the columns of ``a``.

    Used for seeded rotation matrices; deterministic across platforms unlike
    LAPACK QR.  Requires ``a`` square and nonsingular.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    q = np.zeros_like(a)
    for j in range(n):
        u = a[:, j].copy()
        for i in range(j):
            u -= (q[:, i] @ u) * q[:, i]
        norm = np.linalg.norm(u)
        if norm < 1e-12:
            raise ValueError("columns are numerically dependent")
        q[:, j] = u / norm
    return q

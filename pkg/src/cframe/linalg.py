"""Dense floating-point kernels: a cyclic Jacobi Hermitian eigensolver and
singular-value helpers."""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericError


def jacobi_eigh(h: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigen-decompose a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and orthonormal
    eigenvectors in the columns of ``v``.  Sweeps stop once every
    off-diagonal magnitude is at most ``tol * max(1, ||h||_F)``.

    Each rotation first removes the phase of ``a[p, q]`` with a diagonal
    unitary, then applies the classical real rotation.
    """
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"square matrix required, got shape {a.shape}")
    v = np.eye(n, dtype=complex)
    if n == 0:
        return np.zeros(0), v
    a = 0.5 * (a + a.conj().T)
    thresh = tol * max(1.0, float(np.linalg.norm(a)))

    for _ in range(max_sweeps + 1):
        off = np.abs(a - np.diag(np.diag(a)))
        if n < 2 or off.max() <= thresh:
            w = np.diag(a).real.copy()
            order = np.argsort(w, kind="stable")
            return w[order], v[:, order]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # u = [[c, s], [-s*conj(phase), c*conj(phase)]] on columns (p, q)
                cp = phase.conjugate()
                for m in (a, v):
                    col_p = m[:, p].copy()
                    col_q = m[:, q] * cp
                    m[:, p] = c * col_p - s * col_q
                    m[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :] * phase
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    raise NumericError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def singular_values(m: np.ndarray) -> np.ndarray:
    """Singular values in descending order (empty matrices give an empty array)."""
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def numeric_rank(m: np.ndarray, tol: float) -> int:
    return int(np.count_nonzero(singular_values(m) > tol))


def null_space(m: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of ``m``."""
    m = np.asarray(m, dtype=complex)
    cols = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = np.linalg.svd(m)
    rank = int(np.count_nonzero(s > tol))
    return vh[rank:].conj().T

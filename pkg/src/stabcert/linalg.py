"""Small dense symmetric eigensolver and order-cone helpers.

Everything downstream that claims a certificate valid must be able to
check it without trusting LAPACK, so the eigensolver here is a plain
cyclic Jacobi iteration written against numpy arrays only.  Matrices in
this project are tiny (dimension <= 8), where Jacobi is both accurate
and fast enough.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "Spectrum",
    "Eig2",
    "sym_eigen",
    "eigvals_sym",
    "is_psd",
    "loewner_leq",
    "eig2_general",
    "extreme_eig_sym",
]

# Relative off-diagonal mass at which the Jacobi sweep stops.
_JACOBI_RTOL = 1e-14
_MAX_SWEEPS = 60


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a real symmetric matrix.

    Attributes:
        values: eigenvalues in ascending order, shape (n,).
        vectors: orthonormal eigenvectors as columns, vectors[:, k]
            pairs with values[k].
    """

    values: np.ndarray
    vectors: np.ndarray


def _check_symmetric(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max()) if m.size else 0.0)
    if not np.all(np.abs(m - m.T) <= 1e-10 * scale):
        raise ValueError("matrix is not symmetric")
    return 0.5 * (m + m.T)


def sym_eigen(m: np.ndarray) -> Spectrum:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Rotations are applied in row-cyclic order until the off-diagonal
    Frobenius mass drops below 1e-14 times the matrix norm.  Ascending
    eigenvalue order, orthonormal columns.

    Args:
        m: real symmetric array, shape (n, n).

    Returns:
        Spectrum with sorted values and matching vectors.

    Raises:
        ValueError: if m is not square symmetric.
    """
    a = _check_symmetric(m)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return Spectrum(values=a[0].copy(), vectors=v)

    norm = np.linalg.norm(a)
    if norm == 0.0:
        return Spectrum(values=np.zeros(n), vectors=v)
    tol = _JACOBI_RTOL * norm

    for _ in range(_MAX_SWEEPS):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                # Classic 2x2 annihilation; t is the stable root.
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                a[p, q] = a[q, p] = 0.0
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
    else:
        raise RuntimeError("Jacobi iteration failed to converge")

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return Spectrum(values=w[order], vectors=v[:, order])


def eigvals_sym(m: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix (Jacobi, no vectors kept)."""
    return sym_eigen(m).values


def is_psd(m: np.ndarray, tol: float = 1e-9) -> bool:
    """True if the symmetric matrix m has no eigenvalue below -tol."""
    return bool(eigvals_sym(m)[0] >= -tol)


def loewner_leq(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """Loewner order test a <= b, i.e. b - a is PSD up to tol."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return is_psd(b - a, tol=tol)


def extreme_eig_sym(m: np.ndarray, which: str) -> tuple[float, np.ndarray]:
    """Largest or smallest eigenpair of a small symmetric matrix.

    Closed forms for dimensions 1-3 (the solver's hot loop); anything
    larger, or a near-defective 3x3 where the cross-product eigenvector
    degenerates, falls back to sym_eigen.  which is "max" or "min".

    Returns:
        (eigenvalue, unit eigenvector).
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if which not in ("max", "min"):
        raise ValueError(f"which must be 'max' or 'min', got {which!r}")
    if n == 1:
        return float(m[0, 0]), np.array([1.0])
    if n == 2:
        a, b, c = m[0, 0], m[0, 1], m[1, 1]
        half_gap = 0.5 * (a - c)
        root = np.sqrt(half_gap * half_gap + b * b)
        val = 0.5 * (a + c) + (root if which == "max" else -root)
        v1 = np.array([b, val - a])
        v2 = np.array([val - c, b])
        vec = v1 if v1 @ v1 >= v2 @ v2 else v2
        norm = np.sqrt(vec @ vec)
        if norm < 1e-150:
            return float(val), np.array([1.0, 0.0])
        return float(val), vec / norm
    if n == 3:
        q = (m[0, 0] + m[1, 1] + m[2, 2]) / 3.0
        d = m - q * np.eye(3)
        p2 = float((d * d).sum())
        p = np.sqrt(p2 / 6.0)
        if p < 1e-14 * max(1.0, abs(q)):
            basis = np.array([1.0, 0.0, 0.0])
            return float(q), basis
        b = d / p
        det_b = float(np.linalg.det(b))
        r = min(1.0, max(-1.0, det_b / 2.0))
        phi = np.arccos(r) / 3.0
        if which == "max":
            val = q + 2.0 * p * np.cos(phi)
        else:
            val = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
        shifted = m - val * np.eye(3)
        best = None
        best_norm = 0.0
        for i in range(3):
            for j in range(i + 1, 3):
                cand = np.cross(shifted[i], shifted[j])
                norm = float(cand @ cand)
                if norm > best_norm:
                    best_norm = norm
                    best = cand
        scale = float((shifted * shifted).sum())
        if best is None or best_norm <= 1e-24 * max(scale * scale, 1e-30):
            spec = sym_eigen(m)
            k = -1 if which == "max" else 0
            return float(spec.values[k]), spec.vectors[:, k]
        return float(val), best / np.sqrt(best_norm)
    spec = sym_eigen(m)
    k = -1 if which == "max" else 0
    return float(spec.values[k]), spec.vectors[:, k]


class Eig2(NamedTuple):
    """Root pair of z^2 - tr z + det and its largest modulus."""

    values: np.ndarray
    radius: float


def eig2_general(tr: float, det: float) -> Eig2:
    """Eigenvalues of a general 2x2 real matrix from trace and determinant.

    Solves the characteristic quadratic directly.  Returns a complex
    conjugate pair when the discriminant is negative (radius sqrt(det),
    exact), real values otherwise, sorted by real part then imaginary
    part.  A discriminant within roundoff of zero is collapsed to a
    double root at tr/2, which keeps the radius stable for defective
    matrices where the naive sqrt would wobble at the 1e-8 level.
    """
    tr = float(tr)
    det = float(det)
    if not (np.isfinite(tr) and np.isfinite(det)):
        raise ValueError(f"trace and determinant must be finite, got {tr}, {det}")
    disc = tr * tr / 4.0 - det
    fuzz = 8.0 * np.finfo(float).eps * max(tr * tr / 4.0, abs(det))
    if abs(disc) <= fuzz:
        half = tr / 2.0
        return Eig2(values=np.array([half, half]), radius=abs(half))
    if disc > 0.0:
        root = np.sqrt(disc)
        vals = np.array([tr / 2.0 - root, tr / 2.0 + root])
        return Eig2(values=vals, radius=float(max(abs(vals[0]), abs(vals[1]))))
    root = np.sqrt(-disc)
    vals = np.array([tr / 2.0 - 1j * root, tr / 2.0 + 1j * root])
    return Eig2(values=vals, radius=float(np.sqrt(det)))

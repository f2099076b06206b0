"""Dense complex linear-algebra kernels shared by the rest of the package.

All solvers are deterministic for identical input bits: LAPACK drivers are
called through numpy/scipy, and every returned eigen/singular vector is
rotated to a fixed phase (first significantly nonzero component made real
and positive).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

# Eigenvalues at or below this are treated as numerically zero in
# positive-definiteness checks.
PD_EIG_FLOOR = 1e-12


class IllConditionedError(ValueError):
    """Matrix (or matrix pair) too close to singular to factor reliably."""


class SvdResult(NamedTuple):
    left_vectors: np.ndarray       # unitary, columns are left singular vectors
    singular_values: np.ndarray    # real, non-negative, descending
    right_vectors: np.ndarray      # unitary, columns are right singular vectors


class EigPair(NamedTuple):
    vector: np.ndarray             # unit 2-norm
    value: float


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex128 array, raising ValueError otherwise."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"{name} must be a nonempty 2-D array")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    return a


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its first significantly nonzero entry is real positive."""
    mags = np.abs(v)
    top = mags.max()
    if top == 0.0:
        return v
    idx = int(np.argmax(mags > 1e-12 * top))
    pivot = v[idx]
    return v * (pivot.conjugate() / abs(pivot))


def svd(a) -> SvdResult:
    """Full SVD with descending singular values and a fixed phase convention.

    Returns factors such that ``U @ diag(s) @ V.conj().T`` reconstructs the
    input (with zero-padding of ``diag(s)`` for rectangular inputs). Each
    coupled (left, right) vector pair carries the phase that makes the first
    significant component of the right vector real positive.
    """
    a = as_complex_matrix(a)
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    v = vh.conj().T.copy()
    u = u.copy()
    rank_dim = min(a.shape)
    for k in range(v.shape[1]):
        col = v[:, k]
        mags = np.abs(col)
        top = mags.max()
        if top == 0.0:
            continue
        idx = int(np.argmax(mags > 1e-12 * top))
        pivot = col[idx]
        phase = pivot.conjugate() / abs(pivot)
        v[:, k] *= phase
        if k < rank_dim:
            u[:, k] *= phase
    for k in range(rank_dim, u.shape[1]):
        u[:, k] = fix_phase(u[:, k])
    return SvdResult(u, s, v)


def generalized_eigmax(a, b) -> EigPair:
    """Dominant generalized eigenpair of the Hermitian pair ``(a, b)``.

    Returns the unit vector maximizing ``v^H a v / v^H b v`` together with
    that maximal ratio. ``b`` must be positive definite; the solve whitens
    ``b`` (Cholesky reduction inside LAPACK) rather than inverting it.
    """
    a = as_complex_matrix(a, "a")
    b = as_complex_matrix(b, "b")
    if a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise ValueError("a and b must be square matrices of equal size")
    a = hermitian_part(a)
    b = hermitian_part(b)
    b_min = float(np.linalg.eigvalsh(b)[0])
    if b_min <= PD_EIG_FLOOR:
        raise IllConditionedError(
            f"pair matrix b is not safely positive definite (min eig {b_min:.3e})"
        )
    w, vecs = scipy.linalg.eigh(a, b)
    vec = vecs[:, -1]
    vec = vec / np.linalg.norm(vec)
    return EigPair(fix_phase(vec), float(w[-1]))


def inv_sqrt_psd(a) -> np.ndarray:
    """Hermitian inverse square root ``S`` with ``S @ a @ S == I``.

    Raises IllConditionedError when the smallest eigenvalue of ``a`` is at or
    below the positive-definiteness floor.
    """
    a = as_complex_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    a = hermitian_part(a)
    w, v = np.linalg.eigh(a)
    if float(w[0]) <= PD_EIG_FLOOR:
        raise IllConditionedError(
            f"matrix is not safely positive definite (min eig {float(w[0]):.3e})"
        )
    s = (v * (w**-0.5)) @ v.conj().T
    return hermitian_part(s)

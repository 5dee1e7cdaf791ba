import numpy as np
import scipy.linalg


RCOND_THRESHOLD = 1e-12


def rcond(matrix):
    """Reciprocal 2-norm condition number, 0 for singular or non-finite matrices."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return 1.0
    if not np.all(np.isfinite(matrix)):
        return 0.0
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv[0] == 0:
        return 0.0
    return sv[-1] / sv[0]


def is_singular(matrix, threshold=RCOND_THRESHOLD):
    return rcond(matrix) < threshold


def solve(a, b):
    """Solves a x = b, via Cholesky if a is symmetric positive definite and LU otherwise."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.allclose(a, a.T, rtol=1e-10, atol=0):
        try:
            return scipy.linalg.cho_solve(scipy.linalg.cho_factor(a), b)
        except np.linalg.LinAlgError:
            pass
    return scipy.linalg.lu_solve(scipy.linalg.lu_factor(a), b)


def inv(a):
    """Inverse of a, via Cholesky if a is symmetric positive definite and LU otherwise."""
    a = np.asarray(a, dtype=float)
    return solve(a, np.eye(a.shape[0]))


def is_positive_definite(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.all(np.isfinite(a)):
        return False
    if not np.allclose(a, a.T, rtol=1e-10, atol=1e-14):
        return False
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return False
    return True


def random_spd(rng, dim, eig_range=(0.0, 0.5), floor=1e-3):
    """Random symmetric positive definite matrix with eigenvalues drawn uniformly from eig_range.

    Eigenvalues are floored at `floor`; the eigenbasis is the Q factor of a
    Gaussian random matrix.
    """
    eigenvalues = np.maximum(rng.uniform(*eig_range, size=dim), floor)
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    q = q * np.sign(np.diag(r))
    mat = q @ np.diag(eigenvalues) @ q.T
    return 0.5 * (mat + mat.T)

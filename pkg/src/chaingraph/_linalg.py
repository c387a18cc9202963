"""Shared symmetric-eigendecomposition kernels.

Every positive-definite inversion or matrix function in the package goes
through eigh on the symmetrized input, so there is exactly one dense
numerical code path to trust.
"""

import numpy as np


def symmetrize(a):
    return 0.5 * (a + a.T)


def as_symmetric(a, tol=1e-10, name="matrix"):
    """Validate and return a float symmetric copy of a square matrix."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if a.size and np.max(np.abs(a - a.T)) > tol:
        raise ValueError(f"{name} must be symmetric within {tol}")
    return symmetrize(a)


def eigh_sym(a):
    return np.linalg.eigh(symmetrize(a))


def spd_inverse(a, floor=None):
    """Inverse of a symmetric PD matrix via eigendecomposition.

    With `floor` set, eigenvalues below it are raised to the floor before
    inverting (graceful handling of nearly singular inputs); without it a
    non-PD input raises.
    """
    w, q = eigh_sym(a)
    if floor is None:
        if w.min() <= 0.0:
            raise np.linalg.LinAlgError("matrix is not positive definite")
    else:
        w = np.maximum(w, floor)
    return symmetrize((q / w) @ q.T)


def spd_inverse_sqrt(a):
    """Inverse square root of a symmetric PD matrix."""
    w, q = eigh_sym(a)
    if w.min() <= 0.0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    return symmetrize((q / np.sqrt(w)) @ q.T)

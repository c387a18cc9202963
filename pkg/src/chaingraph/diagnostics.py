"""Identifiability diagnostics for a sparse-plus-low-rank pair.

The sparse part lives on the subspace S of symmetric matrices supported on
supp(omega); the low-rank part lives on the tangent space T of matrices
sharing the column space of lowrank.  Exact recovery needs S and T to be
transversal and the Fisher-metric alignment between them to be strict,
which the incoherence value g < 1 certifies.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from ._linalg import as_symmetric, eigh_sym, symmetrize
from .model import SUPPORT_TOL

RANK_TOL_SCALE = 1e-8
BASIS_TOL = 1e-10
F_COND_LIMIT = 1e10


@dataclasses.dataclass(frozen=True)
class TangentBases:
    """Orthonormal bases (Frobenius inner product) for S and T.

    s_basis and t_basis are stacks of shape (dim, p, p); u1 holds the
    retained eigenvectors of the low-rank part, d1 their eigenvalues.
    """

    s_basis: np.ndarray
    t_basis: np.ndarray
    dims: tuple
    u1: np.ndarray
    d1: np.ndarray


@dataclasses.dataclass(frozen=True)
class IncoherenceReport:
    g_value: float
    satisfied: bool
    condition_of_f: float


def tangent_bases(omega, lowrank, rank_tol=None):
    """Build orthonormal bases for the two model subspaces.

    S gets one unit diagonal matrix per supported diagonal entry and one
    symmetrized unit pair per supported off-diagonal pair.  T is spanned by
    u1 @ y + y.T @ u1.T over all y, orthonormalized through an SVD; its
    dimension is k*p - k*(k-1)/2 for rank k.
    """
    omega = as_symmetric(omega, name="omega")
    lowrank = as_symmetric(lowrank, name="lowrank")
    p = omega.shape[0]

    s_mats = []
    for i in range(p):
        if abs(omega[i, i]) > SUPPORT_TOL:
            m = np.zeros((p, p))
            m[i, i] = 1.0
            s_mats.append(m)
    iu, ju = np.triu_indices(p, k=1)
    for i, j in zip(iu, ju):
        if abs(omega[i, j]) > SUPPORT_TOL:
            m = np.zeros((p, p))
            m[i, j] = m[j, i] = 1.0 / math.sqrt(2.0)
            s_mats.append(m)
    s_basis = np.array(s_mats) if s_mats else np.zeros((0, p, p))

    w, q = eigh_sym(lowrank)
    smax = float(np.max(np.abs(w))) if w.size else 0.0
    tol = rank_tol if rank_tol is not None else RANK_TOL_SCALE * smax
    keep = np.abs(w) > tol if smax > 0.0 else np.zeros(p, dtype=bool)
    u1 = q[:, keep]
    d1 = w[keep]
    k = u1.shape[1]

    if k == 0:
        t_basis = np.zeros((0, p, p))
    else:
        cand = np.empty((k * p, p * p))
        idx = 0
        for a in range(k):
            for j in range(p):
                m = np.outer(u1[:, a], np.eye(p)[j])
                cand[idx] = (m + m.T).ravel()
                idx += 1
        # left singular vectors of the candidate span, trimmed at rank
        uu, ss, _ = np.linalg.svd(cand.T, full_matrices=False)
        keep_t = ss > BASIS_TOL * ss[0]
        t_basis = np.array([symmetrize(v.reshape(p, p)) for v in uu[:, keep_t].T])

    return TangentBases(s_basis=s_basis, t_basis=t_basis,
                        dims=(s_basis.shape[0], t_basis.shape[0]),
                        u1=u1, d1=d1)


def project_span(basis, m):
    """Frobenius projection of m onto the span of an orthonormal stack."""
    if basis.shape[0] == 0:
        return np.zeros_like(np.asarray(m, dtype=float))
    coeff = np.einsum("kij,ij->k", basis, m)
    return np.einsum("k,kij->ij", coeff, basis)


def check_transversality(bases, tol=1e-8):
    """Whether span(S) and span(T) intersect only at zero.

    Returns (transversal, smallest principal angle in radians).  The check
    compares the rank of the stacked basis against dim S + dim T.
    """
    dim_s, dim_t = bases.dims
    if dim_s + dim_t == 0:
        return True, math.pi / 2.0
    p = bases.s_basis.shape[1] if dim_s else bases.t_basis.shape[1]
    vs = bases.s_basis.reshape(dim_s, p * p).T
    vt = bases.t_basis.reshape(dim_t, p * p).T
    stacked = np.concatenate([vs, vt], axis=1)
    svals = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(svals > tol * svals[0]))
    transversal = rank == dim_s + dim_t
    if dim_s == 0 or dim_t == 0:
        angle = math.pi / 2.0
    else:
        overlap = np.linalg.svd(vs.T @ vt, compute_uv=False)
        angle = float(math.acos(min(1.0, float(overlap[0]))))
    return transversal, angle


def check_distinct_eigenvalues(lowrank, rank_tol=None, gap_tol=1e-6):
    """Whether the nonzero eigenvalues of lowrank are pairwise separated.

    Returns (distinct, smallest gap); at most one nonzero eigenvalue gives
    an infinite gap.
    """
    lowrank = as_symmetric(lowrank, name="lowrank")
    w = np.linalg.eigvalsh(lowrank)
    smax = float(np.max(np.abs(w))) if w.size else 0.0
    tol = rank_tol if rank_tol is not None else RANK_TOL_SCALE * smax
    nz = np.sort(w[np.abs(w) > tol]) if smax > 0.0 else np.array([])
    if nz.size <= 1:
        return True, math.inf
    gap = float(np.min(np.diff(nz)))
    return gap > gap_tol, gap


def fisher_operator(theta):
    """The information metric at theta: m -> inv(theta) @ m @ inv(theta)."""
    theta = as_symmetric(theta, name="theta")
    w, q = np.linalg.eigh(theta)
    if w.min() <= 0.0:
        raise ValueError("theta must be positive definite")
    inv = symmetrize((q / w) @ q.T)

    def apply(m):
        return inv @ np.asarray(m, dtype=float) @ inv

    return apply


def check_incoherence(omega, lowrank, gamma=2.0, rank_tol=None, *,
                      theta=None, offdiag_sign=False):
    """Irrepresentability check for exact sparse-plus-low-rank recovery.

    Solves the Fisher-metric normal equations for the dual certificate
    direction and reports g, the larger of the certificate's max-norm
    leakage outside S and its spectral-norm leakage outside T divided by
    gamma.  g < 1 certifies recoverability at weight gamma.

    theta overrides the metric point (default omega + lowrank), letting
    callers probe a support pattern and column space at a chosen metric;
    omega then only supplies the support and sign pattern.  offdiag_sign
    drops the diagonal from the sign target, which is the natural target
    when S carries no diagonal elements.

    Raises ValueError when the coordinate matrix of the metric is singular
    beyond F_COND_LIMIT, which signals a transversality failure.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    bases = tangent_bases(omega, lowrank, rank_tol)
    omega = as_symmetric(omega, name="omega")
    if theta is None:
        theta = omega + as_symmetric(lowrank, name="lowrank")
    fisher = fisher_operator(theta)

    dim_s, dim_t = bases.dims
    p = omega.shape[0]
    all_b = np.concatenate([bases.s_basis, bases.t_basis], axis=0)
    if all_b.shape[0] == 0:
        raise ValueError("both subspaces are trivial")
    images = np.array([fisher(m) for m in all_b])
    f_mat = symmetrize(np.einsum("akl,bkl->ab", all_b, images))
    w, q = np.linalg.eigh(f_mat)
    if w.min() <= 0.0 or w.max() / w.min() > F_COND_LIMIT:
        raise ValueError("coordinate matrix of the metric is singular; "
                         "the subspaces are not transversal")
    cond_f = float(w.max() / w.min())

    sign_s = np.where(np.abs(omega) > SUPPORT_TOL, np.sign(omega), 0.0)
    if offdiag_sign:
        np.fill_diagonal(sign_s, 0.0)
    if bases.u1.shape[1]:
        sign_t = gamma * symmetrize((bases.u1 * np.sign(bases.d1)) @ bases.u1.T)
    else:
        sign_t = np.zeros((p, p))

    rhs = np.concatenate([
        np.einsum("kij,ij->k", bases.s_basis, sign_s) if dim_s else np.zeros(0),
        np.einsum("kij,ij->k", bases.t_basis, sign_t) if dim_t else np.zeros(0),
    ])
    coeff = q @ ((q.T @ rhs) / w)
    delta = np.einsum("k,kij->ij", coeff, all_b)
    certificate = fisher(delta)

    leak_s = certificate - project_span(bases.s_basis, certificate)
    leak_t = certificate - project_span(bases.t_basis, certificate)
    g_s = float(np.max(np.abs(leak_s)))
    g_t = float(np.max(np.abs(np.linalg.eigvalsh(symmetrize(leak_t))))) / gamma
    g = max(g_s, g_t)
    return IncoherenceReport(g_value=g, satisfied=g < 1.0,
                             condition_of_f=cond_f)

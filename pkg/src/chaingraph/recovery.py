"""Structure recovery on top of the precision decomposition.

Chain components come from the off-diagonal support of the sparse part.
Components are then ordered greedily: at each round pick the component
whose worst-case excess conditional variance over the noise variance is
smallest, conditioning on everything already placed.  Directed
coefficients follow from blockwise least squares on the sample
covariance, denoised by singular value truncation and entrywise
hard thresholding.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np

from ._linalg import eigh_sym, symmetrize
from .model import (ChainGraph, chain_components, directed_support,
                    undirected_support)
from .solver import SolverConfig, fit_sparse_lowrank

COND_LIMIT = 1e12
FLOOR_SCALE = 1e-10


@dataclasses.dataclass
class RecoveryConfig:
    """Penalty schedules; None fields resolve from the sample size.

    With eta in (0, 1/4): lam and kappa default to n**(-1/2 + eta) and the
    coefficient threshold nu to n**(-1/2 + 2 * eta).
    """

    eta: float = 0.125
    lam: float | None = None
    kappa: float | None = None
    nu: float | None = None
    solver: SolverConfig = dataclasses.field(default_factory=SolverConfig)

    def __post_init__(self):
        if not 0.0 < self.eta < 0.25:
            raise ValueError("eta must lie in (0, 1/4)")
        for name in ("lam", "kappa", "nu"):
            v = getattr(self, name)
            if v is not None and v < 0.0:
                raise ValueError(f"{name} must be nonnegative")

    def resolve(self, n):
        """Concrete (lam, kappa, nu) for sample size n."""
        if n < 1:
            raise ValueError("n must be at least 1")
        rate = float(n) ** (-0.5 + self.eta)
        lam = rate if self.lam is None else self.lam
        kappa = rate if self.kappa is None else self.kappa
        nu = float(n) ** (-0.5 + 2.0 * self.eta) if self.nu is None else self.nu
        return lam, kappa, nu


@dataclasses.dataclass
class OrderedComponents:
    """Greedy output: pi_hat lists component indices earliest first and
    gaps[k] is the criterion value of the component picked at round k."""

    components: tuple
    pi_hat: tuple
    gaps: tuple


def _guarded_inverse(a, context):
    """Eigendecomposition inverse with a floor when nearly singular.

    Condition numbers beyond COND_LIMIT (or nonpositive eigenvalues) raise
    the small eigenvalues to FLOOR_SCALE times the trace, with a warning.
    """
    w, q = eigh_sym(a)
    wmin, wmax = float(w.min()), float(w.max())
    if wmin <= 0.0 or wmax / wmin > COND_LIMIT:
        floor = FLOOR_SCALE * max(float(np.sum(np.abs(w))), np.finfo(float).tiny)
        warnings.warn(
            f"nearly singular {context}; eigenvalues floored at {floor:.3e}",
            RuntimeWarning)
        w = np.maximum(w, floor)
    return symmetrize((q / w) @ q.T)


def _gap_from_inverse(sigma_hat, omega_hat_inv_diag, tau, inv_cc, cond):
    tau = list(tau)
    diag_tau = sigma_hat.diagonal()[tau]
    if cond:
        stc = sigma_hat[np.ix_(tau, list(cond))]
        quad = np.einsum("ij,jk,ik->i", stc, inv_cc, stc)
        var = diag_tau - quad
    else:
        var = diag_tau
    return float(np.max(var - omega_hat_inv_diag[tau]))


def d_hat(sigma_hat, omega_hat_inv_diag, tau, cond=()):
    """Ordering criterion: worst excess of Var(x_i | x_cond) estimates over
    the corresponding noise variances, maximized over i in tau."""
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    omega_hat_inv_diag = np.asarray(omega_hat_inv_diag, dtype=float)
    tau = sorted(int(v) for v in tau)
    cond = sorted(int(v) for v in cond)
    if not tau:
        raise ValueError("tau must be nonempty")
    if set(tau) & set(cond):
        raise ValueError("tau and cond must be disjoint")
    inv_cc = None
    if cond:
        inv_cc = _guarded_inverse(sigma_hat[np.ix_(cond, cond)],
                                  "conditioning block of sigma_hat")
    return _gap_from_inverse(sigma_hat, omega_hat_inv_diag, tau, inv_cc, cond)


def order_components(sigma_hat, omega_hat, components):
    """Greedy causal ordering of the chain components.

    Ties go to the smallest component index.  Each round factors the
    conditioning block once and scores every remaining component with it.
    """
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    omega_hat = np.asarray(omega_hat, dtype=float)
    oinv_diag = np.diag(_guarded_inverse(omega_hat, "omega_hat"))
    remaining = list(range(len(components)))
    placed = []
    cond = []
    gaps = []
    while remaining:
        inv_cc = None
        if cond:
            inv_cc = _guarded_inverse(sigma_hat[np.ix_(cond, cond)],
                                      "conditioning block of sigma_hat")
        vals = [_gap_from_inverse(sigma_hat, oinv_diag, components[c], inv_cc, cond)
                for c in remaining]
        best = int(np.argmin(vals))  # first minimum, remaining stays sorted
        gaps.append(vals[best])
        chosen = remaining.pop(best)
        placed.append(chosen)
        cond = sorted(cond + list(components[chosen]))
    return OrderedComponents(components=tuple(components),
                             pi_hat=tuple(placed), gaps=tuple(gaps))


def estimate_b_reg(sigma_hat, ordered):
    """Blockwise regression coefficients in the estimated order.

    Row block tau of the k-th placed component regresses on all nodes of
    earlier components; the first block and all other entries stay zero.
    """
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    p = sigma_hat.shape[0]
    b = np.zeros((p, p))
    comps = ordered.components
    pi = ordered.pi_hat
    cond = sorted(comps[pi[0]]) if pi else []
    for k in range(1, len(pi)):
        tau = sorted(comps[pi[k]])
        inv_cc = _guarded_inverse(sigma_hat[np.ix_(cond, cond)],
                                  "conditioning block of sigma_hat")
        b[np.ix_(tau, cond)] = sigma_hat[np.ix_(tau, cond)] @ inv_cc
        cond = sorted(cond + tau)
    return b


def truncate_svd(b_reg, kappa):
    """Zero all singular values at or below kappa."""
    if kappa < 0.0:
        raise ValueError("kappa must be nonnegative")
    u, s, vt = np.linalg.svd(np.asarray(b_reg, dtype=float), full_matrices=False)
    keep = s > kappa
    return (u[:, keep] * s[keep]) @ vt[keep]


def finalize_b(b_svd, ordered, nu):
    """Zero the blocks that a causal order forbids, then hard threshold.

    Entry (i, j) survives only when j's component strictly precedes i's in
    pi_hat and |b_svd[i, j]| exceeds nu.
    """
    if nu < 0.0:
        raise ValueError("nu must be nonnegative")
    b = np.asarray(b_svd, dtype=float).copy()
    p = b.shape[0]
    pos = np.empty(p, dtype=int)
    for k, ci in enumerate(ordered.pi_hat):
        pos[list(ordered.components[ci])] = k
    allowed = pos[:, None] > pos[None, :]
    b[~allowed] = 0.0
    b[np.abs(b) <= nu] = 0.0
    return b


def learn_chain_graph(x, cfg=None):
    """Full pipeline from a data matrix to an estimated chain graph.

    Returns (decomposition, b_hat, graph).  The sample covariance is
    x.T @ x / n without centering; center the data first if needed.
    """
    if cfg is None:
        cfg = RecoveryConfig()
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("x must be an n-by-p matrix")
    n, p = x.shape
    if n < 2 or p < 2:
        raise ValueError("need at least 2 rows and 2 columns")
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    lam, kappa, nu = cfg.resolve(n)
    sigma_hat = symmetrize(x.T @ x / n)
    solver_cfg = dataclasses.replace(cfg.solver, lam=lam)
    decomp = fit_sparse_lowrank(sigma_hat, solver_cfg)
    und = undirected_support(decomp.omega)
    comps = chain_components(und, p)
    ordered = order_components(sigma_hat, decomp.omega, comps)
    b_reg = estimate_b_reg(sigma_hat, ordered)
    b_hat = finalize_b(truncate_svd(b_reg, kappa), ordered, nu)
    graph = ChainGraph(p=p, undirected=frozenset(und),
                       directed=frozenset(directed_support(b_hat)),
                       components=comps, ordering=ordered.pi_hat)
    return decomp, b_hat, graph

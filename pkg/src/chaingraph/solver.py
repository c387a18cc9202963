"""Sparse-plus-low-rank penalized likelihood solver.

Minimizes  tr(theta @ sigma_hat) - log det theta
           + lam * (||omega||_1,off + gamma * ||lowrank||_*)
over theta = omega + lowrank with theta positive definite and
omega >= delta * I, by an ADMM whose omega subproblem is itself solved
with an inner ADMM.  The omega iterate carries exact zeros produced by
soft thresholding; the PSD-cone certificate is the companion phi iterate.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ._linalg import as_symmetric, eigh_sym, symmetrize


@dataclasses.dataclass
class SolverConfig:
    """Penalties and ADMM controls.

    lam is the l1/nuclear penalty level, gamma the nuclear-norm weight,
    mu and rho the outer and inner ADMM penalty parameters, delta the
    eigenvalue floor on omega.
    """

    lam: float = 0.0
    gamma: float = 2.0
    mu: float = 1.0
    rho: float = 1.0
    delta: float = 1e-4
    outer_tol: float = 1e-5
    inner_tol: float = 1e-6
    max_outer: int = 2000
    max_inner: int = 100

    def __post_init__(self):
        if self.lam < 0.0:
            raise ValueError("lam must be nonnegative")
        for name in ("gamma", "mu", "rho", "delta", "outer_tol", "inner_tol"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration limits must be at least 1")


@dataclasses.dataclass
class PrecisionDecomposition:
    """Solver output: theta ~ omega + lowrank plus convergence data."""

    theta: np.ndarray
    omega: np.ndarray
    lowrank: np.ndarray
    objective: float
    primal_residual: float
    dual_residual: float
    iterations: int
    converged: bool
    inner_failures: int = 0
    primal_history: tuple = ()
    dual_history: tuple = ()


@dataclasses.dataclass
class OmegaStepResult:
    omega: np.ndarray
    phi: np.ndarray
    v: np.ndarray
    iterations: int
    converged: bool


def _soft_offdiag(a, tau):
    out = np.sign(a) * np.maximum(np.abs(a) - tau, 0.0)
    np.fill_diagonal(out, np.diag(a))
    return out


def soft_threshold_offdiag(a, tau):
    """Soft threshold the off-diagonal entries, leaving the diagonal alone."""
    if tau < 0.0:
        raise ValueError("tau must be nonnegative")
    return _soft_offdiag(as_symmetric(a, name="a"), tau)


def _clip_floor(a, delta):
    w, q = eigh_sym(a)
    return symmetrize((q * np.maximum(w, delta)) @ q.T)


def project_psd_floor(a, delta):
    """Frobenius projection onto {x symmetric : x >= delta * I}."""
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    return _clip_floor(as_symmetric(a, name="a"), delta)


def _svt_sym(a, tau):
    w, q = eigh_sym(a)
    shrunk = np.sign(w) * np.maximum(np.abs(w) - tau, 0.0)
    return symmetrize((q * shrunk) @ q.T)


def svt(a, tau):
    """Singular value shrinkage by tau.

    Symmetric inputs go through an eigendecomposition (shrinking the
    eigenvalue magnitudes, keeping signs); general inputs use an SVD.
    """
    if tau < 0.0:
        raise ValueError("tau must be nonnegative")
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("a must be a matrix")
    if a.shape[0] == a.shape[1] and (
            a.size == 0 or np.max(np.abs(a - a.T)) <= 1e-10):
        return _svt_sym(a, tau)
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    shrunk = np.maximum(s - tau, 0.0)
    return (u * shrunk) @ vt


def matrix_sqrt_spd(a):
    """Symmetric PSD square root; rejects indefinite input."""
    a = as_symmetric(a, name="a")
    w, q = np.linalg.eigh(a)
    if w.size and w.min() < -1e-10:
        raise ValueError("matrix has a negative eigenvalue beyond tolerance")
    return symmetrize((q * np.sqrt(np.maximum(w, 0.0))) @ q.T)


def theta_step(sigma_hat, omega, lowrank, u, mu):
    """Exact minimizer of tr(theta sigma) - log det theta + augmented term.

    Solves the scalar quadratics mu t**2 - r t - 1 = 0 on the eigenvalues
    r of mu (omega + lowrank) - sigma_hat - u, which keeps theta PD.
    """
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    r1 = mu * (np.asarray(omega) + np.asarray(lowrank)) - np.asarray(sigma_hat) - np.asarray(u)
    w, q = eigh_sym(r1)
    vals = (w + np.sqrt(w * w + 4.0 * mu)) / (2.0 * mu)
    return symmetrize((q * vals) @ q.T)


def omega_step(r2, lambda_over_mu, cfg, warm=None):
    """Prox of (lambda/mu) ||.||_1,off at r2 over the cone omega >= delta I.

    Inner ADMM splitting the l1 prox (soft threshold, exact zeros) from the
    cone projection.  `warm` takes a previous OmegaStepResult to restart
    from.  Non-convergence is reported, not raised.
    """
    if lambda_over_mu < 0.0:
        raise ValueError("lambda_over_mu must be nonnegative")
    r2 = symmetrize(np.asarray(r2, dtype=float))
    rho = cfg.rho
    scale = 1.0 + float(np.linalg.norm(r2))
    if warm is None:
        omega = r2.copy()
        v = np.zeros_like(r2)
    else:
        omega, v = warm.omega, warm.v
    phi = omega
    converged = False
    it = 0
    for it in range(1, cfg.max_inner + 1):
        phi = _clip_floor(omega - v / rho, cfg.delta)
        omega = _soft_offdiag(r2 + v + rho * phi, lambda_over_mu) / (1.0 + rho)
        v = v + rho * (phi - omega)
        if np.linalg.norm(phi - omega) <= cfg.inner_tol * scale:
            converged = True
            break
    return OmegaStepResult(omega=omega, phi=phi, v=v, iterations=it, converged=converged)


def objective_value(sigma_hat, omega, lowrank, lam, gamma):
    """Penalized negative log-likelihood at theta = omega + lowrank.

    Returns +inf when theta is not positive definite.
    """
    omega = np.asarray(omega, dtype=float)
    lowrank = np.asarray(lowrank, dtype=float)
    theta = symmetrize(omega + lowrank)
    w = np.linalg.eigvalsh(theta)
    if w.min() <= 0.0:
        return float("inf")
    l1_off = np.abs(omega).sum() - np.abs(np.diag(omega)).sum()
    nuclear = np.abs(np.linalg.eigvalsh(symmetrize(lowrank))).sum()
    fit = float(np.sum(theta * np.asarray(sigma_hat)) - np.log(w).sum())
    return fit + lam * (l1_off + gamma * nuclear)


def fit_sparse_lowrank(sigma_hat, cfg):
    """Run the nested ADMM from the identity start.

    Stops when both the primal residual ||theta - omega - lowrank||_F and
    the dual residual mu * ||(omega + lowrank) - previous||_F fall below
    outer_tol * (1 + ||theta||_F).
    """
    sigma_hat = as_symmetric(sigma_hat, tol=1e-8, name="sigma_hat")
    if not np.all(np.isfinite(sigma_hat)):
        raise ValueError("sigma_hat must be finite")
    p = sigma_hat.shape[0]
    theta = np.eye(p)
    omega = np.eye(p)
    lowrank = np.zeros((p, p))
    u = np.zeros((p, p))
    warm = None
    prev_ol = omega + lowrank
    primal_hist = []
    dual_hist = []
    inner_failures = 0
    converged = False
    it = 0
    for it in range(1, cfg.max_outer + 1):
        theta = theta_step(sigma_hat, omega, lowrank, u, cfg.mu)
        r2 = theta - lowrank + u / cfg.mu
        step = omega_step(r2, cfg.lam / cfg.mu, cfg, warm=warm)
        omega = step.omega
        warm = step
        if not step.converged:
            inner_failures += 1
        lowrank = _svt_sym(theta - omega + u / cfg.mu, cfg.lam * cfg.gamma / cfg.mu)
        u = u + cfg.mu * (theta - omega - lowrank)
        ol = omega + lowrank
        primal = float(np.linalg.norm(theta - omega - lowrank))
        dual = float(cfg.mu * np.linalg.norm(ol - prev_ol))
        prev_ol = ol
        primal_hist.append(primal)
        dual_hist.append(dual)
        tol = cfg.outer_tol * (1.0 + float(np.linalg.norm(theta)))
        if primal <= tol and dual <= tol:
            converged = True
            break
    return PrecisionDecomposition(
        theta=theta,
        omega=omega,
        lowrank=lowrank,
        objective=objective_value(sigma_hat, omega, lowrank, cfg.lam, cfg.gamma),
        primal_residual=primal_hist[-1],
        dual_residual=dual_hist[-1],
        iterations=it,
        converged=converged,
        inner_failures=inner_failures,
        primal_history=tuple(primal_hist),
        dual_history=tuple(dual_hist),
    )

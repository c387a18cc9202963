"""Random chain-graph generators and the Gaussian sampler.

Two designs: "example1" is a two-layer graph (the first tenth of the nodes
feed the rest), "example2" scatters undirected edges everywhere and routes
directed edges out of hub nodes into strictly later components.  Edge
weights are uniform on [coef_low, coef_high] with random sign, and the
noise precision is made diagonally dominant row by row.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ._linalg import spd_inverse_sqrt
from .model import ChainGraph, SemParams, chain_components

DESIGNS = ("example1", "example2")


@dataclasses.dataclass(frozen=True)
class GenConfig:
    """Knobs for the graph generators; defaults follow the two designs."""

    p: int
    design: str = "example1"
    seed: int = 0
    undirected_prob: float | None = None
    directed_prob: float = 0.8
    hub_prob: float = 0.2
    coef_low: float = 0.5
    coef_high: float = 1.5
    diag_slack: float = 0.1

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be at least 2")
        if self.design not in DESIGNS:
            raise ValueError(f"design must be one of {DESIGNS}")
        for name in ("directed_prob", "hub_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.undirected_prob is not None and not 0.0 <= self.undirected_prob <= 1.0:
            raise ValueError("undirected_prob must lie in [0, 1]")
        if not 0.0 < self.coef_low <= self.coef_high:
            raise ValueError("need 0 < coef_low <= coef_high")
        if self.diag_slack <= 0.0:
            raise ValueError("diag_slack must be positive")

    @property
    def resolved_undirected_prob(self):
        if self.undirected_prob is not None:
            return self.undirected_prob
        return 0.02 if self.design == "example1" else 0.03


def _draw_weights(rng, count, cfg):
    mags = rng.uniform(cfg.coef_low, cfg.coef_high, size=count)
    signs = np.where(rng.random(count) < 0.5, -1.0, 1.0)
    return mags * signs


def _assemble(rng, p, undirected, directed, cfg):
    """Fill omega and b for fixed edge lists; weights drawn here, in order."""
    omega = np.zeros((p, p))
    b = np.zeros((p, p))
    wu = _draw_weights(rng, len(undirected), cfg)
    wd = _draw_weights(rng, len(directed), cfg)
    for (i, j), w in zip(undirected, wu):
        omega[i, j] = w
        omega[j, i] = w
    for (pa, ch), w in zip(directed, wd):
        b[ch, pa] = w
    # row-wise diagonal dominance keeps omega PD for any draw
    np.fill_diagonal(omega, np.abs(omega).sum(axis=1) + cfg.diag_slack)
    return omega, b


def gen_example1(cfg):
    """Two-layer design: layer one is nodes 0..p//10-1, layer two the rest.

    Undirected edges appear within each layer independently; directed edges
    run from every layer-one node toward layer two.
    """
    if cfg.design != "example1":
        raise ValueError("config design is not example1")
    rng = np.random.default_rng(cfg.seed)
    p = cfg.p
    k1 = p // 10
    layers = (range(k1), range(k1, p))
    up = cfg.resolved_undirected_prob

    und_pairs = [(i, j) for layer in layers
                 for i in layer for j in layer if i < j]
    keep = rng.random(len(und_pairs)) < up
    undirected = [e for e, k in zip(und_pairs, keep) if k]

    dir_pairs = [(a, c) for a in layers[0] for c in layers[1]]
    keep = rng.random(len(dir_pairs)) < cfg.directed_prob
    directed = [e for e, k in zip(dir_pairs, keep) if k]

    omega, b = _assemble(rng, p, undirected, directed, cfg)
    params = SemParams(omega=omega, b=b)
    return params, ChainGraph.from_params(params)


def gen_example2(cfg):
    """Hub design: undirected edges anywhere, then each component (in order
    of smallest node) elects hubs which feed nodes of strictly later
    components."""
    if cfg.design != "example2":
        raise ValueError("config design is not example2")
    rng = np.random.default_rng(cfg.seed)
    p = cfg.p

    und_pairs = [(i, j) for i in range(p) for j in range(i + 1, p)]
    keep = rng.random(len(und_pairs)) < cfg.resolved_undirected_prob
    undirected = [e for e, k in zip(und_pairs, keep) if k]

    comps = chain_components(set(undirected), p)
    hubs = []
    for k, comp in enumerate(comps):
        for v in comp:
            if rng.random() < cfg.hub_prob:
                hubs.append((k, v))
    directed = []
    for k, h in hubs:
        for later in comps[k + 1:]:
            for v in later:
                if rng.random() < cfg.directed_prob:
                    directed.append((h, v))

    omega, b = _assemble(rng, p, undirected, directed, cfg)
    params = SemParams(omega=omega, b=b)
    return params, ChainGraph.from_params(params)


def generate(cfg):
    """Dispatch on cfg.design."""
    if cfg.design == "example1":
        return gen_example1(cfg)
    return gen_example2(cfg)


def sample_data(params, n, seed):
    """Draw n rows of x = inv(I - b) eps with eps ~ N(0, inv(omega))."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, params.p))
    eps = z @ spd_inverse_sqrt(params.omega)
    x = np.linalg.solve(np.eye(params.p) - params.b, eps.T).T
    return x

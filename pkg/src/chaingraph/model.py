"""Chain-graph model objects and population quantities.

A Gaussian chain graph is parameterized by a noise precision matrix
``omega`` and a coefficient matrix ``b`` through the structural equation
``x = b @ x + eps`` with ``eps ~ N(0, inv(omega))``.  ``b[i, j]`` nonzero
encodes the directed edge j -> i, and off-diagonal support of ``omega``
encodes undirected edges.  Nodes are 0-based everywhere in memory; file
formats are 1-based (see fileio).
"""

from __future__ import annotations

import dataclasses
import heapq
import math

import numpy as np

from . import _linalg

SUPPORT_TOL = 1e-8


def undirected_support(omega, tol=SUPPORT_TOL):
    """Unordered pairs (i, j), i < j, where omega has off-diagonal support."""
    m = np.asarray(omega)
    iu, ju = np.triu_indices(m.shape[0], k=1)
    keep = np.abs(m[iu, ju]) > tol
    return {(int(i), int(j)) for i, j in zip(iu[keep], ju[keep])}


def directed_support(b, tol=SUPPORT_TOL):
    """Ordered pairs (parent, child) where b has support: b[child, parent] != 0."""
    m = np.asarray(b)
    child, parent = np.nonzero(np.abs(m) > tol)
    return {(int(pa), int(ch)) for ch, pa in zip(child, parent)}


def chain_components(undirected, p):
    """Connected components of the undirected part.

    Returns a tuple of node tuples, each sorted ascending, ordered by their
    smallest member.  Isolated nodes form singleton components.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    parent = list(range(p))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for pair in undirected:
        i, j = pair
        if not (0 <= i < p and 0 <= j < p):
            raise ValueError(f"edge {pair} has a node outside range(0, {p})")
        if i == j:
            raise ValueError(f"edge {pair} is a self-loop")
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    groups = {}
    for v in range(p):
        groups.setdefault(find(v), []).append(v)
    return tuple(sorted((tuple(sorted(g)) for g in groups.values()),
                        key=lambda c: c[0]))


def _topo_order(n_comps, comp_edges):
    """Kahn's algorithm over component indices; smallest index first on ties.

    Returns None when the component digraph has a cycle.
    """
    indeg = [0] * n_comps
    adj = [[] for _ in range(n_comps)]
    for a, b in comp_edges:
        adj[a].append(b)
        indeg[b] += 1
    heap = [i for i in range(n_comps) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for w in adj[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    if len(order) != n_comps:
        return None
    return tuple(order)


def _component_of(components, p):
    comp_of = np.empty(p, dtype=int)
    for ci, comp in enumerate(components):
        comp_of[list(comp)] = ci
    return comp_of


def is_cg_feasible(omega, b=None, tol=SUPPORT_TOL):
    """Whether (omega, b) describes a chain graph.

    Feasible means directed edges never run within a chain component of
    omega and the digraph induced on components is acyclic, i.e. some
    permutation makes omega block diagonal and b strictly block lower
    triangular.  Returns (feasible, ordering) where ordering is a causal
    order of component indices (None when infeasible).  Accepts either the
    two matrices or a single SemParams-like object.
    """
    if b is None and hasattr(omega, "omega"):
        omega, b = omega.omega, omega.b
    omega = np.asarray(omega, dtype=float)
    b = np.asarray(b, dtype=float)
    if omega.shape != b.shape or omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
        raise ValueError("omega and b must be square matrices of equal shape")
    p = omega.shape[0]
    comps = chain_components(undirected_support(omega, tol), p)
    comp_of = _component_of(comps, p)
    child, par = np.nonzero(np.abs(b) > tol)
    comp_edges = set()
    for ch, pa in zip(child, par):
        ci, cj = int(comp_of[pa]), int(comp_of[ch])
        if ci == cj:
            return False, None
        comp_edges.add((ci, cj))
    order = _topo_order(len(comps), comp_edges)
    return (order is not None), order


@dataclasses.dataclass(frozen=True)
class SemParams:
    """Validated structural-equation parameters (omega PD, b zero-diagonal).

    Construction fails unless the pair is chain-graph feasible, so any
    ``SemParams`` instance describes a well-defined model.
    """

    omega: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float).copy()
        b = np.asarray(self.b, dtype=float).copy()
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
            raise ValueError("omega must be a square matrix")
        if b.shape != omega.shape:
            raise ValueError("b must have the same shape as omega")
        if omega.size and np.max(np.abs(omega - omega.T)) > 1e-12:
            raise ValueError("omega must be symmetric")
        if np.linalg.eigvalsh(omega).min() <= 0.0:
            raise ValueError("omega must be positive definite")
        if np.any(np.diag(b) != 0.0):
            raise ValueError("b must have a zero diagonal")
        feasible, _ = is_cg_feasible(omega, b)
        if not feasible:
            raise ValueError("(omega, b) is not chain-graph feasible")
        omega.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "b", b)

    @property
    def p(self):
        return self.omega.shape[0]


def _norm_pair(pair):
    i, j = int(pair[0]), int(pair[1])
    return (i, j) if i < j else (j, i)


@dataclasses.dataclass(frozen=True)
class ChainGraph:
    """Edge-level view of a chain graph.

    undirected holds pairs (i, j) with i < j; directed holds (parent, child).
    components partitions the nodes; ordering, when present, lists component
    indices in a causal order (every directed edge points from an earlier
    component to a later one).
    """

    p: int
    undirected: frozenset
    directed: frozenset
    components: tuple
    ordering: tuple | None = None

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be at least 1")
        und = frozenset(_norm_pair(e) for e in self.undirected)
        dire = frozenset((int(a), int(c)) for a, c in self.directed)
        comps = tuple(tuple(int(v) for v in c) for c in self.components)
        object.__setattr__(self, "undirected", und)
        object.__setattr__(self, "directed", dire)
        object.__setattr__(self, "components", comps)

        nodes = [v for c in comps for v in c]
        if sorted(nodes) != list(range(self.p)):
            raise ValueError("components must partition range(p)")
        comp_of = _component_of(comps, self.p)

        for i, j in und:
            if i == j or not (0 <= i < self.p and 0 <= j < self.p):
                raise ValueError(f"invalid undirected edge ({i}, {j})")
            if comp_of[i] != comp_of[j]:
                raise ValueError(f"undirected edge ({i}, {j}) crosses components")
        for pa, ch in dire:
            if pa == ch or not (0 <= pa < self.p and 0 <= ch < self.p):
                raise ValueError(f"invalid directed edge ({pa}, {ch})")
            if comp_of[pa] == comp_of[ch]:
                raise ValueError(f"directed edge ({pa}, {ch}) lies within a component")
            if (ch, pa) in dire:
                raise ValueError(f"directed edges both ways between {pa} and {ch}")

        if self.ordering is not None:
            order = tuple(int(k) for k in self.ordering)
            object.__setattr__(self, "ordering", order)
            if sorted(order) != list(range(len(comps))):
                raise ValueError("ordering must be a permutation of component indices")
            pos = {ci: k for k, ci in enumerate(order)}
            for pa, ch in dire:
                if pos[comp_of[pa]] >= pos[comp_of[ch]]:
                    raise ValueError("ordering is not causal for the directed edges")

    @classmethod
    def from_edges(cls, p, undirected, directed, ordering=None):
        """Build a graph from edge sets, deriving components and an ordering."""
        und = {_norm_pair(e) for e in undirected}
        dire = {(int(a), int(c)) for a, c in directed}
        comps = chain_components(und, p)
        if ordering is None:
            comp_of = _component_of(comps, p)
            comp_edges = set()
            for pa, ch in dire:
                if not (0 <= pa < p and 0 <= ch < p):
                    raise ValueError(f"invalid directed edge ({pa}, {ch})")
                if comp_of[pa] != comp_of[ch]:
                    comp_edges.add((int(comp_of[pa]), int(comp_of[ch])))
            ordering = _topo_order(len(comps), comp_edges)
            # within-component directed edges fall through to __post_init__
        return cls(p=p, undirected=frozenset(und), directed=frozenset(dire),
                   components=comps, ordering=ordering)

    @classmethod
    def from_matrices(cls, omega, b, tol=SUPPORT_TOL):
        omega = np.asarray(omega)
        return cls.from_edges(omega.shape[0],
                              undirected_support(omega, tol),
                              directed_support(b, tol))

    @classmethod
    def from_params(cls, params, tol=SUPPORT_TOL):
        return cls.from_matrices(params.omega, params.b, tol)


@dataclasses.dataclass(frozen=True)
class PopulationMoments:
    """Covariance, precision, and total-effect matrix of a model."""

    sigma: np.ndarray
    theta: np.ndarray
    total_effects: np.ndarray


def precision_of(params):
    """Population precision (I - b)' omega (I - b)."""
    imb = np.eye(params.p) - params.b
    return _linalg.symmetrize(imb.T @ params.omega @ imb)


def low_rank_part(params):
    """The correction precision_of(params) - omega; low rank for sparse b."""
    om, b = params.omega, params.b
    return _linalg.symmetrize(b.T @ om @ b - b.T @ om - om @ b)


def covariance_of(params):
    """Population moments; total_effects is inv(I - b)."""
    eye = np.eye(params.p)
    a = np.linalg.solve(eye - params.b, eye)
    oinv = _linalg.spd_inverse(params.omega)
    sigma = _linalg.symmetrize(a @ oinv @ a.T)
    return PopulationMoments(sigma=sigma, theta=precision_of(params), total_effects=a)


def _index_tuple(idx, p, name):
    out = tuple(sorted(int(v) for v in idx))
    if len(set(out)) != len(out):
        raise ValueError(f"{name} has repeated indices")
    if out and not (0 <= out[0] and out[-1] < p):
        raise ValueError(f"{name} has indices outside range(0, {p})")
    return out


def population_conditional_cov(params, tau, cond=()):
    """Covariance of x[tau] given x[cond], rows/cols in ascending tau order.

    Computed as the Schur complement of the population covariance.
    """
    tau = _index_tuple(tau, params.p, "tau")
    cond = _index_tuple(cond, params.p, "cond")
    if not tau:
        raise ValueError("tau must be nonempty")
    if set(tau) & set(cond):
        raise ValueError("tau and cond must be disjoint")
    sigma = covariance_of(params).sigma
    stt = sigma[np.ix_(tau, tau)]
    if not cond:
        return stt
    scc = sigma[np.ix_(cond, cond)]
    stc = sigma[np.ix_(tau, cond)]
    return _linalg.symmetrize(stt - stc @ _linalg.spd_inverse(scc) @ stc.T)


def population_order_gap(params, tau, cond=()):
    """max over i in tau of Var(x_i | x_cond) - inv(omega)_ii.

    Zero exactly when every parent of tau lies in cond, strictly positive
    otherwise, provided cond is a union of chain components closed under
    taking ancestors.  Conditioning on descendants can drive the gap
    negative, so callers must respect that precondition.
    """
    tau = _index_tuple(tau, params.p, "tau")
    cc = population_conditional_cov(params, tau, cond)
    oinv = _linalg.spd_inverse(params.omega)
    gap = np.diag(cc) - np.diag(oinv)[list(tau)]
    return float(np.max(gap))

"""alpha-induced connections ``W4(alpha^{+-}_lambda, 1)``.

``alpha_1`` is the fundamental crossing on the module graph.  Higher
``alpha_nu`` are built by stacking ``alpha_{nu-1}`` on ``alpha_1`` and
compressing the vertical edges onto the range of the Jones-Wenzl projection,
obtained from Wenzl's recursion

    p_nu = p_{nu-1} (x) 1 - ([nu-1]/[nu]) (p_{nu-1} (x) 1) e_{nu-1} (p_{nu-1} (x) 1).

Each ``nu``-edge ``a => b`` is stored through an isometry ``Y_nu[a, b]`` into
the composite basis ``(x, i, j)`` (``i`` a ``(nu-1)``-edge ``a => x``, ``j`` a
1-edge ``x -> b``).  The matrix of ``e_{nu-1}`` in that basis only needs
``Y_{nu-1}``, so no path space of length ``nu`` is ever enumerated.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import connection as cx
from .cells import QSystemSpec, crossing_on_graph, sector_edges, sector_vertices
from .connection import Connection, EdgeSet, VertexSet
from .errors import NumericError
from .fusion import build_su2_level, channels, f_symbol, r_symbol
from .graphs import BipartiteGraph, module_action


@dataclass(frozen=True)
class InducedConnection:
    base: Connection
    lam: int
    sign: int
    spec: QSystemSpec


def _qint(k, n):
    x = np.pi / (k + 2)
    return np.sin(n * x) / np.sin(x)


def _canonical_range(P: np.ndarray, rank: int) -> np.ndarray:
    """Orthonormal basis of ``range(P)`` fixed by pivoted QR (deterministic)."""
    if rank == 0:
        return np.zeros((P.shape[0], 0))
    Q, _, _ = scipy.linalg.qr(P, pivoting=True)
    Q = Q[:, :rank]
    # sign convention: largest-modulus entry of each column positive
    idx = np.argmax(np.abs(Q) > np.abs(Q).max(axis=0) - 1e-9, axis=0)
    return Q * np.sign(Q[idx, np.arange(rank)])


class InductionTower:
    """All ``alpha^{sign}_nu`` on one module graph, built once and memoized."""

    def __init__(self, graph: BipartiteGraph, level: int, sign: int = +1):
        self.graph, self.level, self.sign = graph, level, sign
        self.mats = module_action(level, graph)
        self.vs = sector_vertices(graph)
        self.mu = graph.pf_weight
        self._conn = {}
        self._iso = {}  # nu -> {(a, b): Y}

    def edges(self, nu: int) -> EdgeSet:
        if nu == 1:
            return sector_edges(self.graph)
        if nu == 0:
            return cx.identity_edges(self.vs)
        return EdgeSet(f"{self.graph.name}^{nu}", self.vs, self.vs, self.mats[nu])

    def __getitem__(self, nu: int) -> Connection:
        if nu in self._conn:
            return self._conn[nu]
        if nu == 0:
            W = cx.vertical_identity(sector_edges(self.graph))
        elif nu == 1:
            W = crossing_on_graph(self.graph, self.level, self.sign)
            self._iso[1] = {(a, b): np.eye(int(m)) for (a, b), m in np.ndenumerate(self.mats[1]) if m}
        else:
            W = self._build(nu)
        W = Connection(W.top, W.left, W.right, W.bottom, W.blocks,
                       name=f"alpha{'+' if self.sign > 0 else '-'}_{nu}[{self.graph.name}]",
                       meta={"graph": self.graph.name, "level": self.level, "lambda": nu, "sign": self.sign})
        self._conn[nu] = W
        return W

    def _build(self, nu: int) -> Connection:
        prev, one = self[nu - 1], self[1]
        stacked = cx.compose_vertical(prev, one)
        cidx = cx.composite_index(prev.left, one.left)
        Yp = self._iso[nu - 1]
        # composite basis of (nu-2) (x) 1 inside which the (nu-1)-edges live
        pidx = cx.composite_index(self.edges(nu - 2) if nu > 2 else cx.identity_edges(self.vs),
                                  self.edges(1)) if nu > 2 else None
        coef = _qint(self.level, nu - 1) / _qint(self.level, nu)
        mu = self.mu
        iso = {}
        for (a, b), target in np.ndenumerate(self.mats[nu]):
            basis = cidx[(a, b)]
            if not basis:
                if target:
                    raise NumericError(f"no room for {target} edges {a}=>{b}", np.nan)
                continue
            n = len(basis)
            E = np.zeros((n, n))
            for r, (x2, i2, j2) in enumerate(basis):
                for s, (x1, i1, j1) in enumerate(basis):
                    E[r, s] = self._e_entry(a, b, x2, i2, x1, i1, Yp, pidx, nu)
            P = np.eye(n) - coef * E
            w = np.linalg.eigvalsh((P + P.T) / 2)
            rank = int((w > 0.5).sum())
            bad = np.abs(w - np.round(w)).max()
            if rank != target or bad > 1e-8:
                raise NumericError(f"Jones-Wenzl rank {rank} != {target} at {(a, b)} for nu={nu}", bad)
            if rank:
                iso[(a, b)] = _canonical_range(P, rank)
        self._iso[nu] = iso
        new = self.edges(nu)
        return cx.compress(stacked, iso, iso, new, new)

    def _e_entry(self, a, b, x2, i2, x1, i1, Yp, pidx, nu):
        """``<(x2, i2, .)| 1 (x) e |(x1, i1, .)>`` on the last two 1-steps ending at ``b``."""
        mu = self.mu
        if nu == 2:
            # (nu-1)-edges are single steps a -> x; e needs a == b
            if a != b:
                return 0.0
            return np.sqrt(mu[x1] * mu[x2]) / mu[a]
        # expand the (nu-1)-edges a => x through Y_{nu-1} into (y, i', step y -> x)
        Y1, Y2 = Yp[(a, x1)], Yp[(a, x2)]
        b1, b2 = pidx[(a, x1)], pidx[(a, x2)]
        val = 0.0
        for r1, (y1, ip1, _) in enumerate(b1):
            if y1 != b:
                continue
            for r2, (y2, ip2, _) in enumerate(b2):
                if y2 == b and ip2 == ip1:
                    val += Y2[r2, i2] * Y1[r1, i1]
        return val * np.sqrt(mu[x1] * mu[x2]) / mu[b]


@functools.lru_cache(maxsize=64)
def tower(graph_name: str, level: int, sign: int) -> InductionTower:
    from .graphs import ade_graph
    return InductionTower(ade_graph(graph_name[0], int(graph_name[1:])), level, sign)


def induce(spec: QSystemSpec, lam: int, sign: int = +1) -> InducedConnection:
    build_su2_level(spec.level).validate(lam)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return InducedConnection(tower(spec.name, spec.level, sign)[lam], lam, sign, spec)


# crossings from F and R -----------------------------------------------------------

def regular_edges(cat, lam: int) -> EdgeSet:
    k = cat.level
    vs = VertexSet(f"SU2_{k}", tuple(cat.labels), cat.qdim)
    if lam == 0:
        return cx.identity_edges(vs)
    return EdgeSet(f"N{lam}@SU2_{k}", vs, vs, cat.N[lam])


def crossing_connection(cat, lam: int, mu: int, sign: int = +1) -> Connection:
    """Braiding of ``mu`` (horizontal) past ``lam`` (vertical) on the regular module.

    Block ``(a, d)``, column ``c`` (``a -mu-> c -lam-> d``), row ``b``
    (``a -lam-> b -mu-> d``)::

        W[b, c] = sum_x F^{a mu lam}_d[c, x] R^{mu lam}_x F^{a lam mu}_d[b, x]
    """
    cat.validate(lam, mu)
    H, V = regular_edges(cat, mu), regular_edges(cat, lam)
    if lam == 0 or mu == 0:
        return cx.vertical_identity(H) if lam == 0 else cx.horizontal_identity(V)
    blocks = {}
    k = cat.level
    for a in cat.labels:
        for d in cat.labels:
            cs = [c for c in channels(k, a, mu) if cat.N[c, lam, d]]
            bs = [b for b in channels(k, a, lam) if cat.N[b, mu, d]]
            if not cs:
                continue
            xs = [x for x in channels(k, mu, lam) if cat.N[a, x, d]]
            B = np.zeros((len(bs), len(cs)), dtype=complex)
            for i, b in enumerate(bs):
                for j, c in enumerate(cs):
                    B[i, j] = sum(f_symbol(cat, a, mu, lam, d, c, x) * r_symbol(cat, mu, lam, x, sign)
                                  * f_symbol(cat, a, lam, mu, d, b, x) for x in xs)
            blocks[(a, d)] = B
    return Connection(H, V, V, H, blocks, name=f"X{'+' if sign > 0 else '-'}({lam},{mu})",
                      meta={"lambda": lam, "mu": mu, "sign": sign, "level": k})

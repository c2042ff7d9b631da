"""Bi-unitary connections.

A connection has four edge sets arranged around a square::

        top
    A -------> B
    |          |
  left       right
    v          v
    C -------> D
       bottom

Cells are stored as one dense block per corner pair ``(a, d)`` with
``a`` in ``A`` and ``d`` in ``D``.  Columns run over *top-right* paths
``a -top-> c -right-> d``; rows over *left-bottom* paths
``a -left-> b -bottom-> d``.  Both bases are ordered lexicographically by
(intermediate vertex, first edge index, second edge index).

Bi-unitarity has two halves:

* every corner block is unitary;
* for every ``(c, b)`` (top-right and bottom-left vertices) the matrix with
  rows ``(a, xi, zeta)`` and columns ``(d, eta, kappa)`` and entries
  ``sqrt(mu_a mu_d / (mu_b mu_c)) * conj(W_ad[(b, zeta, kappa), (c, xi, eta)])``
  is unitary.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import CompositionError

SCHEMA_CONNECTION = "biunitary.connection/1"
TOL_CONSTRUCT = 1e-9
TOL_VERDICT = 1e-7


@dataclass(frozen=True, eq=False)
class VertexSet:
    """Labelled vertices with Perron-Frobenius weights."""

    name: str
    labels: tuple
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.labels),) or (w <= 0).any():
            raise ValueError(f"{self.name}: one positive weight per vertex required")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        return (isinstance(other, VertexSet) and self.name == other.name
                and self.labels == other.labels and np.allclose(self.weights, other.weights))

    def __hash__(self):
        return hash((self.name, self.labels))


@dataclass(frozen=True, eq=False)
class EdgeSet:
    """Directed multigraph ``src -> dst``; ``mult[s, t]`` parallel edges."""

    name: str
    src: VertexSet
    dst: VertexSet
    mult: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mult, dtype=np.int64)
        if m.shape != (len(self.src), len(self.dst)) or (m < 0).any():
            raise ValueError(f"{self.name}: multiplicity matrix has wrong shape or sign")
        m.setflags(write=False)
        object.__setattr__(self, "mult", m)

    def __eq__(self, other):
        return (isinstance(other, EdgeSet) and self.name == other.name
                and self.src == other.src and self.dst == other.dst
                and np.array_equal(self.mult, other.mult))

    def __hash__(self):
        return hash((self.name, self.src, self.dst))

    def edges(self):
        """All edges as ``(s, t, i)`` in canonical order."""
        S, T = self.mult.shape
        return [(s, t, i) for s in range(S) for t in range(T) for i in range(int(self.mult[s, t]))]


def identity_edges(vs: VertexSet) -> EdgeSet:
    return EdgeSet(f"id[{vs.name}]", vs, vs, np.eye(len(vs), dtype=np.int64))


def compose_edges(e1: EdgeSet, e2: EdgeSet) -> EdgeSet:
    """Two-step edges; the edge ``s => t`` with index ``i`` is the ``i``-th
    pair ``(x, i1, i2)`` in lexicographic order."""
    if e1.dst != e2.src:
        raise CompositionError(f"cannot concatenate {e1.name} and {e2.name}")
    return EdgeSet(f"{e1.name}*{e2.name}", e1.src, e2.dst, e1.mult @ e2.mult)


def composite_index(e1: EdgeSet, e2: EdgeSet):
    """Map ``(s, t) -> list of (x, i1, i2)`` ordering the edges of ``compose_edges``."""
    out = {}
    for s in range(len(e1.src)):
        for t in range(len(e2.dst)):
            out[(s, t)] = [(x, i, j) for x in range(len(e1.dst))
                           for i in range(int(e1.mult[s, x])) for j in range(int(e2.mult[x, t]))]
    return out


def _pairs(e1: EdgeSet, e2: EdgeSet, s: int, t: int):
    return [(x, i, j) for x in range(len(e1.dst))
            for i in range(int(e1.mult[s, x])) for j in range(int(e2.mult[x, t]))]


@dataclass(frozen=True, eq=False)
class Connection:
    top: EdgeSet
    left: EdgeSet
    right: EdgeSet
    bottom: EdgeSet
    blocks: dict
    name: str = "W"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.top.src == self.left.src and self.top.dst == self.right.src
                and self.left.dst == self.bottom.src and self.right.dst == self.bottom.dst):
            raise CompositionError("edge sets do not meet at the four corners")
        blocks = {}
        for a, d in self.corners():
            n_tr = len(self.tr_basis(a, d))
            n_lb = len(self.lb_basis(a, d))
            if n_tr != n_lb:
                raise ValueError(f"corner {(a, d)}: {n_lb} left-bottom paths vs {n_tr} top-right paths")
            if n_tr == 0:
                continue
            B = np.asarray(self.blocks.get((a, d), np.zeros((n_lb, n_tr))), dtype=complex)
            if B.shape != (n_lb, n_tr):
                raise ValueError(f"corner {(a, d)}: block shape {B.shape} != {(n_lb, n_tr)}")
            B.setflags(write=False)
            blocks[(a, d)] = B
        object.__setattr__(self, "blocks", blocks)

    # bases
    def corners(self):
        return itertools.product(range(len(self.top.src)), range(len(self.bottom.dst)))

    def tr_basis(self, a, d):
        return _pairs(self.top, self.right, a, d)

    def lb_basis(self, a, d):
        return _pairs(self.left, self.bottom, a, d)

    def block(self, a, d) -> np.ndarray:
        return self.blocks.get((a, d), np.zeros((0, 0), dtype=complex))

    def cell(self, top_edge, right_edge, left_edge, bottom_edge) -> complex:
        """Value at edge ids ``(s, t, i)``; zero if the quadruple does not close up."""
        a, c, i1 = top_edge
        c2, d, i2 = right_edge
        a2, b, j1 = left_edge
        b2, d2, j2 = bottom_edge
        if not (a == a2 and c == c2 and b == b2 and d == d2):
            return 0j
        col = self.tr_basis(a, d).index((c, i1, i2))
        row = self.lb_basis(a, d).index((b, j1, j2))
        return complex(self.blocks[(a, d)][row, col])

    def cells(self):
        """Sparse records ``(top, right, left, bottom, value)`` over nonzero entries."""
        for (a, d), B in self.blocks.items():
            tr = self.tr_basis(a, d)
            lb = self.lb_basis(a, d)
            for r, (b, j1, j2) in enumerate(lb):
                for col, (c, i1, i2) in enumerate(tr):
                    v = B[r, col]
                    if v != 0:
                        yield (a, c, i1), (c, d, i2), (a, b, j1), (b, d, j2), complex(v)

    def n_admissible(self) -> int:
        """Number of closed edge quadruples."""
        return sum(B.size for B in self.blocks.values())

    def conj(self) -> "Connection":
        return Connection(self.top, self.left, self.right, self.bottom,
                          {k: B.conj() for k, B in self.blocks.items()}, name=f"conj({self.name})")


def trace_formula_count(W: Connection) -> int:
    """Closed quadruples predicted from the adjacency matrices alone."""
    tr = W.top.mult @ W.right.mult
    lb = W.left.mult @ W.bottom.mult
    return int((tr * lb).sum())


# bi-unitarity --------------------------------------------------------------

@dataclass(frozen=True)
class BiunitarityReport:
    unitarity: float
    renormalization: float

    def max(self) -> float:
        return max(self.unitarity, self.renormalization)


def reflect(W: Connection) -> dict:
    """Renormalized matrices keyed by ``(c, b)``; see the module docstring."""
    mu_a = W.top.src.weights
    mu_c = W.top.dst.weights
    mu_b = W.left.dst.weights
    mu_d = W.bottom.dst.weights
    out = {}
    for c in range(len(W.top.dst)):
        for b in range(len(W.left.dst)):
            rows = [(a, i, j) for a in range(len(W.top.src))
                    for i in range(int(W.top.mult[a, c])) for j in range(int(W.left.mult[a, b]))]
            cols = [(d, i, j) for d in range(len(W.bottom.dst))
                    for i in range(int(W.right.mult[c, d])) for j in range(int(W.bottom.mult[b, d]))]
            if not rows and not cols:
                continue
            M = np.zeros((len(rows), len(cols)), dtype=complex)
            for r, (a, xi, zeta) in enumerate(rows):
                for s, (d, eta, kappa) in enumerate(cols):
                    blk = W.blocks.get((a, d))
                    if blk is None:
                        continue
                    col = W.tr_basis(a, d).index((c, xi, eta))
                    row = W.lb_basis(a, d).index((b, zeta, kappa))
                    M[r, s] = np.sqrt(mu_a[a] * mu_d[d] / (mu_b[b] * mu_c[c])) * np.conj(blk[row, col])
            out[(c, b)] = M
    return out


def _unitary_defect(M: np.ndarray) -> float:
    if M.shape[0] != M.shape[1]:
        return float("inf")
    return float(np.abs(M @ M.conj().T - np.eye(len(M))).max()) if M.size else 0.0


def check_biunitarity(W: Connection) -> BiunitarityReport:
    unit = max((_unitary_defect(B) for B in W.blocks.values()), default=0.0)
    ren = max((_unitary_defect(M) for M in reflect(W).values()), default=0.0)
    return BiunitarityReport(unit, ren)


# elementary connections ------------------------------------------------------

def vertical_identity(horizontal: EdgeSet) -> Connection:
    """Trivial vertical edges; each cell is 1."""
    left = identity_edges(horizontal.src)
    right = identity_edges(horizontal.dst)
    blocks = {}
    for a in range(len(horizontal.src)):
        for d in range(len(horizontal.dst)):
            n = int(horizontal.mult[a, d])
            if n:
                blocks[(a, d)] = np.eye(n)
    return Connection(horizontal, left, right, horizontal, blocks, name=f"1[{horizontal.name}]")


def horizontal_identity(vertical: EdgeSet) -> Connection:
    top = identity_edges(vertical.src)
    bottom = identity_edges(vertical.dst)
    blocks = {}
    for a in range(len(vertical.src)):
        for d in range(len(vertical.dst)):
            n = int(vertical.mult[a, d])
            if n:
                blocks[(a, d)] = np.eye(n)
    return Connection(top, vertical, vertical, bottom, blocks, name=f"1v[{vertical.name}]")


# path-space engine -----------------------------------------------------------

class PathBasis:
    """Paths through a sequence of edge sets between fixed end vertices."""

    def __init__(self, edge_sets, start: int, end: int):
        self.edge_sets = tuple(edge_sets)
        self.start, self.end = start, end
        paths = [((start,), ())]
        for es in self.edge_sets:
            paths = [(v + (t,), e + (i,)) for v, e in paths
                     for t in range(len(es.dst)) for i in range(int(es.mult[v[-1], t]))]
        self.paths = [p for p in paths if p[0][-1] == end]
        self.index = {p: n for n, p in enumerate(self.paths)}

    def __len__(self):
        return len(self.paths)


def apply_cell(W: Connection, basis: PathBasis, pos: int, adjoint: bool = False):
    """Matrix of ``W`` acting on the steps ``pos, pos + 1`` of ``basis``.

    Forward: (top, right) -> (left, bottom).  ``adjoint`` goes back.
    Returns ``(matrix, out_basis)``.
    """
    es = list(basis.edge_sets)
    src_pair = (W.left, W.bottom) if adjoint else (W.top, W.right)
    dst_pair = (W.top, W.right) if adjoint else (W.left, W.bottom)
    if (es[pos], es[pos + 1]) != src_pair:
        raise CompositionError("cell does not match the path steps")
    es[pos], es[pos + 1] = dst_pair
    out = PathBasis(es, basis.start, basis.end)
    M = np.zeros((len(out), len(basis)), dtype=complex)
    for col, (verts, eids) in enumerate(basis.paths):
        a, x, d = verts[pos], verts[pos + 1], verts[pos + 2]
        blk = W.blocks.get((a, d))
        if blk is None:
            continue
        if adjoint:
            src_list, dst_list, mat = W.lb_basis(a, d), W.tr_basis(a, d), blk.conj().T
        else:
            src_list, dst_list, mat = W.tr_basis(a, d), W.lb_basis(a, d), blk
        j = src_list.index((x, eids[pos], eids[pos + 1]))
        for i, (y, e1, e2) in enumerate(dst_list):
            v = mat[i, j]
            if v == 0:
                continue
            nv = verts[:pos + 1] + (y,) + verts[pos + 2:]
            ne = eids[:pos] + (e1, e2) + eids[pos + 2:]
            M[out.index[(nv, ne)], col] += v
    return M, out


# composition -------------------------------------------------------------------

def compose_vertical(W1: Connection, W2: Connection) -> Connection:
    """``W1`` above ``W2``; contracts over the shared horizontal edges."""
    if W1.bottom != W2.top:
        raise CompositionError(f"bottom of {W1.name} ({W1.bottom.name}) != top of {W2.name} ({W2.top.name})")
    left = compose_edges(W1.left, W2.left)
    right = compose_edges(W1.right, W2.right)
    lidx = composite_index(W1.left, W2.left)
    ridx = composite_index(W1.right, W2.right)
    blocks = {}
    for a in range(len(W1.top.src)):
        for d in range(len(W2.bottom.dst)):
            b0 = PathBasis([W1.top, W1.right, W2.right], a, d)
            if not len(b0):
                continue
            M1, b1 = apply_cell(W1, b0, 0)
            M2, b2 = apply_cell(W2, b1, 1)
            M = M2 @ M1
            # relabel 3-step bases by composite vertical edges
            tr = _pairs(W1.top, right, a, d)
            lb = _pairs(left, W2.bottom, a, d)
            cols = [b0.index[((a, c, ridx[(c, d)][k][0], d), (i, ridx[(c, d)][k][1], ridx[(c, d)][k][2]))]
                    for c, i, k in tr]
            rows = [b2.index[((a, lidx[(a, b)][k][0], b, d), (lidx[(a, b)][k][1], lidx[(a, b)][k][2], j))]
                    for b, k, j in lb]
            blocks[(a, d)] = M[np.ix_(rows, cols)]
    return Connection(W1.top, left, right, W2.bottom, blocks, name=f"({W1.name}/{W2.name})")


def compose_horizontal(W1: Connection, W2: Connection) -> Connection:
    """``W1`` to the left of ``W2``; contracts over the shared vertical edges."""
    if W1.right != W2.left:
        raise CompositionError(f"right of {W1.name} ({W1.right.name}) != left of {W2.name} ({W2.left.name})")
    top = compose_edges(W1.top, W2.top)
    bottom = compose_edges(W1.bottom, W2.bottom)
    tidx = composite_index(W1.top, W2.top)
    bidx = composite_index(W1.bottom, W2.bottom)
    blocks = {}
    for a in range(len(W1.top.src)):
        for d in range(len(W2.bottom.dst)):
            b0 = PathBasis([W1.top, W2.top, W2.right], a, d)
            if not len(b0):
                continue
            M1, b1 = apply_cell(W2, b0, 1)
            M2, b2 = apply_cell(W1, b1, 0)
            M = M2 @ M1
            tr = _pairs(top, W2.right, a, d)
            lb = _pairs(W1.left, bottom, a, d)
            cols = [b0.index[((a, tidx[(a, c)][k][0], c, d), (tidx[(a, c)][k][1], tidx[(a, c)][k][2], j))]
                    for c, k, j in tr]
            rows = [b2.index[((a, b, bidx[(b, d)][k][0], d), (i, bidx[(b, d)][k][1], bidx[(b, d)][k][2]))]
                    for b, i, k in lb]
            blocks[(a, d)] = M[np.ix_(rows, cols)]
    return Connection(top, W1.left, W2.right, bottom, blocks, name=f"({W1.name}|{W2.name})")


def compress(W: Connection, left_iso: dict, right_iso: dict, left: EdgeSet, right: EdgeSet,
             name: str | None = None) -> Connection:
    """Restrict vertical edges along isometries.

    ``left_iso[(a, b)]`` has orthonormal columns spanning the new edges
    ``a => b`` inside the old ones (shape ``old x new``); same for the right.
    The image must be invariant under the cells for the result to be unitary.
    """
    blocks = {}
    for a in range(len(W.top.src)):
        for d in range(len(W.bottom.dst)):
            old = W.blocks.get((a, d))
            tr_new = _pairs(W.top, right, a, d)
            lb_new = _pairs(left, W.bottom, a, d)
            if not tr_new:
                continue
            tr_old = {p: n for n, p in enumerate(W.tr_basis(a, d))}
            lb_old = {p: n for n, p in enumerate(W.lb_basis(a, d))}
            R = np.zeros((len(tr_old), len(tr_new)), dtype=complex)
            for col, (c, i, k) in enumerate(tr_new):
                P = right_iso[(c, d)]
                for m in range(P.shape[0]):
                    R[tr_old[(c, i, m)], col] = P[m, k]
            L = np.zeros((len(lb_old), len(lb_new)), dtype=complex)
            for col, (b, k, j) in enumerate(lb_new):
                P = left_iso[(a, b)]
                for m in range(P.shape[0]):
                    L[lb_old[(b, m, j)], col] = P[m, k]
            blocks[(a, d)] = L.conj().T @ old @ R
    return Connection(W.top, left, right, W.bottom, blocks, name=name or f"P({W.name})")


def direct_sum(parts) -> Connection:
    """Direct sum over vertical edges of connections sharing horizontal edges.

    ``parts`` is a sequence of ``(W, multiplicity)``.
    """
    items = [W for W, m in parts for _ in range(m)]
    if not items:
        raise ValueError("empty direct sum")
    W0 = items[0]
    for W in items[1:]:
        if W.top != W0.top or W.bottom != W0.bottom:
            raise CompositionError("direct summands must share horizontal edges")
    left = EdgeSet("+".join(W.left.name for W in items), W0.left.src, W0.left.dst,
                   sum(W.left.mult for W in items))
    right = EdgeSet("+".join(W.right.name for W in items), W0.right.src, W0.right.dst,
                    sum(W.right.mult for W in items))
    blocks = {}
    for a in range(len(W0.top.src)):
        for d in range(len(W0.bottom.dst)):
            tr_new = {p: n for n, p in enumerate(_pairs(W0.top, right, a, d))}
            lb_new = {p: n for n, p in enumerate(_pairs(left, W0.bottom, a, d))}
            if not tr_new:
                continue
            B = np.zeros((len(lb_new), len(tr_new)), dtype=complex)
            loff = np.zeros_like(W0.left.mult)
            roff = np.zeros_like(W0.right.mult)
            for W in items:
                blk = W.blocks.get((a, d))
                if blk is not None:
                    cols = [tr_new[(c, i, k + roff[c, d])] for c, i, k in W.tr_basis(a, d)]
                    rows = [lb_new[(b, k + loff[a, b], j)] for b, k, j in W.lb_basis(a, d)]
                    B[np.ix_(rows, cols)] = blk
                loff = loff + W.left.mult
                roff = roff + W.right.mult
            blocks[(a, d)] = B
    return Connection(W0.top, left, right, W0.bottom, blocks, name="+".join(W.name for W in items))


# serialization ------------------------------------------------------------------

def _vs_json(vs: VertexSet):
    return {"name": vs.name, "labels": list(vs.labels), "weights": vs.weights.tolist()}


def _es_json(es: EdgeSet):
    return {"name": es.name, "src": es.src.name, "dst": es.dst.name,
            "edges": [[int(s), int(t), int(es.mult[s, t])] for s, t in zip(*np.nonzero(es.mult))]}


def to_json(W: Connection) -> dict:
    vsets = {}
    for es in (W.top, W.left, W.right, W.bottom):
        for vs in (es.src, es.dst):
            vsets[vs.name] = _vs_json(vs)
    return {
        "schema": SCHEMA_CONNECTION,
        "name": W.name,
        "meta": W.meta,
        "vertex_sets": list(vsets.values()),
        "graphs": {side: _es_json(getattr(W, side)) for side in ("top", "left", "right", "bottom")},
        "cells": [[list(t), list(r), list(l), list(b), v.real, v.imag] for t, r, l, b, v in W.cells()],
    }


def from_json(doc: dict) -> Connection:
    if doc.get("schema") != SCHEMA_CONNECTION:
        raise ValueError(f"unsupported schema {doc.get('schema')!r}")
    vsets = {v["name"]: VertexSet(v["name"], tuple(v["labels"]), np.array(v["weights"]))
             for v in doc["vertex_sets"]}
    graphs = {}
    for side, g in doc["graphs"].items():
        src, dst = vsets[g["src"]], vsets[g["dst"]]
        M = np.zeros((len(src), len(dst)), dtype=np.int64)
        for s, t, m in g["edges"]:
            M[s, t] = m
        graphs[side] = EdgeSet(g["name"], src, dst, M)
    shell = Connection(graphs["top"], graphs["left"], graphs["right"], graphs["bottom"], {})
    blocks = {k: np.zeros(B.shape, dtype=complex) for k, B in shell.blocks.items()}
    for t, r, l, b, re, im in doc["cells"]:
        a, c, i1 = t
        _, d, i2 = r
        _, bb, j1 = l
        _, _, j2 = b
        col = shell.tr_basis(a, d).index((c, i1, i2))
        row = shell.lb_basis(a, d).index((bb, j1, j2))
        blocks[(a, d)][row, col] = complex(re, im)
    return Connection(shell.top, shell.left, shell.right, shell.bottom, blocks,
                      name=doc["name"], meta=doc.get("meta", {}))


def decompose(W: Connection, seed: int = 0):
    """See :func:`biunitary.homs.decompose`."""
    from .homs import decompose as _decompose
    return _decompose(W, seed)


def gauge_equivalent(W1: Connection, W2: Connection) -> bool:
    """See :func:`biunitary.homs.gauge_equivalent`."""
    from .homs import gauge_equivalent as _ge
    return _ge(W1, W2)

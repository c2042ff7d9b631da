"""Bipartite graphs: A-D-E Dynkin diagrams, fusion graphs and Perron-Frobenius data."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import RangeError, SpecError

SCHEMA_GRAPH = "biunitary.graph/1"


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Undirected multigraph with a distinguished vertex ``star``.

    ``adjacency`` is the symmetric multiplicity matrix over ``vertices`` in
    their canonical order.  Parity (even/odd) is the distance from ``star``
    modulo 2.  ``pf_weight`` is the positive Perron-Frobenius eigenvector,
    normalized so that the weight of ``star`` is 1.
    """

    name: str
    vertices: tuple
    adjacency: np.ndarray
    star: int = 0
    beta: float = field(init=False)
    pf_weight: np.ndarray = field(init=False)
    parity: tuple = field(init=False)

    def __post_init__(self):
        A = np.asarray(self.adjacency, dtype=np.int64)
        if A.shape != (len(self.vertices),) * 2 or (A != A.T).any() or (A < 0).any():
            raise SpecError(f"{self.name}: adjacency must be a symmetric nonnegative square matrix")
        A.setflags(write=False)
        object.__setattr__(self, "adjacency", A)
        parity = _bipartition(A, self.star)
        object.__setattr__(self, "parity", parity)
        beta, vec = perron_frobenius(A)
        vec = vec / vec[self.star]
        vec.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "pf_weight", vec)

    def __len__(self):
        return len(self.vertices)

    def __eq__(self, other):
        # label-sensitive: same name, same ordering, same multiplicities
        return (isinstance(other, BipartiteGraph) and self.name == other.name
                and self.vertices == other.vertices and self.star == other.star
                and np.array_equal(self.adjacency, other.adjacency))

    def __hash__(self):
        return hash((self.name, self.vertices, self.star, self.adjacency.tobytes()))

    @property
    def even_vertices(self) -> list[int]:
        return [v for v in range(len(self)) if self.parity[v] == 0]

    @property
    def odd_vertices(self) -> list[int]:
        return [v for v in range(len(self)) if self.parity[v] == 1]

    def neighbors(self, v: int):
        return [w for w in range(len(self)) if self.adjacency[v, w]]

    def diameter(self) -> int:
        n = len(self)
        D = _distances(self.adjacency)
        if (D < 0).any():
            raise SpecError(f"{self.name} is not connected")
        return int(D.max()) if n else 0

    def is_connected(self) -> bool:
        return bool((_distances(self.adjacency) >= 0).all())


def perron_frobenius(A: np.ndarray):
    """Largest eigenvalue and the entrywise-positive eigenvector of a symmetric matrix."""
    w, V = np.linalg.eigh(np.asarray(A, dtype=float))
    vec = V[:, -1]
    vec = vec * np.sign(vec[np.argmax(np.abs(vec))])
    if (vec <= 0).any():
        raise SpecError("adjacency is not irreducible: Perron-Frobenius vector has zero entries")
    return float(w[-1]), vec


def _distances(A):
    n = len(A)
    D = -np.ones((n, n), dtype=int)
    for s in range(n):
        D[s, s] = 0
        frontier = [s]
        while frontier:
            nxt = []
            for v in frontier:
                for w in np.nonzero(A[v])[0]:
                    if D[s, w] < 0:
                        D[s, w] = D[s, v] + 1
                        nxt.append(int(w))
            frontier = nxt
    return D


def _bipartition(A, star):
    D = _distances(A)[star]
    parity = tuple(int(d % 2) if d >= 0 else -1 for d in D)
    for v, w in zip(*np.nonzero(A)):
        if parity[v] >= 0 and parity[v] == parity[w]:
            raise SpecError("graph is not bipartite")
    return parity


def _tree(arms):
    """Star-shaped tree; the first arm's far end is vertex 0 and the centre follows that arm."""
    first, rest = arms[0], arms[1:]
    n = 1 + sum(arms)
    A = np.zeros((n, n), dtype=int)
    # vertices 0..first-1 run from the tip of the first arm inward; vertex `first` is the centre
    for i in range(first):
        A[i, i + 1] = A[i + 1, i] = 1
    centre = first
    nxt = centre + 1
    for length in rest:
        prev = centre
        for _ in range(length):
            A[prev, nxt] = A[nxt, prev] = 1
            prev = nxt
            nxt += 1
    return A


def path_adjacency(n: int) -> np.ndarray:
    A = np.zeros((n, n), dtype=int)
    for i in range(n - 1):
        A[i, i + 1] = A[i + 1, i] = 1
    return A


COXETER = {"A": lambda n: n + 1, "D": lambda n: 2 * n - 2,
           "E": lambda n: {6: 12, 7: 18, 8: 30}[n]}


def coxeter_number(series: str, index: int) -> int:
    return COXETER[series](index)


def ade_graph(series: str, index: int) -> BipartiteGraph:
    """Dynkin diagram with ``star`` at the extremity of PF weight 1 (the long-arm tip)."""
    series = series.upper()
    if series == "A":
        if index < 2:
            raise RangeError("A_n requires n >= 2")
        A = path_adjacency(index)
    elif series == "D":
        if index < 4:
            raise RangeError("D_n requires n >= 4")
        A = _tree((index - 3, 1, 1))
    elif series == "E":
        if index not in (6, 7, 8):
            raise RangeError("E_n requires n in {6, 7, 8}")
        A = _tree({6: (2, 2, 1), 7: (3, 2, 1), 8: (4, 2, 1)}[index])
    else:
        raise RangeError(f"unknown series {series!r}")
    names = tuple(f"v{i}" for i in range(len(A)))
    return BipartiteGraph(f"{series}{index}", names, A, star=0)


def path_counts(A: np.ndarray, start: int, n: int) -> np.ndarray:
    """Number of length-``n`` paths from ``start`` to each vertex."""
    v = np.zeros(len(A), dtype=object)
    v[start] = 1
    Ai = A.astype(object)
    for _ in range(n):
        v = Ai.T.dot(v)
    return np.array(v, dtype=object)


def path_algebra_dims(graph: BipartiteGraph, star: int | None = None, n_max: int = 0,
                      adjacency: np.ndarray | None = None) -> list[int]:
    """``sum_v (#paths of length n from star to v)^2`` for ``n = 0..n_max``.

    ``adjacency`` overrides the graph's own edges (used for fusion graphs
    acting on the same vertex set).
    """
    A = graph.adjacency if adjacency is None else adjacency
    s = graph.star if star is None else star
    out = []
    v = np.zeros(len(A), dtype=object)
    v[s] = 1
    Ai = np.asarray(A).astype(object)
    for n in range(n_max + 1):
        out.append(int(sum(x * x for x in v)))
        v = Ai.T.dot(v)
    return out


@dataclass(frozen=True)
class PathSpace:
    """Enumerated paths of a fixed length from ``start`` (vertex sequences)."""

    graph: BipartiteGraph
    start: int
    length: int
    paths: tuple

    @classmethod
    def enumerate(cls, graph: BipartiteGraph, start: int, length: int) -> "PathSpace":
        A = graph.adjacency
        paths = [((start,), ())]
        for _ in range(length):
            grown = []
            for verts, edges in paths:
                v = verts[-1]
                for w in range(len(A)):
                    for m in range(int(A[v, w])):
                        grown.append((verts + (w,), edges + (m,)))
            paths = grown
        return cls(graph, start, length, tuple(paths))

    def ending_at(self, v: int) -> list:
        return [p for p in self.paths if p[0][-1] == v]


def chebyshev_action(G: np.ndarray, n_max: int) -> list[np.ndarray]:
    """Matrices ``G_j`` of the spin-``j/2`` action generated by ``G = G_1``.

    ``G_{j+1} = G G_j - G_{j-1}`` (SU(2) fusion ``1 x j = (j-1) + (j+1)``).
    """
    size = len(G)
    out = [np.eye(size, dtype=np.int64), np.asarray(G, dtype=np.int64)]
    for j in range(1, n_max):
        out.append(out[1] @ out[j] - out[j - 1])
    return out[: n_max + 1]


def module_action(level: int, module: BipartiteGraph) -> list[np.ndarray]:
    """Action matrices of every object ``0..level`` on a module graph.

    Raises ``SpecError`` when the graph is not a level-``level`` module:
    negative entries, or the truncation ``G_{level+1} = 0`` failing.
    """
    mats = chebyshev_action(module.adjacency, level + 1)
    for j, M in enumerate(mats[: level + 1]):
        if (M < 0).any():
            raise SpecError(f"{module.name} is not closed under fusion at level {level}: "
                            f"negative multiplicity for object {j}")
    if np.any(mats[level + 1]):
        raise SpecError(f"{module.name} is not a level-{level} module (truncation fails)")
    return mats[: level + 1]


def fusion_graph(cat, lam: int, module: BipartiteGraph | None = None,
                 module_vertices=None) -> BipartiteGraph:
    """Graph of ``a -> b`` with multiplicity ``dim Hom(a lam, b)``.

    With ``module=None`` the regular module (objects of ``cat``) is used,
    optionally restricted to ``module_vertices`` which must be closed under
    ``lam``-fusion.  Otherwise the action on the module graph's vertices is
    generated from its adjacency (the generator's action).
    """
    cat.validate(lam)
    if module is None:
        verts = list(cat.labels) if module_vertices is None else list(module_vertices)
        M = np.array([[int(cat.N[a, lam, b]) for b in verts] for a in verts], dtype=np.int64)
        for a in verts:
            for b in cat.labels:
                if cat.N[a, lam, b] and b not in verts:
                    raise SpecError(f"vertex set not closed: {a} x {lam} contains {b}")
        names = tuple(str(v) for v in verts)
        star = verts.index(0) if 0 in verts else 0
        return _loose_graph(f"N{lam}@SU2_{cat.level}", names, M, star)
    M = module_action(cat.level, module)[lam]
    return _loose_graph(f"{module.name}:{lam}", module.vertices, M, module.star)


def _loose_graph(name, names, M, star):
    """Graph object for an action matrix that may be disconnected or non-bipartite."""
    g = object.__new__(BipartiteGraph)
    object.__setattr__(g, "name", name)
    object.__setattr__(g, "vertices", tuple(names))
    M = np.asarray(M, dtype=np.int64)
    M.setflags(write=False)
    object.__setattr__(g, "adjacency", M)
    object.__setattr__(g, "star", star)
    w = np.linalg.eigvalsh(M.astype(float)) if len(M) and (M == M.T).all() else np.array([np.nan])
    object.__setattr__(g, "beta", float(np.max(np.abs(w))))
    object.__setattr__(g, "pf_weight", np.full(len(M), np.nan))
    object.__setattr__(g, "parity", tuple([-1] * len(M)))
    return g


def to_json(graph: BipartiteGraph) -> dict:
    A = graph.adjacency
    return {
        "schema": SCHEMA_GRAPH,
        "name": graph.name,
        "vertices": list(graph.vertices),
        "star": graph.star,
        "edges": [[int(i), int(j), int(A[i, j])] for i, j in itertools.product(range(len(A)), repeat=2)
                  if i <= j and A[i, j]],
        "beta": graph.beta,
        "pf_weight": [float(x) for x in graph.pf_weight],
    }


def from_json(doc: dict) -> BipartiteGraph:
    if doc.get("schema") != SCHEMA_GRAPH:
        raise ValueError(f"unsupported schema {doc.get('schema')!r}")
    n = len(doc["vertices"])
    A = np.zeros((n, n), dtype=np.int64)
    for i, j, m in doc["edges"]:
        A[i, j] = A[j, i] = m
    return BipartiteGraph(doc["name"], tuple(doc["vertices"]), A, star=doc["star"])

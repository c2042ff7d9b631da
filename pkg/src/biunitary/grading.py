"""Z/nZ gradings and the graded (multi-fusion) composition of connections.

With ``mu = 1`` the horizontal graph on sectors splits into ``G_0`` (even
sectors to odd) and ``G_1`` (odd to even).  The two are kept apart even
when isomorphic; connections compose only when the graphs agree as labelled
edge sets, and the composite is the zero object otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import connection as cx
from .cells import QSystemSpec
from .connection import Connection, EdgeSet, VertexSet
from .errors import SpecError
from .fusion import FusionCategoryData, build_su2_level


@dataclass(frozen=True)
class Grading:
    n: int
    classes: tuple  # classes[label] in Z/nZ

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("grading needs n >= 2")

    def of(self, label: int) -> int:
        return self.classes[label]

    def check(self, cat: FusionCategoryData) -> None:
        if self.classes[0] != 0:
            raise SpecError("the unit must have class 0")
        for a in cat.labels:
            # SU(2) objects are self-dual, so class(a) = -class(a)
            if (2 * self.classes[a]) % self.n and self.n != 2:
                raise SpecError(f"class of self-dual {a} is not 2-torsion")
            for b in cat.labels:
                for c in cat.labels:
                    if cat.N[a, b, c] and self.classes[c] != (self.classes[a] + self.classes[b]) % self.n:
                        raise SpecError(f"fusion {a} x {b} -> {c} breaks the grading")


def grade_su2(cat: FusionCategoryData) -> Grading:
    g = Grading(2, tuple(a % 2 for a in cat.labels))
    g.check(cat)
    return g


@dataclass(frozen=True)
class GradedSectorPartition:
    spec: str
    classes: tuple  # per graph vertex
    blocks: tuple  # blocks[j] = vertex indices of Phi_j

    def phi(self, j: int) -> tuple:
        return self.blocks[j]


def sector_partition(spec: QSystemSpec, grading: Grading) -> GradedSectorPartition:
    if any(grading.of(t) for t in spec.theta):
        raise SpecError(f"theta of {spec.name} is not supported in class 0")
    g = spec.graph
    if not g.is_connected():
        raise SpecError(f"{spec.name} sector graph is not connected")
    classes = tuple(p % grading.n for p in g.parity)
    blocks = tuple(tuple(v for v in range(len(g)) if classes[v] == j) for j in range(grading.n))
    seen = [v for b in blocks for v in b]
    if sorted(seen) != list(range(len(g))) or len(seen) != len(set(seen)):
        raise SpecError("Phi_j do not partition the sectors")
    return GradedSectorPartition(spec.name, classes, blocks)


class ZeroObject:
    """Result of composing connections whose graphs do not match."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ZeroObject()"

    def __add__(self, other):
        return other

    __radd__ = __add__


ZERO = ZeroObject()


class GradedSystem:
    """The pieces of induced connections on one spec, split by sector class."""

    def __init__(self, spec: QSystemSpec, grading: Grading | None = None):
        self.spec = spec
        self.cat = build_su2_level(spec.level)
        self.grading = grade_su2(self.cat) if grading is None else grading
        self.partition = sector_partition(spec, self.grading)
        g = spec.graph
        self.phi_sets = [VertexSet(f"Phi{j}[{spec.name}]", tuple(g.vertices[v] for v in blk),
                                   g.pf_weight[list(blk)])
                         for j, blk in enumerate(self.partition.blocks)]
        A = g.adjacency
        n = self.grading.n
        self.horizontal = []
        for j in range(n):
            src, dst = self.partition.blocks[j], self.partition.blocks[(j + 1) % n]
            self.horizontal.append(EdgeSet(f"G{j}[{spec.name}]", self.phi_sets[j], self.phi_sets[(j + 1) % n],
                                           A[np.ix_(src, dst)]))

    def piece(self, W: Connection, i: int, lam: int) -> Connection:
        """Restriction of an induced connection to upper-left class ``i``."""
        n = self.grading.n
        j = self.grading.of(lam)
        P = self.partition.blocks
        cls = {"a": i, "c": (i + 1) % n, "b": (i + j) % n, "d": (i + j + 1) % n}
        rows = {key: P[c] for key, c in cls.items()}
        vs = {key: self.phi_sets[c] for key, c in cls.items()}
        left = EdgeSet(f"V{lam}:{i}->{(i + j) % n}[{self.spec.name}]", vs["a"], vs["b"],
                       W.left.mult[np.ix_(rows["a"], rows["b"])])
        right = EdgeSet(f"V{lam}:{(i + 1) % n}->{(i + j + 1) % n}[{self.spec.name}]", vs["c"], vs["d"],
                        W.right.mult[np.ix_(rows["c"], rows["d"])])
        top = self.horizontal[i]
        bottom = self.horizontal[(i + j) % n]
        blocks = {}
        for ia, a in enumerate(rows["a"]):
            for idd, d in enumerate(rows["d"]):
                if (a, d) in W.blocks:
                    blocks[(ia, idd)] = W.blocks[(a, d)]
        return Connection(top, left, right, bottom, blocks, name=f"{W.name}<{i}>",
                          meta={**W.meta, "class": i})

    def identities(self) -> list[Connection]:
        return [cx.vertical_identity(h) for h in self.horizontal]


def graded_compose(W1, W2):
    """Vertical composite, or ``ZERO`` when the shared horizontal graphs differ."""
    if W1 is ZERO or W2 is ZERO:
        return ZERO
    if W1.bottom != W2.top:
        return ZERO
    return cx.compose_vertical(W1, W2)

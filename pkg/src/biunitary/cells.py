"""Catalog of SU(2)_k Q-systems and their fundamental cell systems.

The fundamental connection on a Dynkin diagram ``G`` (all four sides equal
to ``G``) is the Kauffman-type crossing acting on length-two paths::

    W_ad = R^{11}_2 (1 - e/beta) + R^{11}_0 (e/beta),
    e|a x a> = sum_y sqrt(mu_x mu_y) / mu_a |a y a>.

``e`` is the Temperley-Lieb generator on the path space of ``G``; since
``R^{11}_0`` and ``R^{11}_2`` are phases and ``e/beta`` is a projection,
each block is unitary.  Sign ``-1`` uses the conjugate braiding.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

from . import connection as cx
from .connection import Connection, EdgeSet, VertexSet
from .errors import NumericError, SpecError
from .fusion import build_su2_level, r_symbol
from .graphs import BipartiteGraph, ade_graph, coxeter_number, module_action

SOLVER_VERSION = "1"
CACHE_ENV = "BIUNITARY_CACHE_DIR"


@dataclass(frozen=True)
class QSystemSpec:
    series: str
    index: int
    level: int
    theta: tuple
    locality: str  # local | nonlocal | unknown
    locality_source: str  # braiding_phase | catalog_metadata

    def __post_init__(self):
        if self.theta.count(0) != 1:
            raise SpecError(f"{self.name}: theta must contain 0 exactly once, got {self.theta}")
        if coxeter_number(self.series, self.index) - 2 != self.level:
            raise SpecError(f"{self.name} lives at level {coxeter_number(self.series, self.index) - 2}, "
                            f"not {self.level}")

    @property
    def name(self) -> str:
        return f"{self.series}{self.index}"

    @property
    def graph(self) -> BipartiteGraph:
        return ade_graph(self.series, self.index)

    def theta_qdim(self) -> float:
        cat = build_su2_level(self.level)
        return float(sum(cat.qdim[t] for t in self.theta))

    def index_from_graph(self) -> float:
        """``sum_lambda d_lambda^2 / sum_v mu_v^2``, the index read off the module graph."""
        cat = build_su2_level(self.level)
        return float((cat.qdim ** 2).sum() / (self.graph.pf_weight ** 2).sum())

    def to_json(self) -> dict:
        return {"series": self.series, "index": self.index, "level": self.level,
                "theta": list(self.theta), "locality": self.locality,
                "locality_source": self.locality_source}


def _d_locality(l: int) -> str:
    # braiding phase of the order-2 simple current k = 2l
    phase = r_symbol(build_su2_level(2 * l), 2 * l, 2 * l, 0)
    return "local" if abs(phase - 1) < 1e-9 else "nonlocal"


def catalog() -> list[QSystemSpec]:
    specs = [QSystemSpec("A", k + 1, k, (0,), "local", "braiding_phase") for k in range(1, 9)]
    specs += [QSystemSpec("D", l + 2, 2 * l, (0, 2 * l), _d_locality(l), "braiding_phase")
              for l in range(2, 9)]
    specs += [
        QSystemSpec("E", 6, 10, (0, 6), "local", "catalog_metadata"),
        QSystemSpec("E", 7, 16, (0, 8, 16), "nonlocal", "catalog_metadata"),
        QSystemSpec("E", 8, 28, (0, 10, 18, 28), "local", "catalog_metadata"),
    ]
    return specs


def get_spec(name: str) -> QSystemSpec:
    for s in catalog():
        if s.name == name.upper():
            return s
    raise SpecError(f"{name!r} is not in the catalog")


def a_spec(k: int) -> QSystemSpec:
    return QSystemSpec("A", k + 1, k, (0,), "local", "braiding_phase")


# graphs as edge sets ----------------------------------------------------------

def sector_vertices(g: BipartiteGraph) -> VertexSet:
    return VertexSet(g.name, g.vertices, g.pf_weight)


def sector_edges(g: BipartiteGraph, lam: int = 1, level: int | None = None) -> EdgeSet:
    """Edges ``a -> b`` with multiplicity ``dim Hom(a lam, b)`` on the sectors of ``g``."""
    vs = sector_vertices(g)
    if lam == 1:
        return EdgeSet(g.name, vs, vs, g.adjacency)
    if level is None:
        raise ValueError("level needed for lam != 1")
    return EdgeSet(f"{g.name}^{lam}", vs, vs, module_action(level, g)[lam])


def crossing_on_graph(g: BipartiteGraph, level: int, sign: int = +1) -> Connection:
    """Fundamental cells on ``g``: the Kauffman crossing in the path basis."""
    cat = build_su2_level(level)
    es = sector_edges(g)
    r0 = r_symbol(cat, 1, 1, 0, sign)
    r2 = r_symbol(cat, 1, 1, 2, sign) if level >= 2 else 0j
    mu, beta, A = g.pf_weight, g.beta, g.adjacency
    if A.max() > 1:
        raise SpecError("multi-edges are not supported in the fundamental cells")
    blocks = {}
    n = len(g)
    for a in range(n):
        for d in range(n):
            mids = [x for x in range(n) if A[a, x] and A[x, d]]
            if not mids:
                continue
            E = np.zeros((len(mids), len(mids)))
            if a == d:
                s = np.sqrt(mu[mids])
                E = np.outer(s, s) / mu[a]
            blocks[(a, d)] = r2 * np.eye(len(mids)) + (r0 - r2) / beta * E
    return Connection(es, es, es, es, blocks, name=f"W[{g.name},{'+' if sign > 0 else '-'}]",
                      meta={"graph": g.name, "level": level, "lambda": 1, "sign": sign})


def a_series_cells(k: int, sign: int = +1) -> Connection:
    return crossing_on_graph(ade_graph("A", k + 1), k, sign)


def ghj_cells(spec: QSystemSpec, sign: int = +1) -> Connection:
    """Fundamental GHJ connection; vertical and horizontal graphs are the Dynkin diagram."""
    g = spec.graph
    module_action(spec.level, g)  # raises SpecError on a level/graph mismatch
    W = crossing_on_graph(g, spec.level, sign)
    res = cx.check_biunitarity(W).max()
    if res > cx.TOL_CONSTRUCT:
        raise NumericError(f"cells on {spec.name} are not bi-unitary", res)
    return W


# seeded polish ------------------------------------------------------------------

def _pack(W: Connection):
    keys = sorted(W.blocks)
    return keys, np.concatenate([np.concatenate([W.blocks[k].real.ravel(), W.blocks[k].imag.ravel()])
                                 for k in keys])


def _unpack(W: Connection, keys, x):
    blocks, pos = {}, 0
    for k in keys:
        shape = W.blocks[k].shape
        n = shape[0] * shape[1]
        blocks[k] = (x[pos:pos + n] + 1j * x[pos + n:pos + 2 * n]).reshape(shape)
        pos += 2 * n
    return blocks


def _residual_vector(W: Connection, keys, x):
    Wx = Connection(W.top, W.left, W.right, W.bottom, _unpack(W, keys, x))
    out = []
    for B in Wx.blocks.values():
        D = B @ B.conj().T - np.eye(len(B))
        out += [D.real.ravel(), D.imag.ravel()]
    for M in cx.reflect(Wx).values():
        D = M @ M.conj().T - np.eye(len(M))
        out += [D.real.ravel(), D.imag.ravel()]
    return np.concatenate(out)


def random_vertical_gauge(W: Connection, rng: np.random.Generator) -> Connection:
    """Apply random unitaries on the vertical edge spaces (same family left and right)."""
    if W.left != W.right:
        raise ValueError("gauge family requires equal left and right edge sets")
    from scipy.stats import unitary_group

    U = {}
    for (a, b), m in np.ndenumerate(W.left.mult):
        if m:
            U[(a, b)] = unitary_group.rvs(m, random_state=rng) if m > 1 else np.array(
                [[np.exp(2j * np.pi * rng.random())]])
    return cx.compress(W, U, U, W.left, W.right, name=W.name)


def polish_cells(spec: QSystemSpec, seed: int, noise: float = 1e-2, sign: int = +1) -> Connection:
    """Least-squares solve of the bi-unitarity equations from a seeded start.

    The start is the closed form in a random vertical gauge plus ``noise``;
    the result is gauge-fixed by making the first nonzero cell in canonical
    order real positive.
    """
    rng = np.random.default_rng(seed)
    W0 = random_vertical_gauge(ghj_cells(spec, sign), rng)
    keys, x0 = _pack(W0)
    x0 = x0 + noise * rng.standard_normal(len(x0))
    sol = least_squares(lambda x: _residual_vector(W0, keys, x), x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    W = Connection(W0.top, W0.left, W0.right, W0.bottom, _unpack(W0, keys, sol.x),
                   name=f"W[{spec.name}]#{seed}", meta={"seed": seed, **W0.meta})
    res = cx.check_biunitarity(W).max()
    if res > cx.TOL_CONSTRUCT:
        raise NumericError(f"polish from seed {seed} did not converge", res)
    return fix_gauge(W)


def fix_gauge(W: Connection) -> Connection:
    """Rotate a global phase so the first nonzero cell is real positive."""
    for *_, v in W.cells():
        if abs(v) > 1e-12:
            ph = abs(v) / v
            return Connection(W.top, W.left, W.right, W.bottom,
                              {k: B * ph for k, B in W.blocks.items()}, name=W.name, meta=W.meta)
    return W


# cache ---------------------------------------------------------------------------

def cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV, Path.home() / ".cache" / "biunitary"))


def cached_cells(spec: QSystemSpec, sign: int = +1) -> Connection:
    """``ghj_cells`` backed by a content-hashed JSON file; corrupt entries are regenerated."""
    key = f"{spec.series}-{spec.index}-{spec.level}-{sign}-v{SOLVER_VERSION}"
    path = cache_dir() / f"cells-{key}.json"
    if path.exists():
        try:
            doc = json.loads(path.read_text())
            body = json.dumps(doc["connection"], sort_keys=True)
            if hashlib.sha256(body.encode()).hexdigest() == doc["sha256"]:
                return cx.from_json(doc["connection"])
        except (ValueError, KeyError):
            pass
    W = ghj_cells(spec, sign)
    body = cx.to_json(W)
    text = json.dumps(body, sort_keys=True)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"sha256": hashlib.sha256(text.encode()).hexdigest(), "connection": body}))
    return W

"""Flatness verdicts for induced connections.

Primary test: for every depth ``j`` the dimension of the flat part (from
intertwiners of induced connections) equals the fusion-ring count
``dim Hom(theta X, X)`` with ``X = (lam lam)^j`` and ``X = lam (lam lam)^j``.
The inequality ``<=`` always holds; the first strict ``j`` is the certificate.

Cross-check: parallel transport of string-algebra elements at the star
through a stack of ``n`` cells, ``m`` horizontal layers out.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import connection as cx
from .cells import QSystemSpec, get_spec
from .connection import Connection
from .errors import ResourceError, SpecError
from .fusion import build_su2_level, r_symbol
from .homs import flat_part_dims, hom_table, ring_dims, theta_plus

MAX_TRANSPORT_EDGES = 20000


@dataclass(frozen=True)
class FlatnessVerdict:
    verdict: str  # flat | nonflat
    method: str  # dimension_equality | parallel_transport
    certificate: dict
    depth: int
    tables: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def default_depth(spec: QSystemSpec) -> int:
    return 2 * spec.graph.diameter()


def check_flatness(spec: QSystemSpec, lam: int, sign: int = +1, depth: int | None = None,
                   table: np.ndarray | None = None) -> FlatnessVerdict:
    depth = default_depth(spec) if depth is None else depth
    if depth < spec.graph.diameter():
        raise ValueError(f"depth {depth} below the graph depth {spec.graph.diameter()}")
    H = hom_table(spec, sign, sign)[0] if table is None else table
    tables = {}
    cert = None
    for odd in (False, True):
        lhs = flat_part_dims(spec, lam, depth, odd=odd, table=H)
        rhs = ring_dims(spec, lam, depth, odd=odd)
        key = "odd" if odd else "even"
        tables[key] = {"flat_part": lhs, "ring": rhs}
        for j, (x, y) in enumerate(zip(lhs, rhs)):
            if x > y:
                raise AssertionError(f"flat part exceeds the ring bound at j={j}: {x} > {y}")
            if x < y and (cert is None or (2 * j + odd) < cert["word_length"]):
                cert = {"j": j, "parity": key, "word_length": 2 * j + int(odd), "lhs": x, "rhs": y}
                break
    verdict = "nonflat" if cert else "flat"
    if cert is None:
        cert = {"statement": f"equality for all j <= {depth}, both parities"}
    return FlatnessVerdict(verdict, "dimension_equality", cert, depth, tables,
                           {"zero": 1e-7, "gap": 1e-3})


def recheck_certificate(spec: QSystemSpec, lam: int, sign: int, cert: dict) -> bool:
    """Recompute the witness of a nonflat verdict from scratch."""
    odd = cert["parity"] == "odd"
    H = hom_table(spec, sign, sign)[0]
    lhs = flat_part_dims(spec, lam, cert["j"], odd=odd, table=H)[-1]
    rhs = ring_dims(spec, lam, cert["j"], odd=odd)[-1]
    return lhs == cert["lhs"] and rhs == cert["rhs"] and lhs < rhs


def locality_from_braiding(spec: QSystemSpec) -> tuple[str, str]:
    """``(local|nonlocal, source)``; scalar braiding phase for ``theta = 0 + k``."""
    k = spec.level
    if tuple(spec.theta) == (0,):
        return "local", "braiding_phase"
    if tuple(spec.theta) == (0, k):
        phase = r_symbol(build_su2_level(k), k, k, 0)
        return ("local" if abs(phase - 1) < 1e-9 else "nonlocal"), "braiding_phase"
    return spec.locality, "catalog_metadata"


def flat_part_matches(spec_a: QSystemSpec, spec_b: QSystemSpec, lam: int, k_max: int) -> bool:
    """Flat part of ``spec_a`` against the full endomorphism dims of the commutative ``spec_b``."""
    if spec_a.level != spec_b.level:
        raise SpecError("specs live at different levels")
    tp = theta_plus(spec_a)
    if sorted(tp) != sorted(spec_b.theta):
        raise SpecError(f"theta+ of {spec_a.name} is {tp}, not the theta of {spec_b.name}")
    for odd in (False, True):
        if flat_part_dims(spec_a, lam, k_max, odd) != flat_part_dims(spec_b, lam, k_max, odd):
            return False
    return True


def commutative_partner(spec: QSystemSpec) -> QSystemSpec:
    """Catalog entry at the same level whose theta equals theta+ of ``spec``."""
    from .cells import a_spec, catalog

    tp = sorted(theta_plus(spec))
    if tp == [0]:
        return a_spec(spec.level)
    for s in catalog():
        if s.level == spec.level and sorted(s.theta) == tp:
            return s
    raise SpecError(f"no catalog entry with theta = {tp} at level {spec.level}")


# parallel transport ----------------------------------------------------------------

def stacked_edges(W: Connection, n: int) -> int:
    """Vertical edge count of ``n`` stacked rows, read off the adjacency power."""
    A = W.left.mult.astype(object)
    P = A
    for _ in range(n - 1):
        P = P.dot(A)
    return int(P.sum())


def stack(W: Connection, n: int, max_edges: int = MAX_TRANSPORT_EDGES) -> Connection:
    if n < 1:
        raise ValueError("need at least one row")
    if stacked_edges(W, n) > max_edges:
        raise ResourceError(f"{n} stacked rows exceed {max_edges} vertical edges")
    C = W
    for _ in range(n - 1):
        C = cx.compose_vertical(C, W)
    return C


def parallel_transport_check(W: Connection, n: int, m: int, star: int = 0, samples: int = 3,
                             seed: int = 0, max_edges: int = MAX_TRANSPORT_EDGES) -> float:
    """Largest deviation from a flat field after transporting ``m`` layers.

    Elements ``x`` of the string algebra at ``star`` (vertical paths of
    ``n`` rows) are pushed across horizontal edges by conjugating with the
    stacked cells.  A flat field stays block diagonal and identical for
    every incoming edge; anything else is reported as deviation.  ``x`` runs
    over ``samples`` seeded random Hermitian elements of unit norm.
    """
    C = stack(W, n, max_edges)
    V = C.left
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        T = {}
        for b in range(len(V.dst)):
            k = int(V.mult[star, b])
            if k:
                X = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
                T[(star, b)] = X + X.conj().T
        scale = max(np.abs(np.linalg.eigvalsh(X)).max() for X in T.values())
        T = {key: X / scale for key, X in T.items()}
        worst = max(worst, _transport(C, T, star, m))
    return worst


def _transport(C: Connection, T: dict, star: int, m: int) -> float:
    H = C.top
    known = {star}
    frontier = [star]
    dev = 0.0
    for _ in range(m):
        proposals = {}
        for u in frontier:
            for d in range(len(C.bottom.dst)):
                B = C.blocks.get((u, d))
                if B is None:
                    continue
                tr, lb = C.tr_basis(u, d), C.lb_basis(u, d)
                L = np.zeros((len(lb), len(lb)), dtype=complex)
                idx = {p: i for i, p in enumerate(lb)}
                for i, (b, e, j) in enumerate(lb):
                    X = T.get((u, b))
                    if X is None:
                        continue
                    for e2 in range(X.shape[0]):
                        L[idx[(b, e2, j)], i] = X[e2, e]
                Y = B.conj().T @ L @ B
                # Y lives on (c, xi, eta); split into blocks by (c, xi)
                groups = {}
                for i, (c, xi, eta) in enumerate(tr):
                    groups.setdefault((c, xi), []).append(i)
                keys = list(groups)
                for g1 in keys:
                    for g2 in keys:
                        if g1 != g2:
                            dev = max(dev, float(np.abs(Y[np.ix_(groups[g1], groups[g2])]).max()))
                for (c, xi), rows in groups.items():
                    proposals.setdefault((c, d), []).append(Y[np.ix_(rows, rows)])
        new_frontier = set()
        for (c, d), mats in proposals.items():
            ref = T.get((c, d)) if c in known else mats[0]
            for M in mats:
                dev = max(dev, float(np.abs(M - ref).max()))
            if c not in known:
                T[(c, d)] = ref
                new_frontier.add(c)
        known |= new_frontier
        frontier = sorted(new_frontier)
        if not frontier:
            break
    return dev

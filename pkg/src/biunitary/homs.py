"""Intertwiner spaces between connections and the dimension tables built on them.

An intertwiner ``T: W1 -> W2`` between connections with the same horizontal
edges is a family of matrices ``T_ab`` on the vertical edges (one family
on both sides when left and right edge sets coincide, two otherwise) with

    W2_ad . (sum_c 1 (x) T_cd) = (sum_b T_ab (x) 1) . W1_ad   for every corner.

Dimensions are read off the singular values of this linear system with a
gap rule, so integer answers are never silently rounded.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import connection as cx
from .connection import Connection, EdgeSet
from .errors import CompositionError, NumericError

ZERO_TOL = 1e-7
GAP_TOL = 1e-3


@dataclass(frozen=True)
class IntertwinerSpace:
    source: Connection
    target: Connection
    basis: list  # each element: dict (a, b) -> matrix (n_target x n_source)
    dim: int
    singular_values: np.ndarray  # smallest few, for diagnostics

    def residual(self) -> float:
        return max((_apply_residual(self.source, self.target, T) for T in self.basis), default=0.0)


def _variables(E1: EdgeSet, E2: EdgeSet):
    slots, off = {}, 0
    for (a, b), n1 in np.ndenumerate(E1.mult):
        n2 = int(E2.mult[a, b])
        if n1 and n2:
            slots[(a, b)] = (off, n2, int(n1))
            off += n2 * int(n1)
    return slots, off


def _vertical(W: Connection) -> EdgeSet:
    if W.left != W.right:
        raise CompositionError(f"{W.name}: left and right edge sets differ")
    return W.left


def _shared(W1: Connection, W2: Connection) -> bool:
    return W1.left == W1.right and W2.left == W2.right


def intertwining_operator(W1: Connection, W2: Connection):
    """Linear system for intertwiners ``W1 -> W2``.

    When both connections have equal left and right edge sets one family
    serves both sides; otherwise the left and right families are separate
    unknowns.  Returns ``(matrix, left_slots, right_slots, n_unknowns)``.
    """
    if W1.top != W2.top or W1.bottom != W2.bottom:
        raise CompositionError("intertwiners need equal horizontal edges")
    if not (W1.left.dst == W2.left.dst and W1.right.dst == W2.right.dst):
        raise CompositionError("vertical edge sets end on different vertices")
    lslots, nvar = _variables(W1.left, W2.left)
    if _shared(W1, W2):
        rslots = lslots
    else:
        rslots, nr = _variables(W1.right, W2.right)
        rslots = {ab: (off + nvar, n2, n1) for ab, (off, n2, n1) in rslots.items()}
        nvar += nr
    rows = []
    for a, d in W1.corners():
        B1 = W1.blocks.get((a, d))
        B2 = W2.blocks.get((a, d))
        if B1 is None or B2 is None:
            continue
        tr1, lb1 = W1.tr_basis(a, d), W1.lb_basis(a, d)
        tr2, lb2 = W2.tr_basis(a, d), W2.lb_basis(a, d)
        lb1_idx = {p: n for n, p in enumerate(lb1)}
        tr2_idx = {p: n for n, p in enumerate(tr2)}
        # equation (r, s): r in lb2, s in tr1
        A = np.zeros((len(lb2), len(tr1), nvar), dtype=complex)
        for s, (c, i, e1) in enumerate(tr1):
            if (c, d) not in rslots:
                continue
            off, n2, n1 = rslots[(c, d)]
            for e2 in range(n2):
                A[:, s, off + e2 * n1 + e1] += B2[:, tr2_idx[(c, i, e2)]]
        for r, (b, z2, j) in enumerate(lb2):
            if (a, b) not in lslots:
                continue
            off, n2, n1 = lslots[(a, b)]
            for z1 in range(n1):
                A[r, :, off + z2 * n1 + z1] -= B1[lb1_idx[(b, z1, j)], :]
        rows.append(A.reshape(-1, nvar))
    M = np.concatenate(rows) if rows else np.zeros((0, nvar), dtype=complex)
    return M, lslots, rslots, nvar


def _null_space(M: np.ndarray, nvar: int, what: str):
    if nvar == 0:
        return np.zeros((0, 0)), np.zeros(0)
    if M.shape[0] < nvar:
        M = np.vstack([M, np.zeros((nvar - M.shape[0], nvar))])
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    s = np.concatenate([s, np.zeros(nvar - len(s))])
    order = np.argsort(s)
    s = s[order]
    dim = int((s < ZERO_TOL).sum())
    nxt = s[dim] if dim < len(s) else np.inf
    if not (nxt > GAP_TOL):
        raise NumericError(f"{what}: singular value {nxt:.2e} falls in the gap window "
                           f"({ZERO_TOL:g}, {GAP_TOL:g}]", nxt)
    null = Vh.conj().T[:, order[:dim]]
    return null, s[: dim + 3]


def intertwiner_space(W1: Connection, W2: Connection) -> IntertwinerSpace:
    """Basis elements are dicts ``(a, b) -> T_ab``; with separate sides,
    ``{"left": {...}, "right": {...}}``."""
    M, lslots, rslots, nvar = intertwining_operator(W1, W2)
    null, sv = _null_space(M, nvar, f"Hom({W1.name}, {W2.name})")

    def unpack(v, slots):
        return {ab: v[off:off + n2 * n1].reshape(n2, n1) for ab, (off, n2, n1) in slots.items()}

    basis = []
    for k in range(null.shape[1]):
        v = null[:, k]
        if lslots is rslots:
            basis.append(unpack(v, lslots))
        else:
            basis.append({"left": unpack(v, lslots), "right": unpack(v, rslots)})
    return IntertwinerSpace(W1, W2, basis, null.shape[1], sv)


def hom_dim(W1: Connection, W2: Connection) -> int:
    M, _, _, nvar = intertwining_operator(W1, W2)
    return _null_space(M, nvar, f"Hom({W1.name}, {W2.name})")[0].shape[1]


def _apply_residual(W1, W2, T) -> float:
    TL, TR = (T["left"], T["right"]) if "left" in T else (T, T)
    worst = 0.0
    for a, d in W1.corners():
        B1, B2 = W1.blocks.get((a, d)), W2.blocks.get((a, d))
        if B1 is None:
            continue
        R = _lift(TR, W1.tr_basis(a, d), W2.tr_basis(a, d), d, right=True)
        L = _lift(TL, W1.lb_basis(a, d), W2.lb_basis(a, d), a, right=False)
        worst = max(worst, float(np.abs(B2 @ R - L @ B1).max()))
    return worst


def _lift(T, basis1, basis2, corner, right):
    """Matrix of ``T`` on a path basis: acting on the vertical step."""
    idx2 = {p: n for n, p in enumerate(basis2)}
    out = np.zeros((len(basis2), len(basis1)), dtype=complex)
    for col, (x, i, j) in enumerate(basis1):
        if right:  # (c, horizontal i, vertical j), vertical edge c => corner
            key = (x, corner)
            if key in T:
                for e2 in range(T[key].shape[0]):
                    out[idx2[(x, i, e2)], col] += T[key][e2, j]
        else:  # (b, vertical i, horizontal j), vertical edge corner => b
            key = (corner, x)
            if key in T:
                for e2 in range(T[key].shape[0]):
                    out[idx2[(x, e2, j)], col] += T[key][e2, i]
    return out


# decomposition -------------------------------------------------------------------

def _subconnection(W: Connection, iso_l: dict, iso_r: dict, name: str) -> Connection:
    def sub(E, iso, tag):
        mult = np.zeros_like(E.mult)
        for (a, b), P in iso.items():
            mult[a, b] = P.shape[1]
        return EdgeSet(f"{name}{tag}", E.src, E.dst, mult)

    left = sub(W.left, iso_l, "")
    right = left if iso_r is iso_l else sub(W.right, iso_r, "'")
    keep_l = {ab: P for ab, P in iso_l.items() if P.shape[1]}
    keep_r = keep_l if iso_r is iso_l else {ab: P for ab, P in iso_r.items() if P.shape[1]}
    return cx.compress(W, keep_l, keep_r, left, right, name=name)


def decompose(W: Connection, seed: int = 0):
    """Split ``W`` into irreducibles; returns ``[(W_i, multiplicity)]``.

    The eigenspaces of a generic self-adjoint endomorphism are the ranges of
    minimal projections; components are then grouped by isomorphism.
    """
    space = intertwiner_space(W, W)
    shared = bool(space.basis) and "left" not in space.basis[0]
    sides = [(b, b) if shared else (b["left"], b["right"]) for b in space.basis]
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal(space.dim)

    def generic(which):
        X = {}
        for ab in (sides[0][which] if sides else {}):
            Y = sum(c * s[which][ab] for c, s in zip(coeffs, sides))
            X[ab] = Y + Y.conj().T
        return {ab: np.linalg.eigh(M) for ab, M in X.items()}

    eig_l = generic(0)
    eig_r = eig_l if shared else generic(1)
    # eigenvalues are shared across vertex pairs; cluster them globally
    values = np.sort(np.concatenate([w for w, _ in eig_l.values()]))
    clusters = []
    for v in values:
        if clusters and abs(v - clusters[-1][-1]) < 1e-6:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    pieces = []
    for n, ctr in enumerate(np.mean(c) for c in clusters):
        iso_l = {ab: V[:, np.abs(w - ctr) < 1e-6] for ab, (w, V) in eig_l.items()}
        iso_r = iso_l if shared else {ab: V[:, np.abs(w - ctr) < 1e-6] for ab, (w, V) in eig_r.items()}
        pieces.append(_subconnection(W, iso_l, iso_r, f"{W.name}[{n}]"))
    if any(hom_dim(P, P) != 1 for P in pieces):
        raise NumericError("eigenspace of a generic endomorphism is reducible", np.nan)
    classes = []
    for P in pieces:
        for cls in classes:
            if _same_vertical(cls[0], P) and hom_dim(cls[0], P) == 1:
                cls[1] += 1
                break
        else:
            classes.append([P, 1])
    return [(P, m) for P, m in classes]


def _same_vertical(W1, W2) -> bool:
    return np.array_equal(W1.left.mult, W2.left.mult) and np.array_equal(W1.right.mult, W2.right.mult)


def gauge_equivalent(W1: Connection, W2: Connection) -> bool:
    """Unitary equivalence through vertical-edge unitaries."""
    if W1.top != W2.top or W1.bottom != W2.bottom:
        return False
    if not (np.array_equal(W1.left.mult, W2.left.mult) and np.array_equal(W1.right.mult, W2.right.mult)):
        return False
    d12 = hom_dim(W1, W2)
    return d12 == hom_dim(W1, W1) == hom_dim(W2, W2)


# dimension tables -------------------------------------------------------------------

def hom_diagnostics(W1: Connection, W2: Connection):
    """``(dim, largest singular value counted as zero, first nonzero one)``."""
    M, _, _, nvar = intertwining_operator(W1, W2)
    null, sv = _null_space(M, nvar, f"Hom({W1.name}, {W2.name})")
    dim = null.shape[1]
    zero = float(sv[dim - 1]) if dim else 0.0
    gap = float(sv[dim]) if dim < len(sv) else float("inf")
    return dim, zero, gap


@dataclass(frozen=True)
class ZMatrix:
    entries: np.ndarray
    spec: str
    level: int
    zero_residual: float  # largest singular value rounded to zero
    min_gap: float  # smallest singular value counted as nonzero
    commute_S: float
    commute_T: float

    def to_json(self) -> dict:
        return {"schema": "biunitary.zmatrix/1", "spec": self.spec, "level": self.level,
                "entries": self.entries.tolist(), "zero_residual": self.zero_residual,
                "min_gap": self.min_gap, "commute_S": self.commute_S, "commute_T": self.commute_T}


def _tower(spec, sign):
    from .induction import tower
    return tower(spec.name, spec.level, sign)


@functools.lru_cache(maxsize=128)
def hom_table(spec, sign_left: int = +1, sign_right: int = +1, lam_max: int | None = None):
    """``H[l1, l2] = dim Hom(alpha^{s1}_{l1}, alpha^{s2}_{l2})`` with diagnostics (memoized, read-only)."""
    n = spec.level + 1 if lam_max is None else lam_max + 1
    P, Q = _tower(spec, sign_left), _tower(spec, sign_right)
    H = np.zeros((n, n), dtype=np.int64)
    zero, gap = 0.0, np.inf
    for i in range(n):
        for j in range(n):
            d, z, g = hom_diagnostics(P[i], Q[j])
            H[i, j] = d
            zero, gap = max(zero, z), min(gap, g)
    H.setflags(write=False)
    return H, zero, gap


def z_matrix(spec) -> ZMatrix:
    from .fusion import build_su2_level

    Z, zero, gap = hom_table(spec, +1, -1)
    cat = build_su2_level(spec.level)
    cs = float(np.abs(Z @ cat.S - cat.S @ Z).max())
    ct = float(np.abs(Z @ cat.T - cat.T @ Z).max())
    return ZMatrix(Z, spec.name, spec.level, zero, gap, cs, ct)


def theta_plus(spec, Z: ZMatrix | None = None) -> tuple:
    Z = z_matrix(spec) if Z is None else Z
    return tuple(lam for lam in range(spec.level + 1) for _ in range(int(Z.entries[lam, 0])))


def power_multiplicities(cat, lam: int, n: int) -> np.ndarray:
    """Multiplicities of the irreducibles in ``lam^{(x) n}``."""
    # exact integers: these grow like qdim(lam)^n
    N = cat.N[lam].T.astype(object)
    m = np.zeros(cat.level + 1, dtype=object)
    m[0] = 1
    for _ in range(n):
        m = N.dot(m)
    return m


def ring_hom(cat, theta, m1, m2) -> int:
    """``dim Hom(theta X, Y)`` in the fusion ring, ``X, Y`` given by multiplicities."""
    Nt = sum(cat.N[t] for t in theta).astype(object)
    return int(m1.dot(Nt).dot(m2))


def flat_part_dims(spec, lam: int, k_max: int, odd: bool = False, sign: int = +1,
                   table: np.ndarray | None = None) -> list[int]:
    """``dim End`` of the induced connection of ``(lam lam)^j`` (or ``lam (lam lam)^j``), ``j = 0..k_max``.

    Expands the power into irreducibles and uses the table of
    ``dim Hom(alpha_nu, alpha_nu')``.
    """
    from .fusion import build_su2_level

    cat = build_su2_level(spec.level)
    cat.validate(lam)
    H = hom_table(spec, sign, sign)[0] if table is None else table
    H = np.asarray(H).astype(object)
    out = []
    for j in range(k_max + 1):
        m = power_multiplicities(cat, lam, 2 * j + int(odd))
        out.append(int(m.dot(H).dot(m)))
    return out


def ring_dims(spec, lam: int, k_max: int, odd: bool = False, theta=None) -> list[int]:
    """Fusion-ring counterpart ``dim Hom(theta X, X)`` of :func:`flat_part_dims`."""
    from .fusion import build_su2_level

    cat = build_su2_level(spec.level)
    theta = spec.theta if theta is None else theta
    out = []
    for j in range(k_max + 1):
        m = power_multiplicities(cat, lam, 2 * j + int(odd))
        out.append(ring_hom(cat, theta, m, m))
    return out


def flat_part_dim_direct(spec, lam: int, n: int, sign: int = +1) -> int:
    """``dim End`` of ``n`` vertically stacked copies of ``alpha_lam``; small cases only."""
    W = _tower(spec, sign)[lam]
    C = W
    for _ in range(n - 1):
        C = cx.compose_vertical(C, W)
    if n == 0:
        C = _tower(spec, sign)[0]
    return hom_dim(C, C)

"""Braided fusion data of SU(2)_k.

Objects are labelled by twice the spin, ``0, 1, ..., k``.  F-symbols come
from the q-deformed Racah formula with every square root taken positive, so
each F-block is a real orthogonal matrix.  R-symbols use the standard
closed form with ``q = exp(2 pi i / (k + 2))``; the negative braiding is the
complex conjugate of the positive one.

The F table is stored flat: block ``(a, b, c, d)`` starts at
``f_offsets[a, b, c, d]`` and has rows indexed by ``e`` running over the
truncated range of ``a x b`` and columns by ``f`` over ``b x c`` (both with
step 2, inadmissible rows/columns stored as zero).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import DomainError, RangeError

MAX_LEVEL = 64
TOL_CONSTRUCT = 1e-9
SCHEMA_FUSION = "biunitary.fusion/1"


def channels(k: int, a: int, b: int) -> range:
    """Truncated Clebsch-Gordan range of ``a x b`` at level ``k``."""
    return range(abs(a - b), min(a + b, 2 * k - a - b) + 1, 2)


@numba.njit(cache=True)
def _admissible(k, a, b, c):
    if c < abs(a - b) or c > a + b or a + b + c > 2 * k:
        return False
    return (a + b + c) % 2 == 0


@numba.njit(cache=True)
def _n_channels(k, a, b):
    lo = abs(a - b)
    hi = min(a + b, 2 * k - a - b)
    if hi < lo:
        return 0
    return (hi - lo) // 2 + 1


@numba.njit(cache=True)
def _delta(qf, a, b, c):
    return math.sqrt(
        qf[(a + b - c) // 2] * qf[(a - b + c) // 2] * qf[(-a + b + c) // 2] / qf[(a + b + c) // 2 + 1]
    )


@numba.njit(cache=True)
def _f_entry(k, qn, qf, a, b, c, d, e, f):
    if not (_admissible(k, a, b, e) and _admissible(k, e, c, d)
            and _admissible(k, b, c, f) and _admissible(k, a, f, d)):
        return 0.0
    t1 = (a + b + e) // 2
    t2 = (e + c + d) // 2
    t3 = (b + c + f) // 2
    t4 = (a + f + d) // 2
    p1 = (a + b + c + d) // 2
    p2 = (a + e + c + f) // 2
    p3 = (b + e + d + f) // 2
    zlo = max(max(t1, t2), max(t3, t4))
    # terms with z + 1 >= k + 2 carry the vanishing factor [k+2]
    zhi = min(min(min(p1, p2), p3), k)
    s = 0.0
    for z in range(zlo, zhi + 1):
        term = qf[z + 1] / (qf[z - t1] * qf[z - t2] * qf[z - t3] * qf[z - t4]
                            * qf[p1 - z] * qf[p2 - z] * qf[p3 - z])
        if z % 2 == 1:
            term = -term
        s += term
    sixj = _delta(qf, a, b, e) * _delta(qf, e, c, d) * _delta(qf, b, c, f) * _delta(qf, a, f, d) * s
    sign = -1.0 if ((a + b + c + d) // 2) % 2 == 1 else 1.0
    return sign * math.sqrt(qn[e + 1] * qn[f + 1]) * sixj


@numba.njit(cache=True)
def _build_f_table(k, qn, qf):
    n = k + 1
    offsets = -np.ones((n, n, n, n), dtype=np.int64)
    total = 0
    for a in range(n):
        for b in range(n):
            ne = _n_channels(k, a, b)
            for c in range(n):
                nf = _n_channels(k, b, c)
                for d in range(n):
                    ok = False
                    for ie in range(ne):
                        e = abs(a - b) + 2 * ie
                        if _admissible(k, e, c, d):
                            ok = True
                            break
                    if ok:
                        offsets[a, b, c, d] = total
                        total += ne * nf
    values = np.zeros(total, dtype=np.float64)
    for a in range(n):
        for b in range(n):
            ne = _n_channels(k, a, b)
            for c in range(n):
                nf = _n_channels(k, b, c)
                for d in range(n):
                    off = offsets[a, b, c, d]
                    if off < 0:
                        continue
                    for ie in range(ne):
                        e = abs(a - b) + 2 * ie
                        for jf in range(nf):
                            f = abs(b - c) + 2 * jf
                            values[off + ie * nf + jf] = _f_entry(k, qn, qf, a, b, c, d, e, f)
    return offsets, values


@numba.njit(cache=True)
def _fget(k, offsets, values, a, b, c, d, e, f):
    off = offsets[a, b, c, d]
    if off < 0:
        return 0.0
    if not (_admissible(k, a, b, e) and _admissible(k, b, c, f)):
        return 0.0
    nf = _n_channels(k, b, c)
    return values[off + ((e - abs(a - b)) // 2) * nf + (f - abs(b - c)) // 2]


@numba.njit(cache=True)
def _transpose_blocks(k, offsets, values):
    # same offsets, each block stored column-major
    n = k + 1
    out = np.zeros_like(values)
    for a in range(n):
        for b in range(n):
            ne = _n_channels(k, a, b)
            for c in range(n):
                nf = _n_channels(k, b, c)
                for d in range(n):
                    off = offsets[a, b, c, d]
                    if off < 0:
                        continue
                    for i in range(ne):
                        for j in range(nf):
                            out[off + j * ne + i] = values[off + i * nf + j]
    return out


@numba.njit(cache=True)
def _mirror_defect(k, offsets, values):
    """max |F^{abc}_d[e,f] - F^{cba}_d[f,e]|."""
    n = k + 1
    worst = 0.0
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    if offsets[a, b, c, d] < 0:
                        continue
                    for e in range(abs(a - b), min(a + b, 2 * k - a - b) + 1, 2):
                        for f in range(abs(b - c), min(b + c, 2 * k - b - c) + 1, 2):
                            x = _fget(k, offsets, values, a, b, c, d, e, f)
                            y = _fget(k, offsets, values, c, b, a, d, f, e)
                            worst = max(worst, abs(x - y))
    return worst


@numba.njit(cache=True)
def _pentagon_residual(k, offsets, values, values_t, half):
    # F^{fcd}_e[g,l] F^{abl}_e[f,m] = sum_h F^{abc}_g[f,h] F^{ahd}_e[g,m] F^{bcd}_m[h,l]
    # half=True keeps only (a, b) <= (d, c): the mirror F^{abc}_d[e,f] = F^{cba}_d[f,e]
    # maps equation (a,b,c,d; f,g,l,m) onto (d,c,b,a; l,m,f,g).
    n = k + 1
    worst = 0.0
    mid = np.zeros((n, n, n))  # [g, m, h] -> F^{ahd}_e[g, m]
    for a in range(n):
        for d in range(n):
            if half and d < a:
                continue
            for e in range(n):
                mid[:, :, :] = 0.0
                any_block = False
                for h in range(n):
                    off = offsets[a, h, d, e]
                    if off < 0:
                        continue
                    any_block = True
                    nm = _n_channels(k, h, d)
                    for ig in range(_n_channels(k, a, h)):
                        g = abs(a - h) + 2 * ig
                        for im in range(nm):
                            mid[g, abs(h - d) + 2 * im, h] = values[off + ig * nm + im]
                if not any_block:
                    continue
                for b in range(n):
                    for c in range(n):
                        if half and a == d and c < b:
                            continue
                        hlo0 = abs(b - c)
                        hhi0 = min(b + c, 2 * k - b - c)
                        if hhi0 < hlo0:
                            continue
                        nh = (hhi0 - hlo0) // 2 + 1
                        nl = _n_channels(k, c, d)
                        for f in range(abs(a - b), min(a + b, 2 * k - a - b) + 1, 2):
                            if (f + c + d + e) % 2:
                                continue
                            glo = max(abs(f - c), abs(d - e))
                            ghi = min(min(f + c, 2 * k - f - c), min(d + e, 2 * k - d - e))
                            llo = max(abs(c - d), abs(f - e))
                            lhi = min(min(c + d, 2 * k - c - d), min(f + e, 2 * k - f - e))
                            for g in range(glo, ghi + 1, 2):
                                rowa = offsets[a, b, c, g] + ((f - abs(a - b)) // 2) * nh
                                offl = offsets[f, c, d, e] + ((g - abs(f - c)) // 2) * nl
                                for l in range(llo, lhi + 1, 2):
                                    lidx = (l - abs(c - d)) // 2
                                    lhs0 = values[offl + lidx]
                                    nbl = _n_channels(k, b, l)
                                    rowm = offsets[a, b, l, e] + ((f - abs(a - b)) // 2) * nbl
                                    mlo = max(abs(b - l), abs(a - e))
                                    mhi = min(min(b + l, 2 * k - b - l), min(a + e, 2 * k - a - e))
                                    for m in range(mlo, mhi + 1, 2):
                                        lhs = lhs0 * values[rowm + (m - abs(b - l)) // 2]
                                        offc = offsets[b, c, d, m]
                                        rhs = 0.0
                                        if offc >= 0:
                                            hlo = max(hlo0, max(abs(a - g), abs(d - m)))
                                            hhi = min(hhi0, min(min(a + g, 2 * k - a - g),
                                                                min(d + m, 2 * k - d - m)))
                                            colc = offc + lidx * nh
                                            for h in range(hlo, hhi + 1, 2):
                                                ih = (h - hlo0) // 2
                                                rhs += values[rowa + ih] * mid[g, m, h] * values_t[colc + ih]
                                        err = abs(lhs - rhs)
                                        if err > worst:
                                            worst = err
    return worst


def pentagon_residual(cat: "FusionCategoryData", exhaustive: bool = False) -> float:
    """Max pentagon defect over all admissible labels.

    By default half the equations are evaluated and the mirror images are
    bounded by ``res + (2 + 3 * (k + 1)) * mirror_defect`` (entries of F are
    bounded by 1 and at most ``k + 1`` terms enter a sum).
    """
    k = cat.level
    vt = _transpose_blocks(k, cat.f_offsets, cat.f_values)
    if exhaustive:
        return float(_pentagon_residual(k, cat.f_offsets, cat.f_values, vt, False))
    res = _pentagon_residual(k, cat.f_offsets, cat.f_values, vt, True)
    eps = _mirror_defect(k, cat.f_offsets, cat.f_values)
    return float(res + (2 + 3 * (k + 1)) * eps)


@numba.njit(cache=True)
def _hexagon_residual(k, offsets, values, r):
    # R^{ca}_e F^{acb}_d[e,g] R^{cb}_g = sum_f F^{cab}_d[e,f] R^{cf}_d F^{abc}_d[f,g]
    n = k + 1
    worst = 0.0
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    for e in range(abs(a - c), min(a + c, 2 * k - a - c) + 1, 2):
                        if not _admissible(k, e, b, d):
                            continue
                        for g in range(abs(c - b), min(c + b, 2 * k - c - b) + 1, 2):
                            if not _admissible(k, a, g, d):
                                continue
                            lhs = r[c, a, e] * _fget(k, offsets, values, a, c, b, d, e, g) * r[c, b, g]
                            rhs = 0.0 + 0.0j
                            for f in range(abs(a - b), min(a + b, 2 * k - a - b) + 1, 2):
                                if not _admissible(k, c, f, d):
                                    continue
                                rhs += (_fget(k, offsets, values, c, a, b, d, e, f) * r[c, f, d]
                                        * _fget(k, offsets, values, a, b, c, d, f, g))
                            worst = max(worst, abs(lhs - rhs))
    return worst


@numba.njit(cache=True)
def _f_unitarity_residual(k, offsets, values):
    n = k + 1
    worst = 0.0
    for a in range(n):
        for b in range(n):
            ne = _n_channels(k, a, b)
            for c in range(n):
                nf = _n_channels(k, b, c)
                for d in range(n):
                    off = offsets[a, b, c, d]
                    if off < 0:
                        continue
                    for i in range(ne):
                        ei = abs(a - b) + 2 * i
                        for j in range(ne):
                            ej = abs(a - b) + 2 * j
                            s = 0.0
                            for x in range(nf):
                                s += values[off + i * nf + x] * values[off + j * nf + x]
                            want = 0.0
                            if i == j and _admissible(k, ei, c, d):
                                want = 1.0
                            worst = max(worst, abs(s - want))
                    # columns too: the block is square on admissible channels
                    for i in range(nf):
                        fi = abs(b - c) + 2 * i
                        for j in range(nf):
                            s = 0.0
                            for x in range(ne):
                                s += values[off + x * nf + i] * values[off + x * nf + j]
                            want = 0.0
                            if i == j and _admissible(k, a, fi, d):
                                want = 1.0
                            worst = max(worst, abs(s - want))
    return worst


@dataclass(frozen=True, eq=False)
class FusionCategoryData:
    """SU(2)_k fusion, braiding and modular data (immutable)."""

    level: int
    qdim: np.ndarray
    N: np.ndarray
    R_plus: np.ndarray
    S: np.ndarray
    T: np.ndarray
    f_offsets: np.ndarray
    f_values: np.ndarray

    @property
    def labels(self) -> range:
        return range(self.level + 1)

    @property
    def q(self) -> complex:
        return complex(np.exp(2j * np.pi / (self.level + 2)))

    def validate(self, *labels: int) -> None:
        for a in labels:
            if not (isinstance(a, (int, np.integer)) and 0 <= a <= self.level):
                raise RangeError(f"label {a!r} outside 0..{self.level}")

    def fusion_matrix(self, a: int) -> np.ndarray:
        """``N_a[b, c] = N(a, b, c)``."""
        return self.N[a]

    def twist(self, a: int) -> complex:
        h = a * (a + 2) / (4 * (self.level + 2))
        return complex(np.exp(2j * np.pi * h))

    def f_block(self, a: int, b: int, c: int, d: int):
        """Return ``(e_labels, f_labels, matrix)`` of admissible channels only."""
        self.validate(a, b, c, d)
        k = self.level
        es = [e for e in channels(k, a, b) if self.N[e, c, d]]
        fs = [f for f in channels(k, b, c) if self.N[a, f, d]]
        mat = np.array([[f_symbol(self, a, b, c, d, e, f) for f in fs] for e in es]).reshape(len(es), len(fs))
        return es, fs, mat


def _quantum_tables(k):
    x = np.pi / (k + 2)
    qn = np.array([np.sin(n * x) / np.sin(x) for n in range(k + 3)])
    qf = np.ones(k + 3)
    for n in range(1, k + 3):
        qf[n] = qf[n - 1] * qn[n]
    return qn, qf


def _r_table(k):
    q = np.exp(2j * np.pi / (k + 2))
    n = k + 1
    r = np.zeros((n, n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            for c in channels(k, a, b):
                sign = -1.0 if ((c - a - b) // 2) % 2 else 1.0
                r[a, b, c] = sign * q ** ((c * (c + 2) - a * (a + 2) - b * (b + 2)) / 8)
    return r


@functools.lru_cache(maxsize=None)
def build_su2_level(k: int) -> FusionCategoryData:
    """Construct the SU(2)_k data in the fixed positive-root gauge."""
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_LEVEL:
        raise RangeError(f"level must be an integer in 1..{MAX_LEVEL}, got {k!r}")
    k = int(k)
    n = k + 1
    qn, qf = _quantum_tables(k)
    N = np.zeros((n, n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            for c in channels(k, a, b):
                N[a, b, c] = 1
    offsets, values = _build_f_table(k, qn, qf)
    idx = np.arange(n)
    S = np.sqrt(2 / (k + 2)) * np.sin(np.pi * np.outer(idx + 1, idx + 1) / (k + 2))
    central = 3 * k / (k + 2)
    h = idx * (idx + 2) / (4 * (k + 2))
    T = np.diag(np.exp(2j * np.pi * (h - central / 24)))
    for arr in (N, S, T, offsets, values):
        arr.setflags(write=False)
    r = _r_table(k)
    r.setflags(write=False)
    qdim = qn[1:n + 1].copy()
    qdim.setflags(write=False)
    return FusionCategoryData(k, qdim, N, r, S.astype(complex), T, offsets, values)


def fuse(cat: FusionCategoryData, a: int, b: int) -> list[int]:
    """Multiset ``a x b`` (SU(2)_k is multiplicity free)."""
    cat.validate(a, b)
    return [c for c in cat.labels for _ in range(int(cat.N[a, b, c]))]


def f_symbol(cat: FusionCategoryData, a, b, c, d, e, f) -> complex:
    cat.validate(a, b, c, d, e, f)
    N = cat.N
    if not (N[a, b, e] and N[e, c, d] and N[b, c, f] and N[a, f, d]):
        raise DomainError(f"F^{{{a}{b}{c}}}_{d}[{e},{f}] is not admissible")
    return complex(_fget(cat.level, cat.f_offsets, cat.f_values, a, b, c, d, e, f))


def r_symbol(cat: FusionCategoryData, a, b, c, sign: int = +1) -> complex:
    cat.validate(a, b, c)
    if not cat.N[a, b, c]:
        raise DomainError(f"R^{{{a}{b}}}_{c} is not admissible")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    v = complex(cat.R_plus[a, b, c])
    return v if sign > 0 else v.conjugate()


@dataclass(frozen=True)
class AxiomReport:
    pentagon: float
    hexagon: float
    f_unitarity: float
    verlinde: float

    def max(self) -> float:
        return max(self.pentagon, self.hexagon, self.f_unitarity, self.verlinde)

    def as_dict(self) -> dict:
        return {"pentagon": self.pentagon, "hexagon": self.hexagon,
                "f_unitarity": self.f_unitarity, "verlinde": self.verlinde}


def verlinde_residual(cat: FusionCategoryData) -> float:
    S = cat.S
    s0 = S[0]
    worst = 0.0
    for a in cat.labels:
        pred = np.einsum("bx,x,cx->bc", S, S[a] / s0, S.conj())
        worst = max(worst, float(np.abs(pred - cat.N[a]).max()))
    return worst


def verify_axioms(cat: FusionCategoryData) -> AxiomReport:
    """Maximum residuals of the pentagon, both hexagons, F-unitarity and Verlinde."""
    k = cat.level
    pent = pentagon_residual(cat)
    r = np.ascontiguousarray(cat.R_plus)
    hexa = max(_hexagon_residual(k, cat.f_offsets, cat.f_values, r),
               _hexagon_residual(k, cat.f_offsets, cat.f_values, np.ascontiguousarray(r.conj())))
    unit = _f_unitarity_residual(k, cat.f_offsets, cat.f_values)
    return AxiomReport(float(pent), float(hexa), float(unit), verlinde_residual(cat))


def modular_residuals(cat: FusionCategoryData) -> dict:
    """``S S^dag = 1``, ``(ST)^3 ~ S^2`` up to a phase, and pairwise commuting fusion matrices."""
    S, T = cat.S, cat.T
    n = len(S)
    unit = float(np.abs(S @ S.conj().T - np.eye(n)).max())
    lhs = np.linalg.matrix_power(S @ T, 3)
    rhs = S @ S
    i = np.unravel_index(np.argmax(np.abs(rhs)), rhs.shape)
    phase = lhs[i] / rhs[i]
    st = float(np.abs(lhs - phase * rhs).max())
    comm = 0.0
    for a in cat.labels:
        for b in cat.labels:
            Na, Nb = cat.N[a], cat.N[b]
            comm = max(comm, float(np.abs(Na @ Nb - Nb @ Na).max()))
    return {"s_unitarity": unit, "st_cubed": st, "fusion_commute": comm}


def brute_force_fusion(k: int, a: int, b: int) -> list[int]:
    """Tensor-product oracle: Clebsch-Gordan series then level truncation.

    Spins ``j1 x j2`` give ``|j1-j2| .. j1+j2``; at level ``k`` a channel
    ``c`` survives iff ``a + b + c <= 2k``.
    """
    out = []
    c = abs(a - b)
    while c <= a + b:
        if a + b + c <= 2 * k:
            out.append(c)
        c += 2
    return out


def to_json(cat: FusionCategoryData) -> dict:
    k = cat.level
    n_triples = [[int(a), int(b), int(c), int(cat.N[a, b, c])]
                 for a, b, c in zip(*np.nonzero(cat.N))]
    f_records = []
    for a in cat.labels:
        for b in cat.labels:
            for c in cat.labels:
                for d in cat.labels:
                    if cat.f_offsets[a, b, c, d] < 0:
                        continue
                    for e in channels(k, a, b):
                        for f in channels(k, b, c):
                            if cat.N[e, c, d] and cat.N[a, f, d]:
                                v = f_symbol(cat, a, b, c, d, e, f)
                                f_records.append([a, b, c, d, e, f, v.real, v.imag])
    r_records = [[int(a), int(b), int(c), cat.R_plus[a, b, c].real, cat.R_plus[a, b, c].imag]
                 for a, b, c in zip(*np.nonzero(cat.N))]
    return {
        "schema": SCHEMA_FUSION,
        "level": k,
        "objects": list(cat.labels),
        "qdim": cat.qdim.tolist(),
        "N": n_triples,
        "F": f_records,
        "R": r_records,
    }


def from_json(doc: dict) -> FusionCategoryData:
    """Rebuild from a document; values are re-derived and checked against the stored records."""
    if doc.get("schema") != SCHEMA_FUSION:
        raise ValueError(f"unsupported schema {doc.get('schema')!r}")
    cat = build_su2_level(int(doc["level"]))
    for a, b, c, d, e, f, re, im in doc["F"]:
        if abs(f_symbol(cat, a, b, c, d, e, f) - complex(re, im)) > TOL_CONSTRUCT:
            raise ValueError(f"F record {a,b,c,d,e,f} disagrees with the gauge-fixed table")
    for a, b, c, re, im in doc["R"]:
        if abs(r_symbol(cat, a, b, c) - complex(re, im)) > TOL_CONSTRUCT:
            raise ValueError(f"R record {a,b,c} disagrees with the gauge-fixed table")
    return cat

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biunitary.errors import DomainError, RangeError
from biunitary.fusion import (
    brute_force_fusion, build_su2_level, f_symbol, from_json, fuse, modular_residuals,
    pentagon_residual, r_symbol, to_json, verify_axioms,
)
from biunitary.graphs import ade_graph


def test_level_one_objects():
    cat = build_su2_level(1)
    assert list(cat.labels) == [0, 1]
    assert fuse(cat, 1, 1) == [0]


def test_qdim_level_two_matches_a3_perron_frobenius():
    cat = build_su2_level(2)
    beta = ade_graph("A", 3).beta
    assert abs(cat.qdim[1] - math.sqrt(2)) < 1e-12
    assert abs(cat.qdim[1] - beta) < 1e-12


@pytest.mark.parametrize("k", [0, 65, -3])
def test_level_out_of_range(k):
    with pytest.raises(RangeError):
        build_su2_level(k)


def test_fuse_examples():
    for k in range(2, 8):
        assert fuse(build_su2_level(k), 1, 1) == [0, 2]
    assert fuse(build_su2_level(16), 2, 16) == [14]


@given(st.integers(1, 28).flatmap(lambda k: st.tuples(st.just(k), st.integers(0, k), st.integers(0, k))))
def test_fuse_matches_brute_force(args):
    k, a, b = args
    cat = build_su2_level(k)
    assert fuse(cat, a, b) == brute_force_fusion(k, a, b)
    assert fuse(cat, a, 0) == [a]
    assert fuse(cat, 0, b) == [b]


def test_inadmissible_symbols_raise():
    cat = build_su2_level(2)
    with pytest.raises(DomainError):
        f_symbol(cat, 1, 1, 1, 1, 1, 0)
    with pytest.raises(DomainError):
        r_symbol(cat, 1, 1, 1)
    with pytest.raises(RangeError):
        fuse(cat, 3, 0)


def test_level_two_f_block():
    cat = build_su2_level(2)
    es, fs, M = cat.f_block(1, 1, 1, 1)
    assert es == [0, 2] and fs == [0, 2]
    assert np.allclose(np.abs(M), 1 / math.sqrt(2), atol=1e-14)
    assert np.allclose(M @ M.conj().T, np.eye(2), atol=1e-14)


@given(st.integers(1, 12).flatmap(lambda k: st.tuples(st.just(k), st.integers(0, k))))
def test_unit_braiding_trivial(args):
    k, lam = args
    cat = build_su2_level(k)
    assert abs(r_symbol(cat, 0, lam, lam) - 1) < 1e-14
    assert abs(r_symbol(cat, lam, 0, lam, -1) - 1) < 1e-14


def test_simple_current_self_braiding():
    # R^{kk}_0 = theta_k^{-1} up to the Frobenius-Schur sign (-1)^k
    for k in range(1, 15):
        cat = build_su2_level(k)
        twist = cat.twist(k)
        assert abs(r_symbol(cat, k, k, 0) - (-1) ** k / twist) < 1e-12
    assert abs(r_symbol(build_su2_level(4), 4, 4, 0) - 1) < 1e-12
    assert abs(r_symbol(build_su2_level(6), 6, 6, 0) - 1) > 0.5


def test_negative_braiding_is_conjugate():
    cat = build_su2_level(5)
    for a in cat.labels:
        for b in cat.labels:
            for c in fuse(cat, a, b):
                assert r_symbol(cat, a, b, c, -1) == np.conj(r_symbol(cat, a, b, c, +1))


@pytest.mark.parametrize("k", [1, 2, 3, 10])
def test_axiom_report(k):
    rep = verify_axioms(build_su2_level(k))
    assert set(rep.as_dict()) == {"pentagon", "hexagon", "f_unitarity", "verlinde"}
    assert rep.max() < (1e-12 if k == 1 else 1e-9)


@pytest.mark.parametrize("k", [3, 7, 12])
def test_half_pentagon_bound_dominates_exhaustive(k):
    cat = build_su2_level(k)
    assert pentagon_residual(cat, exhaustive=True) <= pentagon_residual(cat) + 1e-15


@pytest.mark.parametrize("k", [1, 4, 9, 16])
def test_modular_data(k):
    res = modular_residuals(build_su2_level(k))
    assert max(res.values()) < 1e-9


def test_corrupted_table_is_detected():
    cat = build_su2_level(4)
    bad = cat.f_values.copy()
    bad[np.flatnonzero(np.abs(bad) > 0.3)[5]] *= -1
    from biunitary import fusion
    vt = fusion._transpose_blocks(4, cat.f_offsets, bad)
    assert fusion._pentagon_residual(4, cat.f_offsets, bad, vt, False) > 1e-3


def test_json_round_trip():
    cat = build_su2_level(3)
    doc = json.loads(json.dumps(to_json(cat)))
    assert doc["schema"] == "biunitary.fusion/1"
    back = from_json(doc)
    assert np.array_equal(back.f_values, cat.f_values)
    doc["F"][0][6] += 0.5
    with pytest.raises(ValueError):
        from_json(doc)


@settings(max_examples=30)
@given(st.integers(2, 10).flatmap(lambda k: st.tuples(st.just(k), st.integers(0, k), st.integers(0, k))))
def test_qdim_is_multiplicative(args):
    k, a, b = args
    cat = build_su2_level(k)
    assert abs(cat.qdim[a] * cat.qdim[b] - sum(cat.qdim[c] for c in fuse(cat, a, b))) < 1e-10

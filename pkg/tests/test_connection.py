import json

import numpy as np
import pytest

from biunitary import connection as cx
from biunitary.cells import a_series_cells, get_spec, ghj_cells, sector_edges
from biunitary.connection import (Connection, check_biunitarity, compose_horizontal, compose_vertical,
                                  trace_formula_count)
from biunitary.errors import CompositionError
from biunitary.graphs import ade_graph
from biunitary.homs import decompose, gauge_equivalent, hom_dim
from biunitary.induction import tower


def perturbed(W, corner, row=0, col=0):
    blocks = {k: B.copy() for k, B in W.blocks.items()}
    blocks[corner][row, col] *= -1
    return Connection(W.top, W.left, W.right, W.bottom, blocks)


def test_identity_connection_is_biunitary():
    W = cx.vertical_identity(sector_edges(ade_graph("E", 6)))
    assert check_biunitarity(W).max() == 0.0


def test_a3_cells_biunitary():
    assert check_biunitarity(a_series_cells(2)).max() < 1e-10


def test_negated_entry_breaks_unitarity():
    W = a_series_cells(2)
    corner = next(k for k, B in W.blocks.items() if B.shape == (2, 2))
    assert check_biunitarity(perturbed(W, corner)).unitarity > 0.1


@pytest.mark.parametrize("name", ["A4", "D5", "E6", "E7"])
def test_trace_formula_counts_admissible_quadruples(name):
    W = ghj_cells(get_spec(name)) if name[0] != "A" else a_series_cells(3)
    assert W.n_admissible() == trace_formula_count(W)
    assert sum(1 for _ in W.cells()) <= W.n_admissible()


def test_vertical_mismatch_raises():
    W = a_series_cells(3)
    other = a_series_cells(4)
    with pytest.raises(CompositionError):
        compose_vertical(W, other)


def test_horizontal_mismatch_raises():
    T = tower("A5", 4, 1)
    with pytest.raises(CompositionError):
        compose_horizontal(T[1], tower("A6", 5, 1)[1])


def test_compose_with_identity_is_gauge_equivalent():
    W = tower("A5", 4, 1)[2]
    I = cx.vertical_identity(W.bottom)
    assert gauge_equivalent(W, compose_vertical(W, I))
    assert gauge_equivalent(compose_vertical(cx.vertical_identity(W.top), W), W)


def test_horizontal_composite_stays_biunitary():
    T = tower("A5", 4, 1)
    W = compose_horizontal(T[1], cx.horizontal_identity(T[1].right))
    assert check_biunitarity(W).max() < 1e-12
    assert check_biunitarity(compose_horizontal(T[1], T[1])).max() < 1e-10


@pytest.mark.parametrize("k", [2, 3, 5])
def test_lambda_one_squared_splits_in_two(k):
    T = tower(f"A{k + 1}", k, 1)
    parts = decompose(compose_vertical(T[1], T[1]))
    assert sorted(m for _, m in parts) == [1, 1]
    dims = sorted(int(P.left.mult.sum()) for P, _ in parts)
    # the pieces carry the lambda = 0 and lambda = 2 vertical graphs
    assert dims == sorted([int(T[0].left.mult.sum()), int(T[2].left.mult.sum())])


def test_e6_square_matches_adjacency_square():
    T = tower("E6", 10, 1)
    A = T[1].left.mult
    parts = decompose(compose_vertical(T[1], T[1]))
    total = sum(m * P.left.mult for P, m in parts)
    assert np.array_equal(total, A @ A)


def test_irreducible_decomposes_to_itself():
    W = tower("A6", 5, 1)[2]
    (P, m), = decompose(W)
    assert m == 1 and gauge_equivalent(P, W)


def test_conjugate_decision_is_stable():
    W = a_series_cells(2)
    runs = {gauge_equivalent(W, W.conj()) for _ in range(3)}
    assert len(runs) == 1


def test_different_vertical_graphs_not_equivalent():
    T = tower("A6", 5, 1)
    assert not gauge_equivalent(T[1], T[3])


def test_hom_dim_symmetric():
    T = tower("D6", 8, 1)
    S = compose_vertical(T[1], T[1])
    assert hom_dim(S, T[2]) == hom_dim(T[2], S)


def test_json_round_trip():
    W = tower("E6", 10, -1)[2]
    doc = json.loads(json.dumps(cx.to_json(W)))
    V = cx.from_json(doc)
    assert V.left == W.left and V.top == W.top
    for k, B in W.blocks.items():
        assert np.allclose(V.blocks[k], B, atol=1e-15)


def test_from_json_rejects_unknown_schema():
    with pytest.raises(ValueError):
        cx.from_json({"schema": "nope"})

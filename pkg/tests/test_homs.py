import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biunitary.cells import a_spec, catalog, get_spec
from biunitary.fusion import build_su2_level, fuse
from biunitary.graphs import path_algebra_dims
from biunitary.homs import (flat_part_dim_direct, flat_part_dims, hom_diagnostics, hom_dim, hom_table,
                            intertwiner_space, ring_dims, theta_plus, z_matrix)
from biunitary.induction import tower

CATALOG = catalog()


def cg_multiplicity(k, a, b, c):
    """Truncated Clebsch-Gordan rule, written out independently."""
    return int(abs(a - b) <= c <= min(a + b, 2 * k - a - b) and (a + b + c) % 2 == 0)


@pytest.mark.parametrize("k", range(1, 7))
def test_a_catalog_homs_are_kronecker(k):
    H = hom_table(a_spec(k))[0]
    assert np.array_equal(H, np.eye(k + 1, dtype=int))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_a_catalog_product_homs_are_fusion_multiplicities(k):
    from biunitary.connection import compose_vertical

    T = tower(f"A{k + 1}", k, 1)
    for a in range(1, k + 1):
        for b in range(1, k + 1 - a + 1):
            S = compose_vertical(T[a], T[b])
            for c in range(k + 1):
                assert hom_dim(S, T[c]) == cg_multiplicity(k, a, b, c)


def test_hom_dim_of_irreducible_is_one():
    T = tower("E7", 16, 1)
    assert all(hom_dim(T[nu], T[nu]) == 1 for nu in (1, 2, 5))


def test_hom_symmetry_and_basis_residual():
    from biunitary.connection import compose_vertical

    T = tower("D6", 8, 1)
    S = compose_vertical(T[1], T[3])
    space = intertwiner_space(S, T[2])
    assert space.dim == hom_dim(T[2], S) == 1


@pytest.mark.parametrize("name", ["E6", "E7", "D7"])
def test_hom_table_gap(name):
    _, zero, gap = hom_table(get_spec(name))
    assert zero < 1e-7 and gap > 1e-3


@pytest.mark.parametrize("spec", CATALOG, ids=lambda s: s.name)
def test_z_matrix_properties(spec):
    Z = z_matrix(spec)
    assert Z.entries[0, 0] == 1
    assert Z.zero_residual < 1e-8
    assert Z.commute_S < 1e-8 and Z.commute_T < 1e-8
    assert (Z.entries >= 0).all()


@pytest.mark.parametrize("k", range(1, 9))
def test_a_catalog_z_is_identity(k):
    assert np.array_equal(z_matrix(a_spec(k)).entries, np.eye(k + 1, dtype=int))


def test_exceptional_rows():
    assert theta_plus(get_spec("E6")) == (0, 6)
    assert theta_plus(get_spec("E7")) == (0, 16)
    assert theta_plus(get_spec("E8")) == (0, 10, 18, 28)
    assert theta_plus(a_spec(5)) == (0,)


def test_e7_is_the_known_invariant():
    # diagonal D10 block plus the twisted 8 <-> 8 pieces
    Z = z_matrix(get_spec("E7")).entries
    chi = lambda *xs: sum(np.eye(17, dtype=int)[x] for x in xs)
    blocks = [chi(0, 16), chi(4, 12), chi(6, 10), chi(8)]
    expected = sum(np.outer(b, b) for b in blocks)
    expected += np.outer(chi(2, 14), chi(8)) + np.outer(chi(8), chi(2, 14))
    assert np.array_equal(Z, expected)


def test_d4_even_spin_structure():
    Z = z_matrix(get_spec("D4")).entries
    assert np.array_equal(Z[[1, 3]], np.zeros((2, 5), dtype=int))
    assert Z[0, 4] == Z[4, 0] == 1 and Z[2, 2] == 2


@pytest.mark.parametrize("k", range(1, 7))
def test_flat_part_equals_path_algebra_on_a(k):
    spec = a_spec(k)
    g = spec.graph
    n = 6
    dims = flat_part_dims(spec, 1, n // 2)
    odd = flat_part_dims(spec, 1, (n - 1) // 2, odd=True)
    paths = path_algebra_dims(g, n_max=n)
    assert dims == paths[0::2][: len(dims)]
    assert odd == paths[1::2][: len(odd)]


def test_flat_part_starts_at_one():
    for spec in CATALOG:
        assert flat_part_dims(spec, 1, 0) == [1]


def test_e7_first_flat_value():
    assert flat_part_dims(get_spec("E7"), 1, 1)[1] == 2
    # fusion-ring oracle with theta+ = 0 + 16
    assert ring_dims(get_spec("E7"), 1, 1, theta=(0, 16))[1] == 2


@pytest.mark.parametrize("name,lam", [("E6", 1), ("D5", 1), ("A4", 2)])
def test_hom_table_route_matches_stacking(name, lam):
    spec = get_spec(name)
    dims = flat_part_dims(spec, lam, 2)
    odd = flat_part_dims(spec, lam, 1, odd=True)
    assert [flat_part_dim_direct(spec, lam, 2 * j) for j in range(3)] == dims
    assert [flat_part_dim_direct(spec, lam, 2 * j + 1) for j in range(2)] == odd


@settings(max_examples=25)
@given(st.integers(1, 8), st.data())
def test_ring_dims_match_fusion_counts(k, data):
    lam = data.draw(st.integers(0, k))
    cat = build_su2_level(k)
    # brute force: expand lam^(2) by repeated fusion
    m = {0: 1}
    for _ in range(2):
        nxt = {}
        for x, c in m.items():
            for y in fuse(cat, x, lam):
                nxt[y] = nxt.get(y, 0) + c
        m = nxt
    assert ring_dims(a_spec(k), lam, 1)[1] == sum(c * c for c in m.values())


def test_diagnostics_report_gap():
    T = tower("E6", 10, 1)
    dim, zero, gap = hom_diagnostics(T[2], T[2])
    assert dim == 1 and zero < 1e-10 and gap > 1e-3

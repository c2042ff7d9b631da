import json

import numpy as np
import pytest

from biunitary.cells import (QSystemSpec, a_series_cells, a_spec, cached_cells, catalog, get_spec, ghj_cells,
                             polish_cells)
from biunitary.connection import check_biunitarity
from biunitary.errors import SpecError
from biunitary.fusion import build_su2_level


def test_catalog_entries():
    names = {s.name: s for s in catalog()}
    assert {f"A{k + 1}" for k in range(1, 9)} <= set(names)
    assert {f"D{n}" for n in range(4, 11)} <= set(names)
    e7, e8 = names["E7"], names["E8"]
    assert (e7.level, tuple(e7.theta), e7.locality) == (16, (0, 8, 16), "nonlocal")
    assert (e8.level, tuple(e8.theta), e8.locality) == (28, (0, 10, 18, 28), "local")
    assert (names["D5"].level, tuple(names["D5"].theta), names["D5"].locality) == (6, (0, 6), "nonlocal")


@pytest.mark.parametrize("spec", catalog(), ids=lambda s: s.name)
def test_theta_qdim_matches_graph_index(spec):
    # independent oracle: quantum dimensions from the sine formula
    k = spec.level
    qd = sum(np.sin((t + 1) * np.pi / (k + 2)) / np.sin(np.pi / (k + 2)) for t in spec.theta)
    mu = spec.graph.pf_weight
    mu = mu / mu[spec.graph.star]
    cat = build_su2_level(k)
    assert qd == pytest.approx(float((cat.qdim ** 2).sum() / (mu ** 2).sum()), rel=1e-10)


def test_spec_validation():
    with pytest.raises(SpecError):
        QSystemSpec("E", 6, 10, (0, 0, 6), "local", "catalog_metadata")
    with pytest.raises(SpecError):
        QSystemSpec("E", 6, 9, (0, 6), "local", "catalog_metadata")
    with pytest.raises(SpecError):
        get_spec("E9")


def test_a_series_k1_unimodular():
    W = a_series_cells(1)
    vals = [v for *_, v in W.cells()]
    assert vals and all(abs(abs(v) - 1) < 1e-12 for v in vals)


def test_a_series_k2_corner_block():
    W = a_series_cells(2)
    mu = W.top.src.weights
    big = [(k, B) for k, B in W.blocks.items() if B.shape == (2, 2)]
    assert big
    for (a, d), B in big:
        assert np.allclose(B @ B.conj().T, np.eye(2), atol=1e-12)
        # moduli of the entries are square roots of the weight ratios (or their complements)
        mods = np.abs(B) ** 2
        assert np.allclose(mods.sum(axis=0), 1)


@pytest.mark.parametrize("k", range(1, 9))
@pytest.mark.parametrize("sign", [1, -1])
def test_a_series_biunitary(k, sign):
    assert check_biunitarity(a_series_cells(k, sign)).max() < 1e-12


@pytest.mark.parametrize("spec", catalog(), ids=lambda s: s.name)
def test_ghj_cells_biunitary(spec):
    assert check_biunitarity(ghj_cells(spec)).max() < 1e-10


def test_ghj_on_a_catalog_equals_a_series():
    W, V = ghj_cells(a_spec(4)), a_series_cells(4)
    assert all(np.allclose(W.blocks[k], V.blocks[k]) for k in V.blocks)


def plaquettes(B):
    """Products over 2x2 minors; invariant under row and column phases."""
    return np.einsum("ij,kl,il,kj->ikjl", B, B, B.conj(), B.conj())


@pytest.mark.slow
@pytest.mark.parametrize("name", ["E6", "E7", "E8"])
def test_polish_converges_to_closed_form(name):
    # on simple graphs every gauge (vertical and horizontal) is a phase per edge,
    # so entry moduli and minor products are complete enough invariants to compare
    spec = get_spec(name)
    ref = ghj_cells(spec)
    for seed in range(5):
        W = polish_cells(spec, seed)
        assert check_biunitarity(W).max() < 1e-10
        for key, B in ref.blocks.items():
            assert np.allclose(np.abs(W.blocks[key]), np.abs(B), atol=1e-8)
            assert np.allclose(plaquettes(W.blocks[key]), plaquettes(B), atol=1e-8)


def test_cache_round_trip_and_corruption(tmp_path, monkeypatch):
    monkeypatch.setenv("BIUNITARY_CACHE_DIR", str(tmp_path))
    spec = get_spec("E6")
    W = cached_cells(spec)
    (path,) = tmp_path.glob("cells-*.json")
    again = cached_cells(spec)
    assert all(np.allclose(again.blocks[k], W.blocks[k]) for k in W.blocks)
    doc = json.loads(path.read_text())
    doc["sha256"] = "0" * 64
    path.write_text(json.dumps(doc))
    fixed = cached_cells(spec)
    assert check_biunitarity(fixed).max() < 1e-10
    assert json.loads(path.read_text())["sha256"] != "0" * 64

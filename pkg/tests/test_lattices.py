import numpy as np
import pytest

from ionforge.forward import upper_pairs
from ionforge.lattices import (LatticeSpec, build_target, lattice_edges,
                               list_supported, parse_spec)


def edge_set(spec):
    return {(i, j) for i, j, _ in lattice_edges(spec)}


def test_linear_four_is_path():
    spec = LatticeSpec("linear", (4,), 4)
    assert edge_set(spec) == {(0, 1), (1, 2), (2, 3)}
    target = build_target(spec)
    nonzero = target.couplings[target.couplings > 0]
    np.testing.assert_allclose(nonzero, 1 / np.sqrt(3))


def test_square_2x2_is_cycle():
    spec = LatticeSpec("square", (2, 2), 4)
    assert edge_set(spec) == {(0, 1), (0, 2), (1, 3), (2, 3)}
    target = build_target(spec)
    nonzero = target.couplings[target.couplings > 0]
    np.testing.assert_allclose(nonzero, 0.5)


@pytest.mark.parametrize("rows,cols", [(2, 5), (3, 3), (4, 6)])
def test_square_grid_edge_count(rows, cols):
    spec = LatticeSpec("square", (rows, cols), rows * cols)
    expected = rows * (cols - 1) + cols * (rows - 1)
    assert len(edge_set(spec)) == expected


def test_two_chains_has_no_cross_couplings():
    spec = LatticeSpec("two_chains", (2, 5), 10)
    edges = edge_set(spec)
    assert len(edges) == 8
    first = {(i, i + 1) for i in range(4)}
    second = {(i, i + 1) for i in range(5, 9)}
    assert edges == first | second
    # no edge couples the two components
    assert not any(i < 5 <= j for i, j in edges)


def test_triangular_two_rows_of_five():
    spec = LatticeSpec("triangular", (2, 5), 10)
    edges = edge_set(spec)
    assert len(edges) == 17
    # staggered rows: site c in the top row touches c and c-1 below
    assert (0, 5) in edges and (1, 5) in edges and (1, 6) in edges
    # every inter-row pair forms a triangle with a same-row bond
    assert (0, 1) in edges and (5, 6) in edges


def test_kagome_corner_sharing_triangles():
    spec = LatticeSpec("kagome", (10,), 10)
    edges = edge_set(spec)
    assert len(edges) == 13
    for t in range(4):
        a, b, c = 2 * t, 2 * t + 1, 2 * t + 2
        assert {(a, b), (a, c), (b, c)} <= edges
    assert (8, 9) in edges


def test_cubic_fragment_at_ten_sites():
    spec = LatticeSpec("cubic", (3, 2, 2), 10)
    edges = edge_set(spec)
    # full 2x2x2 cube (12 edges) + rung (8,9) + two vertical extensions
    assert len(edges) == 15
    assert {(8, 9), (4, 8), (5, 9)} <= edges
    cube = {(0, 1), (0, 2), (1, 3), (2, 3), (4, 5), (4, 6), (5, 7), (6, 7),
            (0, 4), (1, 5), (2, 6), (3, 7)}
    assert cube <= edges


@pytest.mark.parametrize("kind,dims,n", [
    ("linear", (10,), 10), ("square", (2, 5), 10), ("triangular", (2, 5), 10),
    ("kagome", (10,), 10), ("cubic", (3, 2, 2), 10), ("two_chains", (2, 5), 10),
])
def test_targets_are_unit_norm_nonnegative(kind, dims, n):
    target = build_target(LatticeSpec(kind, dims, n))
    assert np.linalg.norm(target.couplings) == pytest.approx(1.0, abs=1e-12)
    assert np.all(target.couplings >= 0)
    assert target.normalized


def test_list_supported_at_ten():
    kinds = {s.kind: s for s in list_supported(10)}
    assert set(kinds) == {"linear", "square", "triangular", "kagome", "cubic",
                          "two_chains"}
    assert kinds["square"].dims == (2, 5)
    assert kinds["two_chains"].dims == (2, 5)
    assert kinds["cubic"].dims == (3, 2, 2)


def test_list_supported_small_counts():
    assert {s.kind for s in list_supported(2)} == {"linear"}
    nine = {s.kind: s for s in list_supported(9)}
    assert nine["square"].dims == (3, 3)


def test_custom_edges_roundtrip_and_weights():
    spec = LatticeSpec("custom_edges", (), 4,
                       edges=((0, 1), (1, 2, 2.0), (0, 3, 0.5)))
    target = build_target(spec)
    iu, ju = upper_pairs(4)
    full = {(i, j): v for i, j, v in zip(iu, ju, target.couplings)}
    norm = np.sqrt(1 + 4 + 0.25)
    assert full[(0, 1)] == pytest.approx(1 / norm)
    assert full[(1, 2)] == pytest.approx(2 / norm)
    assert full[(0, 3)] == pytest.approx(0.5 / norm)
    back = LatticeSpec.from_dict(spec.to_dict())
    assert back == spec


@pytest.mark.parametrize("edges", [
    ((0, 4),),           # out of range
    ((1, 0),),           # not i < j
    ((0, 1), (0, 1)),    # duplicate
    ((0, 1, -1.0),),     # non-positive weight
    ((0, 1, 2, 3),),     # wrong arity
])
def test_custom_edges_validation(edges):
    with pytest.raises(ValueError):
        LatticeSpec("custom_edges", (), 4, edges=edges)


def test_capacity_validation():
    with pytest.raises(ValueError):
        LatticeSpec("square", (2, 2), 5)
    with pytest.raises(ValueError):
        LatticeSpec("linear", (4,), 1)
    with pytest.raises(ValueError):
        LatticeSpec("nonsense", (2,), 2)


def test_parse_spec_shorthand():
    assert parse_spec("kagome:10") == LatticeSpec("kagome", (10,), 10)
    assert parse_spec("square:2x5") == LatticeSpec("square", (2, 5), 10)
    spec = parse_spec("cubic:3x2x2", n_ions=10)
    assert spec.n_ions == 10 and spec.dims == (3, 2, 2)
    bare = parse_spec("triangular", n_ions=10)
    assert bare.dims == (2, 5)


def test_parse_spec_errors():
    with pytest.raises(ValueError):
        parse_spec("hyperbolic:3")
    with pytest.raises(ValueError):
        parse_spec("linear")  # no extents and no ion count
    with pytest.raises(ValueError):
        parse_spec("custom_edges:4")

import json
from fractions import Fraction
from math import ceil, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lingraph import expanders as ex
from lingraph.derivation import derive_layers
from lingraph.model import classify_grammar, validate_grammar


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: arrays(np.float64, (n, n), elements=st.floats(-5, 5, width=32))))
def test_jacobi_matches_lapack(m):
    sym = (m + m.T) / 2
    got = ex.jacobi_eigenvalues(sym)
    want = np.sort(np.linalg.eigvalsh(sym))[::-1]
    assert np.allclose(got, want, atol=1e-8)


def test_jacobi_reports_nonconvergence():
    with pytest.raises(ex.NonConvergence):
        ex.jacobi_eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]]), max_sweeps=0)


@pytest.mark.parametrize("g, spectrum", [
    (ex.complete_graph(5), [4, -1, -1, -1, -1]),
    (ex.cycle_graph(4), [2, 0, 0, -2]),
])
def test_known_spectra(g, spectrum):
    assert np.allclose(ex.jacobi_eigenvalues(g.adjacency()), spectrum, atol=1e-9)


def test_complete_bipartite_spectrum_and_ramanujan():
    vs, m = ex.undirected_adjacency(ex.complete_bipartite(3, 3))
    assert np.allclose(ex.jacobi_eigenvalues(m), [3, 0, 0, 0, 0, -3], atol=1e-9)
    s = ex.spectrum_of(m)
    assert s.degree == 3 and abs(s.second) < 1e-9 and abs(s.normalized_abs - 1.0) < 1e-9
    assert ex.ramanujan_check(m)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7])
def test_cheeger_of_complete_graphs(n):
    assert ex.cheeger(ex.complete_graph(n)) == ceil(n / 2)


def test_cheeger_of_cycle_and_petersen():
    assert ex.cheeger(ex.cycle_graph(6)) == Fraction(2, 3)
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    petersen = ex.rotation_from_adjacency(range(10), outer + inner + spokes)
    assert ex.cheeger(petersen) == 1
    assert ex.isoperimetric_check(petersen).holds


@pytest.mark.parametrize("g", [ex.complete_graph(4), ex.complete_graph(5), ex.cycle_graph(6)])
def test_isoperimetric_inequalities(g):
    r = ex.isoperimetric_check(g)
    assert r.holds and r.to_json()["convention"] == "unnormalized"


def test_cheeger_refuses_large_graphs():
    with pytest.raises(ValueError):
        ex.cheeger(ex.cycle_graph(ex.MAX_CHEEGER_VERTICES + 1))


def test_rotation_maps_round_trip():
    for g in (ex.complete_graph(4), ex.cycle_graph(5), ex.k5_pair_ported(), ex.looped_path_on_pairs()):
        assert ex.validate_rotation(g) == []
        h, names = ex.rotation_to_graph(g)
        back = ex.graph_to_rotation(h, g.ports)
        assert back.rot == {(names[u], i): (names[v], j) for (u, i), (v, j) in g.rot.items()}
        data = ex.rotation_to_json(g)
        assert ex.rotation_to_json(ex.rotation_from_json(json.loads(json.dumps(data)))) == data


def test_validation_catches_broken_rotation():
    g = ex.cycle_graph(3)
    rot = dict(g.rot)
    rot[(0, "1")] = (2, "2")
    assert any(d.code == "rotation-involution" for d in ex.validate_rotation(ex.RotationGraph(g.vertices, g.ports, rot)))


def test_port_labels():
    assert ex.parse_port_label(ex.port_label("12", "3")) == ("12", "3")
    with pytest.raises(ValueError):
        ex.parse_port_label("a")


def test_port_symmetric_numbering():
    triangle = [(0, 1), (1, 2), (0, 2)]
    k4 = [(a, b) for a in range(4) for b in range(a + 1, 4)]
    assert not ex.port_symmetric_numbering_exists(range(3), triangle, ("1", "2"))
    assert ex.port_symmetric_numbering_exists(range(4), k4, ("1", "2", "3"))


def test_lambda_bound_reference_values():
    assert ex.lambda_bound("zigzag", 0.5, 0.0, 2) == pytest.approx(0.5 ** (1 / 3))
    assert ex.lambda_bound("zigzag", 0.0, 0.5, 2) == pytest.approx(0.5 ** (1 / 3))
    assert ex.lambda_bound("balanced", 1.0, 1.0, 2) == pytest.approx(1.0)
    core = 0.5 * 0.75 * 0.5 + 0.5 * sqrt(0.75 * 0.25 + 1.0)
    p = 8 / 9
    assert ex.lambda_bound("replacement", 0.5, 0.5, 2) == pytest.approx((p + (1 - p) * core) ** (1 / 3))
    with pytest.raises(ValueError):
        ex.lambda_bound("zigzag", 1.5, 0.0, 2)
    with pytest.raises(ValueError):
        ex.lambda_bound("tensor", 0.5, 0.5, 2)


def standard_zigzag_core(l1, l2):
    return 0.5 * (1 - l2 ** 2) * l1 + 0.5 * sqrt((1 - l2 ** 2) ** 2 * l1 ** 2 + 4 * l2 ** 2)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_lambda_bound_monotone_and_no_sharper_than_standard(a, b, l2):
    lo, hi = sorted((a, b))
    for kind in ex.PRODUCT_KINDS:
        assert 0 <= ex.lambda_bound(kind, lo, l2, 3) <= ex.lambda_bound(kind, hi, l2, 3) + 1e-12
    assert ex.lambda_bound("zigzag", hi, l2, 3) >= standard_zigzag_core(hi, l2) ** (1 / 3) - 1e-12


PRODUCTS = {
    "replacement": (ex.complete_graph(4), ex.cycle_graph(3, ("1", "2", "3")), 12, 3),
    "balanced": (ex.complete_graph(5), ex.cycle_graph(4, ("1", "2", "3", "4")), 20, 4),
    "zigzag": (ex.k5_pair_ported(), ex.square_on_pairs(), 20, 4),
}


@pytest.mark.parametrize("kind", sorted(PRODUCTS))
def test_product_grammars_shape_and_bound(kind):
    g0, h, vertices, degree = PRODUCTS[kind]
    g = ex.product_grammar(kind, g0, h)
    assert validate_grammar(g) == []
    cls = classify_grammar(g)
    assert cls.complete and cls.deterministic
    parent, child = ex.product_layers(kind, g0, h, 1)
    assert ex.validate_rotation(child) == []
    assert len(child.vertices) == vertices and child.degree == degree
    assert set(child.adjacency().sum(axis=1)) == {float(degree)}
    hs = ex.lambda2(h)
    bound = ex.lambda_bound(kind, ex.lambda2(parent).normalized_abs, hs.normalized_abs, hs.degree)
    assert ex.lambda2(child).normalized_abs <= bound + 1e-6


def test_zigzag_iterates_under_its_bound():
    h = ex.looped_path_on_pairs()
    hs = ex.lambda2(h)
    layers = ex.product_layers("zigzag", ex.k5_pair_ported(), h, 2)
    assert [len(x.vertices) for x in layers] == [5, 20, 80]
    for parent, child in zip(layers, layers[1:]):
        bound = ex.lambda_bound("zigzag", ex.lambda2(parent).normalized_abs, hs.normalized_abs, hs.degree)
        assert ex.lambda2(child).normalized_abs <= bound + 1e-6 < 1


def test_k5_pair_labelling_has_four_edge_types():
    assert len(ex.edge_label_types(ex.k5_pair_ported())) == 4


def test_trimmed_zigzag_keeps_the_layers():
    g0, h = ex.k5_pair_ported(), ex.square_on_pairs()
    full, trimmed = ex.zigzag_grammar(g0, h), ex.zigzag_grammar(g0, h, trimmed=True)
    assert len(full.edge_productions) == 16 and len(trimmed.edge_productions) == 9
    for a, b in zip(derive_layers(full, 2), derive_layers(trimmed, 2)):
        assert [x.name_set for x in a.graphs] == [x.name_set for x in b.graphs]


def test_zigzag_needs_pair_ports():
    with pytest.raises(ValueError):
        ex.zigzag_grammar(ex.complete_graph(5), ex.square_on_pairs())


def test_two_lifts_of_k33():
    kids = ex.lift_children(ex.complete_bipartite(3, 3))
    assert len(kids) == 2 ** 9
    for kid in kids[:16]:
        vs, m = ex.undirected_adjacency(kid)
        assert len(vs) == 12 and set(m.sum(axis=1)) == {3.0}
    assert sum(ex.ramanujan_check(ex.undirected_adjacency(k)[1]) for k in kids) >= 1


def test_shift_four_lifts():
    b = ex.complete_bipartite(2, 2)
    kids = ex.lift_children(b, "4-lift")
    assert len(kids) == 4 ** 4
    for kid in kids[:8]:
        vs, m = ex.undirected_adjacency(kid)
        assert len(vs) == 16 and set(m.sum(axis=1)) == {2.0}
    assert classify_grammar(ex.shift4_lift_grammar(b)).complete

import numpy as np
import pytest

from weightepi.degree_dist import empirical, point_mass, poisson
from weightepi.errors import ParameterError
from weightepi.netgen import (
    edge_csv,
    empirical_degree_dist,
    from_bytes,
    from_edges,
    generate,
    load_binary,
    save_binary,
    to_bytes,
)
from weightepi.weights import Beta, DegreeDependent, TwoPoint, Uniform, WeightFunctionG


def _check_invariants(g):
    src = g.sources
    nbr = g.neighbors
    assert np.all(src != nbr), "self-loop"
    key = src * g.n + nbr
    assert np.all(np.diff(key) > 0), "adjacency not sorted or has parallel arcs"
    rev = g.reverse_arc()
    np.testing.assert_array_equal(src[rev], nbr)
    np.testing.assert_array_equal(nbr[rev], src)
    np.testing.assert_array_equal(g.out_weight[rev], g.in_weight)
    assert np.all((g.out_weight >= 0) & (g.out_weight <= 1))
    assert g.degree.sum() % 2 == 0


@pytest.mark.parametrize(
    "d,w",
    [
        (poisson(6), Uniform()),
        (poisson(3), TwoPoint(0.1, 1, 0.5)),
        (empirical([(1, 1), (5, 1), (30, 0.2)]), Beta(0.5, 2.5)),
        (poisson(4), DegreeDependent(WeightFunctionG("power", 0.7))),
    ],
    ids=["poisson-uniform", "twopoint", "heavy", "degree-dep"],
)
def test_structural_invariants(d, w):
    g = generate(10**4, d, w, seed=3)
    _check_invariants(g)


def test_single_edge_from_point_mass_one():
    g = generate(2, point_mass(1), Uniform(), seed=0)
    assert g.n_edges == 1
    np.testing.assert_array_equal(g.neighbors, [1, 0])


def test_odd_total_gets_fixed():
    g = generate(3, point_mass(1), Uniform(), seed=5)
    assert g.half_edges.sum() == 4
    _check_invariants(g)


def test_n_below_two_rejected():
    with pytest.raises(ParameterError):
        generate(1, poisson(2), Uniform(), seed=0)


def test_all_zero_degrees_give_empty_graph():
    g = generate(50, point_mass(0), Uniform(), seed=0)
    assert g.n_edges == 0
    np.testing.assert_array_equal(empirical_degree_dist(g).pmf, [1.0])


def test_two_vertex_graph_degree_dist():
    g = from_edges(2, [(0, 1)])
    np.testing.assert_array_equal(empirical_degree_dist(g).pmf, [0, 1.0])


def test_point_mass_three_rarely_erased():
    g = generate(10**5, point_mass(3), Uniform(), seed=9)
    assert empirical_degree_dist(g).pmf[3] > 0.98


def test_poisson_degree_histogram_close_in_total_variation():
    d = poisson(6)
    g = generate(200_000, d, Uniform(), seed=17)
    emp = empirical_degree_dist(g).pmf
    size = max(emp.size, d.pmf.size)
    a = np.pad(emp, (0, size - emp.size))
    b = np.pad(d.pmf, (0, size - d.pmf.size))
    assert 0.5 * np.abs(a - b).sum() < 0.01


def test_erasures_are_rare():
    n = 200_000
    counts = []
    for seed in range(3):
        g = generate(n, poisson(6), Uniform(), seed=seed)
        counts.append(g.erased_loops + g.merged_edges)
    assert np.mean(counts) < 0.005 * n


def test_degree_dependent_weights_use_half_edge_count():
    gfun = WeightFunctionG("power", 0.7)
    g = generate(5000, poisson(5), DegreeDependent(gfun), seed=2)
    expect = gfun(g.half_edges[g.sources])
    np.testing.assert_array_equal(g.out_weight, expect)


def test_weights_independent_between_directions():
    g = generate(50_000, poisson(6), Uniform(), seed=4)
    sel = g.sources < g.neighbors
    r = np.corrcoef(g.out_weight[sel], g.in_weight[sel])[0, 1]
    assert abs(r) < 4 / np.sqrt(sel.sum())


def test_replay_is_byte_identical(tmp_path):
    a = generate(3000, poisson(6), Beta(2, 3), seed=11)
    b = generate(3000, poisson(6), Beta(2, 3), seed=11)
    assert to_bytes(a) == to_bytes(b)
    c = generate(3000, poisson(6), Beta(2, 3), seed=12)
    assert to_bytes(a) != to_bytes(c)


def test_binary_roundtrip(tmp_path):
    g = generate(2000, poisson(4), TwoPoint(0.1, 1, 0.5), seed=8)
    path = tmp_path / "g.bin"
    save_binary(g, path)
    h = load_binary(path)
    assert h.n == g.n and h.seed == 8
    assert h.degree_spec == "poisson(4)" and h.weight_spec == str(g.weight_spec)
    np.testing.assert_array_equal(h.offsets, g.offsets)
    np.testing.assert_array_equal(h.neighbors, g.neighbors)
    np.testing.assert_array_equal(h.out_weight, g.out_weight)
    np.testing.assert_array_equal(h.in_weight, g.in_weight)
    with pytest.raises(ParameterError):
        from_bytes(b"garbage!" + bytes(40))


def test_edge_csv():
    g = from_edges(3, [(0, 1), (2, 1)], [(0.25, 0.5), (0.125, 1.0)])
    lines = edge_csv(g).splitlines()
    assert lines[0] == "u,v,w_uv,w_vu"
    assert lines[1:] == ["0,1,0.25,0.5", "1,2,1.0,0.125"]


def test_from_edges_rejects_loops_and_duplicates():
    with pytest.raises(ParameterError):
        from_edges(3, [(1, 1)])
    with pytest.raises(ParameterError):
        from_edges(3, [(0, 1), (1, 0)])

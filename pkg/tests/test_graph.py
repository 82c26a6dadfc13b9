import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gibbslab.graph import (Disconnected, DuplicateEdge, GraphError, NFoldCovering, SelfLoop,
                            build_graph, complete_graph, cover_ball_sizes, cycle_graph,
                            load_graph, niceness_audit, path_graph, petersen_graph,
                            random_covering, read_covering, read_edge_list,
                            universal_cover_ball, write_covering, write_edge_list)
from oracles import cycle_count_bfs, regular_tree_ball_size


def test_build_graph_validation():
    with pytest.raises(SelfLoop):
        build_graph([(0, 0), (0, 1)])
    with pytest.raises(DuplicateEdge):
        build_graph([(0, 1), (1, 0)])
    with pytest.raises(Disconnected):
        build_graph([(0, 1), (2, 3)])


def test_named_graphs():
    p = petersen_graph()
    assert (p.n, p.m) == (10, 15) and p.is_regular()
    assert np.all(p.degree() == 3)
    assert complete_graph(4).m == 6
    assert cycle_graph(4).is_regular()
    assert not path_graph(3).is_regular()
    assert load_graph("K4") == complete_graph(4)


def test_edge_list_roundtrip(tmp_path):
    g = petersen_graph()
    write_edge_list(g, tmp_path / "p.txt")
    assert read_edge_list(tmp_path / "p.txt") == g
    assert load_graph(str(tmp_path / "p.txt")) == g


def test_csr_arcs_consistent():
    g = petersen_graph()
    for v in range(g.n):
        for k in range(g.indptr[v], g.indptr[v + 1]):
            u, w = g.edges[g.arc_edge[k]]
            assert {int(u), int(w)} == {v, int(g.indices[k])}
            assert bool(g.arc_forward[k]) == (v == u)


@pytest.mark.parametrize("name,d", [("K4", 3), ("petersen", 3), ("C4", 2)])
@pytest.mark.parametrize("R", [0, 1, 2, 3])
def test_universal_cover_ball_sizes(name, d, R):
    g = load_graph(name)
    expected = regular_tree_ball_size(d, R)
    assert len(universal_cover_ball(g, 0, R)) == expected
    assert np.all(cover_ball_sizes(g, R) == expected)


def test_cover_ball_sizes_irregular():
    g = path_graph(3)
    # P3 is its own universal cover
    for R in range(4):
        sizes = cover_ball_sizes(g, R)
        for v in range(3):
            assert sizes[v] == len(universal_cover_ball(g, v, R))
            assert sizes[v] == cycle_count_bfs(3, g.edges.tolist(), v, R)


def test_universal_cover_ball_projection():
    g = complete_graph(4)
    ball = universal_cover_ball(g, 2, 2)
    for p, i in ball.tree_edges:
        assert g.edge_index(int(ball.projection[p]), int(ball.projection[i])) is not None


def test_covering_projection_is_local_isomorphism():
    g = petersen_graph()
    c = random_covering(g, 7, 3)
    G = c.graph
    assert G.n == 70 and G.m == 15 * 7
    for x in range(G.n):
        proj = sorted((G.neighbors(x) % g.n).tolist())
        assert proj == sorted(g.neighbors(x % g.n).tolist())


def test_covering_determinism_and_io(tmp_path):
    g = complete_graph(4)
    c1 = random_covering(g, 20, (5, 1))
    assert c1 == random_covering(g, 20, (5, 1))
    assert c1 != random_covering(g, 20, (5, 2))
    write_covering(c1, tmp_path / "c.txt")
    assert read_covering(tmp_path / "c.txt") == c1


def test_covering_rejects_non_permutations():
    with pytest.raises(GraphError):
        NFoldCovering(complete_graph(3), 2, [[0, 0], [0, 1], [1, 0]])


def test_single_fold_cover_is_base():
    g = petersen_graph()
    c = random_covering(g, 1, 0)
    assert c.graph == g
    audit = niceness_audit(c, 2)
    # girth 5: every radius-2 ball is a tree
    assert audit.min_fraction() == 1.0


def test_niceness_of_small_cycle_cover():
    # one-fold cover of C3 has a triangle: radius-2 balls are not tree-like
    audit = niceness_audit(random_covering(cycle_graph(3), 1, 0), 2)
    assert audit.min_fraction() == 0.0
    assert not audit.is_nice(0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(0, 10_000))
def test_relabel_preserves_structure(N, seed):
    g = complete_graph(4)
    c = random_covering(g, N, seed)
    rng = np.random.default_rng(seed)
    fp = np.stack([rng.permutation(N) for _ in range(g.n)])
    c2, vmap = c.relabel(fp)
    old = {frozenset((int(vmap[a]), int(vmap[b]))) for a, b in c.graph.edges}
    new = {frozenset(map(int, e)) for e in c2.graph.edges}
    assert old == new
    assert np.array_equal(vmap % g.n, np.arange(c.n_vertices) % g.n)
    a1 = niceness_audit(c, 1)
    a2 = niceness_audit(c2, 1)
    assert np.allclose(a1.vertex_fractions, a2.vertex_fractions)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2 ** 32 - 1))
def test_covering_degrees(N, seed):
    g = load_graph("K4")
    c = random_covering(g, N, seed)
    assert np.all(c.graph.degree() == 3)
    for e in range(g.m):
        le = c.lifted_edges(e)
        assert np.array_equal(np.sort(le[:, 0] // g.n), np.arange(N))
        assert np.array_equal(np.sort(le[:, 1] // g.n), np.arange(N))

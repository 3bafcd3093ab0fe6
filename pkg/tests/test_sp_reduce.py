"""Test the sp_reduce module."""

import itertools
import math

import numpy as np
import pytest
from annalist.annalist import Annalist

import negperc.bethe as bethe
import negperc.det_rules as det_rules
import negperc.sp_reduce as sp_reduce
from negperc.utils import DomainError, IrreducibleGraphError

ann = Annalist()
ann.configure()

mixed_links = [
    (0, 1, 0.9),
    (1, 2, 0.8),
    (0, 3, 0.6),
    (3, 2, 0.7),
    (0, 2, 0.3),
    (2, 4, 0.95),
    (2, 4, 0.5),
]


@pytest.fixture()
def mixed_graph():
    """Series-parallel network with parallel links and nested paths."""
    return sp_reduce.QNGraph(mixed_links, [0], [4], name="mixed")


def test_qngraph_init(mixed_graph):
    """Test QNGraph construction."""
    assert mixed_graph.number_of_links == 7
    assert sorted(mixed_graph.links) == sorted(mixed_links)
    assert repr(mixed_graph) == repr("QNGraph 'mixed'")
    with pytest.raises(DomainError, match="overlap"):
        sp_reduce.QNGraph([(0, 1, 0.5)], [0, 1], [1])
    with pytest.raises(DomainError, match="nonempty"):
        sp_reduce.QNGraph([(0, 1, 0.5)], [], [1])
    with pytest.raises(DomainError):
        sp_reduce.QNGraph([(0, 1, 1.5)], [0], [1])


def test_terminal_graph():
    """Nodes of S and T are merged and links inside them dropped."""
    graph = sp_reduce.QNGraph([(0, 1, 0.5), (1, 2, 0.6), (0, 3, 0.7)], [0, 3], [2])
    merged = graph.terminal_graph()
    assert set(merged.nodes) == {sp_reduce.SOURCE, sp_reduce.TARGET, 1}
    assert merged.number_of_edges() == 2


def test_chain_and_bundle():
    """Chains follow the series rule and bundles the parallel rule."""
    assert sp_reduce.chain_graph(3, 0.9).reduce() == pytest.approx(0.729)
    assert sp_reduce.bundle_graph(2, 0.5).reduce() == pytest.approx(
        det_rules.parallel_combine([0.5, 0.5])
    )
    assert sp_reduce.chain_graph(1, 0.4).reduce() == pytest.approx(0.4)


def test_reduce_mixed(mixed_graph):
    """Reduction by hand of the mixed network."""
    upper = det_rules.series_combine([0.9, 0.8])
    lower = det_rules.series_combine([0.6, 0.7])
    middle = det_rules.parallel_combine([upper, lower, 0.3])
    last = det_rules.parallel_combine([0.95, 0.5])
    expected = det_rules.series_combine([middle, last])
    assert mixed_graph.reduce() == pytest.approx(expected, rel=1e-12)


def test_reduce_random_order(mixed_graph):
    """The move order does not change the result."""
    expected = mixed_graph.reduce()
    for seed in range(5):
        value = mixed_graph.reduce(rng=np.random.default_rng(seed))
        assert value == pytest.approx(expected, rel=1e-12)


def random_series_parallel(rng, n_links):
    """
    Random two-terminal series-parallel links between nodes 0 and 1.

    Returns the links and the composition tree, with nested compositions of the
    same kind flattened into one node.
    """
    fresh = itertools.count(2)

    def build(u, v, n):
        if n == 1:
            chi = float(rng.uniform(0.3, 0.99))
            return [(u, v, chi)], ("link", chi)
        split = int(rng.integers(1, n))
        if rng.random() < 0.5:
            kind = "series"
            middle = next(fresh)
            left_links, left = build(u, middle, split)
            right_links, right = build(middle, v, n - split)
        else:
            kind = "parallel"
            left_links, left = build(u, v, split)
            right_links, right = build(u, v, n - split)
        children = []
        for child in (left, right):
            children.extend(child[1] if child[0] == kind else [child])
        return left_links + right_links, (kind, children)

    return build(0, 1, n_links)


def composition_value(tree):
    """Exact value of a composition tree, one rule per series or parallel node."""
    kind, payload = tree
    if kind == "link":
        return payload
    values = [composition_value(child) for child in payload]
    if kind == "series":
        return det_rules.series_combine(values)
    return det_rules.parallel_combine(values)


def test_reduce_random_graphs_any_order():
    """Random series-parallel networks reduce to their composition value in any move order."""
    rng = np.random.default_rng(8675309)
    for _ in range(30):
        links, tree = random_series_parallel(rng, int(rng.integers(1, 51)))
        graph = sp_reduce.QNGraph(links, [0], [1])
        expected = composition_value(tree)
        assert graph.reduce() == pytest.approx(expected, rel=1e-9)
        for seed in range(5):
            value = graph.reduce(rng=np.random.default_rng(seed))
            assert value == pytest.approx(expected, rel=1e-9)
        generalized = [
            graph.reduce(rng=np.random.default_rng(seed), eta_s=0.95, eta_p=1.1)
            for seed in range(4)
        ]
        assert generalized == pytest.approx([generalized[0]] * 4, rel=1e-9)


def test_parallel_waits_for_open_branches():
    """A bundle is not merged while another branch between its nodes is open."""
    # The strongest branch arrives through the interior node 2
    links = [(0, 1, 0.3), (0, 1, 0.4), (0, 2, 0.99), (2, 1, 0.99)]
    graph = sp_reduce.QNGraph(links, [0], [1])
    expected = det_rules.parallel_combine([0.3, 0.4, 0.99 * 0.99])
    for seed in range(10):
        assert graph.reduce(rng=np.random.default_rng(seed)) == pytest.approx(
            expected, rel=1e-12
        )


def test_reduce_generalized():
    """Prefactors enter every series and parallel move."""
    value = sp_reduce.chain_graph(2, 0.5).reduce(eta_s=1.5)
    assert value == pytest.approx(1.5 * 0.5 * 0.5)


def test_disconnected_and_dead_ends():
    """Disconnected terminals give zero and dead ends are pruned."""
    disconnected = sp_reduce.QNGraph([(0, 1, 0.5), (2, 3, 0.5)], [0], [3])
    assert disconnected.reduce() == 0.0
    dead_end = sp_reduce.QNGraph([(0, 1, 0.5), (1, 2, 0.9), (1, 5, 0.9)], [0], [2])
    assert dead_end.reduce() == pytest.approx(0.45)


def test_cayley_tree_matches_recursion():
    """A Cayley tree reduces to the finite-depth Bethe recursion."""
    for depth in [1, 2, 3]:
        tree = sp_reduce.cayley_tree_graph(3, depth, 0.9)
        assert tree.reduce() == pytest.approx(
            bethe.finite_depth_sponge(3, depth, 0.9), rel=1e-12
        )


def test_wheatstone_is_irreducible():
    """The bridge has no series or parallel move."""
    with pytest.raises(IrreducibleGraphError) as e:
        sp_reduce.wheatstone_graph(0.9).reduce()
    assert e.value.graph.number_of_edges() == 5


def test_star_mesh_reduces_wheatstone():
    """After a star-mesh move the bridge reduces to the closed form."""
    for chi in [0.3, 0.7, 0.9]:
        meshed = sp_reduce.star_mesh(sp_reduce.wheatstone_graph(chi), "R1")
        assert meshed.number_of_links == 5
        assert meshed.reduce() == pytest.approx(sp_reduce.wheatstone_sponge(chi), rel=1e-10)


def test_star_mesh_errors():
    """Test star_mesh preconditions."""
    bridge = sp_reduce.wheatstone_graph(0.9)
    with pytest.raises(DomainError, match="terminal"):
        sp_reduce.star_mesh(bridge, "S")
    uneven = sp_reduce.QNGraph(
        [("S", "C", 0.5), ("C", "A", 0.6), ("C", "T", 0.5), ("A", "T", 0.5)], ["S"], ["T"]
    )
    with pytest.raises(DomainError, match="identical"):
        sp_reduce.star_mesh(uneven, "C")
    with pytest.raises(DomainError, match="three-link star"):
        sp_reduce.star_mesh(sp_reduce.chain_graph(2, 0.5), 1)


def test_shengjin_roots():
    """All three roots solve the cubic and the selected root is the physical one."""
    chi = 0.8
    w = chi**4
    cubic = sp_reduce.shengjin_roots(chi)
    for y in cubic.roots:
        assert y**3 - y**2 - y / w + 1.0 == pytest.approx(0.0, abs=1e-9)
    assert cubic.selected == 2
    assert 0.0 <= cubic.physical <= w + 1e-12
    assert cubic.clamp == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(DomainError):
        sp_reduce.shengjin_roots(0.0)


def test_y_delta():
    """Test y_delta and its inverse."""
    assert sp_reduce.y_delta(0.0) == 0.0
    assert sp_reduce.y_delta(1.0) == 1.0
    for chi in [1e-3, 0.1, 0.5, 0.9, 0.999]:
        xi = sp_reduce.y_delta(chi)
        assert 0.0 < xi <= chi * chi
        assert sp_reduce.star_mesh_residual(chi, xi) < 1e-12
        assert xi == pytest.approx(sp_reduce.y_delta_bisect(chi), rel=1e-9)
    for chi in [0.2, 0.7]:
        assert sp_reduce.y_delta(sp_reduce.delta_y(chi)) == pytest.approx(chi, abs=1e-12)
    assert sp_reduce.delta_y(1.0) == 1.0


def test_bridge_value():
    """Test bridge_value."""
    assert sp_reduce.bridge_value(0.0, 0.5) == 0.0
    assert sp_reduce.bridge_value(1.0, 0.3) == pytest.approx(1.0)
    # Empty triangle links leave a single two-link chain
    assert sp_reduce.bridge_value(0.6, 0.0) == pytest.approx(0.36)


def test_bridge_sponges():
    """Wheatstone and Kelvin sponge crossings."""
    assert sp_reduce.wheatstone_sponge(0.9) == pytest.approx(0.9564, abs=5e-4)
    assert sp_reduce.wheatstone_sponge(0.0) == 0.0
    assert sp_reduce.kelvin_sponge(1.0) == pytest.approx(1.0)
    assert sp_reduce.kelvin_sponge(0.0) == 0.0
    values = [sp_reduce.kelvin_sponge(c) for c in [0.2, 0.5, 0.8]]
    assert all(0.0 < v < 1.0 for v in values)
    assert not any(math.isnan(v) for v in values)


def test_y_delta_grid():
    """The star-mesh value solves its defining relation across the whole range."""
    for chi in np.linspace(1e-3, 1.0, 1000):
        xi = sp_reduce.y_delta(chi)
        assert sp_reduce.star_mesh_residual(chi, xi) < 1e-10
    for chi in np.linspace(0.01, 0.99, 99):
        assert sp_reduce.delta_y(sp_reduce.y_delta(chi)) == pytest.approx(chi, abs=1e-9)
        assert sp_reduce.y_delta(sp_reduce.delta_y(chi)) == pytest.approx(chi, abs=1e-9)


def test_bridge_reference_values():
    """Pinned star-mesh and bridge values at chi = 0.9."""
    assert sp_reduce.y_delta(0.9) == pytest.approx(0.75166, abs=1e-5)
    assert sp_reduce.delta_y(0.75166) == pytest.approx(0.9, abs=1e-5)
    assert sp_reduce.bridge_value(0.9, 0.75166) == pytest.approx(0.9564, abs=1e-4)


def test_wheatstone_above_kelvin():
    """The longer Kelvin bridge never beats the Wheatstone bridge."""
    for chi in np.linspace(0.0, 1.0, 101):
        assert sp_reduce.wheatstone_sponge(chi) >= sp_reduce.kelvin_sponge(chi) - 1e-12

"""Sponge crossing on series-parallel networks and star-mesh bridge approximations."""

import math
from typing import NamedTuple

import networkx as nx
import numpy as np
from annalist.annalist import Annalist
from annalist.decorators import ClassLogger

from negperc import det_rules
from negperc.utils import (
    DomainError,
    IrreducibleGraphError,
    check_unit_interval,
    find_root,
    warn_if_clamped,
)

annalizer = Annalist()

SOURCE = "__S__"
TARGET = "__T__"

RESIDUAL_TOLERANCE = 1e-12


class QNGraph:
    """Quantum network with ratio negativity link weights and terminal node sets."""

    @ClassLogger  # type:ignore
    def __init__(self, links, source, target, name=""):
        """
        Initialize QNGraph.

        Parameters
        ----------
        links : iterable of (node, node, float)
            Links with their ratio negativity; repeated node pairs are parallel links
        source : iterable of node
            Source node set S
        target : iterable of node
            Target node set T
        name : str, optional
            Name used in logs and error messages
        """
        self.name = name
        self.source = frozenset(source)
        self.target = frozenset(target)
        if not self.source or not self.target:
            raise DomainError("Source and target node sets must both be nonempty")
        if self.source & self.target:
            raise DomainError(
                f"Source and target overlap on {sorted(map(str, self.source & self.target))}"
            )
        self.network = nx.MultiGraph()
        self.network.add_nodes_from(self.source | self.target)
        for u, v, chi in links:
            self.network.add_edge(u, v, chi=check_unit_interval(chi))

    def __repr__(self):
        """QNGraph representation."""
        return repr(f"QNGraph '{self.name}'")

    @property
    def links(self):
        """list of (node, node, float): The links with their weights."""
        return [(u, v, d["chi"]) for u, v, d in self.network.edges(data=True)]

    @property
    def number_of_links(self):
        """int: Number of links, counting parallel links separately."""
        return self.network.number_of_edges()

    def terminal_graph(self):
        """
        Copy of the network with S and T contracted into single terminals.

        Links inside S or inside T become self-loops and are dropped.

        Returns
        -------
        nx.MultiGraph
        """
        mapping = {n: SOURCE for n in self.source}
        mapping.update({n: TARGET for n in self.target})
        merged = nx.MultiGraph()
        merged.add_nodes_from([SOURCE, TARGET])
        for u, v, data in self.network.edges(data=True):
            a, b = mapping.get(u, u), mapping.get(v, v)
            if a != b:
                merged.add_edge(a, b, chi=data["chi"])
        merged.add_nodes_from(n for n in self.network.nodes if n not in mapping)
        return merged

    @ClassLogger
    def reduce(self, rng=None, eta_s=1.0, eta_p=1.0):
        """Sponge-crossing value between S and T, see reduce_series_parallel."""
        return reduce_series_parallel(self, rng=rng, eta_s=eta_s, eta_p=eta_p)


def _bundle_is_complete(graph, u, v):
    """Whether every other u-v path avoiding S and T has been reduced to a link."""
    rest = graph.subgraph(n for n in graph.nodes if n not in (u, v))
    for component in nx.connected_components(rest):
        if SOURCE in component or TARGET in component:
            continue
        attached = {nbr for node in component for nbr in graph.neighbors(node)}
        if u in attached and v in attached:
            return False
    return True


def _candidate_moves(graph):
    bundles = []
    pairs = {tuple(sorted((a, b), key=str)) for a, b in graph.edges()}
    for u, v in sorted(pairs, key=lambda pair: (str(pair[0]), str(pair[1]))):
        if graph.number_of_edges(u, v) > 1:
            bundles.append(("parallel", (u, v)))
    moves = [move for move in bundles if _bundle_is_complete(graph, *move[1])]
    for node in graph.nodes:
        if node in (SOURCE, TARGET):
            continue
        degree = graph.degree(node)
        if degree <= 1:
            moves.append(("prune", node))
        elif degree == 2 and len(set(graph.neighbors(node))) == 2:
            moves.append(("series", node))
    return moves or bundles


def _apply_move(graph, move, eta_s, eta_p):
    kind, where = move
    if kind == "parallel":
        u, v = where
        chis = [d["chi"] for d in graph.get_edge_data(u, v).values()]
        graph.remove_edges_from([(u, v)] * len(chis))
        graph.add_edge(u, v, chi=det_rules.parallel_combine(chis, eta_p=eta_p))
    elif kind == "series":
        (a, _, chi_a), (b, _, chi_b) = (
            (nbr, key, data["chi"])
            for _, nbr, key, data in graph.edges(where, keys=True, data=True)
        )
        graph.remove_node(where)
        graph.add_edge(a, b, chi=det_rules.series_combine([chi_a, chi_b], eta_s=eta_s))
    else:
        graph.remove_node(where)


def reduce_series_parallel(g: QNGraph, rng=None, eta_s=1.0, eta_p=1.0):
    """
    Sponge-crossing value of a series-parallel network.

    Parallel links are merged with the parallel rule, degree-2 interior nodes are
    contracted with the series rule, and dead ends are pruned until a single link
    joins S and T. A bundle of parallel links is merged only after every other
    path between its end nodes has been reduced to a link, so all branches of a
    parallel composition enter one parallel rule and the result does not depend
    on the move order.

    Parameters
    ----------
    g : QNGraph
        The network
    rng : np.random.Generator, optional
        If given, applicable moves are picked at random, otherwise in a fixed order
    eta_s : float, optional
        Series prefactor
    eta_p : float, optional
        Parallel prefactor

    Returns
    -------
    float
        The S-T ratio negativity (0 if S and T are disconnected)

    Raises
    ------
    IrreducibleGraphError
        If no series, parallel or pruning move applies before the reduction ends
    """
    graph = g.terminal_graph()
    while True:
        moves = _candidate_moves(graph)
        if not moves:
            break
        move = moves[int(rng.integers(len(moves)))] if rng is not None else moves[0]
        _apply_move(graph, move, eta_s, eta_p)

    if graph.number_of_nodes() == 2:
        if graph.number_of_edges(SOURCE, TARGET) == 0:
            return 0.0
        return next(iter(graph.get_edge_data(SOURCE, TARGET).values()))["chi"]
    if not nx.has_path(graph, SOURCE, TARGET):
        return 0.0
    core = sorted(str(n) for n in graph.nodes if n not in (SOURCE, TARGET))
    raise IrreducibleGraphError(
        f"{g.name or 'Graph'} contains a Wheatstone-bridge minor that series and "
        f"parallel moves cannot remove; stuck on interior nodes {core} with "
        f"{graph.number_of_edges()} links",
        graph=graph,
    )


class CubicRoots(NamedTuple):
    """Trigonometric roots of the star-mesh cubic."""

    roots: tuple
    selected: int
    clamp: float

    @property
    def physical(self):
        """float: The selected root Y."""
        return self.roots[self.selected]


def shengjin_roots(chi):
    """
    Roots of Y^3 - Y^2 - Y/W + 1 = 0 with W = chi^4, trigonometric form.

    Parameters
    ----------
    chi : float
        Link ratio negativity in (0, 1]

    Returns
    -------
    CubicRoots
        All three roots, index 2 selected, and the arccos clamp magnitude
    """
    chi = check_unit_interval(chi)
    if chi == 0.0:
        raise DomainError("The star-mesh cubic is singular at chi = 0")
    w = chi**4
    a = 1.0 + 3.0 / w
    argument = 0.5 * (-9.0 / w + 25.0) * a**-1.5
    clipped = float(np.clip(argument, -1.0, 1.0))
    clamp = warn_if_clamped(argument, clipped, "star-mesh arccos argument", 1e-9)
    theta = math.acos(clipped)
    root_a = math.sqrt(a)
    roots = (
        (1.0 - 2.0 * root_a * math.cos(theta / 3.0)) / 3.0,
        (1.0 + 2.0 * root_a * math.cos((theta - math.pi) / 3.0)) / 3.0,
        (1.0 + 2.0 * root_a * math.cos((theta + math.pi) / 3.0)) / 3.0,
    )
    return CubicRoots(roots, 2, clamp)


def star_mesh_residual(chi, xi):
    """Defining relation residual |chi^2 - xi / sqrt(xi^6 - xi^4 + 1)|."""
    return abs(chi * chi - xi / math.sqrt(xi**6 - xi**4 + 1.0))


def _star_mesh_relation(xi, chi_sq):
    return xi / math.sqrt(xi**6 - xi**4 + 1.0) - chi_sq


def y_delta_bisect(chi):
    """Star-mesh link value by bisection on the defining relation over [0, chi^2]."""
    chi = check_unit_interval(chi)
    if chi in (0.0, 1.0):
        return chi
    return find_root(_star_mesh_relation, 0.0, chi * chi, xtol=1e-17, args=(chi * chi,))


def y_delta(chi):
    """
    Y-to-Delta transform of a star of three identical links.

    Parameters
    ----------
    chi : float
        Ratio negativity of each star link

    Returns
    -------
    float
        Ratio negativity xi of each triangle link, sqrt of the third cubic root

    Notes
    -----
    The trigonometric root loses digits for small chi; when its residual exceeds
    1e-12 the value is refined by bisection on the defining relation.
    """
    chi = check_unit_interval(chi)
    if chi == 0.0:
        return 0.0
    if chi == 1.0:
        return 1.0
    cubic = shengjin_roots(chi)
    xi = math.sqrt(min(max(cubic.physical, 0.0), chi**4))
    if star_mesh_residual(chi, xi) > RESIDUAL_TOLERANCE:
        xi = y_delta_bisect(chi)
    return xi


def delta_y(chi):
    """
    Inverse of the Y-to-Delta transform.

    Parameters
    ----------
    chi : float
        Triangle link value in [0, 1]

    Returns
    -------
    float
        The star link value delta with y_delta(delta) = chi
    """
    chi = check_unit_interval(chi)
    if chi in (0.0, 1.0):
        return chi
    return find_root(lambda d: y_delta(d) - chi, 0.0, 1.0, xtol=1e-13)


def bridge_value(x, y):
    """Closed form b(x, y) = x^2 / sqrt(x^4 + (1-y^2)[(x^2 y^2 - y^2 + 1)^2 - x^4])."""
    x = check_unit_interval(x, name="x")
    y = check_unit_interval(y, name="y")
    if x == 0.0:
        return 0.0
    x_sq, y_sq = x * x, y * y
    inner = (x_sq * y_sq - y_sq + 1.0) ** 2 - x_sq * x_sq
    return x_sq / math.sqrt(x_sq * x_sq + (1.0 - y_sq) * inner)


def wheatstone_sponge(chi):
    """Approximate sponge crossing of the Wheatstone bridge, b(chi, y(chi))."""
    chi = check_unit_interval(chi)
    return bridge_value(chi, y_delta(chi))


def kelvin_sponge(chi):
    """Approximate sponge crossing of the Kelvin bridge, b(chi, y(chi delta(chi)))."""
    chi = check_unit_interval(chi)
    return bridge_value(chi, y_delta(chi * delta_y(chi)))


def chain_graph(n, chi):
    """Chain of n identical links between nodes 0 and n."""
    links = [(i, i + 1, chi) for i in range(n)]
    return QNGraph(links, [0], [n], name=f"chain-{n}")


def bundle_graph(k, chi):
    """K identical parallel links between nodes 0 and 1."""
    return QNGraph([(0, 1, chi)] * k, [0], [1], name=f"bundle-{k}")


def wheatstone_graph(chi):
    """Wheatstone bridge S-R1-R2-T with the bridging link R1-R2."""
    links = [
        ("S", "R1", chi),
        ("S", "R2", chi),
        ("R1", "R2", chi),
        ("R1", "T", chi),
        ("R2", "T", chi),
    ]
    return QNGraph(links, ["S"], ["T"], name="wheatstone")


def cayley_tree_graph(k, depth, chi):
    """
    Cayley tree of degree k and given depth, root as S and leaves as T.

    Parameters
    ----------
    k : int
        Degree of interior nodes
    depth : int
        Number of link generations
    chi : float
        Ratio negativity of every link

    Returns
    -------
    QNGraph
    """
    links = []
    frontier = [0]
    next_id = 1
    for generation in range(depth):
        new_frontier = []
        for node in frontier:
            for _ in range(k if generation == 0 else k - 1):
                links.append((node, next_id, chi))
                new_frontier.append(next_id)
                next_id += 1
        frontier = new_frontier
    return QNGraph(links, [0], frontier, name=f"cayley-{k}-{depth}")


def star_mesh(g: QNGraph, node):
    """
    Replace a degree-3 interior star of identical links by a triangle.

    Parameters
    ----------
    g : QNGraph
        The network
    node : node
        Interior node with three distinct neighbours and equal link weights

    Returns
    -------
    QNGraph
        A new network with the triangle links weighted by y_delta(chi)
    """
    if node in g.source or node in g.target:
        raise DomainError(f"Star-mesh node {node} must not be a terminal")
    edges = list(g.network.edges(node, data=True))
    neighbours = [v for _, v, _ in edges]
    if len(edges) != 3 or len(set(neighbours)) != 3:
        raise DomainError(f"Node {node} is not the centre of a three-link star")
    weights = {d["chi"] for _, _, d in edges}
    if len(weights) != 1:
        raise DomainError(f"Star-mesh needs identical link weights, got {sorted(weights)}")
    xi = y_delta(weights.pop())
    links = [(u, v, d["chi"]) for u, v, d in g.network.edges(data=True) if node not in (u, v)]
    a, b, c = neighbours
    links += [(a, b, xi), (b, c, xi), (a, c, xi)]
    return QNGraph(links, g.source, g.target, name=f"{g.name}-star-mesh")

"""Backplane interconnect graphs: star, parallel daisy-chains, grid mesh.

Modules are named ``m0 .. m{N-1}`` in row-major grid order and the central
processor is the node ``cp``. Every topology carries, per module, one
designated route (a simple node path ending at ``cp``); the mesh variant can
recompute routes around a failed link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .config import SurfaceConfig, validate

CENTRAL = "cp"


class TopologyKind(Enum):
    FULLY_PARALLEL = "parallel"
    DAISY_CHAIN = "chain"
    MESH = "mesh"


class TopologyError(ValueError):
    """A node is missing from, or unrouted in, a topology."""


class UnsupportedTopologyError(TopologyError):
    """The requested operation only applies to another topology kind."""


class DisconnectedError(TopologyError):
    """At least one module has no remaining path to the central processor."""


def module_node(index: int) -> str:
    return f"m{index}"


def module_index(node: str) -> int:
    return int(node[1:])


def _node_key(node: str) -> tuple[int, int]:
    # modules in index order, central processor last
    return (1, 0) if node == CENTRAL else (0, module_index(node))


def link_key(a: str, b: str) -> tuple[str, str]:
    """Canonical (src, dst) ordering of an undirected link."""
    return (a, b) if _node_key(a) <= _node_key(b) else (b, a)


@dataclass(frozen=True)
class Topology:
    """Immutable interconnect graph with per-module routes to ``cp``.

    ``links`` maps a canonical (src, dst) pair to its physical length in
    meters; ``routes`` maps each module to its node path ending at ``cp``.
    """

    kind: TopologyKind
    grid: tuple[int, int]
    pitch: float
    links: dict[tuple[str, str], float]
    routes: dict[str, tuple[str, ...]]
    attach: str | None = None

    @property
    def modules(self) -> int:
        return len(self.routes)

    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(sorted(self.routes, key=_node_key)) + (CENTRAL,)

    def hops(self, node: str) -> int:
        return len(self.routes[node]) - 1

    @property
    def max_hops(self) -> int:
        return max(len(path) - 1 for path in self.routes.values())

    def has_link(self, a: str, b: str) -> bool:
        return link_key(a, b) in self.links

    def to_edge_list(self) -> str:
        """Plain-text export: one ``src dst length_m`` line per link, then a
        ``# routes`` section with each module's path."""
        lines = [
            f"{a} {b} {length!r}"
            for (a, b), length in sorted(self.links.items(), key=lambda kv: (_node_key(kv[0][0]), _node_key(kv[0][1])))
        ]
        lines.append("# routes")
        for node in sorted(self.routes, key=_node_key):
            lines.append(" ".join(self.routes[node]))
        return "\n".join(lines) + "\n"


def _position(index: int, cols: int, pitch: float) -> tuple[float, float]:
    return ((index // cols) * pitch, (index % cols) * pitch)


def _cp_physical(config: SurfaceConfig) -> tuple[float, float]:
    rows, cols = config.grid
    if config.cp_position is not None:
        r, c = config.cp_position
        return (r * config.module_pitch, c * config.module_pitch)
    return ((rows - 1) / 2 * config.module_pitch, (cols - 1) / 2 * config.module_pitch)


def _serpentine(rows: int, cols: int) -> list[int]:
    """Row-major boustrophedon order; consecutive entries are grid-adjacent."""
    order: list[int] = []
    for r in range(rows):
        cs = range(cols) if r % 2 == 0 else range(cols - 1, -1, -1)
        order.extend(r * cols + c for c in cs)
    return order


def build_fully_parallel(config: SurfaceConfig) -> Topology:
    """Star graph: every module gets a dedicated link to the processor.

    Link lengths are Euclidean distances from the module's grid position to
    the processor position (grid center unless ``cp_position`` is set), so
    the longest link necessarily grows with the grid.
    """
    validate(config)
    rows, cols = config.grid
    cx, cy = _cp_physical(config)
    links: dict[tuple[str, str], float] = {}
    routes: dict[str, tuple[str, ...]] = {}
    for i in range(config.modules):
        x, y = _position(i, cols, config.module_pitch)
        node = module_node(i)
        links[link_key(node, CENTRAL)] = math.hypot(x - cx, y - cy)
        routes[node] = (node, CENTRAL)
    return Topology(TopologyKind.FULLY_PARALLEL, config.grid, config.module_pitch, links, routes)


def build_daisy_chains(config: SurfaceConfig) -> Topology:
    """Partition the serpentine module order into ``chains`` series chains.

    Each chain's first module attaches to the processor; in-chain links join
    grid-adjacent modules, so they all span one module pitch.
    """
    validate(config)
    rows, cols = config.grid
    order = _serpentine(rows, cols)
    depth = config.chain_length
    cx, cy = _cp_physical(config)
    links: dict[tuple[str, str], float] = {}
    routes: dict[str, tuple[str, ...]] = {}
    for c in range(config.chains):
        segment = order[c * depth : (c + 1) * depth]
        head = module_node(segment[0])
        hx, hy = _position(segment[0], cols, config.module_pitch)
        links[link_key(head, CENTRAL)] = math.hypot(hx - cx, hy - cy)
        for j in range(1, depth):
            a = _position(segment[j - 1], cols, config.module_pitch)
            b = _position(segment[j], cols, config.module_pitch)
            links[link_key(module_node(segment[j - 1]), module_node(segment[j]))] = math.hypot(
                a[0] - b[0], a[1] - b[1]
            )
        for j, idx in enumerate(segment):
            path = tuple(module_node(segment[k]) for k in range(j, -1, -1)) + (CENTRAL,)
            routes[module_node(idx)] = path
    return Topology(TopologyKind.DAISY_CHAIN, config.grid, config.module_pitch, links, routes)


def _mesh_internal_links(rows: int, cols: int, pitch: float) -> dict[tuple[str, str], float]:
    links: dict[tuple[str, str], float] = {}
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                links[link_key(module_node(i), module_node(i + 1))] = pitch
            if r + 1 < rows:
                links[link_key(module_node(i), module_node(i + cols))] = pitch
    return links


def _grid_routes(
    rows: int, cols: int, links: dict[tuple[str, str], float], attach_index: int
) -> dict[str, tuple[str, ...]]:
    """Shortest-hop routes to the attachment module over the given links.

    Ties are broken by stepping in the row direction before the column
    direction (then by lower module index), which makes routing, and hence
    every downstream bit-accounting result, deterministic.
    """
    n = rows * cols
    adjacency: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in links:
        if a == CENTRAL or b == CENTRAL:
            continue
        ia, ib = module_index(a), module_index(b)
        adjacency[ia].append(ib)
        adjacency[ib].append(ia)

    dist = {attach_index: 0}
    frontier = [attach_index]
    while frontier:
        nxt: list[int] = []
        for u in frontier:
            for v in adjacency[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    unreachable = [i for i in range(n) if i not in dist]
    if unreachable:
        raise DisconnectedError(
            f"modules without a path to the attachment point: "
            f"{', '.join(module_node(i) for i in unreachable)}"
        )

    def step_rank(cur: int, nbr: int) -> tuple[int, int]:
        row_step = (cur // cols) != (nbr // cols)
        return (0 if row_step else 1, nbr)

    routes: dict[str, tuple[str, ...]] = {}
    for i in range(n):
        path = [i]
        cur = i
        while cur != attach_index:
            cur = min(
                (v for v in adjacency[cur] if dist[v] == dist[cur] - 1),
                key=lambda v: step_rank(path[-1], v),
            )
            path.append(cur)
        routes[module_node(i)] = tuple(module_node(p) for p in path) + (CENTRAL,)
    return routes


def build_mesh(config: SurfaceConfig) -> Topology:
    """4-connected nearest-neighbor grid with one processor attachment link.

    Every internal link spans exactly one module pitch whatever the grid
    size; the attachment link (also one pitch) hangs off the module at
    ``cp_position`` (default grid corner (0, 0)).
    """
    validate(config)
    rows, cols = config.grid
    attach_r, attach_c = config.cp_position if config.cp_position is not None else (0, 0)
    attach_index = attach_r * cols + attach_c
    links = _mesh_internal_links(rows, cols, config.module_pitch)
    routes = _grid_routes(rows, cols, links, attach_index)
    attach = module_node(attach_index)
    links[link_key(attach, CENTRAL)] = config.module_pitch
    return Topology(TopologyKind.MESH, config.grid, config.module_pitch, links, routes, attach)


def reroute_on_failure(topology: Topology, failed_link: tuple[str, str]) -> Topology:
    """Recompute mesh routes with one link removed.

    Raises :class:`UnsupportedTopologyError` for non-mesh inputs (they carry
    no redundancy) and :class:`DisconnectedError` when a module loses its
    last path, which for a single failure on a 2-D grid only happens if the
    attachment link (or a link of a degenerate one-row grid) fails.
    """
    if topology.kind is not TopologyKind.MESH:
        raise UnsupportedTopologyError(f"cannot reroute a {topology.kind.value} topology")
    key = link_key(*failed_link)
    if key not in topology.links:
        raise TopologyError(f"no such link: {failed_link[0]}-{failed_link[1]}")
    if CENTRAL in key:
        raise DisconnectedError("attachment link failed: no module can reach the processor")
    surviving = {k: v for k, v in topology.links.items() if k != key}
    rows, cols = topology.grid
    routes = _grid_routes(rows, cols, surviving, module_index(topology.attach))
    return Topology(topology.kind, topology.grid, topology.pitch, surviving, routes, topology.attach)


def build(config: SurfaceConfig, kind: TopologyKind | str) -> Topology:
    """Build a topology by kind name (``parallel``, ``chain``, ``mesh``)."""
    kind = TopologyKind(kind) if isinstance(kind, str) else kind
    builder = {
        TopologyKind.FULLY_PARALLEL: build_fully_parallel,
        TopologyKind.DAISY_CHAIN: build_daisy_chains,
        TopologyKind.MESH: build_mesh,
    }[kind]
    return builder(config)

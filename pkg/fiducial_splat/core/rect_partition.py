"""
Minimum Rectangle Partition of Binary Markers

Splits a BitGrid into per-color 4-connected components, traces each one as a
rectilinear polygon with holes, and partitions it into the minimum number of
axis-aligned rectangles:

    1. collect concave vertices (outer ring and holes)
    2. enumerate horizontal and vertical chords between concave vertices
    3. maximum bipartite matching on the chord intersection graph, then the
       Koenig vertex cover; its complement is a maximum independent chord set
    4. cut along the independent chords
    5. resolve each remaining concave vertex with a greedy vertical cut

All geometry is exact integer lattice arithmetic. Lattice coordinates are
x = column and y = row, so y grows downward; ring orientation is the sign of
the shoelace sum in that (x, y) frame (outer rings positive, holes negative).

For a component with c concave vertices, l independent chords and h holes
the result has c - l - h + 1 rectangles.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

import networkx as nx

from ..utils.error_handler import (
    DimensionError,
    PartitionConsistencyError,
    ValidationError,
    create_error_context,
    validate_format,
)
from .marker_io import BitGrid

logger = logging.getLogger(__name__)

HORIZONTAL = "horizontal"
VERTICAL = "vertical"
COLOR_MODES = ["dark", "dark-only", "both"]

Cell = Tuple[int, int]  # (row, col)
CellSet = FrozenSet[Cell]

_NEIGHBORS_4 = ((-1, 0), (0, -1), (0, 1), (1, 0))


class GridPoint(NamedTuple):
    """Lattice point in cell-corner units (x = column, y = row)."""
    x: int
    y: int


Ring = Tuple[GridPoint, ...]


@dataclass(frozen=True)
class RectilinearPolygon:
    """Outer ring (positive orientation) plus hole rings (negative)."""
    outer: Ring
    holes: Tuple[Ring, ...]
    color: int
    cells: CellSet = field(default=frozenset(), compare=False, repr=False)

    def area(self) -> int:
        return ring_area(self.outer) + sum(ring_area(hole) for hole in self.holes)

    def rings(self) -> Tuple[Ring, ...]:
        return (self.outer,) + self.holes


@dataclass(frozen=True, order=True)
class Chord:
    """Axis-parallel segment joining two concave vertices through the interior."""
    a: GridPoint
    b: GridPoint
    axis: str

    def __post_init__(self) -> None:
        a, b = self.a, self.b
        if a == b:
            raise ValidationError("Chord endpoints must differ", create_error_context("Chord"))
        if self.axis == HORIZONTAL and a.y != b.y or self.axis == VERTICAL and a.x != b.x:
            raise ValidationError(
                f"Chord {a}-{b} is not {self.axis}", create_error_context("Chord")
            )
        if b < a:
            object.__setattr__(self, "a", b)
            object.__setattr__(self, "b", a)

    def intersects(self, other: "Chord") -> bool:
        """Closed-segment intersection; a shared endpoint counts."""
        if self.axis == other.axis:
            if self.axis == HORIZONTAL:
                return self.a.y == other.a.y and self.a.x <= other.b.x and other.a.x <= self.b.x
            return self.a.x == other.a.x and self.a.y <= other.b.y and other.a.y <= self.b.y
        h, v = (self, other) if self.axis == HORIZONTAL else (other, self)
        return h.a.x <= v.a.x <= h.b.x and v.a.y <= h.a.y <= v.b.y

    def length(self) -> int:
        return (self.b.x - self.a.x) + (self.b.y - self.a.y)

    def unit_edges(self) -> List[Tuple[int, int]]:
        """Unit edges as (line, index): (y, col) for horizontal, (x, row) for vertical."""
        if self.axis == HORIZONTAL:
            return [(self.a.y, x) for x in range(self.a.x, self.b.x)]
        return [(self.a.x, y) for y in range(self.a.y, self.b.y)]


@dataclass(frozen=True, order=True)
class Rect:
    """Half-open lattice rectangle [x0, x1) x [y0, y1) with a gray intensity."""
    y0: int
    x0: int
    y1: int
    x1: int
    intensity: float = 0.0

    def __post_init__(self) -> None:
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValidationError(
                f"Degenerate rectangle {self.as_list()}", create_error_context("Rect")
            )
        if not 0.0 <= self.intensity <= 1.0:
            raise ValidationError(
                f"Rect intensity {self.intensity} outside [0, 1]", create_error_context("Rect")
            )

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def area(self) -> int:
        return self.width * self.height

    def as_list(self) -> List[int]:
        return [self.x0, self.y0, self.x1, self.y1]

    def overlap_area(self, other: "Rect") -> int:
        w = min(self.x1, other.x1) - max(self.x0, other.x0)
        h = min(self.y1, other.y1) - max(self.y0, other.y0)
        return max(w, 0) * max(h, 0)


@dataclass(frozen=True)
class Piece:
    """Sub-polygon produced by cutting along chords.

    ``cuts`` holds chords inside the piece that did not disconnect it (for
    example a chord from a hole corner to the outer ring); they stay walls
    for the greedy pass.
    """
    polygon: RectilinearPolygon
    cuts: Tuple[Chord, ...] = ()

    @property
    def residual_holes(self) -> Tuple[Ring, ...]:
        return self.polygon.holes


@dataclass(frozen=True)
class ComponentPartition:
    """Per-component bookkeeping plus its rectangles."""
    component_id: int
    color: int
    cell_count: int
    concave: int
    chords: int
    holes: int
    rects: Tuple[Rect, ...]

    @property
    def rect_count(self) -> int:
        return len(self.rects)

    @property
    def expected_rect_count(self) -> int:
        return self.concave - self.chords - self.holes + 1


@dataclass(frozen=True)
class PartitionResult:
    """Rectangles for every selected component of a marker."""
    width: int
    height: int
    components: Tuple[ComponentPartition, ...]
    method: str = "minimum"

    @property
    def rects(self) -> List[Rect]:
        return [rect for comp in self.components for rect in comp.rects]

    @property
    def rect_count(self) -> int:
        return sum(comp.rect_count for comp in self.components)

    @property
    def longest_side(self) -> int:
        """Longest rectangle side in cells, 1 for an empty partition."""
        return max((max(rect.width, rect.height) for rect in self.rects), default=1)

    def to_dict(self) -> Dict[str, object]:
        return {
            "width": self.width,
            "height": self.height,
            "method": self.method,
            "rect_count": self.rect_count,
            "components": [
                {
                    "id": comp.component_id,
                    "color": comp.color,
                    "cells": comp.cell_count,
                    "concave": comp.concave,
                    "chords": comp.chords,
                    "holes": comp.holes,
                    "rects": [rect.as_list() for rect in comp.rects],
                }
                for comp in self.components
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PartitionResult":
        data = json.loads(text)
        components = []
        for comp in data["components"]:
            intensity = _color_intensity(comp["color"])
            rects = tuple(
                Rect(x0=x0, y0=y0, x1=x1, y1=y1, intensity=intensity)
                for x0, y0, x1, y1 in comp["rects"]
            )
            components.append(
                ComponentPartition(
                    component_id=comp["id"],
                    color=comp["color"],
                    cell_count=comp["cells"],
                    concave=comp["concave"],
                    chords=comp["chords"],
                    holes=comp["holes"],
                    rects=rects,
                )
            )
        return cls(
            width=data["width"],
            height=data["height"],
            components=tuple(components),
            method=data.get("method", "minimum"),
        )


def _color_intensity(color: int) -> float:
    """Dark modules (bit 1) render black, light modules white."""
    return 0.0 if color == 1 else 1.0


def ring_area(ring: Sequence[GridPoint]) -> int:
    """Signed area of a lattice ring (shoelace sum / 2, exact for rectilinear rings)."""
    twice = 0
    for i, p in enumerate(ring):
        q = ring[(i + 1) % len(ring)]
        twice += p.x * q.y - q.x * p.y
    return twice // 2


# ---------------------------------------------------------------------------
# Components and tracing
# ---------------------------------------------------------------------------

def connected_components(grid: BitGrid, color: int) -> List[CellSet]:
    """
    Maximal 4-connected cell sets of one color, found by depth-first search.

    Components are ordered by their smallest (row, col) cell.
    """
    if color not in (0, 1):
        raise ValidationError(f"color must be 0 or 1, got {color}", create_error_context("connected_components"))

    cells = grid.cells
    height, width = cells.shape
    seen = [[False] * width for _ in range(height)]
    components: List[CellSet] = []

    for row in range(height):
        for col in range(width):
            if seen[row][col] or cells[row, col] != color:
                continue
            seen[row][col] = True
            stack = [(row, col)]
            members = []
            while stack:
                r, c = stack.pop()
                members.append((r, c))
                for dr, dc in _NEIGHBORS_4:
                    nr, nc = r + dr, c + dc
                    if 0 <= nr < height and 0 <= nc < width and not seen[nr][nc] and cells[nr, nc] == color:
                        seen[nr][nc] = True
                        stack.append((nr, nc))
            components.append(frozenset(members))

    logger.debug("color %d: %d component(s)", color, len(components))
    return components


def _boundary_edges(cells: CellSet) -> Dict[GridPoint, List[GridPoint]]:
    """Directed unit boundary edges with the interior on the left."""
    outgoing: Dict[GridPoint, List[GridPoint]] = {}

    def add(x0: int, y0: int, x1: int, y1: int) -> None:
        outgoing.setdefault(GridPoint(x0, y0), []).append(GridPoint(x1, y1))

    for r, c in cells:
        if (r - 1, c) not in cells:
            add(c, r, c + 1, r)
        if (r, c + 1) not in cells:
            add(c + 1, r, c + 1, r + 1)
        if (r + 1, c) not in cells:
            add(c + 1, r + 1, c, r + 1)
        if (r, c - 1) not in cells:
            add(c, r + 1, c, r)
    return outgoing


def _reduce_ring(points: List[GridPoint]) -> Ring:
    """Drop collinear vertices and rotate to start at the smallest (y, x)."""
    n = len(points)
    kept = []
    for i in range(n):
        prev, cur, nxt = points[i - 1], points[i], points[(i + 1) % n]
        d_in = (cur.x - prev.x, cur.y - prev.y)
        d_out = (nxt.x - cur.x, nxt.y - cur.y)
        if d_in[0] * d_out[1] - d_in[1] * d_out[0] != 0:
            kept.append(cur)
    start = min(range(len(kept)), key=lambda i: (kept[i].y, kept[i].x))
    return tuple(kept[start:] + kept[:start])


def trace_polygon(cells: Iterable[Cell], color: int) -> RectilinearPolygon:
    """
    Trace the boundary rings of one 4-connected cell set.

    At a vertex where the set touches itself diagonally the walk turns toward
    the interior, so rings are weakly simple and each hole is a bounded
    8-connected region of the complement.
    """
    cell_set = frozenset(cells)
    outgoing = _boundary_edges(cell_set)
    used: Set[Tuple[GridPoint, GridPoint]] = set()
    rings: List[Ring] = []

    for start in sorted(outgoing, key=lambda p: (p.y, p.x)):
        for first in sorted(outgoing[start], key=lambda p: (p.y, p.x)):
            if (start, first) in used:
                continue
            points = [start]
            prev, cur = start, first
            used.add((prev, cur))
            while cur != start:
                points.append(cur)
                dx, dy = cur.x - prev.x, cur.y - prev.y
                # left turn, straight, right turn
                preferences = ((-dy, dx), (dx, dy), (dy, -dx))
                candidates = outgoing[cur]
                nxt = None
                for px, py in preferences:
                    target = GridPoint(cur.x + px, cur.y + py)
                    if target in candidates and (cur, target) not in used:
                        nxt = target
                        break
                if nxt is None:
                    raise PartitionConsistencyError(
                        f"Open boundary at {cur}", create_error_context("trace_polygon")
                    )
                used.add((cur, nxt))
                prev, cur = cur, nxt
            rings.append(_reduce_ring(points))

    outer = [ring for ring in rings if ring_area(ring) > 0]
    holes = sorted((ring for ring in rings if ring_area(ring) < 0), key=lambda r: (r[0].y, r[0].x))
    if len(outer) != 1:
        raise PartitionConsistencyError(
            f"Expected one outer ring, found {len(outer)}; cells are not 4-connected",
            create_error_context("trace_polygon", cells=len(cell_set)),
        )
    return RectilinearPolygon(outer=outer[0], holes=tuple(holes), color=color, cells=cell_set)


def concave_vertices(poly: RectilinearPolygon) -> List[GridPoint]:
    """
    Vertices with a 270 degree interior angle, on the outer ring and on holes.

    Rings keep the interior on their left, so a right turn is concave.
    """
    concave = []
    for ring in poly.rings():
        n = len(ring)
        for i in range(n):
            prev, cur, nxt = ring[i - 1], ring[i], ring[(i + 1) % n]
            cross = (cur.x - prev.x) * (nxt.y - cur.y) - (cur.y - prev.y) * (nxt.x - cur.x)
            if cross < 0:
                concave.append(cur)
    return sorted(set(concave), key=lambda p: (p.y, p.x))


# ---------------------------------------------------------------------------
# Chords and the bipartite graph
# ---------------------------------------------------------------------------

def _interior_h(cells: CellSet, y: int, col: int) -> bool:
    """Horizontal unit edge at row-line y over column col has cells on both sides."""
    return (y - 1, col) in cells and (y, col) in cells


def _interior_v(cells: CellSet, x: int, row: int) -> bool:
    """Vertical unit edge at column-line x over row row has cells on both sides."""
    return (row, x - 1) in cells and (row, x) in cells


def enumerate_chords(poly: RectilinearPolygon, concave: Sequence[GridPoint], axis: str) -> List[Chord]:
    """
    All chords of one axis between concave vertices whose open segment lies
    strictly inside the polygon.
    """
    validate_format(axis, [HORIZONTAL, VERTICAL], "enumerate_chords")
    cells = poly.cells
    lines: Dict[int, List[GridPoint]] = {}
    for p in concave:
        lines.setdefault(p.y if axis == HORIZONTAL else p.x, []).append(p)

    chords = []
    for line in sorted(lines):
        points = sorted(lines[line], key=lambda p: (p.x, p.y))
        # a chord through a third concave vertex would touch the boundary there
        for a, b in zip(points, points[1:]):
            if axis == HORIZONTAL:
                inside = all(_interior_h(cells, line, x) for x in range(a.x, b.x))
            else:
                inside = all(_interior_v(cells, line, y) for y in range(a.y, b.y))
            if inside:
                chords.append(Chord(a, b, axis))
    return chords


def chord_graph(ch: Sequence[Chord], cv: Sequence[Chord]) -> nx.Graph:
    """
    Bipartite intersection graph. Horizontal chord i is node i (bipartite=0),
    vertical chord j is node len(ch) + j (bipartite=1).
    """
    graph = nx.Graph()
    graph.add_nodes_from(((i, {"bipartite": 0, "chord": chord}) for i, chord in enumerate(ch)))
    offset = len(ch)
    graph.add_nodes_from(((offset + j, {"bipartite": 1, "chord": chord}) for j, chord in enumerate(cv)))
    for i, h in enumerate(ch):
        for j, v in enumerate(cv):
            if h.intersects(v):
                graph.add_edge(i, offset + j)
    return graph


def _top_nodes(graph: nx.Graph) -> List[int]:
    return sorted(n for n, side in graph.nodes(data="bipartite") if side == 0)


def max_bipartite_matching(graph: nx.Graph) -> List[Tuple[int, int]]:
    """Maximum cardinality matching as sorted (horizontal, vertical) node pairs."""
    top = _top_nodes(graph)
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=top)
    return sorted((u, matching[u]) for u in top if u in matching)


def min_vertex_cover(graph: nx.Graph, matching: Sequence[Tuple[int, int]]) -> Set[int]:
    """Koenig cover from alternating reachability of unmatched horizontal nodes."""
    mates: Dict[int, int] = {}
    for u, v in matching:
        mates[u] = v
        mates[v] = u
    cover = set(nx.bipartite.to_vertex_cover(graph, mates, top_nodes=_top_nodes(graph)))
    if len(cover) != len(matching):
        raise PartitionConsistencyError(
            f"Vertex cover size {len(cover)} differs from matching size {len(matching)}",
            create_error_context("min_vertex_cover"),
        )
    return cover


def independent_chords(ch: Sequence[Chord], cv: Sequence[Chord], cover: Set[int]) -> List[Chord]:
    """Chords outside the cover; verified pairwise non-intersecting."""
    offset = len(ch)
    chosen_h = [c for i, c in enumerate(ch) if i not in cover]
    chosen_v = [c for j, c in enumerate(cv) if offset + j not in cover]
    for h in chosen_h:
        for v in chosen_v:
            if h.intersects(v):
                raise PartitionConsistencyError(
                    f"Independent chords {h} and {v} intersect",
                    create_error_context("independent_chords"),
                )
    return chosen_h + chosen_v


# ---------------------------------------------------------------------------
# Cutting
# ---------------------------------------------------------------------------

class _Walls:
    """Boundary edges of a cell set plus cut edges drawn inside it."""

    def __init__(self, cells: CellSet, chords: Iterable[Chord] = ()):
        self.cells = cells
        self.hcut: Set[Tuple[int, int]] = set()
        self.vcut: Set[Tuple[int, int]] = set()
        for chord in chords:
            target = self.hcut if chord.axis == HORIZONTAL else self.vcut
            target.update(chord.unit_edges())

    def wall_h(self, y: int, col: int) -> bool:
        return (y, col) in self.hcut or not _interior_h(self.cells, y, col)

    def wall_v(self, x: int, row: int) -> bool:
        return (x, row) in self.vcut or not _interior_v(self.cells, x, row)

    def pieces(self) -> List[CellSet]:
        """Cells grouped by connectivity through non-wall edges."""
        seen: Set[Cell] = set()
        result = []
        for start in sorted(self.cells):
            if start in seen:
                continue
            seen.add(start)
            stack = [start]
            members = []
            while stack:
                r, c = stack.pop()
                members.append((r, c))
                steps = (
                    ((r - 1, c), self.wall_h(r, c)),
                    ((r + 1, c), self.wall_h(r + 1, c)),
                    ((r, c - 1), self.wall_v(c, r)),
                    ((r, c + 1), self.wall_v(c + 1, r)),
                )
                for nb, blocked in steps:
                    if not blocked and nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
            result.append(frozenset(members))
        return result

    def is_concave(self, x: int, y: int) -> bool:
        inside = sum(
            (r, c) in self.cells for r, c in ((y - 1, x - 1), (y - 1, x), (y, x - 1), (y, x))
        )
        if inside != 3:
            return False
        walls = (
            self.wall_v(x, y - 1) + self.wall_v(x, y) + self.wall_h(y, x - 1) + self.wall_h(y, x)
        )
        return walls == 2

    def extend_vertical(self, x: int, y: int) -> None:
        """Cut from a concave vertex along the continuation of its vertical wall."""
        step = 1 if self.wall_v(x, y - 1) else -1
        row = y if step == 1 else y - 1
        while True:
            self.vcut.add((x, row))
            point_y = row + 1 if step == 1 else row
            if self.wall_h(point_y, x - 1) or self.wall_h(point_y, x):
                break
            row += step
            if self.wall_v(x, row):
                break


def split_by_chords(poly: RectilinearPolygon, chords: Sequence[Chord]) -> List[Piece]:
    """
    Cut the polygon along non-intersecting chords.

    Returns the pieces in order of their smallest cell; their areas sum to
    the polygon area.
    """
    walls = _Walls(poly.cells, chords)
    pieces = []
    for cells in walls.pieces():
        inner = []
        for chord in chords:
            line, index = chord.unit_edges()[0]
            if chord.axis == HORIZONTAL:
                sides = ((line - 1, index), (line, index))
            else:
                sides = ((index, line - 1), (index, line))
            if sides[0] in cells and sides[1] in cells:
                inner.append(chord)
        pieces.append(Piece(polygon=trace_polygon(cells, poly.color), cuts=tuple(inner)))
    return pieces


def _rects_from_walls(walls: _Walls, intensity: float) -> List[Rect]:
    rects = []
    for cells in walls.pieces():
        rows = [r for r, _ in cells]
        cols = [c for _, c in cells]
        rect = Rect(x0=min(cols), y0=min(rows), x1=max(cols) + 1, y1=max(rows) + 1, intensity=intensity)
        if rect.area != len(cells):
            raise PartitionConsistencyError(
                f"Piece with {len(cells)} cells is not the rectangle {rect.as_list()}",
                create_error_context("greedy_rectangulate"),
            )
        rects.append(rect)
    return sorted(rects)


def greedy_rectangulate(piece: Piece) -> List[Rect]:
    """
    Resolve every remaining concave vertex with a maximal vertical cut that
    stops at the first boundary edge, chord or earlier cut.

    A piece with c' unresolved concave vertices and h' holes yields
    c' - h' + 1 rectangles.
    """
    poly = piece.polygon
    walls = _Walls(poly.cells, piece.cuts)
    corners = sorted(
        {GridPoint(c + dx, r + dy) for r, c in poly.cells for dx in (0, 1) for dy in (0, 1)},
        key=lambda p: (p.y, p.x),
    )
    for p in corners:
        if walls.is_concave(p.x, p.y):
            walls.extend_vertical(p.x, p.y)
    return _rects_from_walls(walls, _color_intensity(poly.color))


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

def _selected_colors(colors: str) -> Tuple[int, ...]:
    validate_format(colors, COLOR_MODES, "partition_marker")
    return (1,) if colors in ("dark", "dark-only") else (1, 0)


def partition_component(cells: CellSet, color: int, component_id: int) -> ComponentPartition:
    """Run the full minimum-partition pipeline on one component."""
    poly = trace_polygon(cells, color)
    concave = concave_vertices(poly)
    ch = enumerate_chords(poly, concave, HORIZONTAL)
    cv = enumerate_chords(poly, concave, VERTICAL)
    graph = chord_graph(ch, cv)
    matching = max_bipartite_matching(graph)
    cover = min_vertex_cover(graph, matching)
    chosen = independent_chords(ch, cv, cover)
    if len(chosen) != len(ch) + len(cv) - len(cover):
        raise PartitionConsistencyError(
            "Independent chord count does not match the cover",
            create_error_context("partition_component", component=component_id),
        )

    rects: List[Rect] = []
    for piece in split_by_chords(poly, chosen):
        rects.extend(greedy_rectangulate(piece))

    if sum(rect.area for rect in rects) != len(cells):
        raise PartitionConsistencyError(
            f"Rectangles cover {sum(r.area for r in rects)} cells, component has {len(cells)}",
            create_error_context("partition_component", component=component_id),
        )
    return ComponentPartition(
        component_id=component_id,
        color=color,
        cell_count=len(cells),
        concave=len(concave),
        chords=len(chosen),
        holes=len(poly.holes),
        rects=tuple(sorted(rects)),
    )


def partition_marker(grid: BitGrid, colors: str = "both") -> PartitionResult:
    """
    Minimum rectangle partition of every component of the selected colors.

    Args:
        grid: Marker bitmap
        colors: 'dark' (or 'dark-only') for dark components, 'both' for dark
            then light components

    Returns:
        PartitionResult with components numbered in output order
    """
    components = []
    for color in _selected_colors(colors):
        for cells in connected_components(grid, color):
            components.append(partition_component(cells, color, len(components)))

    result = PartitionResult(width=grid.width, height=grid.height, components=tuple(components))
    logger.info(
        "partitioned %dx%d marker: %d component(s), %d rect(s)",
        grid.width, grid.height, len(components), result.rect_count,
    )
    return result


def per_cell_partition(grid: BitGrid, colors: str = "both") -> PartitionResult:
    """Baseline with one unit rectangle per cell, grouped by component."""
    components = []
    for color in _selected_colors(colors):
        intensity = _color_intensity(color)
        for cells in connected_components(grid, color):
            rects = tuple(sorted(Rect(x0=c, y0=r, x1=c + 1, y1=r + 1, intensity=intensity) for r, c in cells))
            components.append(
                ComponentPartition(
                    component_id=len(components),
                    color=color,
                    cell_count=len(cells),
                    concave=0,
                    chords=0,
                    holes=0,
                    rects=rects,
                )
            )
    return PartitionResult(width=grid.width, height=grid.height, components=tuple(components), method="per-cell")


def check_partition(result: PartitionResult, grid: Optional[BitGrid] = None) -> None:
    """
    Verify disjointness of same-color rectangles and per-component coverage.

    Raises:
        PartitionConsistencyError: On any violation
        DimensionError: If ``grid`` does not match the result
    """
    if grid is not None and (grid.width, grid.height) != (result.width, result.height):
        raise DimensionError(
            f"Grid {grid.width}x{grid.height} does not match partition {result.width}x{result.height}",
            create_error_context("check_partition"),
        )
    owner: Dict[Cell, int] = {}
    for comp in result.components:
        if sum(rect.area for rect in comp.rects) != comp.cell_count:
            raise PartitionConsistencyError(
                f"Component {comp.component_id} is not covered exactly",
                create_error_context("check_partition"),
            )
        for rect in comp.rects:
            for r in range(rect.y0, rect.y1):
                for c in range(rect.x0, rect.x1):
                    if (r, c) in owner:
                        raise PartitionConsistencyError(
                            f"Cell {(r, c)} covered twice", create_error_context("check_partition")
                        )
                    owner[(r, c)] = comp.color
                    if grid is not None and grid[r, c] != comp.color:
                        raise PartitionConsistencyError(
                            f"Cell {(r, c)} has the wrong color", create_error_context("check_partition")
                        )

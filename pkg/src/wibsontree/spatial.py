"""Quadtree cell covers of convex polygons on a ``2**w`` fixed-point grid.

A cell at quadtree level ``l`` covers grid points
``[a*s, (a+1)*s - 1] x [b*s, (b+1)*s - 1]`` with ``s = 2**(w - l)``; as a
criterion slot it is ``(2*l, morton(a*s, b*s))``.  Level 0 (the whole grid)
would be depth 0, which is reserved for empty slots, so covers start at
level 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import atan2, gcd, pi
from typing import Sequence

from .compilers import CompileError, morton

Point = tuple[int, int]


@dataclass(frozen=True)
class CellCover:
    cells: list[tuple[int, int]]
    # covered grid points / grid points inside the polygon(s)
    coverage: float


def _cross(o: Point, a: Point, b: Point) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_ccw(vertices: Sequence[Point]) -> list[Point]:
    """Validate convexity and return the vertices in counterclockwise order."""
    pts = [(int(p[0]), int(p[1])) for p in vertices]
    if len(pts) < 3:
        raise CompileError("a polygon needs at least 3 vertices")
    m = len(pts)
    turns = [_cross(pts[i], pts[(i + 1) % m], pts[(i + 2) % m]) for i in range(m)]
    if any(t > 0 for t in turns) and any(t < 0 for t in turns):
        raise CompileError("polygon is not convex")
    area2 = sum(pts[i][0] * pts[(i + 1) % m][1] - pts[(i + 1) % m][0] * pts[i][1] for i in range(m))
    if area2 == 0:
        raise CompileError("polygon has zero area")
    if area2 < 0:
        pts.reverse()
    # all turns agreeing still admits a star that winds twice; total turning must be one revolution
    m = len(pts)
    turning = 0.0
    for i in range(m):
        o, a, b = pts[i], pts[(i + 1) % m], pts[(i + 2) % m]
        u = (a[0] - o[0], a[1] - o[1])
        v = (b[0] - a[0], b[1] - a[1])
        turning += atan2(u[0] * v[1] - u[1] * v[0], u[0] * v[0] + u[1] * v[1])
    if abs(turning - 2 * pi) > 1e-6:
        raise CompileError("polygon is not convex")
    return pts


def contains(poly: Sequence[Point], p: Point) -> bool:
    m = len(poly)
    return all(_cross(poly[i], poly[(i + 1) % m], p) >= 0 for i in range(m))


def _box_meets(poly: Sequence[Point], x0: int, x1: int, y0: int, y1: int) -> bool:
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    if max(xs) < x0 or min(xs) > x1 or max(ys) < y0 or min(ys) > y1:
        return False
    corners = ((x0, y0), (x0, y1), (x1, y0), (x1, y1))
    m = len(poly)
    for i in range(m):
        if all(_cross(poly[i], poly[(i + 1) % m], c) < 0 for c in corners):
            return False
    return True


def lattice_points(poly: Sequence[Point]) -> int:
    """Grid points inside or on the boundary of a polygon with integer vertices."""
    m = len(poly)
    area2 = abs(sum(poly[i][0] * poly[(i + 1) % m][1] - poly[(i + 1) % m][0] * poly[i][1] for i in range(m)))
    boundary = sum(
        gcd(abs(poly[(i + 1) % m][0] - poly[i][0]), abs(poly[(i + 1) % m][1] - poly[i][1]))
        for i in range(m)
    )
    # Pick's theorem: interior + boundary = A + B/2 + 1
    return (area2 + boundary) // 2 + 1


def _cells(poly: list[Point], max_cells: int, w: int, max_level: int):
    emitted: list[tuple[int, int, int]] = []
    frontier = [(0, 0, 0)]
    for level in range(max_level + 1):
        if not frontier or len(emitted) >= max_cells:
            break
        nxt = []
        size = 1 << (w - level)
        for _, a, b in frontier:
            x0, y0 = a * size, b * size
            x1, y1 = x0 + size - 1, y0 + size - 1
            if all(contains(poly, c) for c in ((x0, y0), (x0, y1), (x1, y0), (x1, y1))) and level > 0:
                emitted.append((level, a, b))
            elif level == max_level:
                if contains(poly, ((x0 + x1) // 2, (y0 + y1) // 2)):
                    emitted.append((level, a, b))
            elif _box_meets(poly, x0, x1, y0, y1):
                nxt.extend((level + 1, 2 * a + da, 2 * b + db) for da in (0, 1) for db in (0, 1))
        frontier = nxt
    return emitted


def _to_slot(level: int, a: int, b: int, w: int) -> tuple[int, int]:
    shift = w - level
    return 2 * level, morton(a << shift, b << shift, w)


def polygons_to_cells(polygons: Sequence[Sequence[Point]], max_cells: int, w: int,
                      max_level: int | None = None) -> CellCover:
    """Cover a union of convex polygons with at most ``max_cells`` quadtree cells.

    Cells wholly inside a polygon are emitted as soon as they are found;
    cells still straddling an edge at ``max_level`` are kept when their
    center is inside.  On overflow the deepest cells are dropped first.
    """
    if max_cells < 1:
        raise CompileError("max_cells must be positive")
    if not 1 <= w <= 32:
        raise CompileError("coordinate width must be in [1, 32]")
    max_level = w if max_level is None else max_level
    if not 1 <= max_level <= w:
        raise CompileError(f"max_level must be in [1, {w}]")
    limit = (1 << w) - 1
    polys = []
    for vertices in polygons:
        poly = convex_ccw(vertices)
        if any(not (0 <= x <= limit and 0 <= y <= limit) for x, y in poly):
            raise CompileError(f"vertices must fit in {w} bits")
        polys.append(poly)
    if not polys:
        raise CompileError("no polygons given")

    found: dict[tuple[int, int, int], None] = {}
    for poly in polys:
        for cell in _cells(poly, max_cells, w, max_level):
            found.setdefault(cell)
    cells = sorted(found, key=lambda c: c[0])[:max_cells]

    inside = sum(lattice_points(p) for p in polys)
    covered = sum(1 << (2 * (w - level)) for level, _, _ in cells)
    coverage = covered / inside if inside else 0.0
    return CellCover([_to_slot(level, a, b, w) for level, a, b in cells], coverage)


def polygon_to_cells(vertices: Sequence[Point], max_cells: int, w: int,
                     max_level: int | None = None) -> CellCover:
    return polygons_to_cells([vertices], max_cells, w, max_level)

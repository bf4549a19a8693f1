"""
Independent reference implementations used by the test suite.

Mostly brute force: exhaustive tiling search, subset enumeration for
matchings, covers and independent sets. A row-segmentation tiling DP covers
shapes too large for the exhaustive search, and the published tag36h11 code
words and QR layout constants check the fixture files.
"""

import itertools
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Sequence, Set, Tuple

import cv2
import numpy as np

from fiducial_splat.core.marker_io import BitGrid

Cell = Tuple[int, int]


def min_tiling(cells: Iterable[Cell]) -> int:
    """Minimum number of axis-aligned rectangles that exactly tile ``cells``."""
    cell_set = frozenset(cells)

    @lru_cache(maxsize=None)
    def solve(remaining: FrozenSet[Cell]) -> int:
        if not remaining:
            return 0
        r0, c0 = min(remaining)
        best = len(remaining)
        # the top-left remaining cell is the top-left corner of its rectangle
        max_w = 0
        while (r0, c0 + max_w) in remaining:
            max_w += 1
        for w in range(1, max_w + 1):
            h = 1
            while True:
                rect = frozenset((r, c) for r in range(r0, r0 + h) for c in range(c0, c0 + w))
                if not rect <= remaining:
                    break
                best = min(best, 1 + solve(remaining - rect))
                h += 1
        return best

    return solve(cell_set)


def components_4(mask: np.ndarray) -> List[FrozenSet[Cell]]:
    """4-connected components of a boolean mask, ordered by smallest cell."""
    mask = np.asarray(mask, dtype=bool)
    seen = np.zeros_like(mask)
    result = []
    for r, c in zip(*np.nonzero(mask)):
        if seen[r, c]:
            continue
        queue = [(int(r), int(c))]
        seen[r, c] = True
        members = []
        while queue:
            cr, cc = queue.pop(0)
            members.append((cr, cc))
            for nr, nc in ((cr + 1, cc), (cr - 1, cc), (cr, cc + 1), (cr, cc - 1)):
                if 0 <= nr < mask.shape[0] and 0 <= nc < mask.shape[1] and mask[nr, nc] and not seen[nr, nc]:
                    seen[nr, nc] = True
                    queue.append((nr, nc))
        result.append(frozenset(members))
    return sorted(result, key=min)


def grid_from_cells(cells: Iterable[Cell], height: int, width: int) -> BitGrid:
    array = np.zeros((height, width), dtype=np.uint8)
    for r, c in cells:
        array[r, c] = 1
    return BitGrid.from_array(array)


def connected_subsets(height: int, width: int) -> List[FrozenSet[Cell]]:
    """Every non-empty 4-connected cell set inside a height x width box."""
    cells = [(r, c) for r in range(height) for c in range(width)]
    result = []
    for bits in range(1, 1 << len(cells)):
        chosen = [cells[i] for i in range(len(cells)) if bits >> i & 1]
        mask = np.zeros((height, width), dtype=bool)
        for r, c in chosen:
            mask[r, c] = True
        if len(components_4(mask)) == 1:
            result.append(frozenset(chosen))
    return result


def random_components(height: int, width: int, samples: int, seed: int) -> List[FrozenSet[Cell]]:
    """Distinct components of seeded random masks, at least two cells each."""
    rng = np.random.default_rng(seed)
    found: Dict[FrozenSet[Cell], None] = {}
    while len(found) < samples:
        mask = rng.random((height, width)) < 0.65
        for comp in components_4(mask):
            if len(comp) > 1:
                found.setdefault(comp)
    return list(found)[:samples]


def brute_force_matching(left: Sequence[int], edges: Set[Tuple[int, int]]) -> int:
    """Size of a maximum matching by trying every assignment of left vertices."""
    adjacency = {u: sorted(v for a, v in edges if a == u) for u in left}

    def best(i: int, used: FrozenSet[int]) -> int:
        if i == len(left):
            return 0
        result = best(i + 1, used)
        for v in adjacency[left[i]]:
            if v not in used:
                result = max(result, 1 + best(i + 1, used | {v}))
        return result

    return best(0, frozenset())


def brute_force_cover(nodes: Sequence[int], edges: Set[Tuple[int, int]]) -> int:
    """Size of a minimum vertex cover by enumerating subsets in size order."""
    for size in range(len(nodes) + 1):
        for subset in itertools.combinations(nodes, size):
            chosen = set(subset)
            if all(u in chosen or v in chosen for u, v in edges):
                return size
    return len(nodes)


def brute_force_independent(chords: Sequence, intersects) -> int:
    """Size of a maximum set of pairwise non-intersecting chords."""
    for size in range(len(chords), -1, -1):
        for subset in itertools.combinations(chords, size):
            if all(not intersects(a, b) for a, b in itertools.combinations(subset, 2)):
                return size
    return 0


def min_tiling_by_rows(cells: Iterable[Cell]) -> int:
    """
    Minimum rectangle tiling by dynamic programming over row segmentations.

    Every tiling cuts each row into intervals, and a rectangle is a vertical
    run of identical intervals, so the count is the number of intervals
    minus the number that repeat the row above. Fast enough for 8x8 shapes
    where the exhaustive search in min_tiling is not.
    """
    rows: Dict[int, List[int]] = {}
    for r, c in cells:
        rows.setdefault(r, []).append(c)
    if not rows:
        return 0

    def segmentations(columns: List[int]) -> List[FrozenSet[Tuple[int, int]]]:
        runs: List[List[int]] = []
        for c in sorted(columns):
            if runs and runs[-1][-1] == c - 1:
                runs[-1].append(c)
            else:
                runs.append([c])
        options: List[List[Tuple[int, int]]] = [[]]
        for run in runs:
            start, inner = run[0], run[1:]
            extended = []
            for cuts in itertools.product((False, True), repeat=len(inner)):
                pieces, begin = [], start
                for c, cut in zip(inner, cuts):
                    if cut:
                        pieces.append((begin, c))
                        begin = c
                pieces.append((begin, run[-1] + 1))
                extended.extend(option + pieces for option in options)
            options = extended
        return [frozenset(option) for option in options]

    best: Dict[FrozenSet[Tuple[int, int]], int] = {frozenset(): 0}
    for r in range(min(rows), max(rows) + 1):
        best = {
            seg: min(cost + len(seg - prev) for prev, cost in best.items())
            for seg in segmentations(rows.get(r, []))
        }
    return min(best.values())


def hole_count(cells: Iterable[Cell]) -> int:
    """Number of bounded 8-connected background regions around ``cells``."""
    cell_set = set(cells)
    rows = [r for r, _ in cell_set]
    cols = [c for _, c in cell_set]
    r0, c0 = min(rows) - 1, min(cols) - 1
    background = np.ones((max(rows) - r0 + 2, max(cols) - c0 + 2), dtype=np.uint8)
    for r, c in cell_set:
        background[r - r0, c - c0] = 0
    # label 0 is the shape itself, the padded border is one more region
    count, _ = cv2.connectedComponents(background, connectivity=8)
    return count - 2


# Published tag36h11 code words for ids 0-4; bit 35 is the top-left payload
# cell, rows of six, and a set bit is a light cell.
TAG36H11_CODES = (0xD5D628584, 0xD97F18B49, 0xDD280910E, 0xE479E9C98, 0xEBCBCA822)


def tag36h11_grid(code: int) -> BitGrid:
    """10x10 marker for a tag36h11 code word: light margin, dark border, 6x6 payload."""
    cells = np.zeros((10, 10), dtype=np.uint8)
    cells[1:9, 1:9] = 1
    for i in range(36):
        if not code >> (35 - i) & 1:
            continue
        cells[2 + i // 6, 2 + i % 6] = 0
    return BitGrid.from_array(cells)


# Alignment pattern center coordinates per QR version
QR_ALIGNMENT_CENTERS = {2: (6, 18), 5: (6, 30), 10: (6, 28, 50), 22: (6, 26, 50, 74, 98)}


def qr_version_bits(version: int) -> int:
    """18-bit version information word: the version and its (18, 6) BCH remainder."""
    remainder = version << 12
    generator = 0x1F25
    for shift in range(5, -1, -1):
        if remainder >> (shift + 12) & 1:
            remainder ^= generator << shift
    return version << 12 | remainder

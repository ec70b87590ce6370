"""Connected components, boundary tracing, and contour features.

Features per region: traced boundary, convex hull with center,
convexity defects, high-curvature boundary points, and a seven-value
log-scaled invariant-moment signature used for contour-bank matching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def label_components(mask: np.ndarray, connectivity: int = 8) -> tuple[np.ndarray, int]:
    """Two-pass run-based labeling; returns (label array, component count).

    Labels are 1..count in scan order of each component's first run;
    background is 0.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    parent: list[int] = [0]  # union-find over provisional labels

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    reach = 1 if connectivity == 8 else 0
    prev_runs: list[tuple[int, int, int]] = []  # (start, end_exclusive, label)
    next_label = 1
    for row in range(h):
        line = mask[row]
        if not line.any():
            prev_runs = []
            continue
        diffs = np.diff(line.astype(np.int8))
        starts = list(np.nonzero(diffs == 1)[0] + 1)
        ends = list(np.nonzero(diffs == -1)[0] + 1)
        if line[0]:
            starts.insert(0, 0)
        if line[-1]:
            ends.append(w)
        runs: list[tuple[int, int, int]] = []
        for s, e in zip(starts, ends):
            label = 0
            for ps, pe, plabel in prev_runs:
                if ps < e + reach and pe + reach > s:  # overlap (diagonal counts for 8-conn)
                    if label == 0:
                        label = plabel
                    else:
                        union(label, plabel)
            if label == 0:
                label = next_label
                parent.append(label)
                next_label += 1
            labels[row, s:e] = label
            runs.append((s, e, label))
        prev_runs = runs

    # Flatten the union-find and renumber compactly.
    roots = np.array([find(i) for i in range(next_label)], dtype=np.int32)
    remap = np.zeros(next_label, dtype=np.int32)
    count = 0
    for i in range(1, next_label):
        if roots[i] == i:
            count += 1
            remap[i] = count
    final = remap[roots[labels]]
    return final, count


_MOORE_OFFSETS = (
    (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1),
)  # clockwise from north


# For a move in direction d, the cell examined just before it (a background
# cell) sits at direction (2*(d//2) + 6) % 8 from the destination pixel.
_MOORE_BACKTRACK = tuple((2 * (d // 2) + 6) % 8 for d in range(8))


def trace_boundary(mask: np.ndarray) -> np.ndarray:
    """Moore-neighbor boundary trace of the mask's single foreground region.

    Returns an (n, 2) array of (x, y) pixel coordinates ordered clockwise
    (image coordinates, y down), starting at the topmost-leftmost pixel.
    Stops when the initial departure from the start pixel repeats, so
    one-pixel spurs are traced on both sides.
    """
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    first = np.lexsort((xs, ys))[0]
    start = (int(ys[first]), int(xs[first]))
    h, w = mask.shape

    def fg(r: int, c: int) -> bool:
        return 0 <= r < h and 0 <= c < w and bool(mask[r, c])

    points = [start]
    cur = start
    back_dir = 6  # west of the topmost-leftmost pixel is background
    first_move: tuple[tuple[int, int], int] | None = None
    for _ in range(4 * mask.size):
        found = -1
        for k in range(1, 9):
            d = (back_dir + k) % 8
            dr, dc = _MOORE_OFFSETS[d]
            if fg(cur[0] + dr, cur[1] + dc):
                found = d
                break
        if found < 0:
            break  # isolated pixel
        move = (cur, found)
        if first_move is None:
            first_move = move
        elif move == first_move:
            break
        nxt = (cur[0] + _MOORE_OFFSETS[found][0], cur[1] + _MOORE_OFFSETS[found][1])
        points.append(nxt)
        cur = nxt
        back_dir = _MOORE_BACKTRACK[found]
    if len(points) > 1 and points[-1] == start:
        points.pop()
    return np.array([(c, r) for r, c in points], dtype=np.int64)


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull, counterclockwise in (x, y-down) image coordinates."""
    pts = np.unique(points, axis=0)
    if len(pts) <= 2:
        return pts.astype(np.float64)
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def build(seq: np.ndarray) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2:
                cross = (out[-1][0] - out[-2][0]) * (p[1] - out[-2][1]) - (
                    out[-1][1] - out[-2][1]
                ) * (p[0] - out[-2][0])
                if cross <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    return np.array(lower[:-1] + upper[:-1], dtype=np.float64)


def polygon_area(points: np.ndarray) -> float:
    if len(points) < 3:
        return 0.0
    x, y = points[:, 0], points[:, 1]
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


@dataclass(frozen=True)
class ConvexityDefect:
    """Deepest boundary point between two hull touch points."""

    start: tuple[float, float]
    end: tuple[float, float]
    far: tuple[float, float]
    depth: float


def convexity_defects(boundary: np.ndarray, hull: np.ndarray) -> list[ConvexityDefect]:
    """Per hull edge, the boundary point deviating most from the chord."""
    if len(boundary) < 4 or len(hull) < 3:
        return []
    hull_set = {(float(p[0]), float(p[1])) for p in hull}
    hull_idx = [
        i for i, p in enumerate(boundary) if (float(p[0]), float(p[1])) in hull_set
    ]
    if len(hull_idx) < 2:
        return []
    defects: list[ConvexityDefect] = []
    n = len(boundary)
    for k, i0 in enumerate(hull_idx):
        i1 = hull_idx[(k + 1) % len(hull_idx)]
        if i1 == i0:
            continue
        idx = np.arange(i0, i1 + 1) if i1 > i0 else np.concatenate(
            [np.arange(i0, n), np.arange(0, i1 + 1)]
        )
        if len(idx) < 3:
            continue
        seg = boundary[idx].astype(np.float64)
        a, b = seg[0], seg[-1]
        ab = b - a
        norm = math.hypot(*ab)
        if norm < 1e-9:
            continue
        dist = np.abs((seg[:, 0] - a[0]) * ab[1] - (seg[:, 1] - a[1]) * ab[0]) / norm
        far_i = int(np.argmax(dist))
        depth = float(dist[far_i])
        if depth > 0.5:
            defects.append(
                ConvexityDefect(
                    start=(float(a[0]), float(a[1])),
                    end=(float(b[0]), float(b[1])),
                    far=(float(seg[far_i, 0]), float(seg[far_i, 1])),
                    depth=depth,
                )
            )
    return defects


def curvature_points(boundary: np.ndarray, k: int = 7, angle_deg: float = 55.0) -> np.ndarray:
    """High-turning-angle boundary points (fingertips and valleys)."""
    n = len(boundary)
    if n < 2 * k + 1:
        return np.zeros((0, 2), dtype=np.float64)
    pts = boundary.astype(np.float64)
    prev_v = pts - np.roll(pts, k, axis=0)
    next_v = np.roll(pts, -k, axis=0) - pts
    dot = np.sum(prev_v * next_v, axis=1)
    norms = np.linalg.norm(prev_v, axis=1) * np.linalg.norm(next_v, axis=1)
    with np.errstate(invalid="ignore"):
        ang = np.degrees(np.arccos(np.clip(dot / np.maximum(norms, 1e-9), -1.0, 1.0)))
    sharp = ang > angle_deg
    # Keep the sharpest point of each consecutive-sharp run.
    keep: list[int] = []
    i = 0
    while i < n:
        if sharp[i]:
            j = i
            while j + 1 < n and sharp[j + 1]:
                j += 1
            keep.append(i + int(np.argmax(ang[i : j + 1])))
            i = j + 1
        else:
            i += 1
    return pts[keep] if keep else np.zeros((0, 2), dtype=np.float64)


def hu_invariants(ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """The seven rotation/scale/translation-invariant region moments."""
    x = xs.astype(np.float64)
    y = ys.astype(np.float64)
    m00 = float(len(x))
    cx, cy = float(x.mean()), float(y.mean())
    dx, dy = x - cx, y - cy

    def mu(p: int, q: int) -> float:
        return float(np.sum(dx**p * dy**q))

    def eta(p: int, q: int) -> float:
        return mu(p, q) / m00 ** (1 + (p + q) / 2)

    n20, n02, n11 = eta(2, 0), eta(0, 2), eta(1, 1)
    n30, n03, n21, n12 = eta(3, 0), eta(0, 3), eta(2, 1), eta(1, 2)
    return np.array(
        [
            n20 + n02,
            (n20 - n02) ** 2 + 4 * n11**2,
            (n30 - 3 * n12) ** 2 + (3 * n21 - n03) ** 2,
            (n30 + n12) ** 2 + (n21 + n03) ** 2,
            (n30 - 3 * n12) * (n30 + n12) * ((n30 + n12) ** 2 - 3 * (n21 + n03) ** 2)
            + (3 * n21 - n03) * (n21 + n03) * (3 * (n30 + n12) ** 2 - (n21 + n03) ** 2),
            (n20 - n02) * ((n30 + n12) ** 2 - (n21 + n03) ** 2)
            + 4 * n11 * (n30 + n12) * (n21 + n03),
            (3 * n21 - n03) * (n30 + n12) * ((n30 + n12) ** 2 - 3 * (n21 + n03) ** 2)
            - (n30 - 3 * n12) * (n21 + n03) * (3 * (n30 + n12) ** 2 - (n21 + n03) ** 2),
        ]
    )


# Signed log-magnitude scaling for the signature. asinh(h/eps)/ln(10)
# behaves like log10|h| - log10(eps) away from zero but stays continuous
# through it, which keeps near-symmetric shapes (tiny 5th..7th invariants)
# from dominating match distances.
_SIGNATURE_EPS = 1e-12


def _log_scale(h: np.ndarray) -> np.ndarray:
    return np.arcsinh(h / _SIGNATURE_EPS) / math.log(10.0)


def moment_signature_from_mask(mask: np.ndarray) -> np.ndarray:
    ys, xs = np.nonzero(mask)
    return _log_scale(hu_invariants(ys, xs))


@dataclass(frozen=True)
class ContourFeatures:
    """Everything the selector and bank matcher need to know about one region."""

    boundary: np.ndarray  # (n, 2) of (x, y)
    area: float  # px^2 (pixel count)
    hull: np.ndarray  # (m, 2)
    hull_center: tuple[float, float]
    defects: tuple[ConvexityDefect, ...]
    curvature_points: np.ndarray
    moment_signature: np.ndarray  # 7 log-scaled invariants
    bbox: tuple[int, int, int, int]  # x, y, w, h
    centroid: tuple[float, float]
    solidity: float
    hole_area_frac: float
    x_skew: float  # normalized third moment along x; sign separates mirrored shapes

    def deep_defect_count(self, depth_frac: float = 0.16) -> int:
        scale = math.sqrt(max(self.area, 1.0))
        return sum(1 for d in self.defects if d.depth > depth_frac * scale)


def _component_holes(sub: np.ndarray) -> float:
    """Fraction of the component's area made of enclosed background."""
    bg = ~sub
    if not bg.any():
        return 0.0
    labels, count = label_components(bg, connectivity=4)
    if count == 0:
        return 0.0
    border = np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])
    outside = set(np.unique(border)) - {0}
    hole_px = 0
    for lbl in range(1, count + 1):
        if lbl not in outside:
            hole_px += int(np.sum(labels == lbl))
    return hole_px / max(float(sub.sum()), 1.0)


def features_from_component(sub: np.ndarray, offset: tuple[int, int] = (0, 0)) -> ContourFeatures:
    """Features for a single-component mask; offset shifts coordinates to frame space."""
    ox, oy = offset
    ys, xs = np.nonzero(sub)
    area = float(len(ys))
    boundary = trace_boundary(sub)
    hull = convex_hull(boundary if len(boundary) else np.column_stack([xs, ys]))
    hull_area = polygon_area(hull)
    perimeter = float(len(boundary))
    # Pixel-count area vs. polygon-through-centers area disagree by about
    # half the perimeter; correct before computing solidity.
    hull_area_px = hull_area + perimeter / 2.0 + 1.0
    solidity = min(area / max(hull_area_px, 1.0), 1.0)
    defects = tuple(convexity_defects(boundary, hull))
    curv = curvature_points(boundary)
    signature = _log_scale(hu_invariants(ys, xs))
    cx, cy = float(xs.mean()), float(ys.mean())
    scale = math.sqrt(max(area, 1.0))
    x_skew = float(np.mean(((xs - cx) / scale) ** 3))
    x0, x1 = int(xs.min()), int(xs.max())
    y0, y1 = int(ys.min()), int(ys.max())

    def shift(arr: np.ndarray) -> np.ndarray:
        if len(arr) == 0:
            return arr
        return arr + np.array([ox, oy], dtype=arr.dtype)

    hull_center = (float(hull[:, 0].mean()) + ox, float(hull[:, 1].mean()) + oy)
    return ContourFeatures(
        boundary=shift(boundary),
        area=area,
        hull=shift(hull),
        hull_center=hull_center,
        defects=tuple(
            ConvexityDefect(
                start=(d.start[0] + ox, d.start[1] + oy),
                end=(d.end[0] + ox, d.end[1] + oy),
                far=(d.far[0] + ox, d.far[1] + oy),
                depth=d.depth,
            )
            for d in defects
        ),
        curvature_points=shift(curv),
        moment_signature=signature,
        bbox=(x0 + ox, y0 + oy, x1 - x0 + 1, y1 - y0 + 1),
        centroid=(cx + ox, cy + oy),
        solidity=solidity,
        hole_area_frac=_component_holes(sub),
        x_skew=x_skew,
    )


def extract_contour_features(mask: np.ndarray, min_area: float) -> list[ContourFeatures]:
    """Features for every connected foreground component of at least min_area px."""
    if min_area <= 0:
        raise ValueError(f"min_area must be > 0, got {min_area}")
    labels, count = label_components(mask, connectivity=8)
    out: list[ContourFeatures] = []
    for lbl in range(1, count + 1):
        where = labels == lbl
        area = int(where.sum())
        if area < min_area:
            continue
        ys, xs = np.nonzero(where)
        y0, y1 = int(ys.min()), int(ys.max())
        x0, x1 = int(xs.min()), int(xs.max())
        sub = where[y0 : y1 + 1, x0 : x1 + 1]
        out.append(features_from_component(sub, offset=(x0, y0)))
    return out

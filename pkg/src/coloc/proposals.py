"""Mask-specific bounding-box proposals.

The rough object mask is turned into proposals by (i) keeping only the image
edges nearest to mask foreground pixels, (ii) bounding those with a reference
box over their extremes, and (iii) enumerating boxes whose sides pass through
sampled edge pixels while containing the foreground centroid.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from . import cues, kernels

MAX_EDGE_SAMPLES = 40


@dataclass(frozen=True, order=True)
class BoundingBox:
    """Axis-aligned box in edge coordinates: spans [left, right] x [top,
    bottom], so width = right - left and height = bottom - top."""

    top: int
    bottom: int
    left: int
    right: int

    def __post_init__(self):
        if self.top > self.bottom or self.left > self.right:
            raise ValueError(f"inverted box {self}")

    @property
    def perimeter(self) -> int:
        return 2 * ((self.bottom - self.top) + (self.right - self.left))

    @property
    def area(self) -> int:
        return (self.bottom - self.top) * (self.right - self.left)

    def contains(self, row, col, strict=False) -> bool:
        if strict:
            return self.top < row < self.bottom and self.left < col < self.right
        return self.top <= row <= self.bottom and self.left <= col <= self.right

    def to_dict(self):
        return {"top": int(self.top), "bottom": int(self.bottom),
                "left": int(self.left), "right": int(self.right)}

    @classmethod
    def from_dict(cls, d):
        return cls(top=int(d["top"]), bottom=int(d["bottom"]),
                   left=int(d["left"]), right=int(d["right"]))


def edge_map(frame) -> np.ndarray:
    """Binary edge map: Sobel gradient magnitude above its Otsu level."""
    frame = np.asarray(frame, dtype=np.float32)
    gray = frame if frame.ndim == 2 else (
        0.299 * frame[..., 0] + 0.587 * frame[..., 1] + 0.114 * frame[..., 2])
    gx = cv2.Sobel(gray, cv2.CV_32F, 1, 0, ksize=3)
    gy = cv2.Sobel(gray, cv2.CV_32F, 0, 1, ksize=3)
    mag = np.sqrt(gx * gx + gy * gy)
    peak = float(mag.max())
    if peak <= 0:
        return np.zeros(gray.shape, dtype=bool)
    norm = mag / peak
    return norm > cues.otsu_threshold(norm)


def distance_transform(edges):
    """Exact Euclidean distance and nearest edge pixel for every pixel.

    Returns (dist float64, nearest_rows, nearest_cols); ties break row-major.
    """
    edges = np.asarray(edges, dtype=bool)
    dist2, nearest = kernels.exact_edt(edges)
    w = edges.shape[1]
    return np.sqrt(dist2.astype(np.float64)), nearest // w, nearest % w


def mask_specific_edges(mask, edges) -> np.ndarray:
    """Edge pixels that are the nearest edge of some mask foreground pixel."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("mask has no foreground pixels")
    _, nr, nc = distance_transform(edges)
    out = np.zeros_like(mask)
    out[nr[mask], nc[mask]] = True
    return out


def reference_box(ms_edges) -> BoundingBox:
    """Box over the extreme mask-specific edge pixels."""
    ms = np.asarray(ms_edges, dtype=bool)
    rows, cols = np.nonzero(ms)
    if rows.size == 0:
        raise ValueError("no mask-specific edge pixels")
    box = BoundingBox(top=int(rows.min()), bottom=int(rows.max()),
                      left=int(cols.min()), right=int(cols.max()))
    if box.perimeter == 0:
        raise ValueError("degenerate reference box (single edge pixel)")
    return box


def _touch_matrix(side_cols, lo_vals, hi_vals):
    """For a sorted array of pixel coordinates on one candidate side, which
    (lo, hi) spans contain at least one of them."""
    left_idx = np.searchsorted(side_cols, lo_vals)
    first = np.where(left_idx < len(side_cols),
                     side_cols[np.minimum(left_idx, len(side_cols) - 1)],
                     np.iinfo(np.int64).max)
    return first[:, None] <= hi_vals[None, :]


def generate_proposals(mask, ms_edges, max_samples=MAX_EDGE_SAMPLES, seed=0):
    """Candidate boxes from sampled mask-specific edge pixels.

    Every candidate's four sides each pass through a sampled pixel and the
    foreground centroid lies strictly inside; the reference box is always
    appended. Deterministic for a fixed seed."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("mask has no foreground pixels")
    ref = reference_box(ms_edges)
    rows, cols = np.nonzero(np.asarray(ms_edges, dtype=bool))
    cr, cc = (a.mean() for a in np.nonzero(mask))

    if rows.size > max_samples:
        pick = np.random.default_rng(seed).choice(rows.size, max_samples, replace=False)
        pick.sort()
        rows, cols = rows[pick], cols[pick]

    by_row = {}
    by_col = {}
    for r, c in zip(rows.tolist(), cols.tolist()):
        by_row.setdefault(r, []).append(c)
        by_col.setdefault(c, []).append(r)
    by_row = {r: np.array(sorted(v), dtype=np.int64) for r, v in by_row.items()}
    by_col = {c: np.array(sorted(v), dtype=np.int64) for c, v in by_col.items()}

    tops = np.array(sorted(r for r in by_row if r < cr), dtype=np.int64)
    bots = np.array(sorted(r for r in by_row if r > cr), dtype=np.int64)
    lefts = np.array(sorted(c for c in by_col if c < cc), dtype=np.int64)
    rights = np.array(sorted(c for c in by_col if c > cc), dtype=np.int64)

    boxes = set()
    for t in tops.tolist():
        for b in bots.tolist():
            # which left/right columns have a pixel within the row span [t, b]
            ok_l = np.array([(by_col[c] >= t).any() and (by_col[c][by_col[c] >= t][0] <= b)
                             for c in lefts.tolist()], dtype=bool) if len(lefts) else np.zeros(0, bool)
            ok_r = np.array([(by_col[c] >= t).any() and (by_col[c][by_col[c] >= t][0] <= b)
                             for c in rights.tolist()], dtype=bool) if len(rights) else np.zeros(0, bool)
            if not ok_l.any() or not ok_r.any():
                continue
            l_cand = lefts[ok_l]
            r_cand = rights[ok_r]
            top_ok = _touch_matrix(by_row[t], l_cand, r_cand)
            bot_ok = _touch_matrix(by_row[b], l_cand, r_cand)
            li, ri = np.nonzero(top_ok & bot_ok)
            for l, r in zip(l_cand[li].tolist(), r_cand[ri].tolist()):
                boxes.add((t, b, l, r))

    out = [BoundingBox(*tbl) for tbl in boxes]
    out.append(ref)
    out = sorted(set(out))
    return out


def to_json_records(boxes):
    """Serializable per-frame proposal list."""
    return [dict(b.to_dict(), perimeter=b.perimeter) for b in boxes]

"""Cue maps, tri-maps, per-cue reliability, and the consensus map.

A cue is a per-pixel probability map in [0, 1]. Each cue yields a tri-map
(foreground +1 / background -1 / unspecified 0) from its Otsu threshold, a
scalar reliability score, and all cues together yield a signed consensus
map that later drives the mixture-component weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

COSALIENCY = "cosaliency"
VISUAL = "visual"
MOTION = "motion"
CUE_KINDS = (COSALIENCY, VISUAL, MOTION)

OTSU_BINS = 256
SIGMA_FLOOR = 1e-4          # std floor for the 1-D Gaussian fits
FG_FALLBACK_FRACTION = 0.95  # top fraction of max labeled fg when Eq-style cut empties

FG = 1
BG = -1
UNKNOWN = 0


@dataclass
class CueMap:
    """One cue on one frame: float32 (h, w) values in [0, 1]."""

    values: np.ndarray
    kind: str = VISUAL
    source: str = field(default="", compare=False)  # provenance, e.g. file path

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 2 or v.size == 0:
            raise ValueError("cue map must be a nonempty 2-D array")
        if not np.isfinite(v).all():
            raise ValueError("cue map contains non-finite values")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("cue map values must lie in [0, 1]")
        if self.kind not in CUE_KINDS:
            raise ValueError(f"unknown cue kind {self.kind!r}")
        self.values = v

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]


class Consensus(NamedTuple):
    """Signed reliability sum (raw) and its [-1, 1] normalized view."""

    raw: np.ndarray
    normalized: np.ndarray
    total_reliability: float


def _values(cue) -> np.ndarray:
    v = cue.values if isinstance(cue, CueMap) else np.asarray(cue, dtype=np.float32)
    if v.ndim != 2 or v.size == 0:
        raise ValueError("cue map must be a nonempty 2-D array")
    return v


def otsu_threshold(cue) -> float:
    """Bin-center threshold maximizing between-class variance on a 256-bin
    histogram over [0, 1]. Ties go to the smallest threshold; constant maps
    return the constant itself."""
    v = _values(cue).astype(np.float64)
    vmin, vmax = float(v.min()), float(v.max())
    if vmax == vmin:
        return vmax
    bins = np.minimum((v * OTSU_BINS).astype(np.int64), OTSU_BINS - 1)
    hist = np.bincount(bins.ravel(), minlength=OTSU_BINS).astype(np.float64)
    centers = (np.arange(OTSU_BINS) + 0.5) / OTSU_BINS
    w0 = np.cumsum(hist)
    m0 = np.cumsum(hist * centers)
    total, mtot = w0[-1], m0[-1]
    w1 = total - w0
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = np.where(w0 > 0, m0 / w0, 0.0)
        mu1 = np.where(w1 > 0, (mtot - m0) / w1, 0.0)
    between = w0 * w1 * (mu0 - mu1) ** 2
    t = int(np.argmax(between))  # first occurrence = smallest threshold on ties
    return float(centers[t])


def build_trimap(cue) -> np.ndarray:
    """Tri-map labels int8 (h, w): +1 fg, -1 bg, 0 unspecified.

    fg iff P > phi + avg(P[P > phi]); bg iff P < phi. If that leaves no
    foreground on a nonconstant map, pixels >= 0.95 * max are relabeled fg
    (overriding bg) so downstream seeding never starves.
    """
    v = _values(cue).astype(np.float64)
    phi = otsu_threshold(v)
    above = v > phi
    fg_cut = phi + (float(v[above].mean()) if above.any() else 0.0)
    labels = np.zeros(v.shape, dtype=np.int8)
    labels[v < phi] = BG
    fg = v > fg_cut
    if not fg.any() and v.max() > v.min():
        fg = v >= FG_FALLBACK_FRACTION * v.max()
    labels[fg] = FG
    return labels


def reliability_score(cue, trimap) -> float:
    """Reliability psi in [0, 1]: (1 - Bhattacharyya overlap of the 1-D
    Gaussian fits to fg/bg cue values) times the foreground concentration
    (fg area over fg bounding-box area). Empty fg or bg set -> 0."""
    v = _values(cue).astype(np.float64)
    tri = np.asarray(trimap)
    fg_vals = v[tri == FG]
    bg_vals = v[tri == BG]
    if fg_vals.size == 0 or bg_vals.size == 0:
        return 0.0
    mf, mb = float(fg_vals.mean()), float(bg_vals.mean())
    sf = max(float(fg_vals.std()), SIGMA_FLOOR)
    sb = max(float(bg_vals.std()), SIGMA_FLOOR)
    s2 = sf * sf + sb * sb
    overlap = np.sqrt(2.0 * sf * sb / s2) * np.exp(-((mf - mb) ** 2) / (4.0 * s2))
    rows, cols = np.nonzero(tri == FG)
    box_area = (rows.max() - rows.min() + 1) * (cols.max() - cols.min() + 1)
    concentration = fg_vals.size / float(box_area)
    return float(np.clip((1.0 - overlap) * concentration, 0.0, 1.0))


def consensus_map(trimaps, scores) -> Consensus:
    """Signed sum X(p) = sum_k T_k(p) * psi_k plus the view normalized by
    sum(psi) (all zeros when every cue is unreliable)."""
    if len(trimaps) == 0 or len(trimaps) != len(scores):
        raise ValueError("need one reliability score per tri-map")
    shape = np.asarray(trimaps[0]).shape
    raw = np.zeros(shape, dtype=np.float64)
    for tri, psi in zip(trimaps, scores):
        tri = np.asarray(tri)
        if tri.shape != shape:
            raise ValueError(f"tri-map shape mismatch: {tri.shape} vs {shape}")
        raw += tri.astype(np.float64) * float(psi)
    total = float(sum(scores))
    normalized = raw / total if total > 0 else np.zeros_like(raw)
    return Consensus(raw=raw, normalized=normalized, total_reliability=total)

"""Hierarchical co-saliency over a frame collection.

Frames are described by a Gabor-bank descriptor, repeatedly clustered into
levels of representative frames, saliency is aggregated upward through coarse
block-matching warps, and the representative maps are propagated back down
with level-count weighting to give every ground-level frame a co-saliency map.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import cv2
import numpy as np

from . import cues, kernels

GIST_SIZE = 64            # internal working resolution
GIST_SCALES = 4
GIST_ORIENTATIONS = 8
GIST_GRID = 4
CLUSTER_FANOUT = 15       # average frames per cluster when building a level
WARP_BLOCK = 16
WARP_RADIUS = 48
WARP_STEP = 4


@dataclass
class Hierarchy:
    levels: list                      # levels[l] = list of frame indices
    parents: list                     # parents[l][frame] = representative at level l+1
    descriptors: np.ndarray           # (n_frames, descriptor_dim)
    variances: list = field(default_factory=list)  # descriptor variance per level

    @property
    def top(self):
        return len(self.levels) - 1

    def to_json(self):
        return json.dumps({
            "levels": [[int(i) for i in level] for level in self.levels],
            "parents": [{str(k): int(v) for k, v in p.items()} for p in self.parents],
            "variances": [float(v) for v in self.variances],
            "descriptor_hashes": [hashlib.sha1(d.tobytes()).hexdigest()[:16]
                                  for d in self.descriptors],
        }, indent=2, sort_keys=True)


def _gabor_bank(size=GIST_SIZE):
    """Frequency-domain Gabor transfer functions, 4 scales x 8 orientations."""
    fy = np.fft.fftfreq(size)[:, None]
    fx = np.fft.fftfreq(size)[None, :]
    bank = []
    for s in range(GIST_SCALES):
        f0 = 0.25 / (2 ** s)
        sigma = f0 / 2.0
        for o in range(GIST_ORIENTATIONS):
            theta = o * np.pi / GIST_ORIENTATIONS
            cy, cx = f0 * np.sin(theta), f0 * np.cos(theta)
            bank.append(np.exp(-((fx - cx) ** 2 + (fy - cy) ** 2) / (2 * sigma ** 2)))
    return bank


_BANK = None


def gist_descriptor(frame) -> np.ndarray:
    """512-vector of Gabor energies mean-pooled on a 4x4 grid."""
    global _BANK
    frame = np.asarray(frame, dtype=np.float32)
    if frame.shape[0] < 32 or frame.shape[1] < 32:
        raise ValueError("frame too small for the descriptor (needs >= 32x32)")
    gray = frame if frame.ndim == 2 else (
        0.299 * frame[..., 0] + 0.587 * frame[..., 1] + 0.114 * frame[..., 2])
    if gray.shape != (GIST_SIZE, GIST_SIZE):
        gray = cv2.resize(gray, (GIST_SIZE, GIST_SIZE), interpolation=cv2.INTER_AREA)
    if _BANK is None:
        _BANK = _gabor_bank()
    spectrum = np.fft.fft2(gray.astype(np.float64))
    cell = GIST_SIZE // GIST_GRID
    out = np.empty(len(_BANK) * GIST_GRID * GIST_GRID)
    for i, transfer in enumerate(_BANK):
        energy = np.abs(np.fft.ifft2(spectrum * transfer))
        pooled = energy.reshape(GIST_GRID, cell, GIST_GRID, cell).mean(axis=(1, 3))
        out[i * 16:(i + 1) * 16] = pooled.ravel()
    return out


def _descriptor_variance(desc) -> float:
    return float(((desc - desc.mean(axis=0)) ** 2).sum(axis=1).mean())


def build_hierarchy(frames, min_size=4, var_threshold=None, seed=0,
                    descriptors=None) -> Hierarchy:
    """Cluster frames level by level into max(1, round(n/15)) representatives.

    Stops before creating a level whose representative count would drop
    below min_size, when the current level's descriptor variance exceeds
    var_threshold (default: twice the ground level's variance), or when
    clustering would no longer shrink the level."""
    from .fusion import kmeans

    if len(frames) == 0:
        raise ValueError("no frames")
    if descriptors is None:
        descriptors = np.stack([gist_descriptor(f) for f in frames])
    hier = Hierarchy(levels=[list(range(len(frames)))], parents=[],
                     descriptors=descriptors)
    hier.variances.append(_descriptor_variance(descriptors))
    if var_threshold is None:
        var_threshold = 2.0 * hier.variances[0]

    while True:
        current = hier.levels[-1]
        n = len(current)
        k = max(1, round(n / CLUSTER_FANOUT))
        if k < min_size or k >= n:
            break
        if hier.variances[-1] > var_threshold:
            break
        desc = descriptors[current]
        centers, labels = kmeans(desc, k, seed=seed + len(hier.levels))
        parents = {}
        reps = []
        for ci in range(len(centers)):
            members = np.nonzero(labels == ci)[0]
            d2 = ((desc[members] - centers[ci]) ** 2).sum(axis=1)
            rep = current[members[int(np.argmin(d2))]]
            reps.append(rep)
            for mi in members:
                parents[current[mi]] = rep
        reps = sorted(set(reps))
        hier.parents.append(parents)
        hier.levels.append(reps)
        hier.variances.append(_descriptor_variance(descriptors[reps]))
    return hier


def warp_map(src_frame, dst_frame, cue_map) -> np.ndarray:
    """Pull a map defined on src_frame into dst_frame's geometry through a
    coarse block correspondence field."""
    values = cue_map.values if isinstance(cue_map, cues.CueMap) else np.asarray(cue_map)
    h, w = values.shape
    if src_frame.shape != dst_frame.shape or src_frame.shape[:2] != (h, w):
        raise ValueError("frames and map must share dimensions")
    dy, dx = kernels.block_match(src_frame, dst_frame, WARP_BLOCK, WARP_RADIUS, WARP_STEP)
    ys = np.arange(h)
    xs = np.arange(w)
    # per-pixel source coordinates via the block field
    by = ys // WARP_BLOCK
    bx = xs // WARP_BLOCK
    block_dy = dy[by][:, bx]
    block_dx = dx[by][:, bx]
    sy = np.clip(ys[:, None] + block_dy, 0, h - 1)
    sx = np.clip(xs[None, :] + block_dx, 0, w - 1)
    return values[sy, sx]


def psi_of_map(values) -> float:
    """Reliability of a saliency map against its own tri-map."""
    return cues.reliability_score(values, cues.build_trimap(values))


def aggregate_up(hierarchy, frames, base_maps, weight_fn=psi_of_map):
    """Representative co-saliency maps for every level >= 1.

    Each representative's map is the reliability-weighted mean of its
    children's maps warped into the representative's frame, renormalized to
    [0, 1] by the max. Returns co_maps with co_maps[0] = base_maps and
    co_maps[l] = {frame: map} for l >= 1."""
    for i in hierarchy.levels[0]:
        if base_maps.get(i) is None:
            raise ValueError(f"frame {i} lacks a base saliency map")
    co_maps = [dict(base_maps)]
    for level in range(hierarchy.top):
        parents = hierarchy.parents[level]
        below = co_maps[level]
        rep_maps = {}
        for rep in hierarchy.levels[level + 1]:
            children = [f for f in hierarchy.levels[level] if parents[f] == rep]
            warped = np.stack([warp_map(frames[c], frames[rep], below[c]) for c in children])
            weights = np.array([weight_fn(below[c]) for c in children], dtype=np.float64)
            if weights.sum() <= 0:
                weights = np.ones(len(children))
            mean = np.tensordot(weights / weights.sum(), warped, axes=1)
            peak = mean.max()
            rep_maps[rep] = mean / peak if peak > 0 else mean
        co_maps.append(rep_maps)
    return co_maps


def propagate_down(hierarchy, frames, co_maps):
    """Disseminate representative maps down to the ground level.

    The step from level l+1 to l mixes d parts of the warped parent map
    with 1 part of the child's current map, where d counts the levels
    covered so far (1 at the top). Ground-level children mix against their
    base saliency maps. Returns {frame: co-saliency map} for level 0."""
    current = dict(co_maps[hierarchy.top])
    for level in range(hierarchy.top - 1, -1, -1):
        d = hierarchy.top - level
        parents = hierarchy.parents[level]
        nxt = {}
        for child in hierarchy.levels[level]:
            rep = parents[child]
            warped = warp_map(frames[rep], frames[child], current[rep])
            nxt[child] = (d * warped + co_maps[level][child]) / (d + 1.0)
        current = nxt
    return {f: np.clip(m, 0.0, 1.0).astype(np.float32) for f, m in current.items()}

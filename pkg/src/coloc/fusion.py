"""Appearance fusion: per-cue GMM components pooled into one fg/bg mixture.

Each cue's tri-map seeds a set of color-space Gaussian components; every
component is weighted by the consensus map over its member pixels, the
components of all cues are pooled per side, and one graph-cut pass over the
fused mixtures yields the rough object mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cues, kernels

N_COMPONENTS = 5
COV_EPS = 1e-5            # diagonal regularization of seed covariances
KMEANS_MAX_ITER = 50
GAMMA = 50.0              # pairwise strength of the graph-cut energy
DENSITY_FLOOR = 1e-12     # mixture densities clamp here before -log
# capacity quantization: scale * max data term (~27.6) and the hard cap must
# all stay below 2^31 because the scipy max-flow backend is int32
CAP_SCALE = float(1 << 21)
HARD_CAP = np.int64(1) << 30


class DegenerateFrameError(RuntimeError):
    """Raised when no cue yields usable seeds; the frame should be skipped."""


@dataclass
class GmmComponent:
    mean: np.ndarray                  # (3,) RGB in [0, 1]
    cov: np.ndarray                   # (3, 3) SPD
    weight: float                     # mixing weight in [0, 1]
    origin: tuple = (-1, -1, "")      # (cue index, component index, side)
    members: np.ndarray | None = field(default=None, repr=False)  # flat pixel ids


@dataclass
class FusedGmm:
    foreground: list
    background: list


def kmeans(points, k, seed=0, max_iter=KMEANS_MAX_ITER):
    """Deterministic k-means++ on (m, d) points; returns (centers, labels).

    Clusters that empty out are dropped, so fewer than k centers can come
    back."""
    pts = np.asarray(points, dtype=np.float64)
    m = pts.shape[0]
    if m == 0:
        raise ValueError("cannot cluster zero points")
    k = min(k, len(np.unique(pts, axis=0)))
    rng = np.random.default_rng(seed)

    centers = np.empty((k, pts.shape[1]))
    centers[0] = pts[rng.integers(m)]
    d2 = ((pts - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers = centers[:i]
            break
        pick = min(np.searchsorted(np.cumsum(d2 / total), rng.random()), m - 1)
        centers[i] = pts[pick]
        d2 = np.minimum(d2, ((pts - centers[i]) ** 2).sum(axis=1))

    for _ in range(max_iter):
        dist = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = dist.argmin(axis=1)
        keep = np.unique(labels)
        if len(keep) < len(centers):
            remap = np.full(len(centers), -1)
            remap[keep] = np.arange(len(keep))
            labels = remap[labels]
            centers = centers[keep]
        new = np.stack([pts[labels == i].mean(axis=0) for i in range(len(centers))])
        if np.allclose(new, centers):
            centers = new
            break
        centers = new
    dist = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return centers, dist.argmin(axis=1)


def cluster_seeds(colors, n_components=N_COMPONENTS, seed=0):
    """Cluster seed colors into GMM components (sample mean, regularized
    covariance, weight = cluster fraction). Fewer distinct colors than
    n_components reduce the component count."""
    colors = np.asarray(colors, dtype=np.float64).reshape(-1, 3)
    if colors.shape[0] == 0:
        raise ValueError("no seed colors to cluster")
    centers, labels = kmeans(colors, n_components, seed=seed)
    comps = []
    for i in range(len(centers)):
        idx = np.flatnonzero(labels == i)
        sub = colors[idx]
        cov = np.cov(sub, rowvar=False) if len(sub) > 1 else np.zeros((3, 3))
        cov = np.atleast_2d(cov) + COV_EPS * np.eye(3)
        comps.append(GmmComponent(mean=sub.mean(axis=0), cov=cov,
                                  weight=len(sub) / colors.shape[0],
                                  origin=(-1, i, ""), members=idx))
    return comps


def component_weight(component, consensus_normalized, member_pixels=None) -> float:
    """Consensus-driven weight: fg side 0.5*(1 + mean Xhat over members),
    bg side 0.5*(1 - mean Xhat)."""
    members = component.members if member_pixels is None else np.asarray(member_pixels)
    if members is None or len(members) == 0:
        raise ValueError("component has no member pixels")
    mean_x = float(np.asarray(consensus_normalized).ravel()[members].mean())
    side = component.origin[2]
    if side == "fg":
        w = 0.5 * (1.0 + mean_x)
    elif side == "bg":
        w = 0.5 * (1.0 - mean_x)
    else:
        raise ValueError(f"component side not set: {component.origin!r}")
    return float(np.clip(w, 0.0, 1.0))


def build_fused_gmm(frame, cue_maps, n_components=N_COMPONENTS, seed=0):
    """Fused fg/bg mixtures from a frame and its cue maps.

    Returns (FusedGmm, fixed_bg) where fixed_bg is the intersection of all
    cue background regions. Raises DegenerateFrameError when no cue
    provides foreground or no cue provides background seeds."""
    frame = np.asarray(frame, dtype=np.float64)
    h, w = frame.shape[:2]
    flat = frame.reshape(-1, 3)

    trimaps = [cues.build_trimap(c) for c in cue_maps]
    scores = [cues.reliability_score(c, t) for c, t in zip(cue_maps, trimaps)]
    consensus = cues.consensus_map(trimaps, scores)
    xhat = consensus.normalized.ravel()

    fg_comps, bg_comps = [], []
    fixed_bg = np.ones((h, w), dtype=bool)
    for k, tri in enumerate(trimaps):
        fixed_bg &= tri == cues.BG
        for side, label, bucket in (("fg", cues.FG, fg_comps), ("bg", cues.BG, bg_comps)):
            idx = np.flatnonzero(tri.ravel() == label)
            if idx.size == 0:
                continue
            for c, comp in enumerate(cluster_seeds(flat[idx], n_components,
                                                   seed=seed * 1000 + 2 * k + (side == "bg"))):
                comp.origin = (k, c, side)
                comp.members = idx[comp.members]
                comp.weight = component_weight(comp, xhat)
                bucket.append(comp)
    if not fg_comps or not bg_comps:
        raise DegenerateFrameError("no usable seeds in any cue")
    for bucket in (fg_comps, bg_comps):
        total = sum(c.weight for c in bucket)
        if total <= 0:
            for c in bucket:
                c.weight = 1.0 / len(bucket)
        else:
            for c in bucket:
                c.weight = c.weight / total
    return FusedGmm(foreground=fg_comps, background=bg_comps), fixed_bg


def gmm_score(colors, components):
    """Mixture density sum_c pi_c N(color; mu_c, cov_c), vectorized over
    colors of shape (..., 3)."""
    if not components:
        raise ValueError("empty mixture")
    pts = np.asarray(colors, dtype=np.float64)
    squeeze = pts.ndim == 1
    pts = pts.reshape(-1, 3)
    out = np.zeros(pts.shape[0])
    norm3 = (2.0 * np.pi) ** 1.5
    for comp in components:
        inv = np.linalg.inv(comp.cov)
        det = np.linalg.det(comp.cov)
        d = pts - comp.mean
        q = np.einsum("ij,jk,ik->i", d, inv, d)
        out += comp.weight * np.exp(-0.5 * q) / (norm3 * np.sqrt(det))
    return float(out[0]) if squeeze else out


def _pair_caps(frame, gamma):
    """Contrast-sensitive pairwise capacities on the 8-neighborhood."""
    d_e = ((frame[:, :-1] - frame[:, 1:]) ** 2).sum(axis=2)
    d_s = ((frame[:-1, :] - frame[1:, :]) ** 2).sum(axis=2)
    d_se = ((frame[:-1, :-1] - frame[1:, 1:]) ** 2).sum(axis=2)
    d_sw = ((frame[:-1, 1:] - frame[1:, :-1]) ** 2).sum(axis=2)
    all_d = np.concatenate([a.ravel() for a in (d_e, d_s, d_se, d_sw)])
    msd = all_d.mean() if all_d.size else 0.0
    beta = 0.0 if msd <= 0 else 1.0 / (2.0 * msd)
    return tuple(gamma * np.exp(-beta * d) for d in (d_e, d_s, d_se, d_sw))


def grabcut_once(frame, gmm, fixed_bg=None, gamma=GAMMA):
    """One graph-cut pass over the fused-mixture energy; returns the boolean
    foreground mask.

    Data terms are -log of the (floored) mixture densities, shifted per
    pixel so capacities stay nonnegative (which leaves the optimal labeling
    unchanged); fixed_bg pixels are hard-constrained to background."""
    frame = np.asarray(frame, dtype=np.float64)
    h, w = frame.shape[:2]
    flat = frame.reshape(-1, 3)
    d_fg = -np.log(np.maximum(gmm_score(flat, gmm.foreground), DENSITY_FLOOR))
    d_bg = -np.log(np.maximum(gmm_score(flat, gmm.background), DENSITY_FLOOR))
    shift = np.minimum(d_fg, d_bg)
    cap_src = (d_bg - shift).reshape(h, w)   # paid when the pixel goes background
    cap_snk = (d_fg - shift).reshape(h, w)   # paid when the pixel goes foreground
    c_e, c_s, c_se, c_sw = _pair_caps(frame, gamma)

    q = [np.rint(a * CAP_SCALE).astype(np.int64)
         for a in (cap_src, cap_snk, c_e, c_s, c_se, c_sw)]
    if fixed_bg is not None and np.asarray(fixed_bg).any():
        fb = np.asarray(fixed_bg, dtype=bool)
        q[0][fb] = 0
        q[1][fb] = HARD_CAP
    labels = kernels.grid_mincut(*q)
    return labels.astype(bool)

"""Synthetic video generator: a textured rectangle drifting over a textured
background, with exact ground-truth boxes.

Supports corrupting the visual cue (inverted saliency written to disk and
referenced from the manifest) to exercise the reliability weighting.
"""

from __future__ import annotations

import json
from pathlib import Path

import cv2
import numpy as np

from . import manifest as mf, providers
from .proposals import BoundingBox

DEFAULTS = {
    "n_videos": 5,
    "frames_per_video": 60,
    "width": 160,
    "height": 120,
    "object_size": 0.18,     # fraction of the frame area
    "motion": 2.0,           # object speed, px/frame
    "noise": 0.012,          # additive Gaussian sigma
    "corrupt_visual": False, # write inverted visual-cue files
    "label": "synthetic",
    "seed": 0,
}

# palettes keep object and background colors separable in RGB space
_BG_BASE = np.array([0.18, 0.32, 0.45])
_FG_BASE = np.array([0.85, 0.55, 0.15])

ORBIT_AMPLITUDE = 5.0   # px radius of the object's wander
DRIFT_SPEED = 0.2       # px/frame drift of the orbit center
FG_GRAIN = 0.2          # object texture grain (drives its spectral response)
WELL_SIZE = 14          # flat background patches anchor the saliency minima
WELL_DENSITY = 30 / (120 * 160)


def _texture(rng, h, w, base, spread=0.25, cells=6, grain=0.16):
    """Random RGB texture around a base color: smooth large-scale variation
    plus fine per-pixel grain (anchored, so block matching can lock on)."""
    coarse = base + spread * (rng.random((cells, cells, 3)) - 0.5)
    tex = cv2.resize(coarse.astype(np.float32), (w, h), interpolation=cv2.INTER_LINEAR)
    tex = tex + grain * (rng.random((h, w, 3)).astype(np.float32) - 0.5)
    return np.clip(tex, 0.0, 1.0)


def _flat_wells(rng, tex, count, size=WELL_SIZE, grain=0.16):
    """Flatten scattered patches to their mean color plus fine grain.

    The coarse flatness makes them spectrally quiet (anchoring the saliency
    map's minima) while the grain keeps block matching locked on them."""
    h, w = tex.shape[:2]
    for _ in range(count):
        y = rng.integers(0, h - size)
        x = rng.integers(0, w - size)
        mean = tex[y:y + size, x:x + size].mean(axis=(0, 1))
        noise = grain * (rng.random((size, size, 3)).astype(np.float32) - 0.5)
        tex[y:y + size, x:x + size] = np.clip(mean + noise, 0.0, 1.0)
    return tex


def _positions(rng, n, h, w, oh, ow, speed, amplitude=ORBIT_AMPLITUDE):
    """Integer positions of the object's top-left corner: a circular orbit
    around a slowly drifting home position, with tangential speed `speed`."""
    amp = min(amplitude, (h - oh) / 2.0, (w - ow) / 2.0)
    home_y = rng.uniform(amp, h - oh - amp)
    home_x = rng.uniform(amp, w - ow - amp)
    if speed <= 0 or amp <= 0:
        return [(int(round(home_y)), int(round(home_x)))] * n
    # circular orbit (tangential speed stays at `speed`, so the motion cue
    # never idles at a turning point) around a slowly drifting center
    omega = speed / amp
    phase = rng.uniform(0, 2 * np.pi)
    direction = 1.0 if rng.random() < 0.5 else -1.0
    drift_ang = rng.uniform(0, 2 * np.pi)
    dv_y, dv_x = DRIFT_SPEED * np.sin(drift_ang), DRIFT_SPEED * np.cos(drift_ang)
    t = np.arange(n)
    ys = _reflect(home_y + dv_y * t, amp, h - oh - amp) + amp * np.sin(direction * omega * t + phase)
    xs = _reflect(home_x + dv_x * t, amp, w - ow - amp) + amp * np.cos(direction * omega * t + phase)
    return [(int(round(y)), int(round(x))) for y, x in zip(ys, xs)]


def _reflect(values, lo, hi):
    """Fold a trajectory back into [lo, hi] (mirror at the ends)."""
    if hi <= lo:
        return np.full_like(np.asarray(values, dtype=np.float64), lo)
    span = hi - lo
    phase = np.mod(np.asarray(values, dtype=np.float64) - lo, 2 * span)
    return lo + np.where(phase > span, 2 * span - phase, phase)


def synth_dataset(spec: dict, out_dir) -> Path:
    """Render the dataset and write manifest.json plus ground_truth.json.

    Returns the manifest path."""
    params = dict(DEFAULTS)
    params.update(spec or {})
    for key in ("n_videos", "frames_per_video"):
        if params[key] <= 0:
            raise ValueError(f"{key} must be positive")
    out_dir = Path(out_dir)
    h, w = int(params["height"]), int(params["width"])
    ow = int(round(np.sqrt(params["object_size"] * h * w * 4.0 / 3.0)))
    oh = int(round(ow * 3.0 / 4.0))
    oh, ow = min(oh, h - 2), min(ow, w - 2)
    rng = np.random.default_rng(int(params["seed"]))

    videos = []
    for vi in range(int(params["n_videos"])):
        vid = f"video{vi:02d}"
        frame_dir = out_dir / "frames" / vid
        frame_dir.mkdir(parents=True, exist_ok=True)
        cue_dir = out_dir / "cues" / vid
        if params["corrupt_visual"]:
            cue_dir.mkdir(parents=True, exist_ok=True)

        bg = _texture(rng, h, w, _BG_BASE, cells=6)
        bg = _flat_wells(rng, bg, count=round(WELL_DENSITY * h * w), size=WELL_SIZE)
        fg = _texture(rng, oh, ow, _FG_BASE, cells=4, grain=FG_GRAIN)
        pos = _positions(rng, int(params["frames_per_video"]), h, w, oh, ow,
                         float(params["motion"]))
        frames = []
        for fi, (y, x) in enumerate(pos):
            img = bg.copy()
            img[y:y + oh, x:x + ow] = fg
            if params["noise"] > 0:
                img = np.clip(img + rng.normal(0, params["noise"], img.shape), 0, 1)
            img = img.astype(np.float32)
            name = f"{fi:04d}.png"
            cv2.imwrite(str(frame_dir / name), np.rint(img[:, :, ::-1] * 255).astype(np.uint8))
            cue_paths = {}
            if params["corrupt_visual"]:
                vis = providers.spectral_saliency(img)
                cue_name = f"visual_{fi:04d}.f32"
                providers.save_cue_map(cue_dir / cue_name, 1.0 - vis.values)
                cue_paths["visual"] = str(Path("cues") / vid / cue_name)
            frames.append(mf.FrameSpec(
                frame_path=str(Path("frames") / vid / name),
                cue_paths=cue_paths,
                ground_truth=BoundingBox(top=y, bottom=y + oh, left=x, right=x + ow),
            ))
        videos.append(mf.VideoSpec(video_id=vid, label=params["label"], frames=frames))

    man = mf.Manifest(videos=videos, mode=mf.WEAKLY_SUPERVISED, root=out_dir)
    manifest_path = out_dir / "manifest.json"
    mf.save_manifest(man, manifest_path)
    mf.save_ground_truth(man, out_dir / "ground_truth.json")
    with open(out_dir / "synth_spec.json", "w") as fh:
        json.dump(params, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path

"""Built-in cue providers and cue-map disk I/O.

The built-ins are deliberately simple, deterministic stand-ins; any external
saliency/motion extractor can be substituted by pointing the manifest at
precomputed map files (8-bit PNG or float32 raster).
"""

from __future__ import annotations

import struct

import cv2
import numpy as np
from scipy import ndimage

from . import cues, kernels

SPECTRAL_SIZE = 64        # working resolution of the spectral residual
MOTION_BLOCK = 8
MOTION_RADIUS = 16
RASTER_MAGIC_LEN = 8      # little-endian uint32 width, height header


def _gray(frame):
    frame = np.asarray(frame, dtype=np.float32)
    if frame.ndim == 2:
        return frame
    return 0.299 * frame[..., 0] + 0.587 * frame[..., 1] + 0.114 * frame[..., 2]


def _minmax(values):
    lo, hi = float(values.min()), float(values.max())
    if hi - lo <= 0:
        return np.zeros_like(values, dtype=np.float32)
    return ((values - lo) / (hi - lo)).astype(np.float32)


def spectral_saliency(frame) -> cues.CueMap:
    """Spectral-residual saliency: suppress the smooth part of the
    log-amplitude spectrum, reconstruct, square, blur, normalize."""
    frame = np.asarray(frame)
    if frame.shape[0] < 64 or frame.shape[1] < 64:
        raise ValueError("frame too small for spectral saliency (needs >= 64x64)")
    gray = _gray(frame)
    h, w = gray.shape
    if float(gray.max()) == float(gray.min()):
        return cues.CueMap(np.zeros((h, w), np.float32), kind=cues.VISUAL)
    small = cv2.resize(gray, (SPECTRAL_SIZE, SPECTRAL_SIZE), interpolation=cv2.INTER_AREA)
    spectrum = np.fft.fft2(small.astype(np.float64))
    amp = np.abs(spectrum)
    # floor relative to the spectrum scale: exact spectral zeros otherwise
    # punch -inf holes whose smoothed neighborhoods ring in the residual
    log_amp = np.log(amp + 1e-3 * amp.mean() + 1e-300)
    # the FFT grid is periodic, so the smoothing must wrap
    residual = log_amp - ndimage.uniform_filter(log_amp, size=3, mode="wrap")
    recon = np.fft.ifft2(np.exp(residual + 1j * np.angle(spectrum)))
    sal = np.abs(recon) ** 2
    sal = cv2.GaussianBlur(sal, (25, 25), 6.0)
    sal = cv2.resize(_minmax(sal), (w, h), interpolation=cv2.INTER_LINEAR)
    return cues.CueMap(np.clip(sal, 0.0, 1.0), kind=cues.VISUAL)


def motion_saliency(prev, curr) -> cues.CueMap:
    """Block-flow magnitude relative to the median global flow, min-max
    normalized. Zero everywhere when the frames are identical or the whole
    scene pans uniformly."""
    prev = np.asarray(prev)
    curr = np.asarray(curr)
    if prev.shape != curr.shape:
        raise ValueError(f"frame shape mismatch: {prev.shape} vs {curr.shape}")
    h, w = curr.shape[:2]
    dy, dx = kernels.block_match(prev, curr, MOTION_BLOCK, MOTION_RADIUS, step=1)
    med_dy = np.median(dy)
    med_dx = np.median(dx)
    resid = np.sqrt((dy - med_dy) ** 2 + (dx - med_dx) ** 2)
    per_block = _minmax(resid)
    ys = np.arange(h) // MOTION_BLOCK
    xs = np.arange(w) // MOTION_BLOCK
    return cues.CueMap(per_block[ys][:, xs], kind=cues.MOTION)


def save_cue_map(path, values):
    """Persist a map: .png as 8-bit grayscale, anything else as the float32
    raster (8-byte width/height header + row-major float32 data)."""
    values = values.values if isinstance(values, cues.CueMap) else np.asarray(values)
    path = str(path)
    if path.endswith(".png"):
        cv2.imwrite(path, np.rint(np.clip(values, 0, 1) * 255).astype(np.uint8))
    else:
        h, w = values.shape
        with open(path, "wb") as fh:
            fh.write(struct.pack("<II", w, h))
            fh.write(values.astype("<f4").tobytes())


def load_cue_map(path, expected_shape=None, kind=cues.VISUAL) -> cues.CueMap:
    """Load a map from disk, normalize to [0, 1], and bilinearly resample to
    the expected frame shape when dimensions differ."""
    path = str(path)
    if path.endswith(".png"):
        img = cv2.imread(path, cv2.IMREAD_GRAYSCALE)
        if img is None:
            raise ValueError(f"unreadable cue map: {path}")
        values = img.astype(np.float32) / 255.0
    else:
        with open(path, "rb") as fh:
            header = fh.read(RASTER_MAGIC_LEN)
            if len(header) != RASTER_MAGIC_LEN:
                raise ValueError(f"truncated cue raster: {path}")
            w, h = struct.unpack("<II", header)
            data = np.frombuffer(fh.read(), dtype="<f4")
        if data.size != w * h:
            raise ValueError(f"cue raster size mismatch in {path}")
        values = data.reshape(h, w).astype(np.float32)
    if not np.isfinite(values).all():
        raise ValueError(f"cue map {path} contains non-finite values")
    lo, hi = float(values.min()), float(values.max())
    if lo < 0.0 or hi > 1.0:
        values = _minmax(values)
    if expected_shape is not None and values.shape != tuple(expected_shape):
        eh, ew = expected_shape
        values = np.clip(cv2.resize(values, (ew, eh), interpolation=cv2.INTER_LINEAR), 0, 1)
    return cues.CueMap(values, kind=kind, source=path)

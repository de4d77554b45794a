"""Hot numeric kernels with a compiled core and a pure-Python fallback.

The Cython extension is optional: if it failed to build, the numpy/scipy
fallback serves every call with identical semantics. Set COLOC_KERNELS to
"native" or "fallback" to force one backend ("native" raises if the
extension is absent).
"""

import os

import numpy as np

from . import _fallback

try:
    from . import _native
except ImportError:
    _native = None

_forced = os.environ.get("COLOC_KERNELS", "").strip().lower()
if _forced == "native" and _native is None:
    raise ImportError("COLOC_KERNELS=native but the compiled kernels are not built")
if _forced == "fallback":
    _impl = _fallback
elif _forced == "native":
    _impl = _native
else:
    _impl = _native if _native is not None else _fallback

BACKEND = "native" if _impl is _native else "fallback"


def backends():
    """Mapping of available backend name -> module (for tests/benchmarks)."""
    out = {"fallback": _fallback}
    if _native is not None:
        out["native"] = _native
    return out


def sorted_offsets(radius, step):
    """Search offsets within +/-radius at the given stride, ordered by
    (squared norm, dy, dx) so that (0, 0) is tried first and ties are stable."""
    span = np.arange(-radius, radius + 1, step, dtype=np.int32)
    if 0 not in span:
        raise ValueError("offset grid must include (0, 0); radius must be a multiple of step")
    dy, dx = np.meshgrid(span, span, indexing="ij")
    dy, dx = dy.ravel(), dx.ravel()
    norm2 = dy.astype(np.int64) ** 2 + dx.astype(np.int64) ** 2
    order = np.lexsort((dx, dy, norm2))
    return np.ascontiguousarray(np.stack([dy[order], dx[order]], axis=1))


def quantize_colors(img):
    """Quantize a float image in [0, 1] to int32 0..255 (shared by both
    backends so block SSDs are exact integer arithmetic)."""
    return np.ascontiguousarray(
        np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.int32))


def exact_edt(edges, impl=None):
    """Exact Euclidean distance transform with nearest-pixel indices.

    Returns (dist2 int64, nearest flat-index int64); ties break row-major.
    """
    edges = np.ascontiguousarray(edges, dtype=np.uint8)
    if edges.ndim != 2:
        raise ValueError("edge map must be 2-D")
    if not edges.any():
        raise ValueError("distance transform needs at least one edge pixel")
    return (impl or _impl).exact_edt(edges)


def block_match(src, dst, block, radius, step=1, impl=None):
    """Per-block integer correspondence field from dst into src.

    Images are float RGB in [0, 1] with identical shapes; returns (dy, dx)
    int32 arrays over the block grid of dst.
    """
    if src.shape != dst.shape:
        raise ValueError(f"shape mismatch: {src.shape} vs {dst.shape}")
    offs = sorted_offsets(radius, step)
    return (impl or _impl).block_match(
        quantize_colors(src), quantize_colors(dst), int(block), offs)


def grid_mincut(cap_src, cap_snk, cap_e, cap_s, cap_se, cap_sw, impl=None):
    """Min s-t cut over an 8-connected grid with integer capacities.

    cap_e joins (r,c)-(r,c+1); cap_s joins (r,c)-(r+1,c); cap_se joins
    (r,c)-(r+1,c+1); cap_sw joins (r,c+1)-(r+1,c). Returns uint8 labels,
    1 = source side.
    """
    h, w = cap_src.shape
    args = []
    for name, arr, shape in (
        ("cap_src", cap_src, (h, w)),
        ("cap_snk", cap_snk, (h, w)),
        ("cap_e", cap_e, (h, max(w - 1, 0))),
        ("cap_s", cap_s, (max(h - 1, 0), w)),
        ("cap_se", cap_se, (max(h - 1, 0), max(w - 1, 0))),
        ("cap_sw", cap_sw, (max(h - 1, 0), max(w - 1, 0))),
    ):
        a = np.ascontiguousarray(arr, dtype=np.int64)
        if a.shape != shape:
            raise ValueError(f"{name} must have shape {shape}, got {a.shape}")
        if (a < 0).any():
            raise ValueError(f"{name} contains negative capacities")
        args.append(a)
    return (impl or _impl).grid_mincut(*args)

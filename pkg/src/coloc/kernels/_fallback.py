"""Pure-Python (numpy/scipy) kernel fallback.

Mirrors coloc.kernels._native exactly: same integer arithmetic, same tie
rules, so either backend can serve any call.
"""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

_HUGE = np.int64(1) << 62


def exact_edt(edges):
    """Exact squared Euclidean distance to the nearest edge pixel.

    Returns (dist2, nearest) with nearest as row-major flat indices, ties to
    the row-major smallest edge pixel.
    """
    e = edges.astype(bool)
    h, w = e.shape
    rows = np.arange(h, dtype=np.int64)[:, None]
    up = np.maximum.accumulate(np.where(e, rows, -1), axis=0)
    down = np.minimum.accumulate(np.where(e, rows, 2 * h)[::-1], axis=0)[::-1]
    d_up = np.where(up >= 0, rows - up, _HUGE)
    d_down = np.where(down < 2 * h, down - rows, _HUGE)
    colrow = np.where(d_up <= d_down, up, down)
    colrow[(up < 0) & (down >= 2 * h)] = -1

    cols = np.arange(w, dtype=np.int64)
    dc2 = (cols[:, None] - cols[None, :]) ** 2
    dist2 = np.empty((h, w), dtype=np.int64)
    nearest = np.empty((h, w), dtype=np.int64)
    for r in range(h):
        cr = colrow[r]
        valid = cr >= 0
        tot = dc2 + np.where(valid, (r - cr) ** 2, _HUGE)[None, :]
        tot[:, ~valid] = _HUGE
        best = tot.min(axis=1)
        key = np.where(tot == best[:, None], cr[None, :] * w + cols[None, :], _HUGE)
        dist2[r] = best
        nearest[r] = key.min(axis=1)
    return dist2, nearest


def block_match(src, dst, block, offsets):
    """Best integer offset per dst block minimizing SSD against src.

    Offsets are tried in the given order with strict improvement; src samples
    outside the frame clamp to the border (edge padding).
    """
    h, w = dst.shape[:2]
    radius = int(np.abs(offsets).max()) if len(offsets) else 0
    padded = np.pad(src.astype(np.int64), ((radius, radius), (radius, radius), (0, 0)),
                    mode="edge")
    dst64 = dst.astype(np.int64)
    row_idx = np.arange(0, h, block)
    col_idx = np.arange(0, w, block)
    nby, nbx = len(row_idx), len(col_idx)
    best = np.full((nby, nbx), _HUGE, dtype=np.int64)
    out_dy = np.zeros((nby, nbx), dtype=np.int32)
    out_dx = np.zeros((nby, nbx), dtype=np.int32)
    for dy, dx in offsets:
        shifted = padded[radius + dy:radius + dy + h, radius + dx:radius + dx + w]
        sq = ((shifted - dst64) ** 2).sum(axis=2)
        ssd = np.add.reduceat(np.add.reduceat(sq, row_idx, axis=0), col_idx, axis=1)
        better = ssd < best
        best[better] = ssd[better]
        out_dy[better] = dy
        out_dx[better] = dx
    return out_dy, out_dx


def grid_mincut(cap_src, cap_snk, cap_e, cap_s, cap_se, cap_sw):
    """Min s-t cut on an 8-connected pixel grid via scipy maximum_flow.

    Same edge layout as the native kernel; returns uint8 labels, 1 = source
    side of the cut.
    """
    h, w = cap_src.shape
    npix = h * w
    s, t = npix, npix + 1
    pix = np.arange(npix, dtype=np.int64).reshape(h, w)

    us, vs, caps = [], [], []

    def pair(u, v, c):
        us.append(u.ravel())
        vs.append(v.ravel())
        caps.append(c.ravel())
        us.append(v.ravel())
        vs.append(u.ravel())
        caps.append(c.ravel())

    if w > 1:
        pair(pix[:, :-1], pix[:, 1:], cap_e)
    if h > 1:
        pair(pix[:-1, :], pix[1:, :], cap_s)
    if h > 1 and w > 1:
        pair(pix[:-1, :-1], pix[1:, 1:], cap_se)
        pair(pix[:-1, 1:], pix[1:, :-1], cap_sw)
    us.append(np.full(npix, s, dtype=np.int64))
    vs.append(pix.ravel())
    caps.append(cap_src.ravel())
    us.append(pix.ravel())
    vs.append(np.full(npix, t, dtype=np.int64))
    caps.append(cap_snk.ravel())

    u = np.concatenate(us)
    v = np.concatenate(vs)
    c = np.concatenate(caps).astype(np.int64)
    if c.size and c.max() >= np.iinfo(np.int32).max:
        raise ValueError("capacities exceed the int32 range of the scipy max-flow solver")
    keep = c > 0
    graph = csr_matrix((c[keep].astype(np.int32), (u[keep], v[keep])),
                       shape=(npix + 2, npix + 2))
    result = maximum_flow(graph, s, t)

    residual = graph.astype(np.int64) - result.flow.astype(np.int64)
    residual.data = (residual.data > 0).astype(np.int64)
    residual.eliminate_zeros()
    order = breadth_first_order(residual, s, directed=True, return_predecessors=False)
    labels = np.zeros(npix + 2, dtype=np.uint8)
    labels[order] = 1
    return labels[:npix].reshape(h, w)

# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: exact distance transform, block matching, grid min-cut.

Semantics are shared with coloc.kernels._fallback; the two backends must stay
interchangeable (the test suite compares them input-for-input).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef long long HUGE = (<long long>1) << 62


def exact_edt(const unsigned char[:, ::1] edges):
    """Exact squared Euclidean distance to the nearest edge pixel.

    Returns (dist2, nearest) where nearest holds row-major flat indices;
    ties go to the row-major smallest edge pixel.
    """
    cdef Py_ssize_t h = edges.shape[0]
    cdef Py_ssize_t w = edges.shape[1]
    dist2_arr = np.empty((h, w), dtype=np.int64)
    nearest_arr = np.empty((h, w), dtype=np.int64)
    colrow_arr = np.empty((h, w), dtype=np.int64)
    cdef long long[:, ::1] dist2 = dist2_arr
    cdef long long[:, ::1] nearest = nearest_arr
    cdef long long[:, ::1] colrow = colrow_arr
    cdef Py_ssize_t r, c, dc, cc
    cdef long long up, down, best, d2, brow, bcol, cand

    # nearest edge row within each column, ties to the smaller row
    for c in range(w):
        up = -1
        for r in range(h):
            if edges[r, c]:
                up = r
            colrow[r, c] = up
        down = -1
        for r in range(h - 1, -1, -1):
            if edges[r, c]:
                down = r
            up = colrow[r, c]
            if up < 0:
                colrow[r, c] = down
            elif down >= 0 and down - r < r - up:
                colrow[r, c] = down

    for r in range(h):
        for c in range(w):
            best = HUGE
            brow = -1
            bcol = -1
            for dc in range(w):
                if <long long>dc * dc > best:
                    break
                cc = c - dc
                if cc >= 0:
                    cand = colrow[r, cc]
                    if cand >= 0:
                        d2 = <long long>dc * dc + (r - cand) * (r - cand)
                        if d2 < best or (d2 == best and
                                         (cand < brow or (cand == brow and cc < bcol))):
                            best = d2
                            brow = cand
                            bcol = cc
                if dc > 0:
                    cc = c + dc
                    if cc < w:
                        cand = colrow[r, cc]
                        if cand >= 0:
                            d2 = <long long>dc * dc + (r - cand) * (r - cand)
                            if d2 < best or (d2 == best and
                                             (cand < brow or (cand == brow and cc < bcol))):
                                best = d2
                                brow = cand
                                bcol = cc
            dist2[r, c] = best
            nearest[r, c] = brow * w + bcol
    return dist2_arr, nearest_arr


def block_match(const int[:, :, ::1] src, const int[:, :, ::1] dst,
                int block, const int[:, ::1] offsets):
    """Best integer offset per dst block minimizing SSD against src.

    Offsets are evaluated in the given order with strict improvement, so the
    first offset wins ties. Out-of-range src samples clamp to the border.
    """
    cdef Py_ssize_t h = dst.shape[0]
    cdef Py_ssize_t w = dst.shape[1]
    cdef Py_ssize_t nby = (h + block - 1) // block
    cdef Py_ssize_t nbx = (w + block - 1) // block
    cdef Py_ssize_t noff = offsets.shape[0]
    dy_arr = np.zeros((nby, nbx), dtype=np.int32)
    dx_arr = np.zeros((nby, nbx), dtype=np.int32)
    cdef int[:, ::1] out_dy = dy_arr
    cdef int[:, ::1] out_dx = dx_arr
    cdef Py_ssize_t by, bx, k, i, j, y0, x0, bh, bw, sy, sx
    cdef int dy, dx, bdy, bdx
    cdef long long ssd, best, dv

    for by in range(nby):
        y0 = by * block
        bh = block if y0 + block <= h else h - y0
        for bx in range(nbx):
            x0 = bx * block
            bw = block if x0 + block <= w else w - x0
            best = HUGE
            bdy = 0
            bdx = 0
            for k in range(noff):
                dy = offsets[k, 0]
                dx = offsets[k, 1]
                ssd = 0
                for i in range(bh):
                    sy = y0 + dy + i
                    if sy < 0:
                        sy = 0
                    elif sy >= h:
                        sy = h - 1
                    for j in range(bw):
                        sx = x0 + dx + j
                        if sx < 0:
                            sx = 0
                        elif sx >= w:
                            sx = w - 1
                        dv = dst[y0 + i, x0 + j, 0] - src[sy, sx, 0]
                        ssd += dv * dv
                        dv = dst[y0 + i, x0 + j, 1] - src[sy, sx, 1]
                        ssd += dv * dv
                        dv = dst[y0 + i, x0 + j, 2] - src[sy, sx, 2]
                        ssd += dv * dv
                    if ssd >= best:
                        break
                if ssd < best:
                    best = ssd
                    bdy = dy
                    bdx = dx
            out_dy[by, bx] = bdy
            out_dx[by, bx] = bdx
    return dy_arr, dx_arr


def grid_mincut(const long long[:, ::1] cap_src, const long long[:, ::1] cap_snk,
                const long long[:, ::1] cap_e, const long long[:, ::1] cap_s,
                const long long[:, ::1] cap_se, const long long[:, ::1] cap_sw):
    """Min s-t cut on an 8-connected pixel grid (Dinic on integer capacities).

    cap_e[r,c] joins (r,c)-(r,c+1); cap_s joins (r,c)-(r+1,c);
    cap_se joins (r,c)-(r+1,c+1); cap_sw joins (r,c+1)-(r+1,c).
    Returns a uint8 (h, w) array, 1 = source side.
    """
    cdef Py_ssize_t h = cap_src.shape[0]
    cdef Py_ssize_t w = cap_src.shape[1]
    cdef Py_ssize_t npix = h * w
    cdef Py_ssize_t n = npix + 2
    cdef Py_ssize_t s = npix
    cdef Py_ssize_t t = npix + 1
    cdef Py_ssize_t npairs = h * (w - 1) + (h - 1) * w + 2 * (h - 1) * (w - 1)
    cdef Py_ssize_t m = 2 * npairs + 4 * npix

    eto_arr = np.empty(m, dtype=np.int64)
    ecap_arr = np.empty(m, dtype=np.int64)
    deg_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] eto = eto_arr
    cdef long long[::1] ecap = ecap_arr
    cdef long long[::1] deg = deg_arr

    cdef Py_ssize_t r, c, u, v, e, k
    cdef Py_ssize_t ecnt = 0

    # undirected pair edges: forward/backward both carry the pair capacity
    for r in range(h):
        for c in range(w - 1):
            u = r * w + c
            v = u + 1
            eto[ecnt] = v; ecap[ecnt] = cap_e[r, c]
            eto[ecnt + 1] = u; ecap[ecnt + 1] = cap_e[r, c]
            deg[u] += 1; deg[v] += 1
            ecnt += 2
    for r in range(h - 1):
        for c in range(w):
            u = r * w + c
            v = u + w
            eto[ecnt] = v; ecap[ecnt] = cap_s[r, c]
            eto[ecnt + 1] = u; ecap[ecnt + 1] = cap_s[r, c]
            deg[u] += 1; deg[v] += 1
            ecnt += 2
    for r in range(h - 1):
        for c in range(w - 1):
            u = r * w + c
            v = u + w + 1
            eto[ecnt] = v; ecap[ecnt] = cap_se[r, c]
            eto[ecnt + 1] = u; ecap[ecnt + 1] = cap_se[r, c]
            deg[u] += 1; deg[v] += 1
            ecnt += 2
            u = r * w + c + 1
            v = u + w - 1
            eto[ecnt] = v; ecap[ecnt] = cap_sw[r, c]
            eto[ecnt + 1] = u; ecap[ecnt + 1] = cap_sw[r, c]
            deg[u] += 1; deg[v] += 1
            ecnt += 2
    # terminal edges (reverse capacity 0)
    for u in range(npix):
        eto[ecnt] = u; ecap[ecnt] = cap_src[u // w, u % w]
        eto[ecnt + 1] = s; ecap[ecnt + 1] = 0
        deg[s] += 1; deg[u] += 1
        ecnt += 2
        eto[ecnt] = t; ecap[ecnt] = cap_snk[u // w, u % w]
        eto[ecnt + 1] = u; ecap[ecnt + 1] = 0
        deg[u] += 1; deg[t] += 1
        ecnt += 2

    # CSR adjacency of edge ids (source of edge e is eto[e ^ 1])
    indptr_arr = np.zeros(n + 1, dtype=np.int64)
    cdef long long[::1] indptr = indptr_arr
    for u in range(n):
        indptr[u + 1] = indptr[u] + deg[u]
    adj_arr = np.empty(m, dtype=np.int64)
    cursor_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] adj = adj_arr
    cdef long long[::1] cursor = cursor_arr
    for u in range(n):
        cursor[u] = indptr[u]
    for e in range(m):
        u = <Py_ssize_t>eto[e ^ 1]
        adj[cursor[u]] = e
        cursor[u] += 1

    level_arr = np.empty(n, dtype=np.int64)
    it_arr = np.empty(n, dtype=np.int64)
    queue_arr = np.empty(n, dtype=np.int64)
    path_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] level = level_arr
    cdef long long[::1] it = it_arr
    cdef long long[::1] queue = queue_arr
    cdef long long[::1] path = path_arr

    cdef Py_ssize_t head, tail, depth, vv, i
    cdef long long bottleneck
    cdef bint found, advanced

    while True:
        # BFS level graph
        for u in range(n):
            level[u] = -1
        level[s] = 0
        queue[0] = s
        head = 0
        tail = 1
        found = False
        while head < tail:
            u = <Py_ssize_t>queue[head]
            head += 1
            for i in range(indptr[u], indptr[u + 1]):
                e = <Py_ssize_t>adj[i]
                v = <Py_ssize_t>eto[e]
                if ecap[e] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    if v == t:
                        found = True
                    queue[tail] = v
                    tail += 1
        if not found:
            break
        # blocking flow (current-arc DFS)
        for u in range(n):
            it[u] = indptr[u]
        vv = s
        depth = 0
        while True:
            if vv == t:
                bottleneck = HUGE
                for i in range(depth):
                    e = <Py_ssize_t>path[i]
                    if ecap[e] < bottleneck:
                        bottleneck = ecap[e]
                for i in range(depth):
                    e = <Py_ssize_t>path[i]
                    ecap[e] -= bottleneck
                    ecap[e ^ 1] += bottleneck
                # retreat to the first saturated edge on the path
                k = 0
                while ecap[path[k]] != 0:
                    k += 1
                depth = k
                vv = <Py_ssize_t>eto[path[k] ^ 1]
                continue
            advanced = False
            while it[vv] < indptr[vv + 1]:
                e = <Py_ssize_t>adj[it[vv]]
                v = <Py_ssize_t>eto[e]
                if ecap[e] > 0 and level[v] == level[vv] + 1:
                    path[depth] = e
                    depth += 1
                    vv = v
                    advanced = True
                    break
                it[vv] += 1
            if not advanced:
                level[vv] = -1
                if vv == s:
                    break
                depth -= 1
                vv = <Py_ssize_t>eto[path[depth] ^ 1]

    # source side of the residual graph
    reach_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] reach = reach_arr
    reach[s] = 1
    queue[0] = s
    head = 0
    tail = 1
    while head < tail:
        u = <Py_ssize_t>queue[head]
        head += 1
        for i in range(indptr[u], indptr[u + 1]):
            e = <Py_ssize_t>adj[i]
            v = <Py_ssize_t>eto[e]
            if ecap[e] > 0 and not reach[v]:
                reach[v] = 1
                queue[tail] = v
                tail += 1
    return reach_arr[:npix].reshape(h, w).copy()

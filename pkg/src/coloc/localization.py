"""Per-video proposal graph and shortest-path box selection.

One layer per frame; node weights are proposal perimeters normalized by the
frame's reference-box perimeter (so node costs -log(H) are nonnegative), link
weights are Euclidean distances between box coordinate 4-vectors, and the
virtual source/target are cost-neutral. Dijkstra picks one box per frame.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .proposals import BoundingBox


@dataclass
class ProposalGraph:
    layers: list                       # list of list[BoundingBox]
    node_weights: list = field(default_factory=list)  # per-layer float arrays in (0, 1]
    coords: list = field(default_factory=list)        # per-layer (k, 4) float arrays


@dataclass
class SelectionResult:
    chosen: list            # per-frame index into the layer
    links: list             # ((frame, idx) -> (frame+1, idx)) pairs actually used
    total_cost: float


def box_distance(a: BoundingBox, b: BoundingBox) -> float:
    """Euclidean distance over (top, bottom, left, right)."""
    return float(np.sqrt((a.top - b.top) ** 2 + (a.bottom - b.bottom) ** 2
                         + (a.left - b.left) ** 2 + (a.right - b.right) ** 2))


def link_cost(h_m: float, h_n: float, distance: float, lam: float) -> float:
    """-log(H_m * H_n) + lambda * L for one traversed link; virtual
    endpoints carry H = 1."""
    if h_m <= 0 or h_n <= 0:
        raise ValueError("node weights must be positive")
    return float(-np.log(h_m * h_n) + lam * distance)


def build_graph(per_frame_proposals, reference_perimeters) -> ProposalGraph:
    """Layered DAG over per-frame proposal lists.

    H = perimeter / reference perimeter of the frame, so H in (0, 1] with
    equality exactly on the reference box."""
    if len(per_frame_proposals) == 0:
        raise ValueError("no frames")
    if len(per_frame_proposals) != len(reference_perimeters):
        raise ValueError("need one reference perimeter per frame")
    graph = ProposalGraph(layers=[list(layer) for layer in per_frame_proposals])
    for layer, ref_perim in zip(graph.layers, reference_perimeters):
        if len(layer) == 0:
            raise ValueError("empty proposal layer")
        if ref_perim <= 0:
            raise ValueError("reference perimeter must be positive")
        h = np.array([b.perimeter / ref_perim for b in layer], dtype=np.float64)
        if (h <= 0).any() or (h > 1).any():
            raise ValueError("proposal perimeter outside (0, reference]")
        graph.node_weights.append(h)
        graph.coords.append(np.array([[b.top, b.bottom, b.left, b.right] for b in layer],
                                     dtype=np.float64))
    return graph


def shortest_path(graph: ProposalGraph, lam: float) -> SelectionResult:
    """Minimum-cost source-to-target path through the layered graph
    (Dijkstra; deterministic tie-break by (layer, node index))."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    n_layers = len(graph.layers)
    neg_log_h = [-np.log(h) for h in graph.node_weights]

    dist = [np.full(len(l), np.inf) for l in graph.layers]
    pred = [np.full(len(l), -1, dtype=np.int64) for l in graph.layers]
    # virtual source -> first layer: -log(1 * H_n)
    dist[0] = neg_log_h[0].copy()
    heap = [(float(d), 0, i) for i, d in enumerate(dist[0])]
    heapq.heapify(heap)
    settled = [np.zeros(len(l), dtype=bool) for l in graph.layers]

    while heap:
        d, layer, idx = heapq.heappop(heap)
        if settled[layer][idx] or d > dist[layer][idx]:
            continue
        settled[layer][idx] = True
        if layer + 1 >= n_layers:
            continue
        delta = graph.coords[layer + 1] - graph.coords[layer][idx]
        link = np.sqrt((delta * delta).sum(axis=1))
        cand = d + neg_log_h[layer][idx] + neg_log_h[layer + 1] + lam * link
        better = cand < dist[layer + 1]
        if better.any():
            dist[layer + 1][better] = cand[better]
            pred[layer + 1][better] = idx
            for j in np.nonzero(better)[0]:
                heapq.heappush(heap, (float(cand[j]), layer + 1, int(j)))

    # last layer -> virtual target adds -log(H_m)
    final = dist[-1] + neg_log_h[-1]
    end = int(np.argmin(final))
    total = float(final[end])
    chosen = [0] * n_layers
    chosen[-1] = end
    for layer in range(n_layers - 1, 0, -1):
        chosen[layer - 1] = int(pred[layer][chosen[layer]])
    links = [((i, chosen[i]), (i + 1, chosen[i + 1])) for i in range(n_layers - 1)]
    return SelectionResult(chosen=chosen, links=links, total_cost=total)

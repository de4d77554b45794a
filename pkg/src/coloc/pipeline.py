"""End-to-end orchestration: cues -> fused mask -> proposals -> tube.

Co-saliency is built per group (videos sharing a label in weakly supervised
mode, everything pooled in unsupervised mode); each frame then gets its three
cues fused into a rough mask, mask-specific proposals, and finally one box
per frame from the shortest-path solve. Everything is deterministic for a
fixed seed.
"""

from __future__ import annotations

import json
import os
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from . import cosaliency, cues, fusion, localization, manifest as mf, providers, proposals

DEFAULT_LAMBDA = 5.0


@dataclass
class RunConfig:
    lam: float = DEFAULT_LAMBDA
    n_components: int = fusion.N_COMPONENTS
    frame_sampling_stride: int = 1
    hierarchy_min_size: int = 4
    hierarchy_var_threshold: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.n_components < 1:
            raise ValueError("n_components must be >= 1")
        if self.frame_sampling_stride < 1:
            raise ValueError("frame_sampling_stride must be >= 1")


@dataclass
class VideoGraph:
    """Per-video intermediate: everything up to (but excluding) the
    lambda-dependent path solve."""

    video_id: str
    frame_indices: list                  # manifest frame indices actually processed
    frame_paths: list
    graph: localization.ProposalGraph | None
    cue_reliability: dict = field(default_factory=dict)  # kind -> mean psi
    ground_truth: dict = field(default_factory=dict)     # frame index -> box
    error: str | None = None


def iou(a: proposals.BoundingBox, b: proposals.BoundingBox) -> float:
    """Intersection over union of two boxes in edge coordinates."""
    iw = min(a.right, b.right) - max(a.left, b.left)
    ih = min(a.bottom, b.bottom) - max(a.top, b.top)
    inter = max(iw, 0) * max(ih, 0)
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


def corloc(predictions, manifest: mf.Manifest) -> dict:
    """CorLoc: fraction of annotated frames with IoU strictly above 0.5.

    predictions: {video_id: {frame_index: BoundingBox}}. Frames without a
    prediction count as misses. Reported per category and macro-averaged."""
    per_cat_hits = {}
    per_cat_total = {}
    hits = total = 0
    for video in manifest.videos:
        cat = video.label or ""
        boxes = predictions.get(video.video_id, {})
        for i, frame in enumerate(video.frames):
            if frame.ground_truth is None:
                continue
            total += 1
            per_cat_total[cat] = per_cat_total.get(cat, 0) + 1
            pred = boxes.get(i)
            if pred is not None and iou(pred, frame.ground_truth) > 0.5:
                hits += 1
                per_cat_hits[cat] = per_cat_hits.get(cat, 0) + 1
    per_category = {c: per_cat_hits.get(c, 0) / n for c, n in sorted(per_cat_total.items())}
    return {
        "per_category": per_category,
        "average": float(np.mean(list(per_category.values()))) if per_category else 0.0,
        "overall": hits / total if total else 0.0,
        "n_annotated": total,
    }


def _load_frame(path) -> np.ndarray:
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise FileNotFoundError(f"unreadable frame: {path}")
    return img[:, :, ::-1].astype(np.float32) / 255.0


def _frame_cue(frame_spec, kind, shape, root_resolver, compute):
    path = frame_spec.cue_paths.get(kind)
    if path:
        return providers.load_cue_map(root_resolver(path), expected_shape=shape, kind=kind)
    return compute()


def _group_key(video: mf.VideoSpec, mode: str) -> str:
    return (video.label or "") if mode == mf.WEAKLY_SUPERVISED else "__all__"


def build_video_graphs(manifest: mf.Manifest, config: RunConfig, dump_dir=None) -> list:
    """Heavy, lambda-independent part of the pipeline.

    Returns one VideoGraph per manifest video (failed videos carry an error
    string instead of a graph). When dump_dir is set, the per-group frame
    hierarchy (JSON), the co-saliency maps, and the rough object masks
    (8-bit PNG) are persisted under it."""
    groups = {}
    for vi, video in enumerate(manifest.videos):
        groups.setdefault(_group_key(video, manifest.mode), []).append(vi)

    out = [None] * len(manifest.videos)
    for key, vids in sorted(groups.items()):
        _process_group(manifest, config, vids, out, key, dump_dir)
    return out


def _process_group(manifest, config, vids, out, group_key="", dump_dir=None):
    stride = config.frame_sampling_stride
    loaded = {}      # video index -> (frame_indices, frames list)
    failures = {}
    for vi in vids:
        video = manifest.videos[vi]
        idxs = list(range(0, len(video.frames), stride))
        try:
            frames = [_load_frame(manifest.resolve(video.frames[i].frame_path)) for i in idxs]
        except Exception as exc:  # per-video failure, run continues
            failures[vi] = f"{type(exc).__name__}: {exc}"
            continue
        loaded[vi] = (idxs, frames)

    # visual saliency for every frame of the group (provider or file); the
    # hierarchy always aggregates the built-in saliency so a bad supplied
    # visual cue cannot leak into the co-saliency cue
    flat_frames, flat_visual, flat_base, owner = [], [], [], []
    for vi, (idxs, frames) in sorted(loaded.items()):
        video = manifest.videos[vi]
        for j, i in enumerate(idxs):
            frame = frames[j]
            base = providers.spectral_saliency(frame)
            if video.frames[i].cue_paths.get(cues.VISUAL):
                vis = _frame_cue(video.frames[i], cues.VISUAL, frame.shape[:2],
                                 manifest.resolve, lambda: None)
            else:
                vis = base
            owner.append((vi, j))
            flat_frames.append(frame)
            flat_visual.append(vis.values)
            flat_base.append(base.values)

    # hierarchical co-saliency over the whole group, unless every frame has a
    # precomputed map on disk
    cosal_values = [None] * len(flat_frames)
    need = [g for g, (vi, j) in enumerate(owner)
            if cues.COSALIENCY not in manifest.videos[vi].frames[loaded[vi][0][j]].cue_paths]
    if need and len(flat_frames) > 0:
        hier = cosaliency.build_hierarchy(flat_frames, min_size=config.hierarchy_min_size,
                                          var_threshold=config.hierarchy_var_threshold,
                                          seed=config.seed)
        base = {g: flat_base[g] for g in range(len(flat_frames))}
        co_maps = cosaliency.aggregate_up(hier, flat_frames, base)
        ground = cosaliency.propagate_down(hier, flat_frames, co_maps)
        for g in range(len(flat_frames)):
            cosal_values[g] = ground[g]
        if dump_dir is not None:
            name = group_key.strip("_").replace("/", "_") or "unlabeled"
            path = Path(dump_dir) / f"hierarchy_{name}.json"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(hier.to_json() + "\n")
    for g, (vi, j) in enumerate(owner):
        video = manifest.videos[vi]
        i = loaded[vi][0][j]
        if cues.COSALIENCY in video.frames[i].cue_paths:
            cosal_values[g] = _frame_cue(video.frames[i], cues.COSALIENCY,
                                         flat_frames[g].shape[:2], manifest.resolve,
                                         lambda: None).values

    per_video_slices = {}
    for g, (vi, j) in enumerate(owner):
        per_video_slices.setdefault(vi, []).append(g)

    workers = max(1, int(os.environ.get("COLOC_THREADS", "1")))

    def process(vi):
        try:
            return _process_video(manifest, config, vi, loaded[vi][0],
                                  [flat_frames[g] for g in per_video_slices[vi]],
                                  [flat_visual[g] for g in per_video_slices[vi]],
                                  [cosal_values[g] for g in per_video_slices[vi]],
                                  dump_dir=dump_dir)
        except Exception as exc:
            return VideoGraph(video_id=manifest.videos[vi].video_id,
                              frame_indices=[], frame_paths=[], graph=None,
                              error=f"{type(exc).__name__}: {exc}\n{traceback.format_exc()}")

    todo = sorted(per_video_slices)
    if workers > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(process, todo))
    else:
        results = [process(vi) for vi in todo]
    for vi, res in zip(todo, results):
        out[vi] = res
    for vi, err in failures.items():
        out[vi] = VideoGraph(video_id=manifest.videos[vi].video_id, frame_indices=[],
                             frame_paths=[], graph=None, error=err)


def _bidirectional_motion(frames):
    """Per-frame motion cue: the pointwise minimum of the backward and
    forward block-flow maps, renormalized.

    Occlusion artifacts (blocks the object just vacated or is about to
    cover) spike in only one direction, so the minimum suppresses them
    while genuine object motion survives both. The first frame duplicates
    the second frame's map."""
    n = len(frames)
    if n == 1:
        return [providers.motion_saliency(frames[0], frames[0])]
    backward = [providers.motion_saliency(frames[j - 1], frames[j]).values
                for j in range(1, n)]
    forward = [providers.motion_saliency(frames[j + 1], frames[j]).values
               for j in range(1, n - 1)]
    out = [None] * n
    for j in range(1, n):
        values = backward[j - 1]
        if j - 1 < len(forward):
            values = np.minimum(values, forward[j - 1])
        lo, hi = float(values.min()), float(values.max())
        if hi > lo:
            values = (values - lo) / (hi - lo)
        out[j] = cues.CueMap(values.astype(np.float32), kind=cues.MOTION)
    out[0] = out[1]
    return out


def _process_video(manifest, config, vi, idxs, frames, visual, cosal,
                   dump_dir=None) -> VideoGraph:
    video = manifest.videos[vi]
    n = len(frames)

    masks = [None] * n
    psis = {k: [] for k in cues.CUE_KINDS}
    pending = []
    if any(not video.frames[i].cue_paths.get(cues.MOTION) for i in idxs):
        motion_maps = _bidirectional_motion(frames)
    else:
        motion_maps = [None] * n
    for j in range(n):
        frame = frames[j]
        motion = _frame_cue(video.frames[idxs[j]], cues.MOTION, frame.shape[:2],
                            manifest.resolve, lambda j=j: motion_maps[j])
        cue_maps = [
            cues.CueMap(cosal[j], kind=cues.COSALIENCY),
            cues.CueMap(visual[j], kind=cues.VISUAL),
            motion,
        ]
        for cm in cue_maps:
            psis[cm.kind].append(cues.reliability_score(cm, cues.build_trimap(cm)))
        try:
            gmm, fixed_bg = fusion.build_fused_gmm(
                frame, cue_maps, n_components=config.n_components,
                seed=config.seed + 7919 * vi + j)
            mask = fusion.grabcut_once(frame, gmm, fixed_bg)
            if not mask.any():
                raise fusion.DegenerateFrameError("graph cut returned an empty mask")
            masks[j] = mask
        except fusion.DegenerateFrameError:
            if j > 0 and masks[j - 1] is not None:
                masks[j] = masks[j - 1]
            else:
                pending.append(j)
    for j in reversed(pending):
        nxt = next((m for m in masks[j:] if m is not None), None)
        if nxt is None:
            raise fusion.DegenerateFrameError("every frame of the video is degenerate")
        masks[j] = nxt

    if dump_dir is not None:
        for sub, maps in (("cosaliency", cosal), ("masks", masks)):
            d = Path(dump_dir) / sub / video.video_id
            d.mkdir(parents=True, exist_ok=True)
            for j in range(n):
                providers.save_cue_map(d / f"{idxs[j]:04d}.png", maps[j])

    layers, ref_perims = [], []
    for j in range(n):
        edges = proposals.edge_map(frames[j])
        if not edges.any():
            # flat frame: treat the full frame border as the edge set
            edges = np.zeros_like(edges)
            edges[0, :] = edges[-1, :] = True
            edges[:, 0] = edges[:, -1] = True
        ms = proposals.mask_specific_edges(masks[j], edges)
        ref = proposals.reference_box(ms)
        cand = proposals.generate_proposals(masks[j], ms, seed=config.seed + 104729 * vi + j)
        layers.append(cand)
        ref_perims.append(ref.perimeter)

    graph = localization.build_graph(layers, ref_perims)
    return VideoGraph(
        video_id=video.video_id,
        frame_indices=[idxs[j] for j in range(n)],
        frame_paths=[str(manifest.resolve(video.frames[idxs[j]].frame_path)) for j in range(n)],
        graph=graph,
        cue_reliability={k: float(np.mean(v)) if v else 0.0 for k, v in psis.items()},
        ground_truth={idxs[j]: video.frames[idxs[j]].ground_truth
                      for j in range(n) if video.frames[idxs[j]].ground_truth},
    )


def solve_video(vg: VideoGraph, lam: float) -> dict:
    """Lambda-dependent tail: shortest path and the serializable record."""
    record = {
        "schema_version": mf.SCHEMA_VERSION,
        "video_id": vg.video_id,
        "lambda": lam,
        "error": vg.error,
        "total_cost": None,
        "cue_reliability": vg.cue_reliability,
        "frames": [],
    }
    if vg.graph is None:
        return record
    sel = localization.shortest_path(vg.graph, lam)
    record["total_cost"] = sel.total_cost
    for j, (idx, path) in enumerate(zip(vg.frame_indices, vg.frame_paths)):
        box = vg.graph.layers[j][sel.chosen[j]]
        gt = vg.ground_truth.get(idx)
        record["frames"].append({
            "frame_index": idx,
            "frame_path": path,
            "box": box.to_dict(),
            "node_weight": float(vg.graph.node_weights[j][sel.chosen[j]]),
            "node_cost": float(-np.log(vg.graph.node_weights[j][sel.chosen[j]])),
            "ground_truth": gt.to_dict() if gt else None,
        })
    return record


def run(manifest: mf.Manifest, config: RunConfig, out_dir,
        dump_intermediates=False, dump_proposals=False) -> list:
    """Full pipeline; writes one result JSON per video into out_dir.

    dump_intermediates persists the group hierarchies, co-saliency maps,
    and rough masks; dump_proposals writes each video's full per-frame
    proposal lists."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    graphs = build_video_graphs(manifest, config,
                                dump_dir=out_dir if dump_intermediates else None)
    written = []
    for vg in graphs:
        record = solve_video(vg, config.lam)
        safe_id = vg.video_id.replace("/", "__")
        path = out_dir / f"{safe_id}.json"
        with open(path, "w") as fh:
            json.dump(record, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
        if dump_proposals and vg.graph is not None:
            pdir = out_dir / "proposals"
            pdir.mkdir(exist_ok=True)
            with open(pdir / f"{safe_id}.json", "w") as fh:
                json.dump({"schema_version": mf.SCHEMA_VERSION, "video_id": vg.video_id,
                           "frames": [{"frame_index": idx,
                                       "proposals": proposals.to_json_records(layer)}
                                      for idx, layer in zip(vg.frame_indices, vg.graph.layers)]},
                          fh, indent=2, sort_keys=True)
                fh.write("\n")
    return written


def load_predictions(results_dir) -> dict:
    """{video_id: {frame_index: BoundingBox}} from a results directory."""
    predictions = {}
    for path in sorted(Path(results_dir).glob("*.json")):
        with open(path) as fh:
            record = json.load(fh)
        if "video_id" not in record:   # e.g. dumped hierarchy files
            continue
        predictions[record["video_id"]] = {
            f["frame_index"]: proposals.BoundingBox.from_dict(f["box"])
            for f in record.get("frames", [])
        }
    return predictions

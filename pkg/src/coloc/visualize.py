"""Overlay predicted (and ground-truth) boxes on frames."""

from __future__ import annotations

import json
import warnings
from pathlib import Path

import cv2

PRED_COLOR = (0, 0, 255)   # BGR red
GT_COLOR = (0, 255, 0)     # BGR green
THICKNESS = 2


def _draw(img, box, color):
    cv2.rectangle(img, (int(box["left"]), int(box["top"])),
                  (int(box["right"]), int(box["bottom"])), color, THICKNESS)


def visualize_results(results_dir, out_dir) -> list:
    """Render one annotated PNG per result frame; returns written paths."""
    out_dir = Path(out_dir)
    written = []
    for result_path in sorted(Path(results_dir).glob("*.json")):
        with open(result_path) as fh:
            record = json.load(fh)
        if "video_id" not in record:   # e.g. dumped hierarchy files
            continue
        video_dir = out_dir / record["video_id"]
        for frame in record.get("frames", []):
            img = cv2.imread(frame["frame_path"], cv2.IMREAD_COLOR)
            if img is None:
                warnings.warn(f"skipping missing frame {frame['frame_path']}")
                continue
            if frame.get("ground_truth"):
                _draw(img, frame["ground_truth"], GT_COLOR)
            _draw(img, frame["box"], PRED_COLOR)
            video_dir.mkdir(parents=True, exist_ok=True)
            path = video_dir / f"{frame['frame_index']:04d}.png"
            cv2.imwrite(str(path), img)
            written.append(path)
    return written

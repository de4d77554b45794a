"""Dataset manifest, ground-truth, and result JSON schemas (version 1)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .proposals import BoundingBox

SCHEMA_VERSION = 1
WEAKLY_SUPERVISED = "weakly_supervised"
UNSUPERVISED = "unsupervised"
MODES = (WEAKLY_SUPERVISED, UNSUPERVISED)

_BOX_SCHEMA = {
    "type": "object",
    "required": ["top", "bottom", "left", "right"],
    "properties": {k: {"type": "number"} for k in ("top", "bottom", "left", "right")},
}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "mode", "videos"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "mode": {"enum": list(MODES)},
        "videos": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["video_id", "frames"],
                "properties": {
                    "video_id": {"type": "string"},
                    "label": {"type": ["string", "null"]},
                    "frames": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["frame_path"],
                            "properties": {
                                "frame_path": {"type": "string"},
                                "cues": {
                                    "type": "object",
                                    "properties": {
                                        k: {"type": ["string", "null"]}
                                        for k in ("cosaliency", "visual", "motion")
                                    },
                                },
                                "ground_truth": {"oneOf": [_BOX_SCHEMA, {"type": "null"}]},
                            },
                        },
                    },
                },
            },
        },
    },
}

GROUND_TRUTH_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "videos"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "videos": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "additionalProperties": _BOX_SCHEMA,
            },
        },
    },
}

RESULT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "video_id", "lambda", "frames"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "video_id": {"type": "string"},
        "lambda": {"type": "number"},
        "total_cost": {"type": ["number", "null"]},
        "error": {"type": ["string", "null"]},
        "frames": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["frame_index", "frame_path", "box"],
                "properties": {
                    "frame_index": {"type": "integer"},
                    "frame_path": {"type": "string"},
                    "box": _BOX_SCHEMA,
                },
            },
        },
    },
}


@dataclass
class FrameSpec:
    frame_path: str
    cue_paths: dict = field(default_factory=dict)   # kind -> path or None
    ground_truth: BoundingBox | None = None


@dataclass
class VideoSpec:
    video_id: str
    frames: list
    label: str | None = None


@dataclass
class Manifest:
    videos: list
    mode: str = WEAKLY_SUPERVISED
    root: Path = Path(".")

    def resolve(self, rel_path) -> Path:
        p = Path(rel_path)
        return p if p.is_absolute() else self.root / p


def manifest_to_dict(m: Manifest) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "mode": m.mode,
        "videos": [
            {
                "video_id": v.video_id,
                "label": v.label,
                "frames": [
                    {
                        "frame_path": f.frame_path,
                        "cues": {k: f.cue_paths.get(k) for k in ("cosaliency", "visual", "motion")},
                        "ground_truth": f.ground_truth.to_dict() if f.ground_truth else None,
                    }
                    for f in v.frames
                ],
            }
            for v in m.videos
        ],
    }


def load_manifest(path, check_paths=True) -> Manifest:
    path = Path(path)
    with open(path) as fh:
        data = json.load(fh)
    jsonschema.validate(data, MANIFEST_SCHEMA)
    root = path.parent
    videos = []
    missing = []
    for v in data["videos"]:
        frames = []
        for f in v["frames"]:
            gt = f.get("ground_truth")
            frames.append(FrameSpec(
                frame_path=f["frame_path"],
                cue_paths={k: p for k, p in (f.get("cues") or {}).items() if p},
                ground_truth=BoundingBox.from_dict(gt) if gt else None,
            ))
            fp = Path(f["frame_path"])
            if check_paths and not (fp if fp.is_absolute() else root / fp).exists():
                missing.append(f["frame_path"])
        videos.append(VideoSpec(video_id=v["video_id"], label=v.get("label"), frames=frames))
    if missing:
        raise FileNotFoundError(f"manifest references missing frames: {missing[:5]}"
                                + ("..." if len(missing) > 5 else ""))
    return Manifest(videos=videos, mode=data["mode"], root=root)


def save_manifest(m: Manifest, path):
    with open(path, "w") as fh:
        json.dump(manifest_to_dict(m), fh, indent=2, sort_keys=True)
        fh.write("\n")


def save_ground_truth(manifest: Manifest, path):
    """Standalone ground-truth JSON extracted from a manifest."""
    data = {
        "schema_version": SCHEMA_VERSION,
        "videos": {
            v.video_id: {
                str(i): f.ground_truth.to_dict()
                for i, f in enumerate(v.frames) if f.ground_truth
            }
            for v in manifest.videos
        },
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_ground_truth(path) -> dict:
    """{video_id: {frame_index: BoundingBox}} from a ground-truth JSON."""
    with open(path) as fh:
        data = json.load(fh)
    jsonschema.validate(data, GROUND_TRUTH_SCHEMA)
    return {
        vid: {int(i): BoundingBox.from_dict(b) for i, b in boxes.items()}
        for vid, boxes in data["videos"].items()
    }

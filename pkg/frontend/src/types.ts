export const SCHEMA_VERSION = 1;

export interface Box {
    top: number;
    bottom: number;
    left: number;
    right: number;
}

export interface FrameEntry {
    frame_path: string;
    cues: { cosaliency: string | null; visual: string | null; motion: string | null };
    ground_truth: Box | null;
}

export interface VideoEntry {
    video_id: string;
    label: string | null;
    frames: FrameEntry[];
}

export interface Manifest {
    schema_version: typeof SCHEMA_VERSION;
    mode: 'weakly_supervised' | 'unsupervised';
    videos: VideoEntry[];
}

export interface GroundTruthFile {
    schema_version: typeof SCHEMA_VERSION;
    videos: { [videoId: string]: { [frameIndex: string]: Box } };
}

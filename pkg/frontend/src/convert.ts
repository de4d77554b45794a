import * as fs from 'fs';
import * as path from 'path';

import { Box, FrameEntry, GroundTruthFile, Manifest, SCHEMA_VERSION, VideoEntry } from './types';

const FRAME_EXTENSIONS = new Set(['.png', '.jpg', '.jpeg', '.bmp']);

export interface ConvertOptions {
    root: string;
    out: string;
    log?: (message: string) => void;
}

function listDirs(dir: string): string[] {
    return fs.readdirSync(dir, { withFileTypes: true })
        .filter(e => e.isDirectory())
        .map(e => e.name)
        .sort();
}

function listFrames(dir: string): string[] {
    if (!fs.existsSync(dir)) {
        return [];
    }
    return fs.readdirSync(dir)
        .filter(name => FRAME_EXTENSIONS.has(path.extname(name).toLowerCase()))
        .sort();
}

/** "xmin ymin xmax ymax" on the first non-empty line. */
export function parseTxtAnnotation(text: string): Box | null {
    const line = text.split(/\r?\n/).find(l => l.trim().length > 0);
    if (!line) {
        return null;
    }
    const parts = line.trim().split(/[\s,]+/).map(Number);
    if (parts.length < 4 || parts.some(n => !Number.isFinite(n))) {
        return null;
    }
    const [xmin, ymin, xmax, ymax] = parts;
    return toBox(xmin, ymin, xmax, ymax);
}

/** Minimal VOC-style XML: first bndbox's xmin/ymin/xmax/ymax tags. */
export function parseVocAnnotation(text: string): Box | null {
    const grab = (tag: string): number | null => {
        const m = text.match(new RegExp(`<${tag}>\\s*(-?[\\d.]+)\\s*</${tag}>`));
        return m ? Number(m[1]) : null;
    };
    const xmin = grab('xmin');
    const ymin = grab('ymin');
    const xmax = grab('xmax');
    const ymax = grab('ymax');
    if (xmin === null || ymin === null || xmax === null || ymax === null) {
        return null;
    }
    return toBox(xmin, ymin, xmax, ymax);
}

function toBox(xmin: number, ymin: number, xmax: number, ymax: number): Box | null {
    if (xmax < xmin || ymax < ymin) {
        return null;
    }
    return { top: ymin, bottom: ymax, left: xmin, right: xmax };
}

function annotationFor(videoDir: string, frameName: string): string | null {
    const stem = path.basename(frameName, path.extname(frameName));
    for (const ext of ['.txt', '.xml']) {
        const candidate = path.join(videoDir, 'annotations', stem + ext);
        if (fs.existsSync(candidate)) {
            return candidate;
        }
    }
    return null;
}

function loadBox(annotationPath: string): Box | null {
    const text = fs.readFileSync(annotationPath, 'utf-8');
    return annotationPath.endsWith('.xml')
        ? parseVocAnnotation(text)
        : parseTxtAnnotation(text);
}

/**
 * Walk a dataset laid out as <root>/<category>/<video>/frames/*.png with
 * optional per-frame annotations/<frame>.txt|.xml, and build a manifest.
 * Malformed annotations are skipped with a logged warning; videos without
 * any annotation are still included.
 */
export function convertDataset(options: ConvertOptions): { manifest: Manifest; groundTruth: GroundTruthFile } {
    const log = options.log ?? ((m: string) => console.warn(m));
    const videos: VideoEntry[] = [];
    const gt: GroundTruthFile = { schema_version: SCHEMA_VERSION, videos: {} };

    for (const category of listDirs(options.root)) {
        const categoryDir = path.join(options.root, category);
        for (const video of listDirs(categoryDir)) {
            const videoDir = path.join(categoryDir, video);
            const frameDir = fs.existsSync(path.join(videoDir, 'frames'))
                ? path.join(videoDir, 'frames')
                : videoDir;
            const frames: FrameEntry[] = [];
            const videoId = `${category}/${video}`;
            const boxes: { [frameIndex: string]: Box } = {};
            listFrames(frameDir).forEach((name, index) => {
                const framePath = path.join(frameDir, name);
                let box: Box | null = null;
                const annotation = annotationFor(videoDir, name);
                if (annotation) {
                    box = loadBox(annotation);
                    if (box === null) {
                        log(`warning: skipping malformed annotation ${annotation}`);
                    }
                }
                if (box) {
                    boxes[String(index)] = box;
                }
                frames.push({
                    frame_path: path.relative(options.out, framePath),
                    cues: { cosaliency: null, visual: null, motion: null },
                    ground_truth: box,
                });
            });
            if (frames.length === 0) {
                log(`warning: ${videoId} has no frames, skipping`);
                continue;
            }
            videos.push({ video_id: videoId, label: category, frames });
            gt.videos[videoId] = boxes;
        }
    }
    return {
        manifest: { schema_version: SCHEMA_VERSION, mode: 'weakly_supervised', videos },
        groundTruth: gt,
    };
}

export function writeOutputs(out: string, manifest: Manifest, groundTruth: GroundTruthFile): void {
    fs.mkdirSync(out, { recursive: true });
    fs.writeFileSync(path.join(out, 'manifest.json'), JSON.stringify(manifest, null, 2) + '\n');
    fs.writeFileSync(path.join(out, 'ground_truth.json'), JSON.stringify(groundTruth, null, 2) + '\n');
}

import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';

import { afterEach, beforeEach, describe, expect, it } from 'vitest';

import { convertDataset, parseTxtAnnotation, parseVocAnnotation } from './convert';

let root: string;
let out: string;

function put(relative: string, content: Buffer | string): void {
    const full = path.join(root, relative);
    fs.mkdirSync(path.dirname(full), { recursive: true });
    fs.writeFileSync(full, content);
}

beforeEach(() => {
    root = fs.mkdtempSync(path.join(os.tmpdir(), 'prep-root-'));
    out = fs.mkdtempSync(path.join(os.tmpdir(), 'prep-out-'));
});

afterEach(() => {
    fs.rmSync(root, { recursive: true, force: true });
    fs.rmSync(out, { recursive: true, force: true });
});

describe('annotation parsing', () => {
    it('relabels txt corners to top/bottom/left/right', () => {
        expect(parseTxtAnnotation('5 2 15 12\n')).toEqual({ top: 2, bottom: 12, left: 5, right: 15 });
    });

    it('parses voc xml', () => {
        const xml = '<annotation><object><bndbox>'
            + '<xmin>5</xmin><ymin>2</ymin><xmax>15</xmax><ymax>12</ymax>'
            + '</bndbox></object></annotation>';
        expect(parseVocAnnotation(xml)).toEqual({ top: 2, bottom: 12, left: 5, right: 15 });
    });

    it('rejects malformed content', () => {
        expect(parseTxtAnnotation('not numbers\n')).toBeNull();
        expect(parseTxtAnnotation('9 9 1 1\n')).toBeNull();   // inverted box
        expect(parseVocAnnotation('<xmin>3</xmin>')).toBeNull();
    });
});

describe('convertDataset', () => {
    it('builds a schema-shaped manifest with relative paths', () => {
        put('cat/v1/frames/0000.png', 'x');
        put('cat/v1/frames/0001.png', 'x');
        put('cat/v1/annotations/0000.txt', '5 2 15 12');
        put('dog/v2/frames/0000.png', 'x');
        const { manifest, groundTruth } = convertDataset({ root, out, log: () => undefined });
        expect(manifest.schema_version).toBe(1);
        expect(manifest.mode).toBe('weakly_supervised');
        expect(manifest.videos.map(v => v.video_id)).toEqual(['cat/v1', 'dog/v2']);
        expect(manifest.videos[0].label).toBe('cat');
        expect(manifest.videos[0].frames).toHaveLength(2);
        expect(manifest.videos[0].frames[0].ground_truth).toEqual(
            { top: 2, bottom: 12, left: 5, right: 15 });
        expect(manifest.videos[0].frames[1].ground_truth).toBeNull();
        expect(groundTruth.videos['cat/v1']['0']).toEqual(
            { top: 2, bottom: 12, left: 5, right: 15 });
        const framePath = manifest.videos[0].frames[0].frame_path;
        expect(path.isAbsolute(framePath)).toBe(false);
        expect(fs.existsSync(path.resolve(out, framePath))).toBe(true);
    });

    it('skips malformed annotations with a warning but keeps the frame', () => {
        put('cat/v1/frames/0000.png', 'x');
        put('cat/v1/annotations/0000.txt', 'garbage');
        const warnings: string[] = [];
        const { manifest, groundTruth } = convertDataset({ root, out, log: m => warnings.push(m) });
        expect(manifest.videos[0].frames).toHaveLength(1);
        expect(manifest.videos[0].frames[0].ground_truth).toBeNull();
        expect(groundTruth.videos['cat/v1']).toEqual({});
        expect(warnings.some(w => w.includes('malformed'))).toBe(true);
    });

    it('includes videos with zero annotations', () => {
        put('cat/v1/frames/0000.png', 'x');
        const { manifest, groundTruth } = convertDataset({ root, out, log: () => undefined });
        expect(manifest.videos).toHaveLength(1);
        expect(groundTruth.videos['cat/v1']).toEqual({});
    });

    it('supports frames directly in the video directory and xml annotations', () => {
        put('cat/v3/0000.jpg', 'x');
        put('cat/v3/annotations/0000.xml',
            '<bndbox><xmin>1</xmin><ymin>2</ymin><xmax>3</xmax><ymax>4</ymax></bndbox>');
        const { manifest } = convertDataset({ root, out, log: () => undefined });
        expect(manifest.videos[0].frames[0].ground_truth).toEqual(
            { top: 2, bottom: 4, left: 1, right: 3 });
    });

    it('orders frames and videos deterministically', () => {
        put('cat/v1/frames/0002.png', 'x');
        put('cat/v1/frames/0000.png', 'x');
        put('cat/v1/frames/0001.png', 'x');
        const { manifest } = convertDataset({ root, out, log: () => undefined });
        const names = manifest.videos[0].frames.map(f => path.basename(f.frame_path));
        expect(names).toEqual(['0000.png', '0001.png', '0002.png']);
    });
});

#!/usr/bin/env node
import * as path from 'path';

import { convertDataset, writeOutputs } from './convert';

function parseArgs(argv: string[]): { root: string; out: string } {
    let root: string | null = null;
    let out: string | null = null;
    for (let i = 0; i < argv.length; i++) {
        if (argv[i] === '--root') {
            root = argv[++i];
        } else if (argv[i] === '--out') {
            out = argv[++i];
        } else {
            console.error(`unknown argument: ${argv[i]}`);
            process.exit(2);
        }
    }
    if (!root || !out) {
        console.error('usage: prepare --root DATASET_DIR --out OUT_DIR');
        process.exit(2);
    }
    return { root: path.resolve(root), out: path.resolve(out) };
}

function main(): void {
    const { root, out } = parseArgs(process.argv.slice(2));
    const { manifest, groundTruth } = convertDataset({ root, out });
    writeOutputs(out, manifest, groundTruth);
    const annotated = Object.values(groundTruth.videos)
        .reduce((acc, boxes) => acc + Object.keys(boxes).length, 0);
    console.log(`wrote ${path.join(out, 'manifest.json')} `
        + `(${manifest.videos.length} videos, ${annotated} annotated frames)`);
}

main();

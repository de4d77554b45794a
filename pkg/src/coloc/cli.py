"""Command-line entry points: run, eval, synth, visualize."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import manifest as mf, pipeline, synth, visualize


def _cmd_run(args):
    man = mf.load_manifest(args.manifest)
    config = pipeline.RunConfig(
        lam=args.lam, n_components=args.n_components,
        frame_sampling_stride=args.stride, seed=args.seed,
        hierarchy_min_size=args.hierarchy_min_size,
        hierarchy_var_threshold=args.hierarchy_var_threshold,
    )
    written = pipeline.run(man, config, args.out,
                           dump_intermediates=args.dump_intermediates,
                           dump_proposals=args.dump_proposals)
    for path in written:
        print(path)
    failed = []
    for path in written:
        with open(path) as fh:
            if json.load(fh).get("error"):
                failed.append(path.name)
    if failed:
        print(f"warning: {len(failed)} video(s) failed: {', '.join(failed)}",
              file=sys.stderr)
    return 0


def _cmd_eval(args):
    man = mf.load_manifest(args.manifest, check_paths=False)
    predictions = pipeline.load_predictions(args.results)
    report = pipeline.corloc(predictions, man)
    for cat, score in report["per_category"].items():
        print(f"corloc[{cat or '(unlabeled)'}] = {score:.4f}")
    print(f"corloc average = {report['average']:.4f} "
          f"(overall {report['overall']:.4f} on {report['n_annotated']} frames)")
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _cmd_synth(args):
    spec = {}
    if args.spec:
        with open(args.spec) as fh:
            spec = json.load(fh)
    path = synth.synth_dataset(spec, args.out)
    print(path)
    return 0


def _cmd_visualize(args):
    written = visualize.visualize_results(args.results, args.out)
    print(f"wrote {len(written)} images under {Path(args.out)}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="coloc",
                                     description="video co-localization pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="localize the common object in each video")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=pipeline.DEFAULT_LAMBDA)
    p.add_argument("--n-components", type=int, default=5)
    p.add_argument("--stride", type=int, default=1,
                   help="process every Nth frame of each video")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hierarchy-min-size", type=int, default=4)
    p.add_argument("--hierarchy-var-threshold", type=float, default=None)
    p.add_argument("--dump-intermediates", action="store_true",
                   help="persist hierarchies, co-saliency maps, and masks")
    p.add_argument("--dump-proposals", action="store_true",
                   help="persist every frame's full proposal list")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("eval", help="CorLoc of saved results against a manifest")
    p.add_argument("--results", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--report", default=None, help="optional JSON report path")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--spec", default=None, help="JSON spec (defaults used if omitted)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("visualize", help="draw predicted/ground-truth boxes")
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_visualize)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""GLRAM / K-means+GLRAM / CGLRAM error-vs-rank sweep on an IDX digit set.

    python scripts/digits_sweep.py tests/data/digits-images-idx3-ubyte \
        --labels tests/data/digits-labels-idx1-ubyte --out results/digits

Writes <out>.json plus <out>.csv, <out>_comparisons.csv and <out>_curves.csv,
and prints a table of best-seed WCSSRE and reduction ratios per rank.
"""
import argparse
from pathlib import Path

from cglram.bench import BenchSettings, emit, run_compare
from cglram.dataio import load_idx_images


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("images")
    ap.add_argument("--labels")
    ap.add_argument("--limit", type=int)
    ap.add_argument("--ks", default="4,8,12,16,20,24,28")
    ap.add_argument("--K", type=int, default=10)
    ap.add_argument("--seeds", default="0,1,2")
    ap.add_argument("--init", default="partition")
    ap.add_argument("--out", default="results/digits")
    args = ap.parse_args(argv)

    stack = load_idx_images(args.images, args.labels, limit=args.limit)
    ks = [int(x) for x in args.ks.split(",")]
    seeds = [int(x) for x in args.seeds.split(",")]
    settings = BenchSettings(init=args.init, dataset=Path(args.images).name)
    report = run_compare(stack, ks, args.K, seeds,
                         {"svd", "glram", "kmeans_glram", "cglram"}, settings)

    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    emit(report, "json", f"{args.out}.json")
    emit(report, "csv", f"{args.out}.csv")

    print(f"N={stack.N} {stack.r}x{stack.c}, K={args.K}, seeds={seeds}")
    print(f"{'k':>4} {'SVD':>11} {'GLRAM':>11} {'KM+GLRAM':>11} {'CGLRAM':>11}")
    for k in sorted(ks, reverse=True):
        row = [report.best(m, k) for m in ("svd", "glram", "kmeans_glram", "cglram")]
        print(f"{k:>4} " + " ".join(f"{r.wcssre:11.4e}" for r in row))
    print("\nreduction ratios (err_initial - err_final) / err_initial")
    for c in report.comparisons:
        if c.ratio is not None:
            print(f"k={c.k:>2} {c.baseline:>14} -> {c.method:<12} {c.ratio:8.2%}")


if __name__ == "__main__":
    main()

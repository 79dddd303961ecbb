"""Command-line entry point: ``cglram {synth,fit,compare,report}``.

Failures exit with status 1 and print a JSON error record on stderr.
"""
import argparse
import json
import sys

from .baselines import METHODS
from .bench import BenchSettings, emit, reduction_ratio_to_rank, run_compare, run_method
from .cluster import INIT_STRATEGIES, wcssre
from .dataio import SynthSpec, load_any, load_model, save_model, save_stack, synth_generate
from .errors import CglramError


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _methods(text):
    names = [x.strip().replace("-", "_").replace("+", "_").lower()
             for x in text.split(",") if x.strip()]
    aliases = {"k_means_glram": "kmeans_glram", "kmeans": "kmeans_glram"}
    return [aliases.get(n, n) for n in names]


def _add_data_args(p):
    p.add_argument("input", help="MSTK1, IDX3 or CSV stack file")
    p.add_argument("--labels", help="IDX1 label file for an IDX3 input")
    p.add_argument("--limit", type=int, help="use only the first LIMIT samples")
    p.add_argument("--raw", action="store_true",
                   help="keep IDX pixels as 0..255 instead of scaling to [0, 1]")


def _add_fit_args(p):
    p.add_argument("--K", type=int, default=10, help="cluster count")
    p.add_argument("--eta", type=float, default=1e-4, help="outer relative-drop threshold")
    p.add_argument("--max-outer", type=int, default=50)
    p.add_argument("--inner-max-iters", type=int, default=30)
    p.add_argument("--inner-rel-tol", type=float, default=1e-6)
    p.add_argument("--init", choices=INIT_STRATEGIES, default="partition")


def _settings(args, dataset):
    return BenchSettings(eta=args.eta, max_outer=args.max_outer,
                         inner_max_iters=args.inner_max_iters,
                         inner_rel_tol=args.inner_rel_tol, init=args.init, dataset=dataset,
                         normalization="raw" if args.raw else "idx_pixels_div_255")


def _load(args):
    return load_any(args.input, labels_path=args.labels, limit=args.limit, scale=not args.raw)


def build_parser():
    ap = argparse.ArgumentParser(prog="cglram", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic clustered low-rank stack")
    p.add_argument("--K-true", type=int, default=3)
    p.add_argument("--per-cluster", type=_ints, default=[40],
                   help="samples per cluster (one value, or one per cluster)")
    p.add_argument("--r", type=int, default=20)
    p.add_argument("--c", type=int, default=20)
    p.add_argument("--k-true", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--middle-scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit", help="fit one method and save the model")
    p.add_argument("method", type=lambda s: _methods(s)[0], choices=METHODS)
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--k", type=int, required=True, help="rank")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model path (.npz)")

    p = sub.add_parser("compare", help="sweep methods over ranks and seeds")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--methods", type=_methods, default=["glram", "kmeans_glram", "cglram"])
    p.add_argument("--ks", type=_ints, help="ranks to sweep")
    p.add_argument("--taus", type=_floats, help="reduction ratios, mapped to ranks by round(tau*r)")
    p.add_argument("--seeds", type=_ints, default=[0, 1, 2])
    p.add_argument("--workers", type=int, help="parallel runs (default: $CGLRAM_WORKERS or 1)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="recompute WCSSRE of saved models against their data")
    p.add_argument("models", nargs="+")
    p.add_argument("--data", help="stack file; defaults to the path stored in each model")
    p.add_argument("--labels")
    p.add_argument("--limit", type=int)
    p.add_argument("--raw", action="store_true")
    p.add_argument("--rtol", type=float, default=1e-10)
    return ap


def cmd_synth(args):
    per = args.per_cluster * args.K_true if len(args.per_cluster) == 1 else args.per_cluster
    spec = SynthSpec(K_true=args.K_true, per_cluster=per, r=args.r, c=args.c,
                     k_true=args.k_true, noise_sigma=args.noise,
                     middle_scale=args.middle_scale, seed=args.seed)
    stack = synth_generate(spec)
    save_stack(stack, args.out)
    print(json.dumps({"out": args.out, "N": stack.N, "r": stack.r, "c": stack.c}))
    return 0


def cmd_fit(args):
    stack = _load(args)
    record, model = run_method(stack, args.method, args.k, args.K, args.seed,
                               _settings(args, args.input))
    meta = {"record": record.__dict__, "data": args.input, "labels": args.labels,
            "limit": args.limit, "raw": args.raw}
    save_model(model, args.out, meta)
    print(json.dumps(record.__dict__, sort_keys=True))
    return 0


def cmd_compare(args):
    stack = _load(args)
    ks = list(args.ks or [])
    if args.taus:
        ks += [reduction_ratio_to_rank(t, stack.r) for t in args.taus]
    if not ks and args.methods:
        raise CglramError("give --ks or --taus")
    report = run_compare(stack, ks, args.K, args.seeds, set(args.methods),
                         _settings(args, args.input), workers=args.workers)
    emit(report, args.format, args.out)
    failed = sum(r.error is not None for r in report.records)
    print(json.dumps({"out": args.out, "runs": len(report.records), "failed": failed}))
    return 0


def cmd_report(args):
    rows, bad = [], 0
    for path in args.models:
        model, meta = load_model(path)
        data = args.data or meta["data"]
        stack = load_any(data, labels_path=args.labels or meta.get("labels"),
                         limit=args.limit if args.limit is not None else meta.get("limit"),
                         scale=not (args.raw or meta.get("raw", False)))
        recorded = meta["record"]["wcssre"]
        recomputed = wcssre(stack, model)
        diff = abs(recomputed - recorded)
        rel = diff / abs(recorded) if recorded else diff
        ok = diff <= args.rtol * abs(recorded) or diff == 0.0
        bad += not ok
        rows.append({"model": path, "method": meta["record"]["method"],
                     "k": meta["record"]["k"], "K": meta["record"]["K"],
                     "recorded_wcssre": recorded, "recomputed_wcssre": recomputed,
                     "rel_diff": rel, "ok": ok})
    print(json.dumps(rows, indent=2))
    return 1 if bad else 0


COMMANDS = {"synth": cmd_synth, "fit": cmd_fit, "compare": cmd_compare, "report": cmd_report}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (CglramError, OSError, ValueError, KeyError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Benchmark harness: run methods over ranks and seeds, compare, and emit reports."""
import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import METHODS, glram_model, kmeans_glram, storage_count, svd_model
from .cluster import CglramConfig, cglram_fit
from .errors import CglramError, InvalidRatio, IoFailure, UnknownMethod
from .glram import IterationConfig

WORKERS_ENV = "CGLRAM_WORKERS"

# (baseline, improved) pairs whose error reduction ratio is reported
COMPARISON_PAIRS = (
    ("glram", "kmeans_glram"),
    ("glram", "cglram"),
    ("kmeans_glram", "cglram"),
    ("cglram_initial", "cglram"),
)

RUN_COLUMNS = (
    "method", "dataset", "N", "r", "c", "K", "k", "seed", "wcssre", "initial_wcssre",
    "outer_iterations", "inner_iterations", "storage", "wall_ms", "converged",
    "stop_reason", "error", "wcssre_history", "config",
)
COMPARISON_COLUMNS = ("k", "baseline", "method", "err_initial", "err_final", "ratio")


@dataclass
class BenchSettings:
    """Hyperparameters shared by every run in a sweep."""

    eta: float = 1e-4
    max_outer: int = 50
    inner_max_iters: int = 30
    inner_rel_tol: float = 1e-6
    glram_max_iters: int = 100
    glram_rel_tol: float = 1e-6
    kmeans_max_iters: int = 100
    init: str = "partition"
    dataset: str = "stack"
    normalization: str = "idx_pixels_div_255"

    def echo(self):
        return asdict(self)


@dataclass
class RunRecord:
    method: str
    dataset: str
    N: int
    r: int
    c: int
    K: int
    k: int
    seed: int
    wcssre: Optional[float]
    initial_wcssre: Optional[float] = None
    wcssre_history: list = field(default_factory=list)
    outer_iterations: int = 0
    inner_iterations: int = 0
    storage: int = 0
    wall_ms: float = 0.0
    converged: bool = False
    stop_reason: str = ""
    error: Optional[str] = None
    config: dict = field(default_factory=dict)


@dataclass
class Comparison:
    k: int
    baseline: str
    method: str
    err_initial: float
    err_final: float
    ratio: Optional[float]


@dataclass
class Report:
    records: list = field(default_factory=list)
    comparisons: list = field(default_factory=list)

    def best(self, method, k):
        """Lowest-WCSSRE successful record for ``(method, k)``, or None."""
        ok = [r for r in self.records if r.method == method and r.k == k and r.error is None]
        return min(ok, key=lambda r: (r.wcssre, r.seed)) if ok else None

    def curve(self, method):
        """``[(k, best wcssre)]`` sorted by k."""
        ks = sorted({r.k for r in self.records if r.method == method})
        return [(k, self.best(method, k).wcssre) for k in ks if self.best(method, k)]


def reduction_ratio(err_initial, err_final):
    if err_initial == 0:
        return None
    return (err_initial - err_final) / err_initial


def reduction_ratio_to_rank(tau, r):
    """Rank kept at reduction ratio ``tau`` of dimension ``r``, rounded half up."""
    if not 0 < tau <= 1:
        raise InvalidRatio(f"tau={tau} outside (0, 1]")
    k = int((Decimal(repr(float(tau))) * r).quantize(Decimal(1), rounding=ROUND_HALF_UP))
    return min(max(k, 1), r)


def run_method(stack, method, k, K=1, seed=0, settings=None):
    """Fit one method and return ``(RunRecord, ClusterModel)``."""
    s = settings or BenchSettings()
    if method not in METHODS:
        raise UnknownMethod(f"unknown method {method!r}")
    start = time.perf_counter()
    if method == "svd":
        model = svd_model(stack, k)
    elif method == "glram":
        model = glram_model(stack, k, IterationConfig(s.glram_max_iters, s.glram_rel_tol))
    elif method == "kmeans_glram":
        model = kmeans_glram(stack, K, k, seed=seed,
                             kmeans_cfg=IterationConfig(s.kmeans_max_iters, 1e-6),
                             glram_cfg=IterationConfig(s.glram_max_iters, s.glram_rel_tol))
    else:
        cfg = CglramConfig(K=K, k=k, eta=s.eta, max_outer=s.max_outer,
                           inner=IterationConfig(s.inner_max_iters, s.inner_rel_tol),
                           seed=seed, init=s.init)
        model = cglram_fit(stack, cfg)
    wall_ms = 1000.0 * (time.perf_counter() - start)
    n_pairs_K = {"svd": stack.N, "glram": 1}.get(method, K)
    record = RunRecord(
        method=method, dataset=s.dataset, N=stack.N, r=stack.r, c=stack.c, K=n_pairs_K,
        k=k, seed=seed, wcssre=model.wcssre, initial_wcssre=model.wcssre_history[0],
        wcssre_history=list(model.wcssre_history),
        outer_iterations=model.outer_iterations, inner_iterations=model.inner_iterations,
        storage=storage_count(method, stack.N, n_pairs_K, k, stack.r, stack.c),
        wall_ms=wall_ms, converged=bool(model.converged), stop_reason=model.stop_reason,
        config=s.echo())
    return record, model


def _failed(stack, method, k, K, seed, settings, exc):
    return RunRecord(method=method, dataset=settings.dataset, N=stack.N, r=stack.r,
                     c=stack.c, K=K, k=k, seed=seed, wcssre=None,
                     error=f"{type(exc).__name__}: {exc}", config=settings.echo())


def compare(records):
    """Error reduction ratios between the best run of each method, per k."""
    best = {}
    for r in records:
        if r.error is not None:
            continue
        key = (r.method, r.k)
        if key not in best or (r.wcssre, r.seed) < (best[key].wcssre, best[key].seed):
            best[key] = r
    out = []
    for k in sorted({k for _, k in best}):
        for base, meth in COMPARISON_PAIRS:
            final = best.get((meth, k))
            if final is None:
                continue
            if base == "cglram_initial":
                err0 = final.initial_wcssre
            elif (base, k) in best:
                err0 = best[(base, k)].wcssre
            else:
                continue
            out.append(Comparison(k=k, baseline=base, method=meth, err_initial=err0,
                                  err_final=final.wcssre,
                                  ratio=reduction_ratio(err0, final.wcssre)))
    return out


def worker_count():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_compare(stack, ks, K, seeds, methods, settings=None, workers=None):
    """Run every requested method for every rank (and seed, where seeds matter).

    GLRAM and per-matrix SVD are deterministic and run once per rank with the
    first seed recorded. A failed run becomes a record with ``error`` set and
    the sweep carries on.
    """
    s = settings or BenchSettings()
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise UnknownMethod(f"unknown methods {sorted(unknown)}")
    seeds = list(seeds) or [0]
    tasks = []
    for method in (m for m in METHODS if m in methods):
        for k in ks:
            for seed in (seeds if method in ("kmeans_glram", "cglram") else seeds[:1]):
                tasks.append((method, k, seed))

    def one(task):
        method, k, seed = task
        try:
            return run_method(stack, method, k, K, seed, s)[0]
        except (CglramError, ValueError) as exc:
            return _failed(stack, method, k, K, seed, s, exc)

    with ThreadPoolExecutor(max_workers=workers or worker_count()) as pool:
        records = list(pool.map(one, tasks))
    return Report(records=records, comparisons=compare(records))


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def report_to_json(report):
    doc = {"records": [asdict(r) for r in report.records],
           "comparisons": [asdict(c) for c in report.comparisons]}
    return json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n"


def report_from_json(text):
    doc = json.loads(text)
    return Report(records=[RunRecord(**r) for r in doc["records"]],
                  comparisons=[Comparison(**c) for c in doc["comparisons"]])


def read_report(path):
    try:
        return report_from_json(Path(path).read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _sibling(path, suffix):
    p = Path(path)
    return p.with_name(f"{p.stem}_{suffix}.csv")


def _csv_cell(v):
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True, default=_jsonable)
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_csv_cell(row[c]) for c in columns])


def emit(report, fmt, path):
    """Write ``report`` as JSON, or as CSV plus sibling comparison/curve tables.

    CSV output: ``path`` holds one row per run in ``RUN_COLUMNS`` order,
    ``<stem>_comparisons.csv`` the reduction ratios, and ``<stem>_curves.csv``
    the best WCSSRE per (method, k) for plotting error against rank.
    """
    try:
        if fmt == "json":
            Path(path).write_text(report_to_json(report))
        elif fmt == "csv":
            _write_csv(path, RUN_COLUMNS, [asdict(r) for r in report.records])
            _write_csv(_sibling(path, "comparisons"), COMPARISON_COLUMNS,
                       [asdict(c) for c in report.comparisons])
            curves = [{"method": m, "k": k, "wcssre": w}
                      for m in METHODS for k, w in report.curve(m)]
            _write_csv(_sibling(path, "curves"), ("method", "k", "wcssre"), curves)
        else:
            raise ValueError(f"unknown report format {fmt!r}")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


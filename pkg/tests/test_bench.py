import csv
import json

import numpy as np
import pytest

from cglram import SynthSpec, synth_generate
from cglram.bench import (COMPARISON_COLUMNS, RUN_COLUMNS, BenchSettings, Report, RunRecord,
                          emit, read_report, reduction_ratio, reduction_ratio_to_rank,
                          run_compare, run_method)
from cglram.baselines import storage_count
from cglram.cli import main
from cglram.dataio import load_model, save_stack
from cglram.errors import InvalidRatio, UnknownMethod


@pytest.fixture(scope="module")
def three_clusters():
    return synth_generate(SynthSpec(K_true=3, per_cluster=[10, 10, 10], r=10, c=10, k_true=2,
                                    noise_sigma=0.01, seed=6))


@pytest.mark.parametrize("tau,k", [(0.90, 599), (1.0, 665), (0.15, 100), (0.75, 499),
                                   (0.60, 399), (0.45, 299), (0.30, 200)])
def test_ratio_to_rank(tau, k):
    assert reduction_ratio_to_rank(tau, 665) == k


def test_ratio_to_rank_clamped_and_invalid():
    assert reduction_ratio_to_rank(0.01, 20) == 1
    for tau in (0.0, -0.5, 1.5):
        with pytest.raises(InvalidRatio):
            reduction_ratio_to_rank(tau, 10)


def test_record_columns_cover_fields():
    from dataclasses import fields
    assert set(RUN_COLUMNS) == {f.name for f in fields(RunRecord)}


def test_run_method_storage_and_unknown(three_clusters):
    st = three_clusters
    for method, K in (("svd", st.N), ("glram", 1), ("kmeans_glram", 3), ("cglram", 3)):
        rec, model = run_method(st, method, 2, K=3, seed=0)
        assert rec.storage == storage_count(method, st.N, rec.K, 2, st.r, st.c)
        assert rec.K == K
        assert rec.wcssre >= 0
        h = rec.wcssre_history
        assert all(b <= a + 1e-9 for a, b in zip(h, h[1:]))
    with pytest.raises(UnknownMethod):
        run_method(st, "pca", 2)


def test_full_rank_glram(three_clusters):
    rep = run_compare(three_clusters, [10], 3, [0], {"glram"})
    assert rep.records[0].wcssre < 1e-8 * three_clusters.total_energy()


def test_cglram_beats_glram(three_clusters):
    rep = run_compare(three_clusters, [2], 3, [0, 1, 2], {"glram", "cglram"})
    (cmp,) = [c for c in rep.comparisons if c.baseline == "glram" and c.method == "cglram"]
    assert cmp.ratio > 0
    assert cmp.ratio == pytest.approx((cmp.err_initial - cmp.err_final) / cmp.err_initial,
                                      abs=1e-12)
    assert cmp.err_initial == rep.best("glram", 2).wcssre
    assert cmp.err_final == rep.best("cglram", 2).wcssre


def test_empty_method_set(three_clusters):
    rep = run_compare(three_clusters, [2], 3, [0], set())
    assert rep.records == [] and rep.comparisons == []


def test_failed_runs_are_recorded(three_clusters):
    rep = run_compare(three_clusters, [2, 11], 3, [0], {"glram"})
    assert [r.error is None for r in rep.records] == [True, False]
    assert "RankOutOfRange" in rep.records[1].error


def test_ordering_and_determinism(three_clusters):
    a = run_compare(three_clusters, [3, 2], 3, [1, 0], {"cglram", "glram", "kmeans_glram"})
    b = run_compare(three_clusters, [3, 2], 3, [1, 0], {"cglram", "glram", "kmeans_glram"},
                    workers=4)
    keys = [(r.method, r.k, r.seed) for r in a.records]
    assert keys == [(r.method, r.k, r.seed) for r in b.records]
    assert [r.method for r in a.records][:2] == ["glram", "glram"]
    for x, y in zip(a.records, b.records):
        assert x.wcssre == y.wcssre and x.wcssre_history == y.wcssre_history


def test_reduction_ratio_zero_baseline():
    assert reduction_ratio(0.0, 0.0) is None
    assert reduction_ratio(2.0, 1.0) == 0.5


def test_json_roundtrip_and_stable(tmp_path, three_clusters):
    rep = run_compare(three_clusters, [2], 3, [0, 1], {"glram", "cglram", "svd"})
    p = tmp_path / "r.json"
    emit(rep, "json", p)
    first = p.read_bytes()
    doc = json.loads(first)  # stdlib parser as the independent reader
    assert set(doc) == {"records", "comparisons"}
    assert read_report(p) == rep
    emit(read_report(p), "json", p)
    assert p.read_bytes() == first


def test_csv_outputs(tmp_path, three_clusters):
    rep = run_compare(three_clusters, [2, 3], 3, [0], {"glram", "cglram"})
    p = tmp_path / "runs.csv"
    emit(rep, "csv", p)
    with open(p) as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == RUN_COLUMNS
    assert len(rows) == 1 + len(rep.records)
    with open(tmp_path / "runs_comparisons.csv") as f:
        assert tuple(next(csv.reader(f))) == COMPARISON_COLUMNS
    with open(tmp_path / "runs_curves.csv") as f:
        curves = list(csv.DictReader(f))
    assert {(r["method"], int(r["k"])) for r in curves} == {
        ("glram", 2), ("glram", 3), ("cglram", 2), ("cglram", 3)}


def test_emit_bad_format(tmp_path):
    with pytest.raises(ValueError):
        emit(Report(), "xml", tmp_path / "x")


# command line


def test_cli_end_to_end(tmp_path, capsys):
    data = tmp_path / "s.mstk"
    assert main(["synth", "--K-true", "2", "--per-cluster", "8", "--r", "6", "--c", "5",
                 "--k-true", "2", "--seed", "3", "--out", str(data)]) == 0
    model = tmp_path / "m.npz"
    assert main(["fit", "cglram", str(data), "--k", "2", "--K", "2", "--seed", "1",
                 "--out", str(model)]) == 0
    record = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    loaded, meta = load_model(model)
    assert meta["record"]["wcssre"] == record["wcssre"] == loaded.wcssre
    assert main(["report", str(model)]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert rows[0]["ok"] and rows[0]["rel_diff"] <= 1e-10

    out = tmp_path / "cmp.json"
    assert main(["compare", str(data), "--methods", "glram,k-means+glram,cglram,svd",
                 "--ks", "1,2", "--K", "2", "--seeds", "0,1", "--out", str(out)]) == 0
    rep = read_report(out)
    assert {r.method for r in rep.records} == {"glram", "kmeans_glram", "cglram", "svd"}
    first = out.read_bytes()
    assert main(["compare", str(data), "--methods", "glram,k-means+glram,cglram,svd",
                 "--ks", "1,2", "--K", "2", "--seeds", "0,1", "--out", str(out)]) == 0
    again = read_report(out)
    for x, y in zip(rep.records, again.records):
        x.wall_ms = y.wall_ms = 0.0
    assert rep == again and len(first) > 0


def test_cli_taus_and_empty(tmp_path, capsys, three_clusters):
    data = tmp_path / "d.mstk"
    save_stack(three_clusters, data)
    out = tmp_path / "t.json"
    assert main(["compare", str(data), "--methods", "glram", "--taus", "1.0,0.2",
                 "--out", str(out)]) == 0
    assert sorted(r.k for r in read_report(out).records) == [2, 10]
    assert main(["compare", str(data), "--methods", "", "--out", str(out)]) == 0
    assert read_report(out).records == []


def test_cli_error_record(tmp_path, capsys):
    code = main(["fit", "glram", str(tmp_path / "missing"), "--k", "2",
                 "--out", str(tmp_path / "m.npz")])
    assert code != 0
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "FileNotFoundError"
    data = tmp_path / "e.mstk"
    main(["synth", "--out", str(data)])
    code = main(["fit", "glram", str(data), "--k", "99", "--out", str(tmp_path / "m.npz")])
    assert code == 1
    assert json.loads(capsys.readouterr().err)["error"] == "RankOutOfRange"


def test_worker_env(monkeypatch):
    from cglram.bench import worker_count
    monkeypatch.setenv("CGLRAM_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("CGLRAM_WORKERS", "junk")
    assert worker_count() == 1

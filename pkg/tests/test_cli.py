import json

import numpy as np
import pytest

from fixture_treebank import FIXTURE
from synth import build_corpus

from semmap.cli import main
from semmap.pipeline import PipelineConfig
from semmap.surfaces import contains, fit_surface


def test_parser_requires_subcommand(capsys):
    with pytest.raises(SystemExit):
        main([])


def test_run_without_inputs_is_config_error(capsys):
    assert main(["run"]) == 2
    assert "config error" in capsys.readouterr().err


def test_run_with_missing_corpus_dir_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "corpus_dir": str(tmp_path / "nope"), "metadata": None,
        "out_dir": str(tmp_path / "out"),
    }), encoding="utf-8")
    assert main(["run", "--config", str(cfg)]) == 2


def test_run_bad_json_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text("{broken", encoding="utf-8")
    assert main(["run", "--config", str(cfg)]) == 2


def test_empty_mapped_cluster_is_numerical_failure(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    build_corpus(corpus, n_verses=30, seed=3)
    config = PipelineConfig(
        corpus_dir=str(corpus), metadata=str(corpus / "meta.tsv"),
        out_dir=str(tmp_path / "out"), gmm_ks=(3,), grid=40,
        core_k=5, cluster_groups={"TL": 7, "ML": 1, "BL": 2},
    )
    cfg = tmp_path / "c.json"
    cfg.write_text(config.to_json(), encoding="utf-8")
    assert main(["run", "--config", str(cfg)]) == 4
    assert "numerical failure" in capsys.readouterr().err


def test_align_eval(tmp_path, capsys):
    dump = tmp_path / "al.tsv"
    dump.write_text("v1\t0\tkai\nv2\t0\tNULL\nv3\t1\tkai\n", encoding="utf-8")
    gold = tmp_path / "gold.tsv"
    gold.write_text("v1\t0\tkai\nv2\t0\tNULL\nv3\t1\tNULL\n", encoding="utf-8")
    assert main(["align-eval", "--alignment", str(dump), "--gold", str(gold)]) == 0
    out = capsys.readouterr().out
    assert "0.6667" in out


def test_align_eval_missing_file_is_data_error(tmp_path, capsys):
    assert main(["align-eval", "--alignment", str(tmp_path / "x.tsv"),
                 "--gold", str(tmp_path / "g.tsv")]) == 3


def test_classify_stored_dictionaries(tmp_path, capsys):
    # a Doyayo-shaped dictionary classifies as pattern C
    dicts = tmp_path / "dicts.tsv"
    dicts.write_text(
        "iso\tdictionary\n"
        'dow\t{"TL": ["go"], "ML": ["yo"], "BL": ["yo"]}\n'
        'kar\t{"TL": ["ahut"], "ML": ["ahut"], "BL": ["NULL"]}\n',
        encoding="utf-8",
    )
    out = tmp_path / "cls.tsv"
    assert main(["classify", "--dictionaries", str(dicts), "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    rows = {ln.split("\t")[0]: ln.split("\t") for ln in lines[1:]}
    assert rows["dow"][1] == "C"
    assert rows["kar"][1] == "B"
    assert rows["kar"][3] == "BL"


def test_treebank_extract(tmp_path, capsys):
    tb = tmp_path / "fix.tsv"
    tb.write_text(FIXTURE, encoding="utf-8")
    out = tmp_path / "cons.tsv"
    assert main(["treebank-extract", "--treebank", str(tb), "--out", str(out)]) == 0
    text = out.read_text(encoding="utf-8")
    assert "absolute" in text and "conjunct" in text and "jegda" in text
    kinds = [ln.split("\t")[1] for ln in text.splitlines()[1:]]
    assert kinds.count("absolute") == 4


def test_stats_report(tmp_path, capsys):
    tb = tmp_path / "fix.tsv"
    tb.write_text(FIXTURE, encoding="utf-8")
    cons = tmp_path / "cons.tsv"
    assert main(["treebank-extract", "--treebank", str(tb), "--out", str(cons)]) == 0
    lemmas = tmp_path / "lemmas.tsv"
    lines = []
    import semmap.treebank as tbmod

    for sent in tbmod.parse_treebank(FIXTURE):
        for tid in sent.order:
            lines.append(f"{sent.id}\t{tid}\t{sent.tokens[tid].lemma}")
    lemmas.write_text("\n".join(lines) + "\n", encoding="utf-8")
    out = tmp_path / "report.tsv"
    assert main(["stats-report", "--constructions", str(cons),
                 "--lemmas", str(lemmas), "--window", "4", "--out", str(out)]) == 0
    text = out.read_text(encoding="utf-8")
    assert text.startswith("subset\tn\tmattr\tten_mfl\tnotes")
    assert "conjunct\t" in text and "absolute\t" in text
    out2 = tmp_path / "report_n.tsv"
    assert main(["stats-report", "--constructions", str(cons),
                 "--lemmas", str(lemmas), "--window", "4",
                 "--normalize-lemmas", "--out", str(out2)]) == 0
    assert "conjunct:N\t" in out2.read_text(encoding="utf-8")


def null_diluted_fixture(tmp_path):
    """Three labeled blobs in a field of scattered NULL observations.

    The NULL lacing keeps the interpolated probability between blobs
    below every contour level, as NULL-heavy regions do on the real
    maps, so the three 0.29 areas come out bounded and disjoint.
    """
    rng = np.random.default_rng(5)
    centers = [(-4.0, 6.0), (-4.0, 0.0), (-4.0, -6.0)]
    points, labels = [], []
    for c, lab in zip(centers, ["u", "v", "w"]):
        for _ in range(50):
            points.append(rng.normal(c, 0.5, 2))
            labels.append(lab)
    for _ in range(250):
        points.append(rng.uniform(-8, 8, 2))
        labels.append(None)
    points = np.array(points)
    emb = tmp_path / "embedding.tsv"
    with open(emb, "w", encoding="utf-8") as fh:
        for i, p in enumerate(points):
            fh.write(f"r{i:03d}\t{p[0]:.9f}\t{p[1]:.9f}\n")
    mat = tmp_path / "matrix.tsv"
    with open(mat, "w", encoding="utf-8") as fh:
        fh.write("row_id\txyz\n")
        for i, lab in enumerate(labels):
            fh.write(f"r{i:03d}\t{lab if lab is not None else 'NULL'}\n")
    return points, labels, emb, mat


def test_map_subcommand_three_disjoint_families(tmp_path, capsys):
    points, labels, emb, mat = null_diluted_fixture(tmp_path)
    out = tmp_path / "map.svg"
    assert main(["map", "--embedding", str(emb), "--matrix", str(mat),
                 "--iso", "xyz", "--out", str(out), "--grid", "120"]) == 0
    svg = out.read_text(encoding="utf-8")
    assert svg.startswith("<?xml") and "<polygon" in svg
    # structural check: the three lexified 0.29 areas are pairwise disjoint
    norm = [lab if lab is not None else "NULL" for lab in labels]
    areas = {}
    for m in ["u", "v", "w"]:
        surf = fit_surface(points, norm, m, grid=120, levels=(0.29,))
        areas[m] = surf.contours[0.29]
        assert areas[m]
    names = list(areas)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            for poly in areas[b]:
                for vertex in poly[:: max(1, len(poly) // 25)]:
                    assert not contains(areas[a], vertex), (a, b)


def test_map_missing_intermediate_instructs(tmp_path, capsys):
    code = main(["map", "--embedding", str(tmp_path / "e.tsv"),
                 "--matrix", str(tmp_path / "m.tsv"),
                 "--iso", "x", "--out", str(tmp_path / "o.svg")])
    assert code == 3
    assert "run" in capsys.readouterr().err


def test_classify_rerun_is_identical(tmp_path):
    dicts = tmp_path / "dicts.tsv"
    dicts.write_text(
        "iso\tdictionary\n"
        'aa\t{"TL": ["x", "y"], "ML": ["y"], "BL": ["z"]}\n'
        'bb\t{"TL": [], "ML": ["v"], "BL": ["v"]}\n',
        encoding="utf-8",
    )
    out1, out2 = tmp_path / "c1.tsv", tmp_path / "c2.tsv"
    assert main(["classify", "--dictionaries", str(dicts), "--out", str(out1)]) == 0
    assert main(["classify", "--dictionaries", str(dicts), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_threaded_run_matches_single_thread(tmp_path, monkeypatch):
    corpus = tmp_path / "corpus"
    build_corpus(corpus, n_verses=90, seed=11)
    results = {}
    for name, threads in [("one", "1"), ("four", "4")]:
        monkeypatch.setenv("SEMMAP_THREADS", threads)
        out = tmp_path / name
        config = PipelineConfig(
            corpus_dir=str(corpus), metadata=str(corpus / "meta.tsv"),
            out_dir=str(out), gmm_ks=(3,), grid=60, core_k=10,
            cluster_groups={"TL": 0, "ML": 1, "BL": 2}, dump_grids=False,
        )
        cfg = tmp_path / f"{name}.json"
        cfg.write_text(config.to_json(), encoding="utf-8")
        assert main(["run", "--config", str(cfg)]) == 0
        results[name] = {
            ln.split("\t")[1]: ln.split("\t")[0]
            for ln in (out / "manifest.tsv").read_text().splitlines()
            if "\t" in ln and not ln.endswith("config.json")
        }
    assert results["one"] == results["four"]

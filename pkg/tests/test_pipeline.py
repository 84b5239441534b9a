import hashlib

import numpy as np
import pytest

from synth import EXPECTED_NULL_FLAGS, EXPECTED_PATTERNS, EXPECTED_SUBPATTERNS, all_schemes

from semmap.pipeline import ConfigError, PipelineConfig
from semmap.pivot import EmbeddedMap, ParallelUsageMatrix
from semmap.surfaces import contains


def read_tsv(path):
    rows = []
    header = None
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if header is None:
            header = parts
            continue
        rows.append(dict(zip(header, parts)))
    return rows


def test_manifest_lists_artifacts_with_correct_hashes(synth_run):
    out = synth_run["out"]
    lines = [
        ln for ln in synth_run["manifest"].read_text().splitlines()
        if ln and not ln.startswith("#")
    ]
    assert len(lines) > 20
    for ln in lines:
        digest, rel = ln.split("\t")
        data = (out / rel).read_bytes()
        assert hashlib.sha256(data).hexdigest() == digest, rel


def test_every_artifact_carries_config_hash_header(synth_run):
    out = synth_run["out"]
    want = f"# semmap config={synth_run['config'].config_hash()} seed={synth_run['config'].seed}"
    for rel in ["corpus.tsv", "matrix.tsv", "embedding.tsv", "heat.tsv",
                "gmm_model.tsv", "classification.tsv", "scores.tsv"]:
        first = (out / rel).read_text(encoding="utf-8").splitlines()[0]
        assert first == want, rel
    svg = (out / "svg" / "eng.svg").read_text(encoding="utf-8")
    assert synth_run["config"].config_hash() in svg


def test_one_svg_per_doculect_plus_heat(synth_run):
    svgs = sorted(p.name for p in (synth_run["out"] / "svg").glob("*.svg"))
    want = sorted([f"{iso}.svg" for iso in list(all_schemes()) + ["eng"]] + ["heat.svg"])
    assert svgs == want


def test_classification_recovers_planted_patterns(synth_run):
    rows = {r["iso"]: r for r in read_tsv(synth_run["out"] / "classification.tsv")}
    for iso, want in EXPECTED_PATTERNS.items():
        assert rows[iso]["pattern"] == want, iso
    for iso, want in EXPECTED_SUBPATTERNS.items():
        assert rows[iso]["subpattern"] == want, iso
    for iso, flags in EXPECTED_NULL_FLAGS.items():
        assert rows[iso]["null_flags"] == ",".join(flags), iso
    assert rows["eng"]["pattern"] == "A"


def test_matrix_and_embedding_parse_back(synth_run):
    m = ParallelUsageMatrix.from_tsv(synth_run["out"] / "matrix.tsv")
    e = EmbeddedMap.from_tsv(synth_run["out"] / "embedding.tsv")
    assert m.row_ids == e.row_ids
    assert m.n_rows == 300
    assert e.coords.shape == (300, 2)
    assert "eng" in m.columns


def test_heat_layer_counts_nulls(synth_run):
    m = ParallelUsageMatrix.from_tsv(synth_run["out"] / "matrix.tsv")
    heat = {r["row_id"]: int(r["null_count"]) for r in read_tsv(synth_run["out"] / "heat.tsv")}
    for rid, row in zip(m.row_ids, m.cells):
        assert heat[rid] == sum(1 for c in row if c is None)
    # the NULL-realizing scheme makes BL rows strictly warmer on average
    bl = [heat[rid] for rid in m.row_ids if 200 <= int(rid.split(":")[2].split("#")[0])]
    tl = [heat[rid] for rid in m.row_ids if int(rid.split(":")[2].split("#")[0]) < 100]
    assert sum(bl) / len(bl) > sum(tl) / len(tl)


def test_scores_best_means_for_planted_d_doculect(synth_run):
    rows = read_tsv(synth_run["out"] / "scores.tsv")
    core = {r["group"]: r for r in read_tsv(synth_run["out"] / "core_points.tsv")}
    tl_cluster = core["TL"]["cluster"]
    best = [r for r in rows
            if r["iso"] == "ddd" and r["cluster"] == tl_cluster and r["best"] == "1"]
    assert len(best) == 1
    assert best[0]["means"] == "dtl"
    assert float(best[0]["f1"]) > 0.9


def test_prototypicality_ranked(synth_run):
    rows = read_tsv(synth_run["out"] / "prototypicality.tsv")
    assert rows
    by_cluster = {}
    for r in rows:
        by_cluster.setdefault(r["cluster"], []).append((int(r["rank"]), int(r["score"])))
    for ranking in by_cluster.values():
        scores = [s for _, s in sorted(ranking)]
        assert scores == sorted(scores, reverse=True)
        assert max(s for _, s in ranking) > 10  # planted agreement is strong


def test_dropped_verse_count_reported(synth_run):
    text = (synth_run["out"] / "corpus.tsv").read_text(encoding="utf-8")
    assert "# dropped_nonpivot_verses\t0" in text


def test_pattern_d_areas_contain_exactly_their_own_cores(synth_run):
    # topological check: each of the three areas holds its own group's
    # core points and none of the other groups'
    out = synth_run["out"]
    emb = EmbeddedMap.from_tsv(out / "embedding.tsv")
    coords = {rid: emb.coords[i] for i, rid in enumerate(emb.row_ids)}
    cores = {r["group"]: r["member_row_ids"].split(",")
             for r in read_tsv(out / "core_points.tsv")}
    areas = {}
    for means in ["dtl", "dml", "dbl"]:
        rows = read_tsv(out / "surfaces" / f"ddd_{means}.contours.tsv")
        polys = {}
        for r in rows:
            if float(r["level"]) != 0.29:
                continue
            polys.setdefault(int(r["polygon"]), []).append((float(r["x"]), float(r["y"])))
        areas[means] = [np.array(p) for p in polys.values()]
        assert areas[means], means
    own = {"dtl": "TL", "dml": "ML", "dbl": "BL"}
    for means, group in own.items():
        for g, ids in cores.items():
            inside = sum(1 for rid in ids if contains(areas[means], coords[rid]))
            if g == group:
                assert inside == len(ids), (means, g)
            else:
                assert inside == 0, (means, g)


def test_config_roundtrip_and_hash_stability(synth_run):
    config = synth_run["config"]
    again = PipelineConfig.from_json(config.to_json())
    assert again == config
    assert again.config_hash() == config.config_hash()


def test_three_dimensional_embedding_flag(tmp_path):
    from synth import build_corpus

    from semmap.pipeline import run

    corpus = tmp_path / "corpus"
    build_corpus(corpus, n_verses=90, seed=23)
    config = PipelineConfig(
        corpus_dir=str(corpus), metadata=str(corpus / "meta.tsv"),
        out_dir=str(tmp_path / "out"), gmm_ks=(3,), grid=50, core_k=10,
        mds_dims=3, cluster_groups={"TL": 0, "ML": 1, "BL": 2},
        dump_grids=False,
    )
    run(config)
    emb = EmbeddedMap.from_tsv(tmp_path / "out" / "embedding.tsv")
    assert emb.coords.shape == (90, 3)


def test_config_validation_errors(tmp_path):
    with pytest.raises(ConfigError, match="corpus dir"):
        PipelineConfig(corpus_dir=str(tmp_path / "nope"), metadata=None,
                       out_dir=str(tmp_path)).validate()
    cfg = PipelineConfig(corpus_dir=str(tmp_path), metadata=None,
                         out_dir=str(tmp_path), levels=(0.29, 0.35, 0.32))
    with pytest.raises(ConfigError, match="descending"):
        cfg.validate()
    cfg2 = PipelineConfig(corpus_dir=str(tmp_path), metadata=None,
                          out_dir=str(tmp_path), mds_dims=5)
    with pytest.raises(ConfigError, match="mds_dims"):
        cfg2.validate()
    cfg3 = PipelineConfig(corpus_dir=str(tmp_path), metadata=None,
                          out_dir=str(tmp_path),
                          group_anchors={"TL": "x"})
    with pytest.raises(ConfigError, match="group_anchors"):
        cfg3.validate()

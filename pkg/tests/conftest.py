import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synth import build_corpus  # noqa: E402

from semmap.pipeline import PipelineConfig, run  # noqa: E402


@pytest.fixture(scope="session")
def synth_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    corpus = root / "corpus"
    expected, anchors, pivot_positions = build_corpus(corpus, n_verses=300, seed=7)
    return {
        "corpus_dir": corpus,
        "metadata": corpus / "meta.tsv",
        "expected": expected,
        "anchors": anchors,
        "pivot_positions": pivot_positions,
        "root": root,
    }


def make_config(synth_corpus, out_dir, **overrides) -> PipelineConfig:
    kwargs = dict(
        corpus_dir=str(synth_corpus["corpus_dir"]),
        metadata=str(synth_corpus["metadata"]),
        out_dir=str(out_dir),
        pivot_iso="eng",
        pivot_tokens=("when",),
        gmm_ks=(3,),
        grid=120,
        core_k=30,
        group_anchors=synth_corpus["anchors"],
        dump_grids=False,
    )
    kwargs.update(overrides)
    return PipelineConfig(**kwargs)


@pytest.fixture(scope="session")
def synth_run(synth_corpus):
    out = synth_corpus["root"] / "out"
    config = make_config(synth_corpus, out)
    manifest = run(config)
    return {"out": out, "config": config, "manifest": manifest, **synth_corpus}

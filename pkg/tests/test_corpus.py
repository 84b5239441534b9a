import itertools

import pytest

from semmap.corpus import (
    CorpusError,
    Doculect,
    load_corpus,
    load_doculect_file,
    normalize,
    select_translation,
)


def doc(iso="xxx", cov=0, year=None, name=None):
    verses = {f"MAT:1:{i}": "w" for i in range(cov)}
    return Doculect(iso=iso, name=name or f"{iso}-{cov}-{year}", year=year,
                    verses=verses)


# normalize ------------------------------------------------------------------

def test_normalize_english_sentence():
    got = normalize("When he saw Thecla, he kissed her.")
    assert got == ["when", "he", "saw", "thecla", "he", "kissed", "her"]


def test_normalize_keeps_interior_apostrophes():
    # hand-tokenized: trailing bang stripped, glottal marks kept
    assert normalize("I tse'faei'ccuyi!") == ["i", "tse'faei'ccuyi"]


def test_normalize_empty():
    assert normalize("") == []


def test_normalize_pure_punctuation_token_vanishes():
    assert normalize("a -- b") == ["a", "b"]


def test_normalize_idempotent():
    for text in ["When he saw Thecla, he kissed her.", "I tse'faei'ccuyi!",
                 "«quoted» text – here…"]:
        once = normalize(text)
        again = normalize(" ".join(once))
        assert once == again


# select_translation -----------------------------------------------------------

def test_select_wide_coverage_wins():
    a, b = doc(cov=7000, year=1990), doc(cov=4000, year=2010)
    assert select_translation([a, b]) is a


def test_select_near_tie_newest_wins():
    a, b = doc(cov=7000, year=1990), doc(cov=6500, year=2010)
    assert select_translation([a, b]) is b


def test_select_singleton():
    a = doc(cov=5000, year=2000)
    assert select_translation([a]) is a


def test_select_unknown_year_loses():
    a, b = doc(cov=7000, year=None), doc(cov=6500, year=1850)
    assert select_translation([a, b]) is b


def test_select_empty_errors():
    with pytest.raises(CorpusError, match="no translations"):
        select_translation([])


def test_select_order_invariant():
    docs = [doc(cov=7000, year=1990), doc(cov=6500, year=2010),
            doc(cov=6200, year=2005), doc(cov=3000, year=2020)]
    winners = {select_translation(list(p)).name for p in itertools.permutations(docs)}
    assert len(winners) == 1


# loading ----------------------------------------------------------------------

def test_load_corpus_selects_one_per_iso(tmp_path):
    (tmp_path / "eng.txt").write_text("MAT:1:1\tWhen he came.\nMAT:1:2\tHe left.\n",
                                      encoding="utf-8")
    (tmp_path / "deu.txt").write_text("MAT:1:1\tAls er kam.\n", encoding="utf-8")
    (tmp_path / "deu-old.txt").write_text(
        "MAT:1:1\tAls er kam.\nMAT:1:2\tEr ging.\nMAT:1:3\tx\n", encoding="utf-8")
    meta = tmp_path / "meta.tsv"
    meta.write_text("eng\tEnglish\tIndo-European\tEurasia\t1900\n"
                    "deu\tGerman\tIndo-European\tEurasia\t1912\n", encoding="utf-8")
    manifest = load_corpus(tmp_path, meta, pivot_iso="eng")
    assert set(manifest.doculects) == {"eng", "deu"}
    # both deu variants are within the coverage gap; same year, wider wins
    assert manifest.doculects["deu"].coverage == 3
    assert manifest.pivot.iso == "eng"
    assert manifest.doculects["eng"].family == "Indo-European"


def test_load_doculect_rejects_duplicate_verse(tmp_path):
    p = tmp_path / "xxx.txt"
    p.write_text("MAT:1:1\ta\nMAT:1:1\tb\n", encoding="utf-8")
    with pytest.raises(CorpusError, match="duplicate verse"):
        load_doculect_file(p)


def test_load_corpus_missing_pivot_errors(tmp_path):
    (tmp_path / "deu.txt").write_text("MAT:1:1\tx\n", encoding="utf-8")
    with pytest.raises(CorpusError, match="pivot"):
        load_corpus(tmp_path, None, pivot_iso="eng")


def test_doculect_requires_iso():
    with pytest.raises(CorpusError):
        Doculect(iso="", name="nameless")

"""Coexpression-pattern classification and per-cluster means scoring.

Maps each doculect's Kriging areas onto the three core-point groups
(TL/ML/BL), prunes the area dictionary with Fisher-backed heuristics,
classifies the result into the basic patterns A-E or a subpattern
template, and scores means by precision/recall/F1 plus usage points by
prototypicality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .align import NULL_MARKER
from .stats import fisher_exact
from .surfaces import contains

__all__ = [
    "TypologyError",
    "GROUPS",
    "AreaDictionary",
    "PatternAssignment",
    "MeansScore",
    "build_dictionary",
    "classify_pattern",
    "score_means",
    "prototypicality",
]

GROUPS = ("TL", "ML", "BL")


class TypologyError(ValueError):
    pass


@dataclass
class AreaDictionary:
    """Meaningful means labels per core-point group, deduplicated."""
    groups: dict[str, list[str]]
    counts: dict[str, dict[str, int]] = field(default_factory=dict)

    def __post_init__(self):
        for g in GROUPS:
            self.groups.setdefault(g, [])
            self.groups[g] = sorted(set(self.groups[g]))


@dataclass
class PatternAssignment:
    pattern: str
    subpattern: str | None
    null_flags: list[str]


@dataclass
class MeansScore:
    means: str
    cluster: int
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


def build_dictionary(core_sets: dict[str, list], areas: dict[str, list],
                     points: np.ndarray, row_index: dict,
                     alpha: float = 0.01) -> AreaDictionary:
    """Map core-point groups to the Kriging areas that matter.

    ``core_sets`` maps each group to its core-point row ids, ``areas``
    maps means labels (including the NULL marker) to polygon sets at the
    dictionary probability level, ``row_index`` maps row ids to indices
    into ``points``.

    Pruning heuristics, applied per group in order: (a) an area unique to
    the group is always kept, and an area shared with other groups
    survives next to it only when a two-sided Fisher test on the
    in-area counts is non-significant at alpha or the shared area holds
    significantly more core points; (b) with no unique area, the
    richest area is kept and others survive only a non-significant
    Fisher test against it; (c) a NULL area counts only when it is the
    sole area containing the group.
    """
    if not core_sets:
        raise TypologyError("no core-point groups given")
    sizes = {g: len(core_sets[g]) for g in core_sets}
    if len(set(sizes.values())) > 1:
        raise TypologyError(f"core sets differ in size: {sizes}")
    k = next(iter(sizes.values()))

    counts: dict[str, dict[str, int]] = {g: {} for g in core_sets}
    for g, ids in core_sets.items():
        for label in sorted(areas):
            polys = areas[label]
            if not polys:
                continue
            c = sum(
                1 for rid in ids
                if contains(polys, points[row_index[rid]])
            )
            if c > 0:
                counts[g][label] = c

    containing_groups: dict[str, set[str]] = {}
    for g, cmap in counts.items():
        for label in cmap:
            containing_groups.setdefault(label, set()).add(g)

    def proportion_p(c1: int, c2: int) -> float:
        return fisher_exact(c1, k - c1, c2, k - c2, tails="two").p_value

    result: dict[str, list[str]] = {}
    for g in GROUPS:
        cmap = counts.get(g, {})
        lexical = {m: c for m, c in cmap.items() if m != NULL_MARKER}
        if not lexical:
            result[g] = [NULL_MARKER] if NULL_MARKER in cmap else []
            continue
        unique = {m: c for m, c in lexical.items() if containing_groups[m] == {g}}
        kept: list[str] = []
        if unique:
            kept.extend(unique)
            ref = max(unique.values())
            for m in sorted(set(lexical) - set(unique)):
                c = lexical[m]
                # keep a shared competitor unless it holds significantly
                # fewer core points than the best unique area
                if c > ref or proportion_p(c, ref) >= alpha:
                    kept.append(m)
        else:
            ref_label = max(lexical, key=lambda m: (lexical[m], m))
            ref = lexical[ref_label]
            kept.append(ref_label)
            for m in sorted(lexical):
                if m == ref_label:
                    continue
                if proportion_p(ref, lexical[m]) >= alpha:
                    kept.append(m)
        result[g] = kept
    return AreaDictionary(groups=result, counts=counts)


# Subpattern templates: each template fixes, per group slot, a set of
# letters; repeated letters across slots mean colexification and "?"
# marks a group with no area at all. Matching is up to a bijective
# relabeling of the letters, so the concrete means labels never matter.
SUBPATTERN_TEMPLATES: list[tuple[tuple[str, str, str], str]] = [
    (("XY", "Y", "X"), "BxE"),
    (("X", "XY", "Y"), "BxC"),
    (("X", "Y", "XY"), "CxE"),
    (("XW", "Y", "Z"), "D2a"),
    (("X", "YW", "Z"), "D2b"),
    (("X", "Y", "ZW"), "D2c"),
    (("XZ", "Y", "Y"), "C3"),
    (("X", "YZ", "X"), "E3"),
    (("X", "X", "YZ"), "B3"),
    (("XY", "X", "X"), "CxA"),
    (("X", "XY", "X"), "ExA"),
    (("X", "X", "XY"), "BxA"),
    (("X", "YX", "Z"), "DxX"),
    (("X", "Y", "ZX"), "DxX"),
    (("XY", "Y", "Z"), "DxX"),
    (("X", "Y", "ZY"), "DxX"),
    (("XZ", "Y", "Z"), "DxX"),
    (("X", "XY", "XY"), "AxC"),
    (("XY", "X", "XY"), "AxE"),
    (("XY", "XY", "X"), "AxB"),
    (("XYZ", "X", "X"), "AxC3"),
    (("X", "XYZ", "X"), "AxE3"),
    (("X", "X", "XYZ"), "AxB3"),
    (("XYZ", "X", "Y"), "D-Other"),
    (("X", "XYZ", "Y"), "D-Other"),
    (("X", "Y", "XYZ"), "D-Other"),
    (("XY", "XY", "XY"), "A2"),
    (("?", "X", "X"), "A?C"),
    (("?", "X", "Y"), "B?D?E"),
    (("X", "?", "X"), "A?E"),
    (("X", "?", "Y"), "B?C?D"),
    (("X", "X", "?"), "A?B"),
    (("X", "Y", "?"), "C?D?E"),
]


def _canon(slots: tuple[frozenset, ...]) -> tuple[tuple[str, ...], ...] | None:
    """Canonical form of a group->set structure under item relabeling.

    Returns, for the lexicographically smallest bijection onto letters
    A, B, C, ..., the per-slot sorted letter tuples. None when there are
    more than four distinct items (nothing in the template table gets
    that far).
    """
    items = sorted({it for slot in slots for it in slot})
    if len(items) > 4:
        return None
    letters = [chr(ord("A") + i) for i in range(len(items))]
    best = None
    for perm in permutations(letters):
        mapping = dict(zip(items, perm))
        cand = tuple(tuple(sorted(mapping[it] for it in slot)) for slot in slots)
        if best is None or cand < best:
            best = cand
    return best


def _template_lookup() -> dict:
    table = {}
    for slots, label in SUBPATTERN_TEMPLATES:
        parsed = tuple(
            frozenset() if s == "?" else frozenset(s) for s in slots
        )
        key = _canon(parsed)
        prev = table.get(key)
        if prev is not None and prev != label:
            raise AssertionError(f"ambiguous subpattern templates: {prev} vs {label}")
        table[key] = label
    return table


_TEMPLATES_CANON = _template_lookup()

_BASIC_PATTERNS = {
    (True, True, True): "A",    # TL=ML, ML=BL, TL=BL
    (True, False, False): "B",  # (TL=ML) != BL
    (False, True, False): "C",  # TL != (ML=BL)
    (False, False, False): "D",
    (False, False, True): "E",  # (TL=BL) != ML
}


def classify_pattern(adict: AreaDictionary) -> PatternAssignment:
    """Total, deterministic classification of an area dictionary.

    Single-means dictionaries map straight to the basic patterns A-E by
    their equality structure (NULL is a means like any other). Dictionaries
    with multi-means groups are matched, up to relabeling, against the
    subpattern template table; the subpattern's leading letter is the
    main pattern. Dictionaries with an empty group are never assigned a
    main pattern: they classify as unclassified-no-area, with the
    matching ?-template recorded when one exists. Anything else that
    fails to match is unclassified-other.
    """
    sets = tuple(frozenset(adict.groups.get(g, [])) for g in GROUPS)
    null_flags = [g for g, s in zip(GROUPS, sets) if NULL_MARKER in s]

    if any(len(s) == 0 for s in sets):
        label = _TEMPLATES_CANON.get(_canon(sets))
        return PatternAssignment("unclassified-no-area", label, null_flags)

    if all(len(s) == 1 for s in sets):
        tl, ml, bl = sets
        key = (tl == ml, ml == bl, tl == bl)
        return PatternAssignment(_BASIC_PATTERNS[key], None, null_flags)

    label = _TEMPLATES_CANON.get(_canon(sets))
    if label is None:
        return PatternAssignment("unclassified-other", None, null_flags)
    return PatternAssignment(label[0], label, null_flags)


def score_means(assignments, labels, cluster: int) -> tuple[list[MeansScore], MeansScore]:
    """Precision/recall/F1 of every means attested inside a cluster.

    For one doculect: tp counts the means' usage points inside the
    cluster, fp its points outside, fn the other means' points inside.
    Returns all scores plus the best one (max F1, lexicographic means
    label on ties). NULL cells score as the NULL marker.
    """
    assignments = np.asarray(assignments)
    labels = [lab if lab is not None else NULL_MARKER for lab in labels]
    if len(labels) != assignments.shape[0]:
        raise TypologyError("labels must cover every embedded point")
    inside = assignments == cluster
    if not inside.any():
        raise TypologyError(f"cluster {cluster} is empty")
    cluster_size = int(inside.sum())
    attested = sorted({lab for lab, inc in zip(labels, inside) if inc})
    scores: list[MeansScore] = []
    for m in attested:
        is_m = np.array([lab == m for lab in labels])
        tp = int((is_m & inside).sum())
        fp = int((is_m & ~inside).sum())
        fn = cluster_size - tp
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        scores.append(MeansScore(m, int(cluster), tp, fp, fn, precision, recall, f1))
    best = min(scores, key=lambda s: (-s.f1, s.means))
    return scores, best


def prototypicality(cluster: int, best_per_doculect: dict[str, str],
                    matrix, assignments) -> list[tuple[str, int]]:
    """Score usage points by how many doculects use their cluster-best means.

    Returns (row_id, score) pairs ranked by descending score, row id
    breaking ties.
    """
    assignments = np.asarray(assignments)
    scores: list[tuple[str, int]] = []
    col_of = {iso: j for j, iso in enumerate(matrix.columns)}
    for i, rid in enumerate(matrix.row_ids):
        if assignments[i] != cluster:
            continue
        row = matrix.cells[i]
        s = 0
        for iso, best in best_per_doculect.items():
            cell = row[col_of[iso]]
            cell = cell if cell is not None else NULL_MARKER
            if cell == best:
                s += 1
        scores.append((rid, s))
    scores.sort(key=lambda t: (-t[1], t[0]))
    return scores

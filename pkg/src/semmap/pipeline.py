"""End-to-end orchestration: corpus to classification, with artifacts.

Every stage writes TSV intermediates (plus one SVG map per doculect)
under the output directory; a manifest lists each artifact with its
content hash. Runs are byte-identical for identical configs and seeds:
all randomness flows from the configured seeds, floats print with fixed
formats and nothing records a timestamp.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from urllib.parse import quote

import numpy as np

from . import align as al
from . import corpus as cp
from . import mixture as mx
from . import pivot as pv
from . import surfaces as sf
from . import svg as svgmod
from . import typology as ty
from .align import NULL_MARKER

__all__ = ["PipelineConfig", "ConfigError", "run"]

GROUPS = ty.GROUPS


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    corpus_dir: str
    metadata: str | None
    out_dir: str
    pivot_iso: str = "eng"
    pivot_tokens: tuple[str, ...] = ("when",)
    iterations: int = 5
    min_count: int = 3
    seed: int = 13
    mds_dims: int = 2
    covariance: str = "exponential"
    grid: int = 200
    levels: tuple[float, ...] = sf.DEFAULT_LEVELS
    nugget_frac: float = 0.05
    rho: float | None = None
    dictionary_level: float = 0.29
    gmm_ks: tuple[int, ...] = (6,)
    gmm_seed: int = 29
    core_k: int = 30
    alpha: float = 0.01
    cluster_groups: dict = field(default_factory=lambda: {"TL": 3, "ML": 2, "BL": 4})
    group_anchors: dict = field(default_factory=dict)
    treebank_paths: tuple[str, ...] = ()
    edit_rules: str | None = None
    dump_grids: bool = True

    def validate(self) -> None:
        if not Path(self.corpus_dir).is_dir():
            raise ConfigError(f"corpus dir not found: {self.corpus_dir}")
        if self.metadata and not Path(self.metadata).is_file():
            raise ConfigError(f"metadata file not found: {self.metadata}")
        if self.mds_dims not in (2, 3):
            raise ConfigError("mds_dims must be 2 or 3")
        if self.covariance != "exponential":
            raise ConfigError(f"unsupported covariance family {self.covariance!r}")
        if list(self.levels) != sorted(self.levels, reverse=True):
            raise ConfigError("levels must be sorted descending")
        if self.dictionary_level not in self.levels:
            raise ConfigError("dictionary_level must be one of the contour levels")
        if not self.pivot_tokens:
            raise ConfigError("need at least one pivot token")
        if self.group_anchors and set(self.group_anchors) != set(GROUPS):
            raise ConfigError(f"group_anchors must cover {GROUPS}")
        if not self.group_anchors and set(self.cluster_groups) != set(GROUPS):
            raise ConfigError(f"cluster_groups must cover {GROUPS}")
        for tb in self.treebank_paths:
            if not Path(tb).is_file():
                raise ConfigError(f"treebank file not found: {tb}")
        if self.edit_rules and not Path(self.edit_rules).is_file():
            raise ConfigError(f"edit rules file not found: {self.edit_rules}")

    def to_json(self) -> str:
        d = asdict(self)
        for key in ("pivot_tokens", "levels", "gmm_ks", "treebank_paths"):
            d[key] = list(d[key])
        return json.dumps(d, sort_keys=True, ensure_ascii=False, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "PipelineConfig":
        d = json.loads(text)
        for key in ("pivot_tokens", "levels", "gmm_ks", "treebank_paths"):
            if key in d:
                d[key] = tuple(d[key])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(f"bad config: {exc}") from exc

    def config_hash(self) -> str:
        # identifies the analytic configuration; where the artifacts land
        # is not part of it, so runs into different directories hash alike
        d = json.loads(self.to_json())
        d.pop("out_dir", None)
        blob = json.dumps(d, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def _atomic_write(path: Path, data: str | bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode, encoding=None if isinstance(data, bytes) else "utf-8") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _safe_name(label: str) -> str:
    return quote(label, safe="abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SEMMAP_THREADS", "1")))
    except ValueError:
        return 1


class _Artifacts:
    def __init__(self, root: Path, header: str):
        self.root = root
        self.header = header
        self.paths: list[Path] = []

    def write(self, rel: str, body: str, with_header: bool = True) -> Path:
        path = self.root / rel
        text = (f"# {self.header}\n" + body) if with_header else body
        _atomic_write(path, text)
        self.paths.append(path)
        return path

    def write_via(self, rel: str, emit) -> Path:
        """Atomic write through an emitter taking a path (temp + rename)."""
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        emit(tmp)
        os.replace(tmp, path)
        self.paths.append(path)
        return path

    def manifest(self) -> str:
        lines = [f"# {self.header}"]
        for path in sorted(self.paths):
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            lines.append(f"{digest}\t{path.relative_to(self.root)}")
        return "\n".join(lines) + "\n"


def run(config: PipelineConfig) -> Path:
    """Execute the whole pipeline; returns the manifest path."""
    config.validate()
    out = Path(config.out_dir)
    header = f"semmap config={config.config_hash()} seed={config.seed}"
    art = _Artifacts(out, header)
    art.write("config.json", config.to_json(), with_header=False)

    # corpus ------------------------------------------------------------
    manifest = cp.load_corpus(config.corpus_dir, config.metadata, config.pivot_iso)
    pivot = manifest.pivot
    pivot_tokens = {
        vid: cp.normalize(text) for vid, text in sorted(pivot.verses.items())
    }
    pivot_types = set(config.pivot_tokens)
    occurrences = [
        (vid, i)
        for vid, toks in pivot_tokens.items()
        for i, tok in enumerate(toks)
        if tok in pivot_types
    ]
    if not occurrences:
        raise cp.CorpusError(
            f"pivot tokens {sorted(pivot_types)} never occur in {config.pivot_iso}")
    all_target_verses = set()
    targets = sorted(iso for iso in manifest.doculects if iso != config.pivot_iso)
    for iso in targets:
        all_target_verses.update(manifest.doculects[iso].verses)
    dropped_verses = len(all_target_verses - set(pivot.verses))

    lines = ["iso\tname\tfamily\tmacroarea\tyear\tcoverage"]
    for iso, doc in sorted(manifest.doculects.items()):
        year = doc.year if doc.year is not None else "_"
        lines.append(f"{iso}\t{doc.name}\t{doc.family}\t{doc.macroarea}\t{year}\t{doc.coverage}")
    lines.append(f"# dropped_nonpivot_verses\t{dropped_verses}")
    art.write("corpus.tsv", "\n".join(lines) + "\n")

    # alignment ----------------------------------------------------------
    def align_one(iso: str):
        doc = manifest.doculects[iso]
        target_tokens = {vid: cp.normalize(t) for vid, t in sorted(doc.verses.items())}
        return al.align_pair(
            pivot_tokens, target_tokens, pivot_types,
            iterations=config.iterations, min_count=config.min_count,
            seed=config.seed,
        )

    parallels: dict[str, list[al.PivotParallel]] = {}
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        for iso, rows in zip(targets, pool.map(align_one, targets)):
            parallels[iso] = rows
    # the pivot realizes each occurrence with the pivot token itself
    parallels[config.pivot_iso] = [
        al.PivotParallel(vid, i, pivot_tokens[vid][i]) for vid, i in occurrences
    ]
    for iso in sorted(parallels):
        body = "".join(
            f"{p.verse_id}\t{p.pivot_index}\t{p.form if p.form is not None else NULL_MARKER}\n"
            for p in parallels[iso]
        )
        art.write(f"alignments/{iso}.tsv", body)

    # usage matrix, distances, embedding ---------------------------------
    matrix = pv.build_matrix(parallels, occurrences)
    art.write_via("matrix.tsv", lambda p: matrix.to_tsv(p, header=header))
    dist = pv.hamming(matrix)
    emb = (pv.classical_mds(dist, 2, row_ids=matrix.row_ids)
           if config.mds_dims == 2
           else pv.add_dimension(dist, row_ids=matrix.row_ids))
    art.write_via("embedding.tsv", lambda p: emb.to_tsv(p, header=header))
    points = emb.coords[:, :2]

    heat = sf.null_heat(matrix)
    art.write("heat.tsv", "row_id\tnull_count\n" + "".join(
        f"{rid}\t{h}\n" for rid, h in zip(matrix.row_ids, heat)))
    art.write("svg/heat.svg", svgmod.render_map(
        points, [None] * len(heat), heat=heat,
        title="null-construction concentration", comment=header,
    ), with_header=False)

    # mixture -------------------------------------------------------------
    if len(config.gmm_ks) > 1:
        report = mx.select_k(points, config.gmm_ks, seed=config.gmm_seed)
        art.write_via("gmm_selection.tsv", lambda p: report.to_tsv(p, header=header))
        chosen_k = report.chosen_k
    else:
        chosen_k = config.gmm_ks[0]
    model = mx.fit_gmm(points, chosen_k, seed=config.gmm_seed)

    body = ["cluster\tweight\tmean_x\tmean_y\tcov_xx\tcov_xy\tcov_yy"]
    for j in range(model.k):
        c = model.covariances[j]
        body.append(
            f"{j}\t{model.weights[j]:.9f}\t{model.means[j,0]:.9f}\t{model.means[j,1]:.9f}"
            f"\t{c[0,0]:.9f}\t{c[0,1]:.9f}\t{c[1,1]:.9f}"
        )
    art.write("gmm_model.tsv", "\n".join(body) + "\n")
    art.write("gmm_assignments.tsv", "row_id\tcluster\n" + "".join(
        f"{rid}\t{int(a)}\n" for rid, a in zip(matrix.row_ids, model.assignments)))

    # cluster -> group mapping
    row_index = {rid: i for i, rid in enumerate(matrix.row_ids)}
    if config.group_anchors:
        cluster_of_group = {}
        for g, anchor in config.group_anchors.items():
            if anchor not in row_index:
                raise ConfigError(f"group anchor {anchor!r} is not a row id")
            cluster_of_group[g] = int(model.assignments[row_index[anchor]])
    else:
        cluster_of_group = {g: int(c) for g, c in config.cluster_groups.items()}
    for g, c in cluster_of_group.items():
        if not (model.assignments == c).any():
            raise mx.MixtureError(f"group {g}: cluster {c} is empty")

    tree = mx.BallTree(points)
    cores = {
        g: mx.core_points(points, model.assignments, cluster_of_group[g],
                          k=config.core_k, row_ids=matrix.row_ids, tree=tree)
        for g in GROUPS
    }
    body = ["group\tcluster\tcentroid_x\tcentroid_y\tmember_row_ids"]
    for g in GROUPS:
        cs = cores[g]
        body.append(
            f"{g}\t{cs.cluster}\t{cs.centroid[0]:.9f}\t{cs.centroid[1]:.9f}\t"
            + ",".join(str(m) for m in cs.member_ids)
        )
    art.write("core_points.tsv", "\n".join(body) + "\n")

    # per-doculect surfaces, dictionaries, classification -----------------
    isos = sorted(matrix.columns)

    def surfaces_for(iso: str):
        labels = [c if c is not None else NULL_MARKER for c in matrix.column(iso)]
        attested = sorted(set(labels))
        out_s = {}
        for m in attested:
            try:
                out_s[m] = sf.fit_surface(
                    points, labels, m, grid=config.grid, levels=config.levels,
                    rho=config.rho, nugget_frac=config.nugget_frac,
                )
            except sf.SurfaceError:
                continue  # unfittable means (all points identical etc.)
        return out_s

    surf_by_iso: dict[str, dict] = {}
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        for iso, s in zip(isos, pool.map(surfaces_for, isos)):
            surf_by_iso[iso] = s

    classification = ["iso\tpattern\tsubpattern\tnull_flags\tdictionary"]
    dict_lines = ["iso\tdictionary"]
    score_lines = ["iso\tcluster\tmeans\ttp\tfp\tfn\tprecision\trecall\tf1\tbest"]
    best_by_cluster: dict[int, dict[str, str]] = {}
    for iso in isos:
        surfs = surf_by_iso[iso]
        for m in sorted(surfs):
            s = surfs[m]
            name = _safe_name(m)
            if config.dump_grids:
                art.write_via(f"surfaces/{iso}_{name}.grid.tsv",
                              lambda p, s=s: s.grid_to_tsv(p, header=header))
            art.write_via(f"surfaces/{iso}_{name}.contours.tsv",
                          lambda p, s=s: s.contours_to_tsv(p, header=header))

        areas = {m: s.contours.get(config.dictionary_level, [])
                 for m, s in surfs.items()}
        core_ids = {g: cores[g].member_ids for g in GROUPS}
        adict = ty.build_dictionary(core_ids, areas, points, row_index,
                                    alpha=config.alpha)
        assignment = ty.classify_pattern(adict)
        djson = json.dumps(adict.groups, sort_keys=True, ensure_ascii=False)
        dict_lines.append(f"{iso}\t{djson}")
        classification.append(
            f"{iso}\t{assignment.pattern}\t{assignment.subpattern or '_'}\t"
            f"{','.join(assignment.null_flags) or '_'}\t{djson}"
        )

        labels = matrix.column(iso)
        for g in GROUPS:
            cl = cluster_of_group[g]
            scores, best = ty.score_means(model.assignments, labels, cl)
            for s in scores:
                score_lines.append(
                    f"{iso}\t{cl}\t{s.means}\t{s.tp}\t{s.fp}\t{s.fn}"
                    f"\t{s.precision:.6f}\t{s.recall:.6f}\t{s.f1:.6f}"
                    f"\t{int(s.means == best.means)}"
                )
            best_by_cluster.setdefault(cl, {})[iso] = best.means

        contours_by_means = {
            m: {lv: [np.asarray(p) for p in s.contours.get(lv, [])]
                for lv in config.levels}
            for m, s in surfs.items()
        }
        svg_text = svgmod.render_map(
            points, labels, contours_by_means,
            title=f"{iso} ({manifest.doculects[iso].family})",
            comment=header,
        )
        art.write(f"svg/{iso}.svg", svg_text, with_header=False)

    art.write("dictionaries.tsv", "\n".join(dict_lines) + "\n")
    art.write("classification.tsv", "\n".join(classification) + "\n")
    art.write("scores.tsv", "\n".join(score_lines) + "\n")

    proto_lines = ["cluster\trank\trow_id\tscore"]
    for g in GROUPS:
        cl = cluster_of_group[g]
        ranking = ty.prototypicality(cl, best_by_cluster.get(cl, {}), matrix,
                                     model.assignments)
        for rank, (rid, score) in enumerate(ranking, 1):
            proto_lines.append(f"{cl}\t{rank}\t{rid}\t{score}")
    art.write("prototypicality.tsv", "\n".join(proto_lines) + "\n")

    manifest_text = art.manifest()
    manifest_path = out / "manifest.tsv"
    _atomic_write(manifest_path, manifest_text)
    return manifest_path

"""Page-level orchestration, evaluation metrics and the skew benchmark.

A page goes through binarization, deskew and flip correction, line, word
and character segmentation, descender and composite splitting, glyph and
modifier recognition, and finally transliteration.  Every stage is a pure
function of its input and the configuration, so runs are reproducible.
"""
from __future__ import annotations

import configparser
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np
from rapidfuzz.distance import Levenshtein

from . import pnm
from .errors import (DevlipiError, EmptyModifier, LayoutMismatch, MisalignedManifests,
                     SingleComponent, StageError)
from .features import ZoneLayout, endpoint_features
from .raster import (BoundingBox, as_binary, as_gray, binarize_invert, default_threshold,
                     histogram, rotate)
from .recognition import (TemplateLibrary, classify_modifier, classify_phase2, default_library,
                          disambiguate_header_pair, disambiguate_rakar, glyph_vectors, rank_phase1)
from .segmentation import (CharBox, SegConfig, compute_stats, flag_composites,
                           needs_descender_split, segment_words, split_characters,
                           split_conjunct, split_descender, split_overlapping_lines, split_shadow)
from .skew import SkewConfig, deskew, detect_flip, naive_skew
from .translit import (ALTERNATE, TranslitTable, default_table, label_kind, render_document,
                       sidecar_report, transliterate)

SEGMENTATION_MANIFEST = "segmentation.json"
DUMP_VERSION = 1


# ------------------------------------------------------------- configuration

@dataclass(frozen=True)
class PipelineConfig:
    threshold: int | None = None
    skew: SkewConfig = field(default_factory=SkewConfig)
    seg: SegConfig = field(default_factory=SegConfig)
    k: int = 10
    deskew: bool = True
    library: str | None = None
    zones: str | None = None
    translit_table: str | None = None

    def __post_init__(self):
        s = self.seg
        for name in ("header_band", "ch_ratio", "dh_ratio", "line_overlap"):
            v = getattr(s, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if not 0 < self.skew.peak_floor <= 1:
            raise ValueError(f"peak_floor must lie in (0, 1], got {self.skew.peak_floor}")
        for name in ("height_margin", "descender_region", "conjunct_region"):
            v = getattr(s, name)
            if not 0 <= v <= 0.5:
                raise ValueError(f"{name} must lie in [0, 0.5], got {v}")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.threshold is not None and not 0 <= self.threshold <= 255:
            raise ValueError(f"threshold must lie in [0, 255], got {self.threshold}")

    @classmethod
    def from_text(cls, text: str, base: "PipelineConfig | None" = None) -> "PipelineConfig":
        """Overlay ``key = value`` sections on ``base`` (the bundled defaults)."""
        base = base or cls()
        cp = configparser.ConfigParser()
        cp.read_string(text)
        known = {"binarize", "skew", "segmentation", "recognition", "paths"}
        for sec in cp.sections():
            if sec not in known:
                raise ValueError(f"unknown config section [{sec}]")
        skew_kw, seg_kw, top = {}, {}, {}
        if cp.has_section("binarize"):
            for key, raw in cp["binarize"].items():
                if key != "threshold":
                    raise ValueError(f"unknown key binarize.{key}")
                top["threshold"] = int(raw) if raw.strip() else None
        if cp.has_section("skew"):
            types = {f.name: f.type for f in fields(SkewConfig)}
            for key, raw in cp["skew"].items():
                if key == "deskew":
                    top["deskew"] = cp["skew"].getboolean(key)
                elif key in types:
                    skew_kw[key] = int(raw) if types[key] == "int" else float(raw)
                else:
                    raise ValueError(f"unknown key skew.{key}")
        if cp.has_section("segmentation"):
            types = {f.name: f.type for f in fields(SegConfig)}
            for key, raw in cp["segmentation"].items():
                if key not in types:
                    raise ValueError(f"unknown key segmentation.{key}")
                seg_kw[key] = int(raw) if types[key] == "int" else float(raw)
        if cp.has_section("recognition"):
            for key, raw in cp["recognition"].items():
                if key != "k":
                    raise ValueError(f"unknown key recognition.{key}")
                top["k"] = int(raw)
        if cp.has_section("paths"):
            for key, raw in cp["paths"].items():
                if key not in ("library", "zones", "translit_table"):
                    raise ValueError(f"unknown key paths.{key}")
                top[key] = raw.strip() or None
        return replace(base, skew=replace(base.skew, **skew_kw),
                       seg=replace(base.seg, **seg_kw), **top)

    @classmethod
    def load(cls, path=None) -> "PipelineConfig":
        """Bundled defaults, overlaid with ``path`` when given."""
        cfg = cls.from_text(default_conf_text(), cls())
        if path is not None:
            cfg = cls.from_text(Path(path).read_text(encoding="utf-8"), cfg)
        return cfg


def default_conf_text() -> str:
    return resources.files("devlipi").joinpath("data/default.conf").read_text(encoding="utf-8")


def load_resources(cfg: PipelineConfig):
    """(library, translit table) named by ``cfg``, bundled ones otherwise."""
    lib = TemplateLibrary.load(cfg.library) if cfg.library else default_library()
    if cfg.zones:
        layout = ZoneLayout.load(cfg.zones)
        if layout != lib.zone_layout:
            raise LayoutMismatch("configured zone layout differs from the library's")
    table = TranslitTable.load(cfg.translit_table) if cfg.translit_table else default_table()
    return lib, table


# ------------------------------------------------------------- page results

@dataclass
class Unit:
    """One written character: a core glyph plus its attached modifiers."""

    core: CharBox
    label: str | None = None
    alternates: tuple = ()
    first_choice: bool = True
    disambiguation: str = "none"
    modifiers: list = field(default_factory=list)  # [(CharBox, label or None)]
    composite: int | None = None  # index into PageResult.composites

    def labels(self) -> list:
        return [self.label] + order_modifiers([lab for _, lab in self.modifiers])


@dataclass
class PageResult:
    text: str
    report: dict
    tokens: list
    layout: list
    lines: list  # lines -> words -> Units
    composites: list
    image: np.ndarray  # the deskewed binary page
    estimate: object = None


def order_modifiers(labels: list) -> list:
    """Vowel signs and virama first, then nasal and aspiration marks;
    unrecognized modifiers last."""
    def rank(lab):
        if lab is None:
            return 2
        return 0 if label_kind(lab) in ("vsign", "virama") else 1
    return sorted(labels, key=rank)


def to_binary(img, threshold: int | None = None) -> np.ndarray:
    """Binary pages pass through; gray pages are thresholded and inverted."""
    arr = np.asarray(img)
    if arr.dtype == bool or (arr.size and arr.max() <= 1):
        return as_binary(arr)
    gray = as_gray(arr)
    t = default_threshold(histogram(gray)) if threshold is None else threshold
    return binarize_invert(gray, t)


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except StageError:
        raise
    except DevlipiError as e:
        raise StageError(name, e) from e


def _extract_lines(page, seg: SegConfig):
    return split_overlapping_lines(page, seg.min_card, seg.line_overlap)


def segment_page(page, seg: SegConfig = SegConfig()):
    """Split a deskewed binary page into units (without labels).

    Returns (lines of words of Units, composite records).
    """
    lines = _stage("lines", _extract_lines, page, seg)
    raw = []  # per line, per word: list of boxes
    for L in lines:
        words = []
        for w in segment_words(L, seg.header_band, seg.header_edge):
            boxes = split_characters(w)
            if boxes:
                words.append(boxes)
        if words:
            raw.append(words)
    cores = [b for line in raw for w in line for b in w if b.strip == "core"]
    if not cores:
        return [], []
    stats = _stage("stats", compute_stats, cores, seg)

    composites = []
    out = []
    for line in raw:
        out_words = []
        for boxes in line:
            units, ascenders = [], []
            for b in boxes:
                if b.strip == "ascender":
                    ascenders.append(b)
                    continue
                desc = None
                if needs_descender_split(b, stats):
                    b, desc = split_descender(b, stats, seg)
                b = flag_composites(b, stats)
                parts, method = [b], None
                if b.flags & {"composite_2", "composite_3"}:
                    try:
                        parts, method = split_shadow(b, seg.shadow_se), "shadow"
                    except SingleComponent:
                        parts, method = split_conjunct(b, stats, seg), "conjunct"
                        parts = [p.with_flags("joint_left") if i else p
                                 for i, p in enumerate(parts)]
                    composites.append({
                        "bbox": list(b.bbox.as_tuple()), "method": method,
                        "flags": sorted(b.flags),
                        "parts": [list(p.bbox.as_tuple()) for p in parts],
                    })
                new = [Unit(p, composite=len(composites) - 1 if method else None) for p in parts]
                if desc is not None:
                    # the descender hangs under the part it overlaps most
                    _attach(desc, new)
                units.extend(new)
            units.sort(key=lambda u: (u.core.bbox.left, u.core.bbox.top))
            for a in ascenders:
                _attach(a, units)
            if units:
                out_words.append(units)
        if out_words:
            out.append(out_words)
    return out, composites


def _attach(mod: CharBox, units: list):
    if not units:
        return
    def overlap(u):
        b = u.core.bbox
        ov = min(b.right, mod.bbox.right) - max(b.left, mod.bbox.left) + 1
        centre = abs((b.left + b.right) - (mod.bbox.left + mod.bbox.right))
        return (ov, -centre)
    best = max(units, key=overlap)
    best.modifiers.append([mod, None])


def recognition_image(box: CharBox) -> np.ndarray:
    """The glyph as the classifier sees it.  A conjunct part right of a cut
    starts at the joint column; a lone joint pixel there is ligature ink,
    not part of the glyph, and is left out."""
    g = box.image
    if "joint_left" in box.flags and g.shape[1] > 1 and g[:, 0].sum() == 1:
        g = g[:, 1:]
        cols = np.flatnonzero(g.any(axis=0))
        g = g[:, cols[0]:]
    return g


def recognize_units(lines, lib: TemplateLibrary, k: int = 10):
    """Label every unit in place."""
    for line in lines:
        for word in line:
            for u in word:
                g = recognition_image(u.core)
                x_reg, x_mom = glyph_vectors(g, lib.zone_layout, lib.side)
                short = rank_phase1(x_reg, lib, k)
                rec = classify_phase2(x_mom, short)
                rec = disambiguate_header_pair(rec, g, lib)
                rec = disambiguate_rakar(rec, g, lib)
                u.label = rec.label
                u.alternates = rec.alternates
                u.disambiguation = rec.disambiguation_applied
                # the chosen template was not the nearest zone vector
                u.first_choice = short[0][0].label == rec.label or rec.disambiguation_applied != "none"
                for m in u.modifiers:
                    box = m[0]
                    try:
                        feat = endpoint_features(box.image)
                    except EmptyModifier:
                        m[1] = None
                        continue
                    m[1] = classify_modifier(feat, lib, box.strip)
    return lines


def assemble(lines, table: TranslitTable):
    """Tokens, layout and text of labelled units."""
    tokens, layout = [], []
    for line in lines:
        counts = []
        for word in line:
            labels, alts = [], {}
            for u in word:
                if not u.first_choice:
                    alts[len(labels)] = u.alternates
                labels += u.labels()
            toks = transliterate(labels, table, alts)
            tokens += toks
            counts.append(len(toks))
        layout.append(counts)
    return tokens, layout, render_document(tokens, layout)


def process_page(img, cfg: PipelineConfig = PipelineConfig(), lib: TemplateLibrary | None = None,
                 table: TranslitTable | None = None) -> PageResult:
    if lib is None or table is None:
        l2, t2 = load_resources(cfg)
        lib, table = lib or l2, table or t2
    page = _stage("binarize", to_binary, img, cfg.threshold)
    est = None
    if page.any() and cfg.deskew:
        page, est = _stage("deskew", deskew, page, cfg.skew)
    lines, composites = segment_page(page, cfg.seg) if page.any() else ([], [])
    recognize_units(lines, lib, cfg.k)
    return _finish(lines, composites, page, est, table)


def _finish(lines, composites, page, est, table):
    tokens, layout, text = assemble(lines, table)
    report = sidecar_report(tokens, layout)
    n_glyphs = sum(len(w) for L in lines for w in L)
    report.update({
        "glyphs": n_glyphs,
        "lines": len(lines),
        "words": sum(len(L) for L in lines),
        "composites": composites,
        "unrecognized_glyph_modifiers": sum(m[1] is None for L in lines for w in L for u in w
                                            for m in u.modifiers),
        "skew": None if est is None else {
            "theta": est.theta_skew, "flipped": est.flipped, "total": est.total_angle,
            "direction": est.direction, "range": list(est.search_range),
            "fallback": est.fallback, "rotations": est.rotations,
        },
    })
    return PageResult(text, report, tokens, layout, lines, composites, page, est)


def load_page(path, threshold: int | None = None) -> np.ndarray:
    """Read and binarize a page file; unreadable files raise ``OSError``."""
    return pnm.read_binary(path, threshold)


def run(image_path, cfg: PipelineConfig = PipelineConfig(), out=None, dump_dir=None,
        lib=None, table=None) -> PageResult:
    """Process one page file, or resume from a segmentation dump directory.

    With ``out`` the text goes to that file and the report to ``out`` with
    a ``.json`` suffix added.
    """
    src = Path(image_path)
    if src.is_dir() and (src / SEGMENTATION_MANIFEST).exists():
        res = run_from_dump(src, cfg, lib, table)
    else:
        res = process_page(load_page(src, cfg.threshold), cfg, lib, table)
    if dump_dir is not None:
        dump_segmentation(res, dump_dir)
    if out is not None:
        write_outputs(res, out)
    return res


def write_outputs(res: PageResult, out):
    out = Path(out)
    out.write_bytes(res.text.encode("utf-8"))
    Path(str(out) + ".json").write_text(
        json.dumps(res.report, ensure_ascii=False, indent=1, sort_keys=True) + "\n",
        encoding="utf-8")


# ------------------------------------------------------------- dumps

def _box_record(box: CharBox, name: str) -> dict:
    return {"file": name, "strip": box.strip, "bbox": list(box.bbox.as_tuple()),
            "flags": sorted(box.flags)}


def dump_segmentation(res: PageResult, out_dir) -> Path:
    """Write the deskewed page, every unit's glyph and modifier PBMs, and a
    manifest that :func:`run_from_dump` accepts."""
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    pnm.write_pbm(d / "page.pbm", res.image)
    n = 0
    lines = []
    for L in res.lines:
        words = []
        for w in L:
            units = []
            for u in w:
                name = f"g{n:05d}.pbm"
                n += 1
                pnm.write_pbm(d / name, u.core.image)
                mods = []
                for box, _ in u.modifiers:
                    mname = f"g{n:05d}.pbm"
                    n += 1
                    pnm.write_pbm(d / mname, box.image)
                    mods.append(_box_record(box, mname))
                rec = _box_record(u.core, name)
                rec.update({"composite": u.composite, "modifiers": mods})
                units.append(rec)
            words.append(units)
        lines.append(words)
    doc = {
        "version": DUMP_VERSION,
        "page": "page.pbm",
        "shape": list(res.image.shape),
        "skew": res.report.get("skew"),
        "composites": res.composites,
        "lines": lines,
    }
    path = d / SEGMENTATION_MANIFEST
    path.write_text(json.dumps(doc, ensure_ascii=False, indent=1, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def _read_box(d: Path, rec: dict) -> CharBox:
    img = pnm.read_binary(d / rec["file"])
    return CharBox(img, rec["strip"], BoundingBox(*rec["bbox"]), frozenset(rec["flags"]))


def run_from_dump(dump_dir, cfg: PipelineConfig = PipelineConfig(), lib=None, table=None):
    """Recognize and transliterate a segmentation dump."""
    if lib is None or table is None:
        l2, t2 = load_resources(cfg)
        lib, table = lib or l2, table or t2
    d = Path(dump_dir)
    doc = json.loads((d / SEGMENTATION_MANIFEST).read_text(encoding="utf-8"))
    if doc.get("version") != DUMP_VERSION:
        raise ValueError(f"unsupported dump version {doc.get('version')!r}")
    lines = []
    for L in doc["lines"]:
        words = []
        for w in L:
            units = []
            for rec in w:
                u = Unit(_read_box(d, rec), composite=rec.get("composite"))
                u.modifiers = [[_read_box(d, m), None] for m in rec["modifiers"]]
                units.append(u)
            words.append(units)
        lines.append(words)
    recognize_units(lines, lib, cfg.k)
    page = pnm.read_binary(d / doc["page"])
    res = _finish(lines, doc["composites"], page, None, table)
    res.report["skew"] = doc.get("skew")
    return res


# ------------------------------------------------------------- ground truth

def truth_words(manifest: dict) -> list:
    """Per line, per word: the label sequence recorded by the generator."""
    out = []
    for L in manifest["lines"]:
        words = []
        for w in L["words"]:
            labels = []
            for ch in w["chars"]:
                labels.append(ch["label"])
                labels += order_modifiers([m["label"] for m in ch["modifiers"]])
            words.append(labels)
        out.append(words)
    return out


def truth_text(manifest: dict, table: TranslitTable | None = None) -> str:
    table = table or default_table()
    tokens, layout = [], []
    for line in truth_words(manifest):
        counts = []
        for labels in line:
            toks = transliterate(labels, table)
            tokens += toks
            counts.append(len(toks))
        layout.append(counts)
    return render_document(tokens, layout)


def predicted_words(res: PageResult) -> list:
    return [[[lab for u in w for lab in u.labels()] for w in L] for L in res.lines]


# ------------------------------------------------------------- metrics

def _pct(num, den) -> float:
    return 100.0 if den == 0 else 100.0 * num / den


@dataclass(frozen=True)
class SegMetrics:
    total_composite: int
    detected: int
    correctly_segmented: int
    fp: int
    fn: int
    precision: float
    recall: float

    @classmethod
    def from_counts(cls, seg: int, fp: int, fn: int, total: int | None = None,
                    detected: int | None = None) -> "SegMetrics":
        if min(seg, fp, fn) < 0:
            raise ValueError("counts must be non-negative")
        return cls(seg + fn if total is None else total,
                   seg + fp if detected is None else detected,
                   seg, fp, fn, _pct(seg, seg + fp), _pct(seg, seg + fn))


@dataclass(frozen=True)
class TranslitMetrics:
    total_chars: int
    transliterated: int
    accurate: int
    not_first_choice: int
    error: float

    @classmethod
    def from_counts(cls, transliterated: int, accurate: int, total: int | None = None,
                    not_first_choice: int = 0) -> "TranslitMetrics":
        if not 0 <= accurate <= transliterated:
            raise ValueError("need 0 <= accurate <= transliterated")
        err = 0.0 if transliterated == 0 else 100.0 * (transliterated - accurate) / transliterated
        return cls(transliterated if total is None else total, transliterated, accurate,
                   not_first_choice, err)


def _iou(a, b) -> float:
    t, bo, l, r = max(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), min(a[3], b[3])
    if bo < t or r < l:
        return 0.0
    inter = (bo - t + 1) * (r - l + 1)
    area = lambda x: (x[1] - x[0] + 1) * (x[3] - x[2] + 1)  # noqa: E731
    return inter / (area(a) + area(b) - inter)


def _truth_parts(manifest: dict, comp: dict) -> list:
    """Glyph boxes of the constituents of a generator composite."""
    box = comp["bbox"]
    chars = [c for L in manifest["lines"] for w in L["words"] for c in w["chars"]
             if c["bbox"][2] >= box[2] and c["bbox"][3] <= box[3]
             and c["bbox"][0] >= box[0] and c["bbox"][1] <= box[1]]
    return sorted((c["bbox"] for c in chars), key=lambda b: b[2])


def seg_metrics(truth: dict, pred: dict, iou: float = 0.5) -> SegMetrics:
    """Compare generator composites against the pipeline's composite records.

    A truth composite is correctly segmented when some predicted composite
    overlaps it and its parts match the constituents one to one.  Predicted
    splits that settle no truth composite are false positives; truth
    composites left unsettled are false negatives.
    """
    if "composites" not in truth or "composites" not in pred:
        raise MisalignedManifests("both manifests need a composites list")
    ps = pred.get("shape")
    if ps is not None and not truth.get("skew") and "height" in truth:
        if (truth["height"], truth["width"]) != tuple(ps):
            raise MisalignedManifests(
                f"page sizes differ: {(truth['height'], truth['width'])} vs {tuple(ps)}")
    tcomp = truth["composites"]
    pcomp = list(pred["composites"])
    used = set()
    seg = 0
    for c in tcomp:
        parts = _truth_parts(truth, c)
        best, best_iou = None, 0.0
        for j, p in enumerate(pcomp):
            if j in used:
                continue
            v = _iou(c["bbox"], p["bbox"])
            if v > best_iou:
                best, best_iou = j, v
        if best is None or best_iou < iou:
            continue
        p = pcomp[best]
        got = sorted(p["parts"], key=lambda b: b[2])
        if len(got) == len(parts) and all(_iou(a, b) >= iou for a, b in zip(parts, got)):
            used.add(best)
            seg += 1
    fp = len(pcomp) - len(used)
    fn = len(tcomp) - seg
    return SegMetrics(len(tcomp), len(pcomp), seg, fp, fn, _pct(seg, seg + fp), _pct(seg, seg + fn))


def _chars(text: str) -> str:
    return "".join(text.split())


def align_counts(truth: str, produced: str) -> int:
    """Matched positions of a minimal character-level edit alignment."""
    ops = Levenshtein.opcodes(_chars(truth), _chars(produced))
    return sum(op.src_end - op.src_start for op in ops if op.tag == "equal")


def translit_metrics(truth: str, produced) -> TranslitMetrics:
    """``produced`` is either text or a token list from the pipeline."""
    nfc = 0
    if not isinstance(produced, str):
        toks = list(produced)
        nfc = sum(t.confidence == ALTERNATE for t in toks)
        produced = "".join(t.roman for t in toks)
    acc = align_counts(truth, produced)
    return TranslitMetrics.from_counts(len(_chars(produced)), acc, len(_chars(truth)), nfc)


def glyph_accuracy(truth_words_, pred_words) -> float:
    """Share of truth labels matched by an edit alignment of label lists."""
    t = [lab for L in truth_words_ for w in L for lab in w]
    p = [lab for L in pred_words for w in L for lab in w]
    if not t:
        return 100.0
    ops = Levenshtein.opcodes(t, p)
    hit = sum(op.src_end - op.src_start for op in ops if op.tag == "equal")
    return 100.0 * hit / len(t)


def noise_accuracy(lib: TemplateLibrary | None = None, glyphs=None, density: float = 0.01,
                   trials: int = 5, seed: int = 0, k: int = 10) -> float:
    """Percentage of core glyphs still recognized after flipping ``density``
    of their pixels at random."""
    from .recognition import classify_glyph
    from .font import default_font

    lib = lib or default_library()
    if glyphs is None:
        f = default_font()
        glyphs = {**f.core, **f.rakar}
    rng = np.random.default_rng(seed)
    hit = tot = 0
    for label, g in glyphs.items():
        for _ in range(trials):
            noisy = flip_pixels(g, density, rng)
            if not noisy.any():
                continue
            tot += 1
            hit += classify_glyph(noisy, lib, k).label == label
    return 100.0 * hit / max(tot, 1)


def flip_pixels(img, density: float, rng) -> np.ndarray:
    """Toggle ``round(density * size)`` distinct pixels (at least one)."""
    g = as_binary(img).copy()
    n = max(1, int(round(density * g.size)))
    idx = rng.choice(g.size, size=min(n, g.size), replace=False)
    flat = g.reshape(-1)
    flat[idx] ^= 1
    return g


# ------------------------------------------------------------- skew benchmark

def angle_error(est: float, true: float) -> float:
    return abs((est - true + 180.0) % 360.0 - 180.0)


@dataclass(frozen=True)
class BenchRow:
    method: str
    range_tested: str
    pages: int
    mean_abs_error: float
    within_2: int
    mean_seconds: float
    mean_rotations: float


def bench_skew(pages, cfg: SkewConfig = SkewConfig(), naive: bool = True) -> list:
    """``pages`` yields (binary image, true angle); returns one row per method."""
    pages = list(pages)
    rows = []
    methods = [("proposed", "-180..180 (bounded)")]
    if naive:
        methods.append(("naive-full-sweep", "-180..180 step %g" % cfg.range_step))
    for method, rng_txt in methods:
        errs, secs, rots = [], [], []
        for img, true in pages:
            t0 = time.perf_counter()
            if method == "proposed":
                _, est = deskew(img, cfg)
            else:
                est = naive_skew(img, cfg)
                out = rotate(img, -est.theta_skew) if est.theta_skew else img
                est = replace(est, flipped=detect_flip(out))
            secs.append(time.perf_counter() - t0)
            errs.append(angle_error(est.total_angle, true))
            rots.append(est.rotations)
        rows.append(BenchRow(method, rng_txt, len(pages), float(np.mean(errs)) if errs else 0.0,
                             int(sum(e <= 2.0 for e in errs)), float(np.mean(secs)) if secs else 0.0,
                             float(np.mean(rots)) if rots else 0.0))
    return rows


def format_bench(rows) -> str:
    head = f"{'method':<18} {'range':<22} {'pages':>5} {'err':>7} {'<=2':>4} {'sec':>7} {'rot':>7}"
    out = [head]
    for r in rows:
        out.append(f"{r.method:<18} {r.range_tested:<22} {r.pages:>5} {r.mean_abs_error:>7.2f} "
                   f"{r.within_2:>4} {r.mean_seconds:>7.3f} {r.mean_rotations:>7.1f}")
    return "\n".join(out)


def bench_rows_json(rows) -> str:
    return json.dumps([asdict(r) for r in rows], indent=1) + "\n"

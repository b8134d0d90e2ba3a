"""Template library and two-phase nearest-neighbour recognition.

Phase 1 ranks core templates by the Euclidean distance between zone-count
vectors and keeps a shortlist; phase 2 picks the shortlist member with the
nearest moment vector.  Two rule-driven passes then settle glyph pairs that
differ only once the header line is gone, and consonants carrying a rakar
stroke.  Modifiers are classified by a decision table over skeleton
endpoints.
"""
from __future__ import annotations

import csv
import json
import unicodedata
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import pnm
from .errors import BadLabel, DimensionMismatch, EmptyLibrary
from .features import (DEFAULT_SIDE, EndpointFeatures, ZoneLayout, count_endpoints,
                       default_layout, endpoint_features, moment_vector, normalize_glyph,
                       zone_counts)
from .raster import cc_label, despeckle, majority

LIB_VERSION = 1
MANIFEST = "library.json"
CLASSES = ("core", "ascender", "descender")
UNRECOGNIZED = None
SPECK = 3


@dataclass(frozen=True)
class GlyphTemplate:
    label: str
    cls: str
    s_reg: np.ndarray
    s_mom: np.ndarray
    cc_count_no_header: int
    endpoint_count: int
    signatures: tuple = ()
    source: str = ""


@dataclass(frozen=True)
class ConfusionPair:
    labels: tuple
    cc_counts: tuple


@dataclass(frozen=True)
class RakarRule:
    base: str
    composite: str
    threshold: int


@dataclass(frozen=True)
class ModifierRule:
    """One row of the modifier decision table; ``None`` fields match anything."""

    label: str
    strip: str
    cc_count: int | None = None
    endpoint_count: int | None = None
    signatures: tuple | None = None

    def matches(self, feat: EndpointFeatures, strip: str) -> bool:
        if self.strip != strip:
            return False
        if self.cc_count is not None and feat.cc_count != self.cc_count:
            return False
        if self.endpoint_count is not None and feat.endpoint_count != self.endpoint_count:
            return False
        if self.signatures is not None and feat.signatures != self.signatures:
            return False
        return True


@dataclass(frozen=True)
class Recognition:
    label: str
    d_reg: float
    d_mom: float
    alternates: tuple = ()
    disambiguation_applied: str = "none"
    unresolved: bool = False


@dataclass(frozen=True)
class TemplateLibrary:
    templates: tuple
    zone_layout: ZoneLayout = field(default_factory=default_layout)
    side: int = DEFAULT_SIDE
    confusion_pairs: tuple = ()
    rakar_rules: tuple = ()
    modifier_rules: tuple = ()

    def __post_init__(self):
        if not self.templates:
            raise EmptyLibrary("library has no templates")
        if tuple(self.zone_layout.canvas) != (self.side, self.side):
            raise DimensionMismatch(
                f"zone canvas {self.zone_layout.canvas} != normalization side {self.side}")
        if not any(t.cls == "core" for t in self.templates):
            raise EmptyLibrary("library has no core templates")
        labels = {t.label for t in self.templates}
        for p in self.confusion_pairs:
            for lab in p.labels:
                if lab not in labels:
                    raise BadLabel(f"confusion pair names unknown label {lab!r}")
        for r in self.rakar_rules:
            if r.base not in labels:
                raise BadLabel(f"rakar rule names unknown base {r.base!r}")

    @cached_property
    def core(self) -> tuple:
        return tuple(t for t in self.templates if t.cls == "core")

    @cached_property
    def reg_matrix(self) -> np.ndarray:
        return np.array([t.s_reg for t in self.core], dtype=np.float64)

    @cached_property
    def mom_matrix(self) -> np.ndarray:
        return np.array([t.s_mom for t in self.core], dtype=np.float64)

    def by_label(self, label):
        return next(t for t in self.templates if t.label == label)

    # ---- persistence

    def to_json(self) -> str:
        doc = {
            "version": LIB_VERSION,
            "side": self.side,
            "zone_layout": self.zone_layout.dumps(),
            "templates": [{
                "label": t.label, "class": t.cls,
                "s_reg": [int(v) for v in t.s_reg],
                "s_mom": [float(v) for v in t.s_mom],
                "cc_count_no_header": t.cc_count_no_header,
                "endpoint_count": t.endpoint_count,
                "signatures": [list(s) for s in t.signatures],
                "source": t.source,
            } for t in self.templates],
            "confusion_pairs": [{"labels": list(p.labels), "cc_counts": list(p.cc_counts)}
                                for p in self.confusion_pairs],
            "rakar_rules": [{"base": r.base, "composite": r.composite, "threshold": r.threshold}
                            for r in self.rakar_rules],
            "modifier_rules": [{
                "label": r.label, "strip": r.strip, "cc_count": r.cc_count,
                "endpoint_count": r.endpoint_count,
                "signatures": None if r.signatures is None else [list(s) for s in r.signatures],
            } for r in self.modifier_rules],
        }
        return json.dumps(doc, ensure_ascii=False, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TemplateLibrary":
        doc = json.loads(text)
        if doc.get("version") != LIB_VERSION:
            raise BadLabel(f"unsupported library version {doc.get('version')!r}")
        templates = tuple(GlyphTemplate(
            label=t["label"], cls=t["class"],
            s_reg=np.array(t["s_reg"], dtype=np.int64),
            s_mom=np.array(t["s_mom"], dtype=np.float64),
            cc_count_no_header=int(t["cc_count_no_header"]),
            endpoint_count=int(t["endpoint_count"]),
            signatures=tuple(tuple(s) for s in t["signatures"]),
            source=t.get("source", ""),
        ) for t in doc["templates"])
        sig = lambda v: None if v is None else tuple(tuple(s) for s in v)  # noqa: E731
        return cls(
            templates=templates,
            zone_layout=ZoneLayout.loads(doc["zone_layout"]),
            side=int(doc["side"]),
            confusion_pairs=tuple(ConfusionPair(tuple(p["labels"]), tuple(p["cc_counts"]))
                                  for p in doc["confusion_pairs"]),
            rakar_rules=tuple(RakarRule(r["base"], r["composite"], int(r["threshold"]))
                              for r in doc["rakar_rules"]),
            modifier_rules=tuple(ModifierRule(r["label"], r["strip"], r["cc_count"],
                                              r["endpoint_count"], sig(r["signatures"]))
                                 for r in doc["modifier_rules"]),
        )

    def save(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / MANIFEST
        path.write_text(self.to_json(), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path) -> "TemplateLibrary":
        p = Path(path)
        if p.is_dir():
            p = p / MANIFEST
        return cls.from_json(p.read_text(encoding="utf-8"))


# ------------------------------------------------------------- features

def clean_glyph(glyph, speck: int = SPECK) -> np.ndarray:
    """Speck removal and a 3x3 majority vote, so isolated flipped pixels and
    ragged stroke rims do not reach the features.  Falls back to the input
    when cleaning would erase it."""
    g = majority(despeckle(glyph, speck))
    return g if g.any() else np.asarray(glyph)


def glyph_vectors(glyph, layout: ZoneLayout, side: int = DEFAULT_SIDE, speck: int = SPECK):
    """(S_reg, S_mom) of a glyph after cleaning and normalization."""
    g = normalize_glyph(clean_glyph(glyph, speck), side)
    return zone_counts(g, layout), moment_vector(g)


def cc_count(glyph, speck: int = SPECK) -> int:
    """8-connected components, ignoring specks smaller than ``speck`` pixels."""
    return sum(1 for c in cc_label(glyph, 8).components if c.cardinality >= speck)


def make_template(glyph, label, cls="core", layout=None, side=DEFAULT_SIDE, source=""):
    if not label or any(unicodedata.category(ch).startswith("C") for ch in label):
        raise BadLabel(f"invalid label {label!r}")
    if cls not in CLASSES:
        raise BadLabel(f"unknown class {cls!r} for {label!r}")
    g = np.asarray(glyph)
    if g.ndim != 2 or 0 in g.shape:
        raise DimensionMismatch(f"glyph {label!r} has shape {g.shape}")
    layout = layout or default_layout()
    s_reg, s_mom = glyph_vectors(g, layout, side)
    sigs = ()
    if cls != "core":
        sigs = endpoint_features(g).signatures
    return GlyphTemplate(label, cls, s_reg, s_mom, cc_count(g), count_endpoints(g), sigs, source)


def derive_modifier_rules(templates) -> tuple:
    """A decision table that separates every modifier template.

    Each rule names only as much as it needs: the component count always,
    the endpoint count next, the sorted endpoint signatures last.  Rules
    that need signatures are listed before the looser ones.
    """
    rules = []
    for strip in ("ascender", "descender"):
        mods = [t for t in templates if t.cls == strip]
        for t in mods:
            same_cc = [u for u in mods if u is not t and u.cc_count_no_header == t.cc_count_no_header]
            if not same_cc:
                rules.append(ModifierRule(t.label, strip, t.cc_count_no_header))
                continue
            same_ep = [u for u in same_cc if u.endpoint_count == t.endpoint_count]
            if not same_ep:
                rules.append(ModifierRule(t.label, strip, t.cc_count_no_header, t.endpoint_count))
                continue
            rules.append(ModifierRule(t.label, strip, t.cc_count_no_header, t.endpoint_count,
                                      t.signatures))
    rules.sort(key=lambda r: (r.strip, r.signatures is None, r.endpoint_count is None))
    return tuple(rules)


def build_library(entries, layout=None, side=DEFAULT_SIDE, confusion=(), rakar=(),
                  modifier_rules=None) -> TemplateLibrary:
    """Assemble a library from ``(glyph, label, class, source)`` entries.

    ``confusion`` lists label groups told apart by their component count;
    ``rakar`` lists ``(base, composite)`` pairs.
    """
    layout = layout or default_layout()
    templates = tuple(make_template(g, lab, cls, layout, side, src)
                      for g, lab, cls, src in entries)
    by = {t.label: t for t in templates}
    pairs = []
    for group in confusion:
        for lab in group:
            if lab not in by:
                raise BadLabel(f"confusion pair names unknown label {lab!r}")
        counts = tuple(by[lab].cc_count_no_header for lab in group)
        if len(set(counts)) != len(counts):
            raise BadLabel(f"confusion group {group} is not separable by component count")
        pairs.append(ConfusionPair(tuple(group), counts))
    rules = []
    for base, comp in rakar:
        if base not in by or comp not in by:
            raise BadLabel(f"rakar rule {base!r} -> {comp!r} names an unknown label")
        b, c = by[base].endpoint_count, by[comp].endpoint_count
        if c < b + 2:
            raise BadLabel(f"rakar form {comp!r} adds fewer than two endpoints to {base!r}")
        rules.append(RakarRule(base, comp, b + 2))
    mods = derive_modifier_rules(templates) if modifier_rules is None else tuple(modifier_rules)
    return TemplateLibrary(templates, layout, side, tuple(pairs), tuple(rules), mods)


def ingest_templates(glyph_dir, out_dir=None) -> TemplateLibrary:
    """Build a library from a glyph directory.

    The directory holds PBM glyphs, ``labels.tsv`` (file, label, class),
    optionally ``zones.txt`` and ``rules.json`` with ``confusion_pairs``,
    ``rakar`` and ``modifier_rules``.
    """
    d = Path(glyph_dir)
    table = d / "labels.tsv"
    if not table.exists():
        raise BadLabel(f"{table} not found")
    layout = ZoneLayout.load(d / "zones.txt") if (d / "zones.txt").exists() else default_layout()
    side = layout.canvas[0]
    entries = []
    with table.open(encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh, delimiter="\t"):
            if not row or row[0].startswith("#"):
                continue
            if len(row) < 2:
                raise BadLabel(f"malformed labels.tsv row {row!r}")
            name, label = row[0], unicodedata.normalize("NFC", row[1].strip())
            cls = row[2].strip() if len(row) > 2 else "core"
            entries.append((pnm.read_binary(d / name), label, cls, name))
    rules = {}
    if (d / "rules.json").exists():
        rules = json.loads((d / "rules.json").read_text(encoding="utf-8"))
    mod = None
    if "modifier_rules" in rules:
        mod = [ModifierRule(r["label"], r["strip"], r.get("cc_count"), r.get("endpoint_count"),
                            None if r.get("signatures") is None
                            else tuple(tuple(s) for s in r["signatures"]))
               for r in rules["modifier_rules"]]
    lib = build_library(entries, layout, side, rules.get("confusion_pairs", ()),
                        rules.get("rakar", ()), mod)
    if out_dir is not None:
        lib.save(out_dir)
    return lib


# ------------------------------------------------------------- classification

def rank_phase1(x_reg, lib: TemplateLibrary, k: int = 10) -> list:
    """Top-``k`` core templates by zone-count distance, as (template, d_reg)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if not lib.core:
        raise EmptyLibrary("library has no core templates")
    diff = lib.reg_matrix - np.asarray(x_reg, dtype=np.float64)
    d = np.sqrt((diff * diff).sum(axis=1))
    order = np.argsort(d, kind="stable")[:k]
    return [(lib.core[i], float(d[i])) for i in order]


def classify_phase2(x_mom, shortlist) -> Recognition:
    """Nearest moment vector within the shortlist."""
    if not shortlist:
        raise ValueError("shortlist is empty")
    x = np.asarray(x_mom, dtype=np.float64)
    d = np.array([np.sqrt(((t.s_mom - x) ** 2).sum()) for t, _ in shortlist])
    order = np.argsort(d, kind="stable")
    best = order[0]
    t, d_reg = shortlist[best]
    alts = tuple(shortlist[i][0].label for i in order[1:])
    return Recognition(t.label, d_reg, float(d[best]), alts)


def disambiguate_header_pair(rec: Recognition, glyph, lib: TemplateLibrary) -> Recognition:
    for pair in lib.confusion_pairs:
        if rec.label in pair.labels:
            n = cc_count(glyph)
            if n in pair.cc_counts:
                label = pair.labels[pair.cc_counts.index(n)]
                return Recognition(label, rec.d_reg, rec.d_mom, rec.alternates, "header_cc")
            return Recognition(rec.label, rec.d_reg, rec.d_mom, rec.alternates,
                               rec.disambiguation_applied, True)
    return rec


def disambiguate_rakar(rec: Recognition, glyph, lib: TemplateLibrary) -> Recognition:
    for rule in lib.rakar_rules:
        if rec.label == rule.base:
            if count_endpoints(glyph) >= rule.threshold:
                return Recognition(rule.composite, rec.d_reg, rec.d_mom, rec.alternates, "rakar")
            return rec
    return rec


def classify_glyph(glyph, lib: TemplateLibrary, k: int = 10) -> Recognition:
    x_reg, x_mom = glyph_vectors(glyph, lib.zone_layout, lib.side)
    rec = classify_phase2(x_mom, rank_phase1(x_reg, lib, k))
    rec = disambiguate_header_pair(rec, glyph, lib)
    return disambiguate_rakar(rec, glyph, lib)


def classify_modifier(feat: EndpointFeatures, lib: TemplateLibrary, strip: str = "ascender"):
    """Label of the first matching decision-table row, or None."""
    if feat.cc_count == 2:
        two = [r for r in lib.modifier_rules if r.strip == strip and r.cc_count == 2]
        if len(two) == 1:
            return two[0].label
    for rule in lib.modifier_rules:
        if rule.matches(feat, strip):
            return rule.label
    return UNRECOGNIZED


_DEFAULT = {}


def default_library() -> TemplateLibrary:
    """Library built from the bundled procedural font."""
    if "lib" not in _DEFAULT:
        from .font import default_font, font_entries, font_rules
        f = default_font()
        rules = font_rules(f)
        _DEFAULT["lib"] = build_library(font_entries(f), confusion=rules["confusion_pairs"],
                                        rakar=rules["rakar"])
    return _DEFAULT["lib"]

import json

import numpy as np
import pytest

from devlipi.errors import BadLabel, DimensionMismatch, EmptyLibrary
from devlipi.features import default_layout, endpoint_features
from devlipi.font import write_glyph_dir
from devlipi.recognition import (ModifierRule, Recognition, TemplateLibrary, build_library,
                                 classify_glyph, classify_modifier, classify_phase2,
                                 disambiguate_header_pair, disambiguate_rakar, glyph_vectors,
                                 ingest_templates, make_template, rank_phase1)
from devlipi.segmentation import strip_header


def test_self_recognition_exact(lib, font):
    glyphs = {**font.core, **font.rakar}
    for t in lib.core:
        rec = classify_glyph(glyphs[t.label], lib)
        assert rec.label == t.label
        assert rec.d_reg == 0.0 and rec.d_mom == 0.0


def test_rank_phase1_examples(lib):
    t = lib.core[5]
    ranked = rank_phase1(t.s_reg, lib, 3)
    assert ranked[0][0].label == t.label and ranked[0][1] == 0.0
    assert len(ranked) == 3
    with pytest.raises(ValueError):
        rank_phase1(t.s_reg, lib, 0)


def test_rank_phase1_matches_exhaustive_sort(lib):
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = rng.integers(0, 120, 13)
        d = [float(np.sqrt(((t.s_reg - x) ** 2).sum())) for t in lib.core]
        order = sorted(range(len(d)), key=lambda i: (d[i], i))[:10]
        got = rank_phase1(x, lib, 10)
        assert [lib.core.index(t) for t, _ in got] == order


def _toy_library():
    a = np.zeros((20, 12), dtype=np.uint8)
    a[:, 5:7] = 1
    b = a.copy()
    return build_library([(a, "क", "core", ""), (b, "ख", "core", "")])


def test_ties_keep_library_order():
    toy = _toy_library()
    ranked = rank_phase1(toy.core[0].s_reg, toy, 2)
    assert [t.label for t, _ in ranked] == ["क", "ख"]
    rec = classify_phase2(toy.core[0].s_mom, ranked)
    assert rec.label == "क" and rec.alternates == ("ख",)


def test_classify_phase2_exhaustive(lib):
    rng = np.random.default_rng(9)
    for _ in range(20):
        picks = rng.choice(len(lib.core), 6, replace=False)
        shortlist = [(lib.core[i], 0.0) for i in picks]
        x = rng.normal(0, 5, 16)
        d = [np.sqrt(((t.s_mom - x) ** 2).sum()) for t, _ in shortlist]
        assert classify_phase2(x, shortlist).label == shortlist[int(np.argmin(d))][0].label
    one = [(lib.core[0], 1.5)]
    assert classify_phase2(np.zeros(16), one).label == lib.core[0].label
    with pytest.raises(ValueError):
        classify_phase2(np.zeros(16), [])


def test_header_pair_disambiguation(lib, font):
    assert lib.confusion_pairs
    pair = lib.confusion_pairs[0]
    a, b = pair.labels
    for want, other in ((a, b), (b, a)):
        rec = Recognition(other, 1.0, 1.0)
        got = disambiguate_header_pair(rec, font.core[want], lib)
        assert got.label == want and got.disambiguation_applied == "header_cc"
        # idempotent
        assert disambiguate_header_pair(got, font.core[want], lib).label == want
    untouched = Recognition("क", 0.0, 0.0)
    assert disambiguate_header_pair(untouched, font.core["क"], lib) is untouched


def test_header_pair_built_from_stripped_words(lib, font):
    a, b = lib.confusion_pairs[0].labels
    for lab in (a, b):
        g = font.core[lab]
        word = np.zeros((g.shape[0] + 3, g.shape[1]), dtype=np.uint8)
        word[:3] = 1
        word[3:] = g
        body = strip_header(word).body[3:]
        rec = classify_glyph(body, lib)
        assert rec.label == lab


def test_rakar_disambiguation(lib, font):
    assert lib.rakar_rules
    rule = lib.rakar_rules[0]
    base = font.core[rule.base]
    rec = Recognition(rule.base, 0.0, 0.0)
    assert disambiguate_rakar(rec, base, lib).label == rule.base
    comp = font.rakar[rule.composite]
    got = disambiguate_rakar(rec, comp, lib)
    assert got.label == rule.composite and got.disambiguation_applied == "rakar"
    assert disambiguate_rakar(got, comp, lib).label == rule.composite
    no_rules = _toy_library()
    assert disambiguate_rakar(rec, comp, no_rules) is rec


def test_modifier_rules(lib, font):
    for strip, table in (("ascender", font.ascenders), ("descender", font.descenders)):
        for label, g in table.items():
            assert classify_modifier(endpoint_features(g), lib, strip) == label
    two = [t for t in lib.templates if t.cls == "ascender" and t.cc_count_no_header == 2]
    assert two  # the candrabindu-like mark has two parts
    wild = TemplateLibrary(lib.templates, modifier_rules=(ModifierRule("ं", "ascender"),))
    dot = np.zeros((4, 4), dtype=np.uint8)
    dot[1:3, 1:3] = 1
    assert classify_modifier(endpoint_features(dot), wild) == "ं"
    empty = TemplateLibrary(lib.templates, modifier_rules=())
    assert classify_modifier(endpoint_features(dot), empty) is None


def test_library_round_trip(lib, tmp_path):
    path = lib.save(tmp_path)
    again = TemplateLibrary.load(tmp_path)
    assert again.to_json() == lib.to_json()
    assert path.name == "library.json"
    doc = json.loads(path.read_text(encoding="utf-8"))
    doc["version"] = 99
    with pytest.raises(BadLabel):
        TemplateLibrary.from_json(json.dumps(doc))


def test_ingest_directory(tmp_path, lib, font):
    d = write_glyph_dir(tmp_path / "glyphs", font)
    one = ingest_templates(d, tmp_path / "out1")
    ingest_templates(d, tmp_path / "out2")
    a = (tmp_path / "out1" / "library.json").read_bytes()
    assert a == (tmp_path / "out2" / "library.json").read_bytes()
    assert len(one.templates) == len(lib.templates)
    rng = np.random.default_rng(0)
    for i in rng.choice(len(one.templates), 10, replace=False):
        t = one.templates[i]
        ref = lib.by_label(t.label)
        assert np.array_equal(t.s_reg, ref.s_reg) and np.allclose(t.s_mom, ref.s_mom)


def test_ingest_single_glyph(tmp_path):
    from devlipi import pnm
    g = np.zeros((20, 10), dtype=np.uint8)
    g[2:18, 4:6] = 1
    pnm.write_pbm(tmp_path / "a.pbm", g)
    (tmp_path / "labels.tsv").write_text("a.pbm\tक\tcore\n", encoding="utf-8")
    lib = ingest_templates(tmp_path)
    assert len(lib.templates) == 1
    s_reg, s_mom = glyph_vectors(g, default_layout())
    assert np.array_equal(lib.templates[0].s_reg, s_reg)


def test_library_errors(tmp_path):
    g = np.ones((5, 5), dtype=np.uint8)
    with pytest.raises(BadLabel):
        make_template(g, "")
    with pytest.raises(BadLabel):
        make_template(g, "क", "middle")
    with pytest.raises(DimensionMismatch):
        make_template(np.zeros((0, 4)), "क")
    with pytest.raises(EmptyLibrary):
        TemplateLibrary(())
    with pytest.raises(BadLabel):
        build_library([(g, "क", "core", "")], confusion=[("क", "ख")])
    with pytest.raises(BadLabel):
        ingest_templates(tmp_path)


def test_larger_k_keeps_nearest(lib, font):
    g = font.core["ग"]
    ranks = [classify_glyph(g, lib, k).label for k in (1, 5, 10, 40)]
    assert set(ranks) == {"ग"}


def test_scale_consistency(lib, font):
    for label, g in font.core.items():
        big = np.kron(g, np.ones((2, 2), dtype=np.uint8))
        top = [rank_phase1(glyph_vectors(x, lib.zone_layout)[0], lib, 1)[0][0].label
               for x in (g, big)]
        assert top[0] == top[1] == label

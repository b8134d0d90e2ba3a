"""Command line entry point: ``devlipi <command> ...``.

Exit codes: 0 success, 2 bad input (missing file, malformed config or
library), 3 a pipeline stage failed.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import pnm
from .errors import DevlipiError, StageError

EXIT_OK, EXIT_INPUT, EXIT_STAGE = 0, 2, 3


def _cmd_run(a):
    from .pipeline import PipelineConfig, load_page, run, write_outputs
    from .skew import deskew

    cfg = PipelineConfig.load(a.config)
    if a.library:
        cfg = _with(cfg, library=a.library)
    if a.skew_only:
        page = load_page(a.image, cfg.threshold)
        t0 = time.perf_counter()
        try:
            out, est = deskew(page, cfg.skew)
        except DevlipiError as e:
            raise StageError("deskew", e) from e
        ms = 1000.0 * (time.perf_counter() - t0)
        info = {"theta_skew": est.theta_skew, "flipped": est.flipped, "total": est.total_angle,
                "direction": est.direction, "range": list(est.search_range),
                "fallback": est.fallback, "rotations": est.rotations,
                "ms_elapsed": round(ms, 1)}
        if a.out:
            pnm.write_pbm(a.out, out)
        print(json.dumps(info, indent=1))
        return EXIT_OK
    res = run(a.image, cfg, dump_dir=a.dump_segmentation)
    if a.out:
        write_outputs(res, a.out)
    else:
        sys.stdout.write(res.text)
    return EXIT_OK


def _with(cfg, **kw):
    from dataclasses import replace
    return replace(cfg, **kw)


def _cmd_ingest(a):
    from .recognition import ingest_templates

    lib = ingest_templates(a.glyph_dir, a.out)
    n = {c: sum(t.cls == c for t in lib.templates) for c in ("core", "ascender", "descender")}
    print(f"{len(lib.templates)} templates ({n['core']} core, {n['ascender']} ascender, "
          f"{n['descender']} descender) -> {Path(a.out) / 'library.json'}")
    return EXIT_OK


def _cmd_glyphs(a):
    from .font import write_glyph_dir
    from .features import default_layout

    out = write_glyph_dir(a.out)
    (out / "zones.txt").write_text(default_layout().dumps(), encoding="utf-8")
    print(f"glyph directory written to {out}")
    return EXIT_OK


def _cmd_gen(a):
    from .pipeline import truth_text
    from .synth import SynthSpec, gen_synthetic

    spec = SynthSpec.from_text(Path(a.spec_file).read_text(encoding="utf-8"))
    if a.seed is not None:
        spec.seed = a.seed
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    page = gen_synthetic(spec)
    name = a.name
    if spec.gray:
        img_name = f"{name}.pgm"
        pnm.write_pgm(out / img_name, page.image)
    else:
        img_name = f"{name}.pbm"
        pnm.write_pbm(out / img_name, page.image)
    man = dict(page.manifest, image=img_name)
    (out / f"{name}.json").write_text(json.dumps(man, ensure_ascii=False, indent=1) + "\n",
                                      encoding="utf-8")
    (out / f"{name}.txt").write_text(truth_text(page.manifest), encoding="utf-8")
    print(f"{out / img_name}: {len(man['lines'])} lines, {len(man['composites'])} composites")
    return EXIT_OK


def _bench_pages(d: Path):
    for man_path in sorted(d.glob("*.json")):
        man = json.loads(man_path.read_text(encoding="utf-8"))
        if "skew" not in man or "image" not in man:
            continue
        yield pnm.read_binary(d / man["image"]), float(man["skew"])


def _cmd_bench(a):
    from .pipeline import bench_rows_json, bench_skew, format_bench
    from .skew import SkewConfig

    d = Path(a.dir)
    if not d.is_dir():
        raise FileNotFoundError(f"{d} is not a directory")
    pages = list(_bench_pages(d))
    if not pages:
        raise ValueError(f"no generator manifests with images in {d}")
    rows = bench_skew(pages, SkewConfig(), naive=not a.no_naive)
    print(bench_rows_json(rows) if a.json else format_bench(rows))
    return EXIT_OK


def _cmd_metrics(a):
    from .pipeline import seg_metrics, translit_metrics
    from .translit import transliterate_text

    t, p = Path(a.truth), Path(a.pred)
    if t.suffix == ".json" and p.suffix == ".json":
        m = seg_metrics(json.loads(t.read_text(encoding="utf-8")),
                        json.loads(p.read_text(encoding="utf-8")))
        print(f"composites {m.total_composite}  detected {m.detected}  "
              f"segmented {m.correctly_segmented}  FP {m.fp}  FN {m.fn}  "
              f"P {m.precision:.2f}%  R {m.recall:.2f}%")
        return EXIT_OK
    truth = t.read_text(encoding="utf-8")
    if any("ऀ" <= ch <= "ॿ" for ch in truth):
        truth = transliterate_text(truth)
    m = translit_metrics(truth, p.read_text(encoding="utf-8"))
    print(f"chars {m.total_chars}  transliterated {m.transliterated}  accurate {m.accurate}  "
          f"error {m.error:.2f}%")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="devlipi",
                                 description="Devanagari page recognition and IAST output")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="recognize a page image (or resume a segmentation dump)")
    p.add_argument("image")
    p.add_argument("--library", help="library directory or library.json (default: bundled)")
    p.add_argument("--config", help="key = value config overlaying the defaults")
    p.add_argument("--dump-segmentation", metavar="DIR", help="write glyph PBMs and a manifest")
    p.add_argument("--skew-only", action="store_true", help="only estimate and undo skew")
    p.add_argument("--out", help="output text file (report goes to OUT.json)")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("ingest", help="build a template library from a glyph directory")
    p.add_argument("glyph_dir")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("glyphs", help="export the bundled font as a glyph directory")
    p.add_argument("out")
    p.set_defaults(fn=_cmd_glyphs)

    p = sub.add_parser("gen", help="render a synthetic page from a spec file")
    p.add_argument("spec_file")
    p.add_argument("--out", default=".")
    p.add_argument("--name", default="page")
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("bench-skew", help="compare skew estimators on generated pages")
    p.add_argument("dir")
    p.add_argument("--no-naive", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("metrics", help="segmentation (json) or transliteration (text) metrics")
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    p.set_defaults(fn=_cmd_metrics)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except StageError as e:
        print(f"devlipi: stage failure: {e}", file=sys.stderr)
        return EXIT_STAGE
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"devlipi: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except DevlipiError as e:
        # library and manifest problems are input errors
        print(f"devlipi: input error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Render a synthetic page, recognize it and compare against the truth.

    python3 demos/end_to_end.py [seed]
"""
import sys

from devlipi.pipeline import (glyph_accuracy, predicted_words, process_page, seg_metrics,
                              translit_metrics, truth_text, truth_words)
from devlipi.synth import SynthSpec, gen_synthetic


def main(seed: int = 1):
    spec = SynthSpec(lines=4, composites=2, shadows=2, ascenders=0.3, descenders=0.2,
                     aa=0.1, visarga=0.05, gray=True, seed=seed)
    page = gen_synthetic(spec)
    res = process_page(page.image)
    truth = truth_text(page.manifest)
    print(res.text, end="")
    print("-" * 40)
    acc = glyph_accuracy(truth_words(page.manifest), predicted_words(res))
    tm = translit_metrics(truth, res.tokens)
    sm = seg_metrics(page.manifest, {"composites": res.composites})
    print(f"glyph accuracy {acc:.1f}%  transliteration error {tm.error:.2f}%")
    print(f"composites {sm.total_composite}  segmented {sm.correctly_segmented}  "
          f"P {sm.precision:.1f}%  R {sm.recall:.1f}%")
    print("exact match" if res.text == truth else "differs from truth")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 1)

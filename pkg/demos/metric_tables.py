"""Recompute segmentation precision and recall, and transliteration error,
from raw counts.  Rows are (segmented, FP, FN) and (transliterated, accurate).
"""
from devlipi.pipeline import SegMetrics, TranslitMetrics

SEG = [(8, 1, 1), (7, 0, 2), (5, 1, 2), (17, 1, 1), (10, 0, 0), (11, 0, 3), (3, 0, 3),
       (3, 1, 2), (2, 4, 0)]
TRANSLIT = [(130, 122), (136, 130), (127, 117), (197, 181), (108, 101), (145, 126),
            (122, 110), (105, 86), (147, 130)]


def main():
    print(f"{'row':>3} {'seg':>4} {'FP':>3} {'FN':>3} {'P%':>7} {'R%':>7}")
    for i, row in enumerate(SEG, 1):
        m = SegMetrics.from_counts(*row)
        print(f"{i:>3} {m.correctly_segmented:>4} {m.fp:>3} {m.fn:>3} "
              f"{m.precision:>7.2f} {m.recall:>7.2f}")
    print()
    print(f"{'row':>3} {'chars':>6} {'ok':>5} {'err%':>7}")
    for i, (n, ok) in enumerate(TRANSLIT, 1):
        m = TranslitMetrics.from_counts(n, ok)
        print(f"{i:>3} {n:>6} {ok:>5} {m.error:>7.2f}")


if __name__ == "__main__":
    main()

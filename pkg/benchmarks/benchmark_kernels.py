#!/usr/bin/env python3
"""Benchmark the compiled chunk-extraction kernel against the pure-Python
fallback on a generated corpus, asserting identical output along the way.

Usage: python benchmarks/benchmark_kernels.py [--docs 2000] [--repeat 3]
"""

import argparse
import random
import time

from ruletag import kernels
from ruletag.synthetic import generate_corpus


def build_texts(n_docs, seed):
    import tempfile
    from pathlib import Path

    from ruletag.corpus import clean

    with tempfile.TemporaryDirectory() as tmp:
        paths = generate_corpus(tmp, n_docs=n_docs, seed=seed)
        return [
            clean(p.read_text(encoding="utf-8"))
            for p in sorted(Path(paths["corpus"]).glob("*.txt"))
        ]


def run(fn, texts, keywords, n, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = [fn(text, keywords, n) for text in texts]
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--docs", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--window", type=int, default=6)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    keywords = ("hire", "recruit", "employ", "solicit")
    texts = build_texts(args.docs, args.seed)
    n_tokens = sum(len(t.split()) for t in texts)
    print(f"{len(texts)} documents, {n_tokens} tokens, window n={args.window}")

    t_py, out_py = run(kernels.document_chunks_py, texts, keywords, args.window, args.repeat)
    print(f"pure python : {t_py:8.3f} s  ({n_tokens / t_py / 1e6:.2f} M tokens/s)")

    if kernels.document_chunks_c is None:
        print("compiled    : extension not built (pip install -e . to compile)")
        return

    t_c, out_c = run(kernels.document_chunks_c, texts, keywords, args.window, args.repeat)
    print(f"compiled    : {t_c:8.3f} s  ({n_tokens / t_c / 1e6:.2f} M tokens/s)")
    print(f"speedup     : {t_py / t_c:8.2f}x")

    if out_py != out_c:
        raise SystemExit("MISMATCH: compiled and pure kernels disagree")
    print("outputs identical across both kernels")


if __name__ == "__main__":
    main()

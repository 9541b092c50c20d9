"""Synthetic no-poach-style corpus generator.

Plants anti-poaching clauses into generated franchise-style documents at
controlled yearly prevalence rates, together with the keyword config and
rule file that label them, and a ground-truth table. Used by the
end-to-end study and as a demo fixture: the planted rates are known
exactly, so the pipeline's recovered prevalence series can be checked
against them.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from .provenance import provenance_record, write_csv

KEYWORDS = {"nopoach": ["hire", "recruit", "employ", "solicit"]}

# Positive clause cores: each contains the full phrase of one prio-1 rule,
# short enough that every keyword window (n=6) captures the whole phrase.
# Several carry "decoy" tokens (approved, unless) in benign positions, so
# no single token separates the classes: the exception pattern below is a
# token conjunction, which trees can express but unigram models cannot.
POSITIVE_CORES = [
    "franchisee shall not solicit or hire any employee of the franchisor",
    "you may not recruit or hire any employee of another franchise",
    "owner agrees not to employ or seek to employ any person working for us",
    "neither party shall solicit for employment any staff member of the other",
    "franchisee will not hire or attempt to hire any manager of another location",
    "you shall never solicit any employee of ours to leave their post",
    "you may not recruit or hire any employee even if approved elsewhere",
    "franchisee shall not solicit or hire any employee unless a court allows",
    "neither party shall solicit for employment any staff member previously approved",
]

# Exception cores: labeled 0 overall; whenever a positive rule phrase is
# present, the overriding tail sits within six tokens of the first keyword
# so every window is rescued.
EXCEPTION_CORES = [
    "you may not recruit or hire any employee unless approved by us in writing",
    "franchisee shall not solicit or hire any employee except with prior consent",
    "you may not recruit or hire any manager unless approved by the franchisor",
    "owner may not employ any person working for us unless approved in advance",
]

# Plain keyword-containing negatives: caught by the prio-0 catch-alls.
NEGATIVE_CORES = [
    "the franchisee may hire qualified workers for the new location",
    "you may not hire an applicant who has a felony conviction",
    "vendors shall not employ felons in the monitoring center",
    "we will recruit trained staff to support your grand opening",
    "the franchisor may solicit feedback from customers at any time",
    "franchisee must employ at least two certified managers on site",
    "marketing teams often solicit reviews from loyal patrons",
    "you agree to recruit locally and advertise open positions fairly",
    "you may hire any approved vendor for maintenance work",
    "unless otherwise directed you may recruit seasonal staff locally",
]

# Keyword-free vocabulary for filler sentences and sentence padding.
FILLER_WORDS = (
    "the franchise agreement covers royalty payments training standards "
    "signage equipment maintenance insurance accounting records territory "
    "renewal transfer default obligations quality audits menu branding "
    "advertising fund local marketing initial fees ongoing support site "
    "selection construction opening assistance operations manual updates"
).split()

PREFIX_POOLS = [
    [],
    ["furthermore"],
    ["in", "addition"],
    ["during", "the", "term"],
    ["as", "noted", "above"],
]
SUFFIX_POOLS = [
    [],
    ["at", "all", "times"],
    ["without", "exception"],
    ["per", "this", "agreement"],
]

DEFAULT_YEAR_RATES = {
    2013: 0.60, 2014: 0.60, 2015: 0.60, 2016: 0.60, 2017: 0.60, 2018: 0.60,
    2019: 0.35, 2020: 0.35, 2021: 0.35, 2022: 0.35,
}


def rule_file_rows():
    rows = [
        ["hire", 0, 0],
        ["recruit", 0, 0],
        ["employ", 0, 0],
        ["solicit", 0, 0],
        ["not solicit or hire any employee", 1, 1],
        ["not recruit or hire any employee", 1, 1],
        ["employ or seek to employ any person", 1, 1],
        ["solicit for employment any staff", 1, 1],
        ["not hire or attempt to hire any manager", 1, 1],
        ["solicit any employee of ours", 1, 1],
        ["unless approved", 2, 0],
        ["except with", 2, 0],
        ["shall not employ felons", 2, 0],
        ["not hire an applicant who has a felony", 2, 0],
        ["REGEX:::solicit (feedback|reviews)", 2, 0],
    ]
    return ["rule", "prio", "nopoach"], rows


def _filler_sentence(rng):
    length = rng.randint(5, 12)
    return " ".join(rng.choice(FILLER_WORDS) for _ in range(length)) + "."


def _clause_sentence(rng, core):
    words = rng.choice(PREFIX_POOLS) + core.split() + rng.choice(SUFFIX_POOLS)
    return " ".join(words) + "."


def _document_text(rng, positive):
    sentences = [_filler_sentence(rng) for _ in range(rng.randint(4, 9))]
    if positive:
        clauses = [_clause_sentence(rng, rng.choice(POSITIVE_CORES))]
        if rng.random() < 0.5:
            clauses.append(_clause_sentence(rng, rng.choice(NEGATIVE_CORES)))
        if rng.random() < 0.25:
            clauses.append(_clause_sentence(rng, rng.choice(EXCEPTION_CORES)))
    else:
        n_neg = rng.randint(0, 3)
        pool = NEGATIVE_CORES + EXCEPTION_CORES * 2
        clauses = [_clause_sentence(rng, rng.choice(pool)) for _ in range(n_neg)]
    for clause in clauses:
        sentences.insert(rng.randint(0, len(sentences)), clause)
    return " ".join(sentences)


def generate_corpus(out_dir, n_docs=2000, seed=7, year_rates=None):
    """Write corpus/, metadata.csv, keywords.json, rules.csv and truth.csv.

    Documents spread evenly over the configured years; within each year
    exactly round(rate * n) documents carry a planted positive clause, so
    the per-year prevalence is known to rounding precision.
    """
    out_dir = Path(out_dir)
    corpus_dir = out_dir / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    year_rates = dict(year_rates or DEFAULT_YEAR_RATES)
    years = sorted(year_rates)

    per_year = n_docs // len(years)
    doc_no = 0
    meta_rows = []
    truth_rows = []
    for year in years:
        n_pos = round(year_rates[year] * per_year)
        flags = [1] * n_pos + [0] * (per_year - n_pos)
        rng.shuffle(flags)
        for positive in flags:
            doc_no += 1
            doc_id = f"doc_{doc_no:05d}"
            text = _document_text(rng, positive)
            (corpus_dir / f"{doc_id}.txt").write_text(text, encoding="utf-8")
            month = rng.randint(1, 12)
            day = rng.randint(1, 28)
            meta_rows.append(
                [doc_id, f"rec_{doc_no:05d}", f"{year}-{month:02d}-{day:02d}",
                 f"Firm {doc_no % 97}"]
            )
            truth_rows.append([doc_id, year, positive])

    write_csv(
        out_dir / "metadata.csv",
        ["doc_id", "record_id", "effective_date", "firm_name"],
        meta_rows,
    )
    write_csv(
        out_dir / "truth.csv",
        ["doc_id", "year", "planted"],
        truth_rows,
        provenance=provenance_record(kind="synthetic_truth", seed=seed, n_docs=n_docs),
    )
    (out_dir / "keywords.json").write_text(json.dumps(KEYWORDS, indent=2), encoding="utf-8")
    header, rows = rule_file_rows()
    write_csv(out_dir / "rules.csv", header, rows)
    return {
        "corpus": corpus_dir,
        "metadata": out_dir / "metadata.csv",
        "keywords": out_dir / "keywords.json",
        "rules": out_dir / "rules.csv",
        "truth": out_dir / "truth.csv",
        "planted_rates": {y: 100.0 * round(year_rates[y] * per_year) / per_year for y in years},
    }

"""Extrapolation: turn rule sets + extract files into training datasets.

Every rule-matching chunk becomes a training row carrying that rule's tag
values; duplicated chunks are resolved by priority-weighted length (the
highest-priority, then longest, rule wins). Optional negative sampling
admits non-matching chunks as all-zero rows, throttled by the plus
counter: one negative is only admitted after positives have been seen in
the same row, and each admission debits the counter by the tag count.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .extraction import iter_extract_rows
from .provenance import provenance_record, read_csv, write_csv
from .rules import Rule, RuleSet

NEGATIVE_RULE = "NEGATIVE"
PRIO_WEIGHT = 10_000


class ExtrapolationError(Exception):
    pass


def dedup_key(rule: Rule) -> int:
    """Priority-weighted length: priority dominates, pattern length breaks
    ties. The weight exceeds any legal rule length, so a higher-priority
    rule always outranks a longer lower-priority one."""
    return rule.prio * PRIO_WEIGHT + len(rule.pattern.split())


@dataclass(frozen=True)
class TrainingRow:
    doc_id: str
    chunk: str
    rule: str  # raw pattern of the catching rule, or NEGATIVE
    pw_length: int
    tag_values: dict


@dataclass
class TrainingSet:
    tags: list
    rows: list = field(default_factory=list)
    ruleset_path: str | None = None
    ruleset_hash: str | None = None
    sampling_rate: float = 1.0
    seed: int = 0
    negative_sampling: bool = False
    warnings: list = field(default_factory=list)

    def save(self, path):
        prov = provenance_record(
            kind="training_set",
            ruleset=self.ruleset_path,
            ruleset_sha256=self.ruleset_hash,
            s=self.sampling_rate,
            seed=self.seed,
            do_neg=self.negative_sampling,
        )
        header = ["id", "chunk", "rule", "pw_length"] + list(self.tags)
        rows = [
            [r.doc_id, r.chunk, r.rule, r.pw_length] + [r.tag_values[t] for t in self.tags]
            for r in self.rows
        ]
        return write_csv(path, header, rows, provenance=prov)

    @classmethod
    def load(cls, path):
        prov, header, rows = read_csv(path)
        prov = prov or {}
        if header[:4] != ["id", "chunk", "rule", "pw_length"]:
            raise ExtrapolationError(f"{path}: not a training file (header {header})")
        tags = header[4:]
        ts = cls(
            tags=tags,
            ruleset_path=prov.get("ruleset"),
            ruleset_hash=prov.get("ruleset_sha256"),
            sampling_rate=prov.get("s", 1.0),
            seed=prov.get("seed", 0),
            negative_sampling=prov.get("do_neg", False),
        )
        for row in rows:
            ts.rows.append(
                TrainingRow(
                    doc_id=row[0],
                    chunk=row[1],
                    rule=row[2],
                    pw_length=int(row[3]),
                    tag_values={t: int(v) for t, v in zip(tags, row[4:])},
                )
            )
        return ts


def _sort_key(item):
    pw, prio, order = item
    return (pw, prio, order)


def extrapolate(
    extract_files,
    ruleset: RuleSet,
    s: float = 1.0,
    do_neg: bool = False,
    seed: int = 0,
    augment_positives: bool = False,
) -> TrainingSet:
    """Build a TrainingSet by applying a rule set over extract files.

    Each extract row is kept with probability s (seeded); with
    augment_positives, rows containing a positive-rule match are always
    kept (the "10% sample plus all positives" recipe for rare tags).
    """
    if not (0 < s <= 1):
        raise ExtrapolationError(f"sampling rate must be in (0, 1], got {s}")
    if not ruleset.rules:
        raise ExtrapolationError("empty rule set")

    rng = random.Random(seed)
    zero_tags = {t: 0 for t in ruleset.tags}
    n_tags = len(ruleset.tags)
    keyed = []  # (TrainingRow, sortkey)

    for doc_id, _, chunks in iter_extract_rows(sorted(str(p) for p in extract_files)):
        keep = rng.random() < s
        if not keep and augment_positives:
            keep = any(
                r.matches(x) and any(v == 1 for v in r.tag_values.values())
                for x in chunks
                for r in ruleset.rules
            )
        if not keep:
            continue
        for rule in ruleset.rules:
            match = []
            plus = 0
            for x in chunks:
                if rule.matches(x):
                    match.append((x, rule))
                    plus += 1
                elif plus > 0 and do_neg:
                    if not any(ru.matches(x) for ru in ruleset.rules):
                        match.append((x, None))
                        plus -= n_tags
            rng.shuffle(match)
            for x, r in match:
                if r is None:
                    row = TrainingRow(doc_id, x, NEGATIVE_RULE, 0, dict(zero_tags))
                    keyed.append((row, (0, -1, -1)))
                else:
                    row = TrainingRow(doc_id, x, r.raw, dedup_key(r), dict(r.tag_values))
                    keyed.append((row, (dedup_key(r), r.prio, r.order)))

    # highest priority-weighted length first; dedup on chunk keeps the winner
    keyed.sort(key=lambda kv: kv[1], reverse=True)
    seen = set()
    rows = []
    for row, _ in keyed:
        if row.chunk not in seen:
            seen.add(row.chunk)
            rows.append(row)

    ts = TrainingSet(
        tags=list(ruleset.tags),
        rows=rows,
        ruleset_path=ruleset.source_path,
        ruleset_hash=ruleset.content_hash,
        sampling_rate=s,
        seed=seed,
        negative_sampling=do_neg,
    )
    if not rows:
        ts.warnings.append("zero rule matches: training set is empty")
    return ts


# --- validation sampling and scoring -----------------------------------------


@dataclass
class ValidationSample:
    tags: list
    coder_rows: list  # (sample_id, chunk)
    key_rows: list  # (sample_id, rule, tag_values)

    def save_coder_file(self, path):
        header = ["sample_id", "chunk"] + list(self.tags)
        rows = [[sid, chunk] + [""] * len(self.tags) for sid, chunk in self.coder_rows]
        return write_csv(path, header, rows, provenance=provenance_record(kind="coder_file"))

    def save_answer_key(self, path):
        header = ["sample_id", "rule"] + list(self.tags)
        rows = [
            [sid, rule] + [values[t] for t in self.tags]
            for sid, rule, values in self.key_rows
        ]
        return write_csv(path, header, rows, provenance=provenance_record(kind="answer_key"))


def make_validation_sample(
    training: TrainingSet, per_rule_n: int, positive_boost: float = 1.0, seed: int = 0
) -> ValidationSample:
    """Blind coder sample: min(per_rule_n, available) rows per rule, rows
    with any positive tag weighted by positive_boost. The coder file
    carries only sample ids and chunks."""
    if per_rule_n < 1:
        raise ExtrapolationError("per_rule_n must be >= 1")
    by_rule = {}
    for row in training.rows:
        by_rule.setdefault(row.rule, []).append(row)

    rng = np.random.default_rng(seed)
    picked = []
    for rule in sorted(by_rule):
        rows = by_rule[rule]
        k = min(per_rule_n, len(rows))
        weights = np.array(
            [positive_boost if any(v == 1 for v in r.tag_values.values()) else 1.0 for r in rows]
        )
        idx = rng.choice(len(rows), size=k, replace=False, p=weights / weights.sum())
        picked.extend(rows[i] for i in sorted(idx))

    order = rng.permutation(len(picked))
    coder_rows, key_rows = [], []
    for out_pos, src in enumerate(order):
        row = picked[src]
        sid = f"s{out_pos + 1:06d}"
        coder_rows.append((sid, row.chunk))
        key_rows.append((sid, row.rule, dict(row.tag_values)))
    return ValidationSample(tags=list(training.tags), coder_rows=coder_rows, key_rows=key_rows)


def cohens_kappa(a, b):
    """Cohen's kappa for two binary label sequences.

    Returns (kappa, degenerate). When the expected agreement is 1 (both
    raters constant), kappa is undefined; it is reported as 1.0 on perfect
    agreement and 0.0 otherwise, with the degenerate flag set.
    """
    n = len(a)
    if n == 0:
        return 0.0, True
    po = sum(x == y for x, y in zip(a, b)) / n
    pe = 0.0
    for c in (0, 1):
        pe += (sum(x == c for x in a) / n) * (sum(y == c for y in b) / n)
    if abs(1 - pe) < 1e-12:
        return (1.0 if po == 1.0 else 0.0), True
    return (po - pe) / (1 - pe), False


def score_validation(coded_rows, sample: ValidationSample):
    """Compare a completed coder file against the withheld answer key.

    coded_rows: [(sample_id, {tag: 0/1})]. Reports per-tag percent
    agreement and kappa, chunk- and rule-level overall agreement, and the
    disagreement worklist with each row's catching rule.
    """
    key = {sid: (rule, values) for sid, rule, values in sample.key_rows}
    coded = dict(coded_rows)
    missing = sorted(set(key) - set(coded))
    unknown = sorted(set(coded) - set(key))
    if missing or unknown:
        raise ExtrapolationError(
            f"sample_id mismatch: missing={missing[:10]} unknown={unknown[:10]}"
        )

    per_tag = {}
    disagreements = []
    cells_total = 0
    cells_match = 0
    rule_stats = {}
    for tag in sample.tags:
        a, b = [], []
        for sid in key:
            rule, values = key[sid]
            expected = values[tag]
            got = coded[sid][tag]
            a.append(expected)
            b.append(got)
            cells_total += 1
            stat = rule_stats.setdefault(rule, [0, 0])
            stat[1] += 1
            if expected == got:
                cells_match += 1
                stat[0] += 1
            else:
                disagreements.append(
                    {"sample_id": sid, "rule": rule, "tag": tag, "coded": got, "expected": expected}
                )
        agreement = sum(x == y for x, y in zip(a, b)) / len(a) if a else 0.0
        kappa, degenerate = cohens_kappa(a, b)
        per_tag[tag] = {"agreement": agreement, "kappa": kappa, "kappa_degenerate": degenerate}

    return {
        "per_tag": per_tag,
        "chunk_agreement": cells_match / cells_total if cells_total else 0.0,
        "rule_agreement": (
            sum(m / t for m, t in rule_stats.values()) / len(rule_stats) if rule_stats else 0.0
        ),
        "n_rows": len(key),
        "disagreements": sorted(disagreements, key=lambda d: d["sample_id"]),
    }


def load_coded_file(path, tags):
    _, header, rows = read_csv(path)
    expected = ["sample_id", "chunk"] + list(tags)
    if header != expected:
        raise ExtrapolationError(f"{path}: header {header} != {expected}")
    out = []
    for row in rows:
        values = {}
        for tag, cell in zip(tags, row[2:]):
            if cell.strip() not in ("0", "1"):
                raise ExtrapolationError(f"{path}: uncoded or bad cell {cell!r} for {row[0]}")
            values[tag] = int(cell)
        out.append((row[0], values))
    return out

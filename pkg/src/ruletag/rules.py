"""Priority-ordered context rules: parsing, validation, application.

A rule file is a CSV with header `rule,prio,<tag>[,<tag>...]`. Literal
rules match by substring; rows prefixed `REGEX:::` match by regex search.
Higher-priority matches overwrite lower-priority tag assignments; ties
within a priority go to the later row in file order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .provenance import read_csv, sha256_file

REGEX_PREFIX = "REGEX:::"


class RuleError(Exception):
    pass


@dataclass(frozen=True)
class Rule:
    pattern: str  # literal text, or regex source without the prefix
    is_regex: bool
    prio: int
    tag_values: dict
    order: int  # position in file; breaks ties within a priority
    regex: object = field(default=None, compare=False, repr=False)

    @property
    def raw(self):
        return REGEX_PREFIX + self.pattern if self.is_regex else self.pattern

    def matches(self, chunk_text: str) -> bool:
        if self.is_regex:
            return self.regex.search(chunk_text) is not None
        return self.pattern in chunk_text


@dataclass
class RuleSet:
    tags: list
    rules: list  # sorted by (prio, order)
    source_path: str | None = None
    content_hash: str | None = None

    def __post_init__(self):
        self.rules = sorted(self.rules, key=lambda r: (r.prio, r.order))

    def matching(self, chunk_text):
        return [r for r in self.rules if r.matches(chunk_text)]


def parse_rule_rows(header, rows, source_path=None):
    if not header:
        raise RuleError("no rules: empty file")
    header = [h.strip() for h in header]
    if len(header) < 3 or header[0] != "rule" or header[1] != "prio":
        raise RuleError(f"bad header {header!r}: expected rule,prio,<tags...>")
    tags = header[2:]
    if len(set(tags)) != len(tags):
        raise RuleError(f"duplicate tag names in header: {tags}")
    rules = []
    seen = set()
    for i, row in enumerate(rows):
        rownum = i + 2  # 1-based, after header
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise RuleError(f"row {rownum}: expected {len(header)} fields, got {len(row)}")
        raw = row[0].strip().lower()
        if not raw:
            raise RuleError(f"row {rownum}: empty rule pattern")
        try:
            prio = int(row[1])
        except ValueError:
            raise RuleError(f"row {rownum}: non-integer prio {row[1]!r}") from None
        if prio < 0:
            raise RuleError(f"row {rownum}: negative prio {prio}")
        values = {}
        for tag, cell in zip(tags, row[2:]):
            cell = cell.strip()
            if cell not in ("0", "1"):
                raise RuleError(f"row {rownum}: tag {tag!r} value {cell!r} not in {{0,1}}")
            values[tag] = int(cell)
        is_regex = raw.startswith(REGEX_PREFIX.lower())
        if is_regex:
            pattern = raw[len(REGEX_PREFIX):].strip()
            try:
                compiled = re.compile(pattern)
            except re.error as exc:
                raise RuleError(f"row {rownum}: bad regex: {exc}") from None
        else:
            pattern = raw
            compiled = None
        key = (pattern, prio)
        if key in seen:
            raise RuleError(f"row {rownum}: duplicate rule {pattern!r} at prio {prio}")
        seen.add(key)
        rules.append(Rule(pattern, is_regex, prio, values, order=i, regex=compiled))
    if not rules:
        raise RuleError("no rules")
    if not any(r.prio == 0 for r in rules):
        raise RuleError("rule set must contain at least one prio-0 rule")
    return RuleSet(tags=tags, rules=rules, source_path=source_path)


def load_ruleset(path) -> RuleSet:
    path = Path(path)
    _, header, rows = read_csv(path)
    ruleset = parse_rule_rows(header, rows, source_path=str(path))
    ruleset.content_hash = sha256_file(path)
    return ruleset


def apply_rules(chunk_text: str, ruleset: RuleSet):
    """Evaluate all rules against a cleaned chunk.

    Returns (tag_values, winning_rule); (None, None) when nothing matches.
    Rules run in ascending (prio, file order); each match overwrites the
    tag values, so the final state reflects the highest-priority match.
    """
    tag_values = None
    winning = None
    for rule in ruleset.rules:  # already sorted ascending
        if rule.matches(chunk_text):
            if tag_values is None:
                tag_values = {}
            tag_values.update(rule.tag_values)
            winning = rule
    return tag_values, winning


def coverage_summary(ruleset: RuleSet):
    by_prio = {}
    n_regex = 0
    for rule in ruleset.rules:
        by_prio[rule.prio] = by_prio.get(rule.prio, 0) + 1
        n_regex += rule.is_regex
    return {
        "tags": list(ruleset.tags),
        "rule_count": len(ruleset.rules),
        "regex_count": n_regex,
        "rules_per_prio": dict(sorted(by_prio.items())),
    }

"""Extrapolation, dedup, validation sampling and agreement scoring tests."""

import random

import pytest
from sklearn.metrics import cohen_kappa_score

from ruletag.extrapolation import (
    NEGATIVE_RULE,
    ExtrapolationError,
    TrainingSet,
    cohens_kappa,
    dedup_key,
    extrapolate,
    load_coded_file,
    make_validation_sample,
    score_validation,
)
from ruletag.provenance import write_csv
from ruletag.rules import parse_rule_rows

HEADER = ["rule", "prio", "nopoach"]


def make_extract(path, rows):
    return write_csv(path, ["id", "text"], rows)


def brute_force(rows, ruleset):
    """Independent oracle: per distinct chunk, the matching rule with the
    highest (priority-weighted length, prio, file order) wins."""
    best = {}
    for _, text in rows:
        for chunk in text.split("|"):
            if not chunk:
                continue
            matching = [r for r in ruleset.rules if r.matches(chunk)]
            if not matching:
                continue
            winner = max(matching, key=lambda r: (dedup_key(r), r.prio, r.order))
            best[chunk] = (winner.raw, dict(winner.tag_values))
    return best


WORDS = ["we", "hire", "recruit", "never", "shall", "not", "x", "y", "z", "staff"]


class TestDedupKey:
    def test_formula(self):
        rs = parse_rule_rows(HEADER, [["hire", "0", "0"], ["shall not hire", "2", "1"]])
        assert dedup_key(rs.rules[0]) == 1
        assert dedup_key(rs.rules[1]) == 2 * 10_000 + 3

    def test_prio_dominates_length(self):
        rs = parse_rule_rows(
            HEADER, [[" ".join(["w"] * 50), "0", "0"], ["hire", "1", "1"], ["x", "0", "0"]]
        )
        by_pattern = {r.pattern: r for r in rs.rules}
        long_rule = by_pattern[" ".join(["w"] * 50)]
        short_rule = by_pattern["x"]
        hi_rule = by_pattern["hire"]
        assert dedup_key(hi_rule) > dedup_key(long_rule) > dedup_key(short_rule)


class TestExtrapolate:
    def test_matches_brute_force_on_random_instances(self, tmp_path):
        rng = random.Random(5)
        for case in range(60):
            n_rules = rng.randint(1, 6)
            rows = []
            rule_rows = [["hire", "0", "0"]]
            for i in range(n_rules):
                pattern = " ".join(rng.sample(WORDS, rng.randint(1, 3)))
                rule_rows.append([pattern, str(rng.randint(0, 3)), str(rng.randint(0, 1))])
            try:
                ruleset = parse_rule_rows(HEADER, rule_rows)
            except Exception:
                continue  # random duplicate pattern/prio; skip instance
            for d in range(rng.randint(1, 5)):
                chunks = [
                    " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 8)))
                    for _ in range(rng.randint(1, 4))
                ]
                rows.append([f"d{d}", "|".join(chunks)])
            path = make_extract(tmp_path / f"e{case}.csv", rows)
            training = extrapolate([str(path)], ruleset, s=1.0, do_neg=False, seed=0)
            got = {r.chunk: (r.rule, dict(r.tag_values)) for r in training.rows}
            assert got == brute_force([(r[0], r[1]) for r in rows], ruleset)

    def test_duplicate_chunk_keeps_highest_priority_labeling(self, tmp_path):
        ruleset = parse_rule_rows(
            HEADER, [["hire", "0", "0"], ["shall not hire", "1", "1"]]
        )
        path = make_extract(
            tmp_path / "e.csv",
            [["d1", "we shall not hire staff"], ["d2", "we shall not hire staff"]],
        )
        training = extrapolate([str(path)], ruleset)
        assert len(training.rows) == 1
        row = training.rows[0]
        assert row.rule == "shall not hire"
        assert row.tag_values == {"nopoach": 1}
        assert row.pw_length == 10_000 + 3

    def test_sampling_rate_validated(self, tmp_path):
        ruleset = parse_rule_rows(HEADER, [["hire", "0", "0"]])
        with pytest.raises(ExtrapolationError, match="sampling rate"):
            extrapolate([], ruleset, s=0)

    def test_same_seed_identical_output(self, tmp_path):
        ruleset = parse_rule_rows(HEADER, [["hire", "0", "0"], ["not hire", "1", "1"]])
        rows = [[f"d{i}", f"chunk {i} we hire|do not hire here {i}"] for i in range(40)]
        path = make_extract(tmp_path / "e.csv", rows)
        a = extrapolate([str(path)], ruleset, s=0.5, seed=9)
        b = extrapolate([str(path)], ruleset, s=0.5, seed=9)
        assert [(r.doc_id, r.chunk, r.rule) for r in a.rows] == [
            (r.doc_id, r.chunk, r.rule) for r in b.rows
        ]
        c = extrapolate([str(path)], ruleset, s=0.5, seed=10)
        assert [r.chunk for r in a.rows] != [r.chunk for r in c.rows]

    def test_augment_positives_keeps_unlucky_positive_rows(self, tmp_path):
        ruleset = parse_rule_rows(HEADER, [["hire", "0", "0"], ["never hire", "1", "1"]])
        rows = [["pos", "you must never hire others"]] + [
            [f"neg{i}", f"we hire staff {i}"] for i in range(30)
        ]
        path = make_extract(tmp_path / "e.csv", rows)
        training = extrapolate(
            [str(path)], ruleset, s=0.01, seed=1, augment_positives=True
        )
        assert any(r.doc_id == "pos" for r in training.rows)

    def test_negative_sampling_plus_counter(self, tmp_path):
        # one tag: after one positive, one non-matching chunk from the same
        # row is admitted and the counter drops back to zero
        ruleset = parse_rule_rows(HEADER, [["hire", "0", "1"]])
        path = make_extract(
            tmp_path / "e.csv",
            [["d1", "we hire staff|totally unrelated|also unrelated|we hire again"]],
        )
        training = extrapolate([str(path)], ruleset, do_neg=True, seed=0)
        negatives = [r for r in training.rows if r.rule == NEGATIVE_RULE]
        assert len(negatives) == 1
        assert negatives[0].pw_length == 0
        assert negatives[0].tag_values == {"nopoach": 0}

    def test_no_negatives_without_flag(self, tmp_path):
        ruleset = parse_rule_rows(HEADER, [["hire", "0", "1"]])
        path = make_extract(tmp_path / "e.csv", [["d1", "we hire staff|unrelated"]])
        training = extrapolate([str(path)], ruleset, do_neg=False)
        assert all(r.rule != NEGATIVE_RULE for r in training.rows)

    def test_matching_chunk_beats_negative_admission(self, tmp_path):
        # a chunk admitted as a negative for one rule but matched by another
        # must keep the matched labeling after dedup
        ruleset = parse_rule_rows(
            HEADER, [["hire", "0", "1"], ["recruit", "0", "0"]]
        )
        path = make_extract(
            tmp_path / "e.csv", [["d1", "we hire staff|they recruit interns"]]
        )
        training = extrapolate([str(path)], ruleset, do_neg=True, seed=0)
        by_chunk = {r.chunk: r for r in training.rows}
        assert by_chunk["they recruit interns"].rule == "recruit"

    def test_empty_training_set_warns(self, tmp_path):
        ruleset = parse_rule_rows(HEADER, [["zzz", "0", "0"]])
        path = make_extract(tmp_path / "e.csv", [["d1", "nothing relevant"]])
        training = extrapolate([str(path)], ruleset)
        assert training.rows == []
        assert training.warnings

    def test_save_load_round_trip(self, tmp_path):
        ruleset = parse_rule_rows(HEADER, [["hire", "0", "0"], ["not hire", "1", "1"]])
        path = make_extract(tmp_path / "e.csv", [["d1", "do not hire|we hire"]])
        training = extrapolate([str(path)], ruleset, seed=3)
        saved = training.save(tmp_path / "t.csv")
        loaded = TrainingSet.load(saved)
        assert loaded.tags == training.tags
        assert loaded.seed == 3
        assert [(r.doc_id, r.chunk, r.rule, r.pw_length, r.tag_values) for r in loaded.rows] == [
            (r.doc_id, r.chunk, r.rule, r.pw_length, r.tag_values) for r in training.rows
        ]


def _training_fixture(tmp_path, n_rows=30):
    ruleset = parse_rule_rows(HEADER, [["hire", "0", "0"], ["never hire", "1", "1"]])
    rows = []
    for i in range(n_rows):
        chunk = f"never hire person {i}" if i % 3 == 0 else f"we hire person {i}"
        rows.append([f"d{i}", chunk])
    path = make_extract(tmp_path / "e.csv", rows)
    return extrapolate([str(path)], ruleset)


class TestValidationSample:
    def test_per_rule_quota(self, tmp_path):
        training = _training_fixture(tmp_path)
        sample = make_validation_sample(training, 3, seed=0)
        rules = [rule for _, rule, _ in sample.key_rows]
        assert rules.count("hire") == 3
        assert rules.count("never hire") == 3

    def test_quota_capped_by_availability(self, tmp_path):
        training = _training_fixture(tmp_path, n_rows=4)
        sample = make_validation_sample(training, 100, seed=0)
        assert len(sample.coder_rows) == 4

    def test_coder_file_is_blind(self, tmp_path):
        training = _training_fixture(tmp_path)
        sample = make_validation_sample(training, 2, seed=0)
        coder_path = sample.save_coder_file(tmp_path / "coder.csv")
        text = coder_path.read_text()
        assert "never hire" in text  # chunks present
        header = [line for line in text.splitlines() if line.startswith("sample_id")][0]
        assert header == "sample_id,chunk,nopoach"
        for line in text.splitlines()[2:]:
            assert line.endswith(",")  # tag cells blank

    def test_deterministic_under_seed(self, tmp_path):
        training = _training_fixture(tmp_path)
        a = make_validation_sample(training, 2, seed=5)
        b = make_validation_sample(training, 2, seed=5)
        assert a.coder_rows == b.coder_rows
        assert a.key_rows == b.key_rows

    def test_rejects_bad_quota(self, tmp_path):
        training = _training_fixture(tmp_path)
        with pytest.raises(ExtrapolationError):
            make_validation_sample(training, 0)


class TestKappa:
    def test_matches_reference_implementation(self):
        rng = random.Random(2)
        for _ in range(50):
            n = rng.randint(2, 40)
            a = [rng.randint(0, 1) for _ in range(n)]
            b = [rng.randint(0, 1) for _ in range(n)]
            kappa, degenerate = cohens_kappa(a, b)
            if not degenerate:
                assert kappa == pytest.approx(cohen_kappa_score(a, b))

    def test_degenerate_perfect_agreement(self):
        kappa, degenerate = cohens_kappa([1, 1, 1], [1, 1, 1])
        assert (kappa, degenerate) == (1.0, True)

    def test_degenerate_disagreement(self):
        kappa, degenerate = cohens_kappa([1, 1], [1, 0])
        assert not degenerate or kappa == 0.0


class TestScoreValidation:
    def _sample(self, tmp_path):
        training = _training_fixture(tmp_path)
        return make_validation_sample(training, 3, seed=0)

    def test_perfect_agreement(self, tmp_path):
        sample = self._sample(tmp_path)
        coded = [(sid, dict(values)) for sid, _, values in sample.key_rows]
        report = score_validation(coded, sample)
        assert report["chunk_agreement"] == 1.0
        assert report["per_tag"]["nopoach"]["agreement"] == 1.0
        assert report["disagreements"] == []

    def test_disagreements_listed_with_catching_rule(self, tmp_path):
        sample = self._sample(tmp_path)
        coded = [(sid, {"nopoach": 1 - values["nopoach"]}) if i == 0 else (sid, dict(values))
                 for i, (sid, _, values) in enumerate(sample.key_rows)]
        report = score_validation(coded, sample)
        assert len(report["disagreements"]) == 1
        d = report["disagreements"][0]
        assert d["rule"] in ("hire", "never hire")
        assert d["sample_id"] == sample.key_rows[0][0]

    def test_sample_id_mismatch_rejected(self, tmp_path):
        sample = self._sample(tmp_path)
        coded = [(sid, dict(values)) for sid, _, values in sample.key_rows][:-1]
        with pytest.raises(ExtrapolationError, match="sample_id mismatch"):
            score_validation(coded, sample)

    def test_load_coded_file_validates_cells(self, tmp_path):
        path = tmp_path / "coded.csv"
        path.write_text("sample_id,chunk,nopoach\ns1,some text,maybe\n", encoding="utf-8")
        with pytest.raises(ExtrapolationError, match="uncoded or bad cell"):
            load_coded_file(path, ["nopoach"])

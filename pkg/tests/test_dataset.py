"""Dataset tests: keyword gate, classification, aggregation, prevalence, storage."""

import pytest

from ruletag.corpus import CorpusManifest, MetadataTable, ingest
from ruletag.dataset import (
    DatasetError,
    TagTable,
    aggregate,
    classify_chunk,
    classify_corpus,
    load_store,
    prevalence_series,
    record_metrics,
    save_prevalence,
    store,
)
from ruletag.extraction import KeywordConfig, extract_corpus
from ruletag.learning import ModelRegistry, save_model, train
from ruletag.provenance import read_csv, write_csv
from tests.test_learning import make_training


@pytest.fixture
def registry(tmp_path):
    model = train("naive-bayes", make_training(), "nopoach", seed=0)
    path = save_model(model, tmp_path / "models")
    return ModelRegistry({"nopoach": path.name}, base_dir=tmp_path / "models")


@pytest.fixture
def keyword_config(small_corpus):
    return KeywordConfig.from_file(small_corpus / "keywords.json")


class TestKeywordGate:
    def test_gated_chunk_is_zero_without_model_call(self, registry, keyword_config):
        class Exploding(ModelRegistry):
            def model_for(self, tag):
                raise AssertionError("model must not be invoked for gated chunks")

        gated = Exploding({"nopoach": "x"})
        assert classify_chunk("no relevant words here", "nopoach", gated, keyword_config) == 0
        assert classify_chunk("", "nopoach", gated, keyword_config) == 0

    def test_keyword_chunk_uses_model(self, registry, keyword_config):
        value = classify_chunk("we shall not hire staff", "nopoach", registry, keyword_config)
        assert value == 1


class TestClassifyCorpus:
    def _extracts(self, small_corpus, tmp_path, config):
        manifest = ingest(small_corpus / "corpus", small_corpus / "metadata.csv")
        return extract_corpus(manifest, config, tmp_path / "ex")

    def test_predictions_and_stats(self, small_corpus, tmp_path, registry, keyword_config):
        paths = self._extracts(small_corpus, tmp_path, keyword_config)
        out, stats = classify_corpus(paths, registry, keyword_config, tmp_path / "pred.csv")
        _, header, rows = read_csv(out)
        assert header == ["id", "chunk", "nopoach"]
        assert stats["chunks"] == len(rows)
        per_tag = stats["per_tag"]["nopoach"]
        assert per_tag["model_calls"] + per_tag["gate_skips"] == stats["chunks"]

    def test_keyword_config_mismatch_rejected(self, small_corpus, tmp_path, registry,
                                              keyword_config):
        paths = self._extracts(small_corpus, tmp_path, keyword_config)
        other = KeywordConfig.from_mapping({"nopoach": ["hire"]}, window_size=3)
        with pytest.raises(DatasetError, match="different keyword config"):
            classify_corpus(paths, registry, other, tmp_path / "pred.csv")


def predictions_fixture(tmp_path):
    path = write_csv(
        tmp_path / "pred.csv",
        ["id", "chunk", "nopoach"],
        [
            ["a", "shall not recruit or hire", "1"],
            ["a", "we hire staff", "0"],
            ["b", "shall not employ felons", "0"],
            ["d", "may not solicit customers", "0"],
        ],
    )
    return path


class TestAggregate:
    def test_document_level_or_with_all_zero_rows(self, small_corpus, tmp_path):
        metadata = MetadataTable.load(small_corpus / "metadata.csv")
        table, orphans = aggregate(predictions_fixture(tmp_path), metadata, "document")
        assert orphans == []
        assert table.value("a", "nopoach") == 1  # OR over mixed chunks
        assert table.value("b", "nopoach") == 0
        assert table.value("c", "nopoach") == 0  # no predictions at all
        assert table.rows["a"]["meta"]["firm_name"] == "Acme"

    def test_record_level_ors_documents(self, small_corpus, tmp_path):
        metadata = MetadataTable.load(small_corpus / "metadata.csv")
        table, _ = aggregate(predictions_fixture(tmp_path), metadata, "record")
        assert sorted(table.rows) == ["r1", "r2", "r3"]
        assert table.value("r1", "nopoach") == 1  # a=1 OR b=0
        assert table.value("r2", "nopoach") == 0

    def test_manifest_extends_universe(self, small_corpus, tmp_path):
        metadata = MetadataTable.load(small_corpus / "metadata.csv")
        (small_corpus / "corpus" / "extra.txt").write_text("nothing")
        manifest = ingest(small_corpus / "corpus", small_corpus / "metadata.csv")
        table, _ = aggregate(
            predictions_fixture(tmp_path), metadata, "document", manifest=manifest
        )
        assert table.value("extra", "nopoach") == 0
        assert "no_metadata" in table.rows["extra"]["flags"]

    def test_unknown_prediction_ids_reported_as_orphans(self, small_corpus, tmp_path):
        metadata = MetadataTable.load(small_corpus / "metadata.csv")
        path = write_csv(tmp_path / "p.csv", ["id", "chunk", "nopoach"],
                         [["ghost", "we hire", "1"]])
        table, orphans = aggregate(path, metadata, "document")
        assert orphans == ["ghost"]

    def test_bad_level_rejected(self, small_corpus, tmp_path):
        metadata = MetadataTable.load(small_corpus / "metadata.csv")
        with pytest.raises(DatasetError, match="level"):
            aggregate(predictions_fixture(tmp_path), metadata, "chapter")


class TestRecordMetrics:
    def _table(self, values):
        table = TagTable(level="document", tags=["t"], meta_columns=[])
        for doc_id, v in values.items():
            table.rows[doc_id] = {"meta": {}, "values": {"t": v}, "flags": []}
        return table

    def test_confusion(self):
        ref = self._table({"a": 1, "b": 0, "c": 1, "d": 0})
        pred = self._table({"a": 1, "b": 1, "c": 0, "d": 0})
        report = record_metrics(ref, pred)["t"]
        assert (report.tp, report.fp, report.fn, report.tn) == (1, 1, 1, 1)

    def test_universe_mismatch_rejected(self):
        with pytest.raises(DatasetError, match="universe"):
            record_metrics(self._table({"a": 1}), self._table({"b": 1}))

    def test_level_mismatch_rejected(self):
        other = self._table({"a": 1})
        other.level = "record"
        with pytest.raises(DatasetError, match="level mismatch"):
            record_metrics(self._table({"a": 1}), other)


class TestPrevalence:
    def _table(self):
        table = TagTable(level="document", tags=["t"], meta_columns=["effective_date"])
        rows = [
            ("a", "2015-01-01", 1), ("b", "2015-06-30", 0),
            ("c", "2016-02-02", 1), ("d", "2016-03-03", 1),
            ("e", "not a date", 1),
        ]
        for doc_id, date, v in rows:
            table.rows[doc_id] = {
                "meta": {"effective_date": date}, "values": {"t": v}, "flags": []
            }
        return table

    def test_yearly_percentages(self):
        series, excluded = prevalence_series(self._table(), "t")
        assert [(s["year"], s["pct"], s["n"]) for s in series] == [
            (2015, 50.0, 2), (2016, 100.0, 2)
        ]
        assert excluded == 1

    def test_final_year_flagged_partial(self):
        series, _ = prevalence_series(self._table(), "t")
        assert [s["partial"] for s in series] == [False, True]

    def test_unknown_tag_rejected(self):
        with pytest.raises(DatasetError, match="unknown tag"):
            prevalence_series(self._table(), "zzz")

    def test_save_format(self, tmp_path):
        series, _ = prevalence_series(self._table(), "t")
        out = save_prevalence(series, tmp_path / "prev.csv", "t")
        _, header, rows = read_csv(out)
        assert header == ["year", "pct", "n", "partial"]
        assert rows[0] == ["2015", "50.0000", "2", "0"]


class TestStore:
    def _table(self):
        table = TagTable(
            level="document", tags=["t"], meta_columns=["effective_date", "firm_name"]
        )
        table.rows["a"] = {
            "meta": {"effective_date": "2015-01-01", "firm_name": "Acme"},
            "values": {"t": 1},
            "flags": [],
        }
        table.rows["b"] = {
            "meta": {"effective_date": "2016-01-01", "firm_name": "Beta"},
            "values": {"t": 0},
            "flags": [],
        }
        return table

    def test_csv_round_trip(self, tmp_path):
        table = self._table()
        path = store(table, tmp_path / "tags.csv")
        loaded = TagTable.load(path)
        assert loaded.tags == ["t"]
        assert loaded.value("a", "t") == 1
        assert loaded.rows["a"]["meta"] == table.rows["a"]["meta"]

    def test_sqlite_round_trip(self, tmp_path):
        table = self._table()
        path = store(table, tmp_path / "tags.db")
        loaded = load_store(path, "document")
        assert loaded.value("a", "t") == 1
        assert loaded.value("b", "t") == 0
        assert loaded.rows["a"]["meta"]["firm_name"] == "Acme"

    def test_sqlite_schema_layout(self, tmp_path):
        import sqlite3

        path = store(self._table(), tmp_path / "tags.db")
        conn = sqlite3.connect(path)
        info = conn.execute('PRAGMA table_info("tags_document")').fetchall()
        conn.close()
        columns = {c[1]: c[2] for c in info}
        assert columns["id"] == "TEXT"
        assert columns["effective-date"] == "DATE"
        assert columns["vendor"] == "TEXT"
        assert columns["t"] == "INTEGER"

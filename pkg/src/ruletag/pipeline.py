"""Project-level orchestration: run pipeline steps over a project
directory, recording provenance so re-runs are resumable and
byte-reproducible.

Each step records a signature (hashes of its inputs + the relevant config
slice) under .state/; a step re-runs only when its outputs are missing or
its signature changed, so deleting one artifact regenerates just it and
anything downstream of a changed input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import dataset as ds
from . import learning
from .corpus import CleaningProfile, CorpusManifest, DEFAULT_PROFILE, MetadataTable, ingest
from .extraction import KeywordConfig, extract_corpus, sample_extract
from .extrapolation import TrainingSet, extrapolate, make_validation_sample
from .ngrams import ngram_explore, write_report
from .provenance import sha256_file, sha256_text
from .rules import load_ruleset

STEPS = (
    "ingest",
    "extract",
    "ngrams",
    "extrapolate",
    "validate",
    "train",
    "classify",
    "aggregate",
    "store",
)


class PipelineError(Exception):
    pass


@dataclass
class ProjectConfig:
    corpus: str
    metadata: str
    keywords: str
    rules: str
    out: str
    n: int = 6
    window_unit: str = "words"
    sample_fraction: float = 1.0
    seed: int = 42
    augment_positives: bool = False
    negative_sampling: bool = False
    family: str = "random-forest"
    grid: str | None = None  # "default" enables grid search
    purify: bool = True
    ngram_n: int = 3
    ngram_center: str = "keyword"
    validation_per_rule: int = 2
    validation_boost: float = 1.0
    level: str = "record"
    cleaning_profile: str | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path):
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        known = {f for f in cls.__dataclass_fields__ if f != "extra"}
        kwargs = {k: v for k, v in data.items() if k in known}
        extra = {k: v for k, v in data.items() if k not in known}
        missing = [k for k in ("corpus", "metadata", "keywords", "rules", "out") if k not in kwargs]
        if missing:
            raise PipelineError(f"config {path} missing required keys: {missing}")
        base = Path(path).parent
        for key in ("corpus", "metadata", "keywords", "rules", "out", "cleaning_profile"):
            if kwargs.get(key):
                p = Path(kwargs[key])
                kwargs[key] = str(p if p.is_absolute() else base / p)
        return cls(extra=extra, **kwargs)

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "extra"}
        d.update(self.extra)
        return d


class Project:
    """Filesystem layout and step runner for one pipeline project."""

    def __init__(self, config: ProjectConfig):
        self.config = config
        self.root = Path(config.out)
        self.dirs = {
            "ingest": self.root / "ingest",
            "extracts": self.root / "extracts",
            "samples": self.root / "extracts_sample",
            "ngrams": self.root / "ngrams",
            "training": self.root / "training",
            "validation": self.root / "validation",
            "models": self.root / "models",
            "output": self.root / "output",
            "state": self.root / ".state",
        }

    # -- plumbing -------------------------------------------------------------

    def _profile(self):
        if self.config.cleaning_profile:
            return CleaningProfile.from_file(self.config.cleaning_profile)
        return DEFAULT_PROFILE

    def _keyword_config(self):
        return KeywordConfig.from_file(
            self.config.keywords, window_size=self.config.n, window_unit=self.config.window_unit
        )

    def _state_path(self, step):
        return self.dirs["state"] / f"{step}.json"

    def _signature(self, step, input_paths, params):
        hashes = {}
        for p in input_paths:
            p = Path(p)
            if not p.exists():
                raise PipelineError(
                    f"step {step!r}: missing input {p}; run the producing step first"
                )
            hashes[str(p)] = sha256_file(p)
        return sha256_text(json.dumps({"inputs": hashes, "params": params}, sort_keys=True))

    def _up_to_date(self, step, signature):
        state_path = self._state_path(step)
        if not state_path.exists():
            return False
        state = json.loads(state_path.read_text(encoding="utf-8"))
        if state.get("signature") != signature:
            return False
        return all(Path(p).exists() for p in state.get("outputs", []))

    def _record(self, step, signature, outputs):
        self.dirs["state"].mkdir(parents=True, exist_ok=True)
        self._state_path(step).write_text(
            json.dumps({"signature": signature, "outputs": [str(p) for p in outputs]}, indent=2),
            encoding="utf-8",
        )
        return [str(p) for p in outputs]

    def _outputs_of(self, step):
        state_path = self._state_path(step)
        if not state_path.exists():
            raise PipelineError(f"step {step!r} has not run; run it first")
        outputs = json.loads(state_path.read_text(encoding="utf-8"))["outputs"]
        missing = [p for p in outputs if not Path(p).exists()]
        if missing:
            raise PipelineError(f"artifacts of step {step!r} missing ({missing[:3]}); re-run it")
        return outputs

    # -- steps ----------------------------------------------------------------

    def step_ingest(self):
        cfg = self.config
        sig = self._signature("ingest", [cfg.metadata], {"corpus": cfg.corpus})
        if self._up_to_date("ingest", sig):
            return self._outputs_of("ingest")
        manifest = ingest(cfg.corpus, cfg.metadata, out_dir=self.dirs["ingest"])
        outputs = [self.dirs["ingest"] / "manifest.csv", self.dirs["ingest"] / "orphans.csv"]
        return self._record("ingest", sig, outputs)

    def step_extract(self):
        cfg = self.config
        manifest_path = self.step_ingest()[0]
        params = {"n": cfg.n, "unit": cfg.window_unit, "sample": cfg.sample_fraction,
                  "seed": cfg.seed}
        sig = self._signature("extract", [manifest_path, cfg.keywords], params)
        if self._up_to_date("extract", sig):
            return self._outputs_of("extract")
        manifest = CorpusManifest.load(manifest_path)
        metadata = MetadataTable.load(cfg.metadata)
        paths = extract_corpus(
            manifest, self._keyword_config(), self.dirs["extracts"],
            metadata=metadata, profile=self._profile(),
        )
        outputs = list(paths)
        if cfg.sample_fraction < 1:
            outputs += sample_extract(paths, cfg.sample_fraction, cfg.seed, self.dirs["samples"])
        return self._record("extract", sig, outputs)

    def _extract_files(self, sampled=False):
        outputs = self._outputs_of("extract")
        key = str(self.dirs["samples"]) if sampled and self.config.sample_fraction < 1 else str(
            self.dirs["extracts"]
        )
        return sorted(p for p in outputs if str(Path(p).parent) == key)

    def step_ngrams(self):
        cfg = self.config
        extract_files = self._extract_files()
        params = {"ngram_n": cfg.ngram_n, "center": cfg.ngram_center}
        sig = self._signature("ngrams", extract_files, params)
        if self._up_to_date("ngrams", sig):
            return self._outputs_of("ngrams")
        keywords = self._keyword_config().all_keywords
        report = ngram_explore(extract_files, cfg.ngram_n, center=cfg.ngram_center,
                               keywords=keywords)
        out = write_report(report, self.dirs["ngrams"] / "ngrams.csv", cfg.ngram_n,
                           cfg.ngram_center)
        return self._record("ngrams", sig, [out])

    def step_extrapolate(self):
        cfg = self.config
        extract_files = self._extract_files()
        params = {"s": cfg.sample_fraction, "seed": cfg.seed, "neg": cfg.negative_sampling,
                  "augment": cfg.augment_positives}
        sig = self._signature("extrapolate", extract_files + [cfg.rules], params)
        if self._up_to_date("extrapolate", sig):
            return self._outputs_of("extrapolate")
        ruleset = load_ruleset(cfg.rules)
        training = extrapolate(
            extract_files, ruleset, s=cfg.sample_fraction, do_neg=cfg.negative_sampling,
            seed=cfg.seed, augment_positives=cfg.augment_positives,
        )
        out = training.save(self.dirs["training"] / "training.csv")
        return self._record("extrapolate", sig, [out])

    def step_validate(self):
        cfg = self.config
        training_path = self.step_extrapolate()[0]
        params = {"per_rule": cfg.validation_per_rule, "boost": cfg.validation_boost,
                  "seed": cfg.seed}
        sig = self._signature("validate", [training_path], params)
        if self._up_to_date("validate", sig):
            return self._outputs_of("validate")
        training = TrainingSet.load(training_path)
        sample = make_validation_sample(
            training, cfg.validation_per_rule, positive_boost=cfg.validation_boost, seed=cfg.seed
        )
        coder = sample.save_coder_file(self.dirs["validation"] / "coder_sample.csv")
        key = sample.save_answer_key(self.dirs["validation"] / "answer_key.csv")
        return self._record("validate", sig, [coder, key])

    def step_train(self):
        cfg = self.config
        training_path = self.step_extrapolate()[0]
        params = {"family": cfg.family, "grid": cfg.grid, "purify": cfg.purify, "seed": cfg.seed}
        sig = self._signature("train", [training_path], params)
        if self._up_to_date("train", sig):
            return self._outputs_of("train")
        training = TrainingSet.load(training_path)
        outputs = []
        registry = {}
        metrics_rows = []
        for tag in training.tags:
            params_for_tag = {}
            if cfg.grid:
                grid = None if cfg.grid == "default" else json.loads(cfg.grid)
                params_for_tag, results = learning.grid_search(
                    cfg.family, training, tag, grid=grid, seed=cfg.seed
                )
                grid_path = self.dirs["models"] / f"grid_{tag}.json"
                self.dirs["models"].mkdir(parents=True, exist_ok=True)
                grid_path.write_text(json.dumps(results, indent=2), encoding="utf-8")
                outputs.append(grid_path)
            model = learning.train(cfg.family, training, tag, params=params_for_tag,
                                   seed=cfg.seed)
            if cfg.purify and cfg.family == "random-forest":
                model, _ = learning.purify(model, [r.chunk for r in training.rows])
            path = learning.save_model(model, self.dirs["models"])
            registry[tag] = path.name
            outputs.append(path)
            m = model.metrics
            metrics_rows.append([tag, cfg.family, m.accuracy, m.precision, m.recall, m.f1])
        registry_path = self.dirs["models"] / "registry.json"
        learning.ModelRegistry(registry, base_dir=self.dirs["models"]).save(registry_path)
        outputs.append(registry_path)
        from .provenance import provenance_record, write_csv

        metrics_path = write_csv(
            self.dirs["models"] / "metrics.csv",
            ["tag", "family", "accuracy", "precision", "recall", "f1"],
            metrics_rows,
            provenance=provenance_record(kind="metrics", family=cfg.family, seed=cfg.seed),
        )
        outputs.append(metrics_path)
        return self._record("train", sig, outputs)

    def step_classify(self):
        cfg = self.config
        extract_files = self._extract_files()
        train_outputs = self.step_train()
        registry_path = next(p for p in train_outputs if p.endswith("registry.json"))
        sig = self._signature("classify", extract_files + [registry_path], {})
        if self._up_to_date("classify", sig):
            return self._outputs_of("classify")
        registry = learning.ModelRegistry.load(registry_path)
        out, stats = ds.classify_corpus(
            extract_files, registry, self._keyword_config(),
            self.dirs["output"] / "predictions.csv",
        )
        stats_path = self.dirs["output"] / "classify_stats.json"
        stats_path.write_text(json.dumps(stats, indent=2, sort_keys=True), encoding="utf-8")
        return self._record("classify", sig, [out, stats_path])

    def step_aggregate(self):
        cfg = self.config
        predictions_path = self.step_classify()[0]
        manifest_path = self.step_ingest()[0]
        sig = self._signature("aggregate", [predictions_path, manifest_path, cfg.metadata],
                              {"level": cfg.level})
        if self._up_to_date("aggregate", sig):
            return self._outputs_of("aggregate")
        metadata = MetadataTable.load(cfg.metadata)
        manifest = CorpusManifest.load(manifest_path)
        outputs = []
        for level in ("document", cfg.level) if cfg.level != "document" else ("document",):
            table, orphans = ds.aggregate(predictions_path, metadata, level, manifest=manifest)
            outputs.append(table.save(self.dirs["output"] / f"tags_{level}.csv"))
            for tag in table.tags:
                series, _ = ds.prevalence_series(table, tag)
                outputs.append(
                    ds.save_prevalence(
                        series, self.dirs["output"] / f"prevalence_{level}_{tag}.csv", tag
                    )
                )
        return self._record("aggregate", sig, outputs)

    def step_store(self):
        cfg = self.config
        agg_outputs = self.step_aggregate()
        table_paths = [p for p in agg_outputs if Path(p).name.startswith("tags_")]
        sig = self._signature("store", table_paths, {})
        if self._up_to_date("store", sig):
            return self._outputs_of("store")
        outputs = []
        for p in table_paths:
            level = Path(p).stem.split("_", 1)[1]
            table = ds.TagTable.load(p, level=level)
            outputs.append(ds.store(table, self.dirs["output"] / f"tags_{level}.db"))
        return self._record("store", sig, outputs)

    def run(self, steps=None):
        """Run the requested steps (dependencies included); returns the run
        manifest mapping step -> artifact paths."""
        steps = list(steps or STEPS)
        unknown = [s for s in steps if s not in STEPS]
        if unknown:
            raise PipelineError(f"unknown steps: {unknown}")
        manifest = {}
        runners = {s: getattr(self, f"step_{s}") for s in STEPS}
        for step in STEPS:
            if step in steps:
                manifest[step] = [str(p) for p in runners[step]()]
        run_manifest_path = self.root / "run_manifest.json"
        existing = {}
        if run_manifest_path.exists():
            existing = json.loads(run_manifest_path.read_text(encoding="utf-8"))
        existing.update(manifest)
        rendered = json.dumps(existing, indent=2, sort_keys=True)
        if not run_manifest_path.exists() or run_manifest_path.read_text(
            encoding="utf-8"
        ) != rendered:
            run_manifest_path.write_text(rendered, encoding="utf-8")
        return manifest


def run_pipeline(config: ProjectConfig, steps=None):
    return Project(config).run(steps)

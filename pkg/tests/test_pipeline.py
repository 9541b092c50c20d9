"""Pipeline orchestration tests: config loading, resumability, regeneration."""

import hashlib
import json
from pathlib import Path

import pytest
import yaml

from ruletag.pipeline import STEPS, PipelineError, Project, ProjectConfig, run_pipeline
from ruletag.synthetic import generate_corpus


def write_config(tmp_path, **overrides):
    paths = generate_corpus(tmp_path / "synth", n_docs=60, seed=5)
    data = {
        "corpus": str(paths["corpus"]),
        "metadata": str(paths["metadata"]),
        "keywords": str(paths["keywords"]),
        "rules": str(paths["rules"]),
        "out": str(tmp_path / "out"),
        "n": 6,
        "family": "naive-bayes",
        "purify": False,
        "seed": 11,
    }
    data.update(overrides)
    config_path = tmp_path / "project.yml"
    config_path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return config_path


def artifact_hashes(out_dir):
    hashes = {}
    for p in sorted(Path(out_dir).rglob("*")):
        # The run manifest records absolute paths, so it cannot match across
        # output directories; compare only the pipeline artifacts proper.
        if p.is_file() and ".state" not in p.parts and p.name != "run_manifest.json":
            hashes[str(p.relative_to(out_dir))] = hashlib.sha256(p.read_bytes()).hexdigest()
    return hashes


class TestConfig:
    def test_missing_required_keys_rejected(self, tmp_path):
        path = tmp_path / "bad.yml"
        path.write_text(yaml.safe_dump({"corpus": "c", "out": "o"}), encoding="utf-8")
        with pytest.raises(PipelineError, match="missing required keys"):
            ProjectConfig.load(path)

    def test_relative_paths_resolved_against_config_dir(self, tmp_path):
        path = tmp_path / "project.yml"
        path.write_text(
            yaml.safe_dump(
                {"corpus": "corpus", "metadata": "m.csv", "keywords": "k.json",
                 "rules": "r.csv", "out": "out"}
            ),
            encoding="utf-8",
        )
        config = ProjectConfig.load(path)
        assert config.corpus == str(tmp_path / "corpus")
        assert config.out == str(tmp_path / "out")

    def test_unknown_keys_preserved_in_extra(self, tmp_path):
        config_path = write_config(tmp_path, owner="team-econ")
        config = ProjectConfig.load(config_path)
        assert config.extra == {"owner": "team-econ"}
        assert config.to_dict()["owner"] == "team-econ"


class TestRun:
    def test_full_run_produces_all_artifacts(self, tmp_path):
        config = ProjectConfig.load(write_config(tmp_path))
        manifest = run_pipeline(config)
        assert set(manifest) == set(STEPS)
        for step, outputs in manifest.items():
            assert outputs, f"step {step} produced no artifacts"
            for p in outputs:
                assert Path(p).exists(), f"{step} artifact missing: {p}"
        recorded = json.loads((Path(config.out) / "run_manifest.json").read_text())
        assert set(recorded) == set(STEPS)

    def test_rerun_is_noop_and_byte_identical(self, tmp_path):
        config = ProjectConfig.load(write_config(tmp_path))
        run_pipeline(config)
        before = artifact_hashes(config.out)
        mtimes = {p: Path(config.out, p).stat().st_mtime_ns for p in before}
        run_pipeline(config)
        after = artifact_hashes(config.out)
        assert before == after
        assert mtimes == {p: Path(config.out, p).stat().st_mtime_ns for p in after}

    def test_two_fresh_runs_byte_identical(self, tmp_path):
        config_path = write_config(tmp_path)
        config_a = ProjectConfig.load(config_path)
        config_b = ProjectConfig.load(config_path)
        config_b.out = str(tmp_path / "out_b")
        run_pipeline(config_a)
        run_pipeline(config_b)
        assert artifact_hashes(config_a.out) == artifact_hashes(config_b.out)

    def test_deleted_artifact_is_regenerated(self, tmp_path):
        config = ProjectConfig.load(write_config(tmp_path))
        run_pipeline(config)
        before = artifact_hashes(config.out)
        target = Path(config.out) / "output" / "predictions.csv"
        target.unlink()
        run_pipeline(config)
        assert artifact_hashes(config.out) == before

    def test_changed_input_triggers_rerun(self, tmp_path):
        config = ProjectConfig.load(write_config(tmp_path))
        project = Project(config)
        project.step_ingest()
        state = json.loads((Path(config.out) / ".state" / "ingest.json").read_text())
        (Path(config.metadata)).write_text(
            Path(config.metadata).read_text(encoding="utf-8") + "\n", encoding="utf-8"
        )
        project.step_ingest()
        state2 = json.loads((Path(config.out) / ".state" / "ingest.json").read_text())
        assert state["signature"] != state2["signature"]

    def test_missing_upstream_step_named_in_error(self, tmp_path):
        config = ProjectConfig.load(write_config(tmp_path))
        with pytest.raises(PipelineError, match="'extract' has not run"):
            Project(config).step_extrapolate()

    def test_unknown_step_rejected(self, tmp_path):
        config = ProjectConfig.load(write_config(tmp_path))
        with pytest.raises(PipelineError, match="unknown steps"):
            run_pipeline(config, steps=["ingest", "teleport"])

    def test_partial_steps_run_only_dependencies(self, tmp_path):
        config = ProjectConfig.load(write_config(tmp_path))
        manifest = run_pipeline(config, steps=["extract"])
        assert set(manifest) == {"extract"}
        assert not (Path(config.out) / "models").exists()

"""HTTP service exposing the pipeline for the companion UI.

A project is a pipeline output directory (under the configured projects
root) containing a `project.yml` config. Every response is computed by the
same module code the CLI uses, so API results and CLI artifacts agree.
Previews are side-effect free; training runs as a background job with one
mutating job per tag at a time.
"""

from __future__ import annotations

import csv
import io
import json
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import learning
from .extraction import KeywordConfig, iter_extract_rows
from .extrapolation import (
    ExtrapolationError,
    TrainingSet,
    ValidationSample,
    make_validation_sample,
    score_validation,
)
from .ngrams import ngram_explore
from .pipeline import ProjectConfig
from .provenance import read_csv
from .rules import RuleError, apply_rules, parse_rule_rows

PREVIEW_CHUNK_CAP = 10_000
MAX_EXAMPLE_LIMIT = 500


class PreviewRequest(BaseModel):
    rules_csv: str
    limit: int = Field(default=10, ge=0, le=MAX_EXAMPLE_LIMIT)
    chunk_cap: int = Field(default=PREVIEW_CHUNK_CAP, ge=1)


class ExportRequest(BaseModel):
    per_rule: int = Field(default=2, ge=1)
    boost: float = Field(default=1.0, gt=0)
    seed: int = 42
    request_id: str | None = None


class ScoreRequest(BaseModel):
    rows: list[dict]  # [{"sample_id": ..., "values": {tag: 0/1}}]


class TrainRequest(BaseModel):
    family: str = "random-forest"
    tag: str | None = None
    grid: bool = False
    purify: bool = False
    seed: int = 42
    request_id: str | None = None


class _Jobs:
    """In-process background jobs, one mutating job per (project, tag)."""

    def __init__(self):
        self.lock = threading.Lock()
        self.jobs = {}  # job_id -> state dict
        self.by_request = {}  # request_id -> job_id

    def active_tags(self, project):
        with self.lock:
            return {
                j["tag"]
                for j in self.jobs.values()
                if j["project"] == project and j["status"] in ("queued", "running")
            }

    def create(self, project, tag, request_id=None):
        with self.lock:
            if request_id and request_id in self.by_request:
                return self.by_request[request_id], False
            job_id = uuid.uuid4().hex[:12]
            self.jobs[job_id] = {
                "job_id": job_id, "project": project, "tag": tag,
                "status": "queued", "result": None, "error": None,
            }
            if request_id:
                self.by_request[request_id] = job_id
            return job_id, True

    def update(self, job_id, **fields):
        with self.lock:
            self.jobs[job_id].update(fields)

    def get(self, job_id):
        with self.lock:
            job = self.jobs.get(job_id)
            return dict(job) if job else None


def _load_project(root: Path, project_id: str):
    project_dir = root / project_id
    config_path = project_dir / "project.yml"
    if not project_dir.is_dir() or not config_path.exists():
        raise HTTPException(status_code=404, detail=f"unknown project {project_id!r}")
    return project_dir, ProjectConfig.load(config_path)


def _extract_files(project_dir: Path):
    files = sorted((project_dir / "extracts").glob("extract_*.csv"))
    if not files:
        raise HTTPException(
            status_code=409, detail="no extract artifacts; run the extract step first"
        )
    return [str(p) for p in files]


def _training_path(project_dir: Path):
    path = project_dir / "training" / "training.csv"
    if not path.exists():
        raise HTTPException(
            status_code=409, detail="no training set; run the extrapolate step first"
        )
    return path


def create_app(projects_root) -> FastAPI:
    root = Path(projects_root)
    app = FastAPI(title="ruletag", version="0.1.0")
    app.state.projects_root = root
    app.state.jobs = _Jobs()
    app.state.ngram_cache = {}

    @app.get("/projects")
    def list_projects():
        out = []
        if root.is_dir():
            for child in sorted(root.iterdir()):
                if (child / "project.yml").exists():
                    out.append({"id": child.name})
        return {"projects": out}

    @app.get("/projects/{project_id}/artifacts")
    def list_artifacts(project_id: str):
        project_dir, _ = _load_project(root, project_id)
        manifest_path = project_dir / "run_manifest.json"
        steps = {}
        if manifest_path.exists():
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            def _rel(p):
                try:
                    return str(Path(p).relative_to(project_dir))
                except ValueError:
                    return str(p)

            steps = {step: [_rel(p) for p in paths] for step, paths in manifest.items()}
        return {"id": project_id, "steps": steps}

    @app.get("/projects/{project_id}/ngrams")
    def ngrams(project_id: str, n: int = 3, center: str = "keyword", limit: int = 100):
        project_dir, config = _load_project(root, project_id)
        files = _extract_files(project_dir)
        cache_key = (project_id, n, center, tuple(files))
        if cache_key not in app.state.ngram_cache:
            keywords = KeywordConfig.from_file(config.keywords).all_keywords
            app.state.ngram_cache[cache_key] = ngram_explore(
                files, n, center=center, keywords=keywords
            )
        report = app.state.ngram_cache[cache_key]
        return {
            "n": n,
            "center": center,
            "total_phrases": len(report),
            "rows": [{"ngram": g, "count": c} for g, c in report[:limit]],
        }

    @app.post("/projects/{project_id}/rules/preview")
    def rules_preview(project_id: str, request: PreviewRequest):
        project_dir, _ = _load_project(root, project_id)
        files = _extract_files(project_dir)
        reader = csv.reader(io.StringIO(request.rules_csv))
        table = [row for row in reader if row]
        try:
            ruleset = parse_rule_rows(table[0] if table else [], table[1:])
        except RuleError as exc:
            return JSONResponse(status_code=422, content={"detail": str(exc)})

        chunks = []
        for _, _, row_chunks in iter_extract_rows(files):
            chunks.extend(row_chunks)
            if len(chunks) >= request.chunk_cap:
                chunks = chunks[: request.chunk_cap]
                break

        per_rule = []
        unmatched = 0
        matched_any = [False] * len(chunks)
        for rule in ruleset.rules:
            examples = []
            count = 0
            for i, chunk in enumerate(chunks):
                if rule.matches(chunk):
                    matched_any[i] = True
                    count += 1
                    if len(examples) < request.limit:
                        values, winning = apply_rules(chunk, ruleset)
                        examples.append(
                            {"chunk": chunk, "tags": values, "winning_rule": winning.raw}
                        )
            per_rule.append(
                {"rule": rule.raw, "prio": rule.prio, "count": count, "examples": examples}
            )
        unmatched = matched_any.count(False)
        return {
            "tags": list(ruleset.tags),
            "chunks_scanned": len(chunks),
            "unmatched_chunks": unmatched,
            "rules": per_rule,
        }

    @app.post("/projects/{project_id}/validation/export")
    def validation_export(project_id: str, request: ExportRequest):
        project_dir, _ = _load_project(root, project_id)
        training = TrainingSet.load(_training_path(project_dir))
        sample = make_validation_sample(
            training, request.per_rule, positive_boost=request.boost, seed=request.seed
        )
        out_dir = project_dir / "validation"
        sample.save_coder_file(out_dir / "coder_sample.csv")
        sample.save_answer_key(out_dir / "answer_key.csv")
        return {
            "tags": list(sample.tags),
            "rows": [{"sample_id": sid, "chunk": chunk} for sid, chunk in sample.coder_rows],
        }

    @app.post("/projects/{project_id}/validation/score")
    def validation_score(project_id: str, request: ScoreRequest):
        project_dir, _ = _load_project(root, project_id)
        key_path = project_dir / "validation" / "answer_key.csv"
        if not key_path.exists():
            raise HTTPException(status_code=409, detail="no validation sample; export first")
        _, header, rows = read_csv(key_path)
        tags = header[2:]
        sample = ValidationSample(
            tags=tags,
            coder_rows=[],
            key_rows=[
                (r[0], r[1], {t: int(v) for t, v in zip(tags, r[2:])}) for r in rows
            ],
        )
        try:
            coded = [(r["sample_id"], {t: int(r["values"][t]) for t in tags})
                     for r in request.rows]
        except KeyError as exc:
            return JSONResponse(status_code=422, content={"detail": f"missing field {exc}"})
        try:
            return score_validation(coded, sample)
        except ExtrapolationError as exc:
            return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.post("/projects/{project_id}/train")
    def train(project_id: str, request: TrainRequest):
        project_dir, config = _load_project(root, project_id)
        if request.family not in learning.FAMILIES:
            return JSONResponse(
                status_code=422,
                content={"detail": f"unknown family {request.family!r}"},
            )
        training_path = _training_path(project_dir)
        training = TrainingSet.load(training_path)
        tag = request.tag or (training.tags[0] if training.tags else None)
        if tag not in training.tags:
            return JSONResponse(status_code=422, content={"detail": f"unknown tag {tag!r}"})

        jobs: _Jobs = app.state.jobs
        if tag in jobs.active_tags(project_id):
            raise HTTPException(
                status_code=409, detail=f"a training job for tag {tag!r} is already active"
            )
        job_id, created = jobs.create(project_id, tag, request.request_id)
        if not created:
            return {"job_id": job_id, "deduplicated": True}

        def work():
            jobs.update(job_id, status="running")
            try:
                params = {}
                if request.grid:
                    params, _ = learning.grid_search(
                        request.family, training, tag, seed=request.seed
                    )
                model = learning.train(
                    request.family, training, tag, params=params, seed=request.seed
                )
                if request.purify and request.family == "random-forest":
                    model, _ = learning.purify(model, [r.chunk for r in training.rows])
                path = learning.save_model(model, project_dir / "models")
                registry_path = project_dir / "models" / "registry.json"
                mapping = {}
                if registry_path.exists():
                    mapping = json.loads(registry_path.read_text(encoding="utf-8"))
                mapping[tag] = path.name
                learning.ModelRegistry(mapping, base_dir=path.parent).save(registry_path)
                jobs.update(
                    job_id,
                    status="done",
                    result={
                        "model": path.name,
                        "family": request.family,
                        "tag": tag,
                        "metrics": model.metrics.to_dict(),
                    },
                )
            except Exception as exc:  # surfaced through the job status
                jobs.update(job_id, status="failed", error=str(exc))

        threading.Thread(target=work, daemon=True).start()
        return {"job_id": job_id, "status": "queued"}

    @app.get("/projects/{project_id}/train/{job_id}")
    def train_status(project_id: str, job_id: str):
        _load_project(root, project_id)
        job = app.state.jobs.get(job_id)
        if job is None or job["project"] != project_id:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        return job

    @app.get("/projects/{project_id}/metrics")
    def metrics(project_id: str):
        project_dir, _ = _load_project(root, project_id)
        models = []
        models_dir = project_dir / "models"
        if models_dir.is_dir():
            for path in sorted(models_dir.glob("*.json")):
                if path.name in ("registry.json",) or path.name.startswith("grid_"):
                    continue
                try:
                    family, tag, f1, purified = learning.parse_model_filename(path.name)
                except learning.LearningError:
                    continue
                model = learning.load_model(path)
                models.append(
                    {
                        "file": path.name,
                        "family": family,
                        "tag": tag,
                        "purified": purified,
                        "metrics": model.metrics.to_dict() if model.metrics else None,
                    }
                )
        prevalence = {}
        output_dir = project_dir / "output"
        if output_dir.is_dir():
            for path in sorted(output_dir.glob("prevalence_*.csv")):
                _, header, rows = read_csv(path)
                prevalence[path.stem] = [dict(zip(header, row)) for row in rows]
        return {"models": models, "prevalence": prevalence}

    return app


def main(argv=None):
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="Serve the pipeline HTTP API.")
    parser.add_argument("projects_root", help="directory containing project directories")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8321)
    args = parser.parse_args(argv)
    uvicorn.run(create_app(args.projects_root), host=args.host, port=args.port)


if __name__ == "__main__":
    main()

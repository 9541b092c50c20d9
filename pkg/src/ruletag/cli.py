"""Command-line interface.

Exit codes: 0 success, 1 usage error (bad flags/arguments), 2 data error
(malformed inputs, failed validation, missing upstream artifacts).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import dataset as ds
from . import learning
from .corpus import CorpusManifest, IngestError, MetadataTable, ingest as run_ingest
from .extraction import (
    ExtractionError,
    KeywordConfig,
    extract_corpus,
    sample_extract,
)
from .extrapolation import (
    ExtrapolationError,
    TrainingSet,
    ValidationSample,
    extrapolate as run_extrapolate,
    load_coded_file,
    make_validation_sample,
    score_validation,
)
from .ngrams import NgramError, ngram_explore, write_report
from .pipeline import PipelineError, ProjectConfig, run_pipeline, STEPS
from .provenance import read_csv
from .rules import RuleError, coverage_summary, load_ruleset
from .synthetic import generate_corpus

DATA_ERRORS = (
    IngestError,
    ExtractionError,
    NgramError,
    RuleError,
    ExtrapolationError,
    learning.LearningError,
    ds.DatasetError,
    PipelineError,
    FileNotFoundError,
)


@click.group()
def cli():
    """Keyword-in-context rule tagging pipeline."""


@cli.command("ingest")
@click.argument("corpus", type=click.Path(exists=True, file_okay=False))
@click.argument("metadata", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
def ingest_cmd(corpus, metadata, out):
    """Enumerate a corpus and join it against a metadata table."""
    manifest = run_ingest(corpus, metadata, out_dir=out)
    click.echo(
        f"ingested {manifest.document_count} documents "
        f"({len(manifest.orphans)} without metadata, {len(manifest.errors)} errors)"
    )


@cli.command("extract")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.argument("keywords", type=click.Path(exists=True, dir_okay=False))
@click.option("--metadata", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("-n", "window", default=6, show_default=True, help="context window size")
@click.option("--unit", default="words", type=click.Choice(["words", "sentences"]),
              show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--sample", type=float, help="also write a sampled copy (fraction)")
@click.option("--seed", default=42, show_default=True)
def extract_cmd(manifest, keywords, metadata, out, window, unit, jobs, sample, seed):
    """Extract keyword context windows from every document."""
    config = KeywordConfig.from_file(keywords, window_size=window, window_unit=unit)
    meta = MetadataTable.load(metadata) if metadata else None
    paths = extract_corpus(CorpusManifest.load(manifest), config, out, metadata=meta, jobs=jobs)
    click.echo(f"wrote {len(paths)} extract file(s) under {out}")
    if sample:
        sampled = sample_extract(paths, sample, seed, Path(out) / "sample")
        click.echo(f"wrote {len(sampled)} sampled file(s) under {Path(out) / 'sample'}")


@cli.command("ngrams")
@click.argument("extracts", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-n", "gram", default=3, show_default=True)
@click.option("--center", default="keyword", type=click.Choice(["keyword", "midpoint"]),
              show_default=True)
@click.option("--keywords", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--top", default=0, help="also print the top K phrases")
def ngrams_cmd(extracts, gram, center, keywords, out, top):
    """Count centered n-gram phrases across extract files."""
    kws = None
    if keywords:
        kws = KeywordConfig.from_file(keywords).all_keywords
    report = ngram_explore(list(extracts), gram, center=center, keywords=kws)
    write_report(report, out, gram, center)
    click.echo(f"{len(report)} distinct phrases -> {out}")
    for phrase, count in report[:top]:
        click.echo(f"{count:8d}  {phrase}")


@cli.group("rules")
def rules_group():
    """Rule-file utilities."""


@rules_group.command("check")
@click.argument("rules", type=click.Path(exists=True, dir_okay=False))
def rules_check_cmd(rules):
    """Parse and validate a rule file, printing a coverage summary."""
    ruleset = load_ruleset(rules)
    click.echo(json.dumps(coverage_summary(ruleset), indent=2))


@cli.command("extrapolate")
@click.argument("rules", type=click.Path(exists=True, dir_okay=False))
@click.argument("extracts", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-s", "rate", default=1.0, show_default=True, help="row sampling rate")
@click.option("--seed", default=42, show_default=True)
@click.option("--neg/--no-neg", default=False, help="negative sampling")
@click.option("--augment-positives", is_flag=True,
              help="always keep rows with a positive rule match")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def extrapolate_cmd(rules, extracts, rate, seed, neg, augment_positives, out):
    """Extrapolate a rule set over extract files into a training set."""
    ruleset = load_ruleset(rules)
    training = run_extrapolate(
        list(extracts), ruleset, s=rate, do_neg=neg, seed=seed,
        augment_positives=augment_positives,
    )
    training.save(out)
    for warning in training.warnings:
        click.echo(f"warning: {warning}", err=True)
    positives = sum(1 for r in training.rows if any(r.tag_values.values()))
    click.echo(f"{len(training.rows)} training rows ({positives} positive) -> {out}")


@cli.group("validate")
def validate_group():
    """Blind hand-coding validation."""


@validate_group.command("export")
@click.argument("training", type=click.Path(exists=True, dir_okay=False))
@click.option("--per-rule", default=2, show_default=True)
@click.option("--boost", default=1.0, show_default=True,
              help="sampling weight for positive rows")
@click.option("--seed", default=42, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def validate_export_cmd(training, per_rule, boost, seed, out):
    """Draw a blind coder sample and its withheld answer key."""
    ts = TrainingSet.load(training)
    sample = make_validation_sample(ts, per_rule, positive_boost=boost, seed=seed)
    coder = sample.save_coder_file(Path(out) / "coder_sample.csv")
    key = sample.save_answer_key(Path(out) / "answer_key.csv")
    click.echo(f"{len(sample.coder_rows)} rows -> {coder} (key: {key})")


def _load_answer_key(path):
    _, header, rows = read_csv(path)
    if header[:2] != ["sample_id", "rule"]:
        raise ExtrapolationError(f"{path}: not an answer key (header {header})")
    tags = header[2:]
    key_rows = [
        (row[0], row[1], {t: int(v) for t, v in zip(tags, row[2:])}) for row in rows
    ]
    return ValidationSample(tags=tags, coder_rows=[], key_rows=key_rows)


@validate_group.command("score")
@click.argument("coded", type=click.Path(exists=True, dir_okay=False))
@click.argument("answer_key", type=click.Path(exists=True, dir_okay=False))
def validate_score_cmd(coded, answer_key):
    """Score a completed coder file against the answer key."""
    sample = _load_answer_key(answer_key)
    coded_rows = load_coded_file(coded, sample.tags)
    click.echo(json.dumps(score_validation(coded_rows, sample), indent=2))


@cli.command("train")
@click.argument("family", type=click.Choice(list(learning.FAMILIES)))
@click.argument("training", type=click.Path(exists=True, dir_okay=False))
@click.option("--tag", help="tag to train (default: every tag in the training set)")
@click.option("--grid", help="'default' or a JSON parameter grid; enables grid search")
@click.option("--purify/--no-purify", default=False, help="purify random forests")
@click.option("--seed", default=42, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def train_cmd(family, training, tag, grid, purify, seed, out):
    """Train one model family on a training set and save the model JSON."""
    ts = TrainingSet.load(training)
    tags = [tag] if tag else list(ts.tags)
    for t in tags:
        params = {}
        if grid:
            lattice = None if grid == "default" else json.loads(grid)
            params, _ = learning.grid_search(family, ts, t, grid=lattice, seed=seed)
            click.echo(f"{t}: grid search selected {params}")
        model = learning.train(family, ts, t, params=params, seed=seed)
        if purify:
            model, notes = learning.purify(model, [r.chunk for r in ts.rows])
            for note in notes:
                click.echo(f"warning: {note}", err=True)
        path = learning.save_model(model, out)
        m = model.metrics
        click.echo(
            f"{t}: acc={m.accuracy:.3f} prec={m.precision:.3f} "
            f"rec={m.recall:.3f} f1={m.f1:.3f} -> {path}"
        )


@cli.command("classify")
@click.argument("registry", type=click.Path(exists=True, dir_okay=False))
@click.argument("keywords", type=click.Path(exists=True, dir_okay=False))
@click.argument("extracts", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-n", "window", default=6, show_default=True)
@click.option("--unit", default="words", type=click.Choice(["words", "sentences"]),
              show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def classify_cmd(registry, keywords, extracts, window, unit, out):
    """Classify every extracted chunk with the registered models."""
    reg = learning.ModelRegistry.load(registry)
    config = KeywordConfig.from_file(keywords, window_size=window, window_unit=unit)
    path, stats = ds.classify_corpus(list(extracts), reg, config, out)
    click.echo(json.dumps(stats, indent=2, sort_keys=True))
    click.echo(f"predictions -> {path}")


@cli.command("aggregate")
@click.argument("predictions", type=click.Path(exists=True, dir_okay=False))
@click.argument("metadata", type=click.Path(exists=True, dir_okay=False))
@click.option("--level", default="document", type=click.Choice(["document", "record"]),
              show_default=True)
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False),
              help="include keyword-free documents as all-zero rows")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def aggregate_cmd(predictions, metadata, level, manifest, out):
    """OR chunk predictions up to document or record level."""
    meta = MetadataTable.load(metadata)
    mf = CorpusManifest.load(manifest) if manifest else None
    table, orphans = ds.aggregate(predictions, meta, level, manifest=mf)
    table.save(out)
    click.echo(f"{len(table.rows)} {level} rows -> {out}")
    if orphans:
        click.echo(f"warning: {len(orphans)} predicted ids outside the corpus", err=True)


@cli.command("prevalence")
@click.argument("tag_table", type=click.Path(exists=True, dir_okay=False))
@click.argument("tag")
@click.option("--date-column", default="effective_date", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
def prevalence_cmd(tag_table, tag, date_column, out):
    """Yearly prevalence series for one tag."""
    table = ds.TagTable.load(tag_table)
    series, excluded = ds.prevalence_series(table, tag, date_column=date_column)
    if out:
        ds.save_prevalence(series, out, tag)
    for entry in series:
        partial = " (partial)" if entry["partial"] else ""
        click.echo(f"{entry['year']}: {entry['pct']:.1f}% of {entry['n']}{partial}")
    if excluded:
        click.echo(f"warning: {excluded} rows without a parseable date", err=True)


@cli.command("store")
@click.argument("tag_table", type=click.Path(exists=True, dir_okay=False))
@click.argument("target", type=click.Path(dir_okay=False))
def store_cmd(tag_table, target):
    """Persist a tag table to CSV or an embedded SQLite database."""
    table = ds.TagTable.load(tag_table)
    path = ds.store(table, target)
    click.echo(f"stored {len(table.rows)} rows -> {path}")


@cli.command("synth")
@click.argument("out", type=click.Path(file_okay=False))
@click.option("--n-docs", default=2000, show_default=True)
@click.option("--seed", default=7, show_default=True)
def synth_cmd(out, n_docs, seed):
    """Generate a synthetic corpus with known planted prevalence."""
    paths = generate_corpus(out, n_docs=n_docs, seed=seed)
    click.echo(f"corpus -> {paths['corpus']}")
    click.echo(f"planted prevalence: {paths['planted_rates']}")


@cli.command("run")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--steps", help=f"comma-separated subset of: {', '.join(STEPS)}")
def run_cmd(config, steps):
    """Run the pipeline described by a project config file."""
    cfg = ProjectConfig.load(config)
    wanted = [s.strip() for s in steps.split(",")] if steps else None
    manifest = run_pipeline(cfg, wanted)
    for step, outputs in manifest.items():
        click.echo(f"{step}: {len(outputs)} artifact(s)")
    click.echo(f"project -> {cfg.out}")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except DATA_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

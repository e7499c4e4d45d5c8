"""Command-line entry point.

Subcommands cover the full workflow: ``ingest-alto`` converts ALTO-XML to a
manifest, ``eval`` scores hypothesis lines against ground truth, ``errors``
tabulates the most common error segments, ``synth`` generates synthetic
line images, ``select`` picks the best model by mean(CER, WER), and
``report`` renders multi-model comparisons.

Exit codes: 0 success, 1 usage error, 2 data error.  Diagnostics go to
stderr; machine-readable results go to stdout or ``--out``.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Optional

import click

from . import align as align_mod
from . import corpus, metrics, report, synth
from .errors import DataError, OcrlineError

logger = logging.getLogger(__name__)


def _write_output(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_lines(path: str) -> list[corpus.TranscribedLine]:
    """Load lines from a tesstrain directory, a .jsonl manifest or an ALTO file."""
    p = Path(path)
    if p.is_dir():
        return corpus.load_gt_pairs(p)
    if p.suffix == ".jsonl":
        return corpus.read_manifest(p).entries
    if p.suffix.lower() == ".xml":
        return corpus.parse_alto(p)
    raise DataError(f"cannot ingest {path}: expected a directory, .jsonl manifest or ALTO .xml")


def _build_pairs(gt_path: str, hyp_path: str, match_policy: Optional[str]) -> list[corpus.LinePair]:
    gt = _load_lines(gt_path)
    hyp = _load_lines(hyp_path)
    if match_policy is None:
        have_boxes = gt and hyp and all(l.bbox for l in gt) and all(l.bbox for l in hyp)
        match_policy = "bbox_iou" if have_boxes else "order"
    return corpus.match_hypotheses(
        gt, hyp, corpus.MatchPolicy(match_policy), source=Path(hyp_path).name
    )


@click.group()
@click.option("-v", "--verbose", count=True, help="Increase log verbosity.")
def cli(verbose: int) -> None:
    """Line-level OCR evaluation and synthetic data toolkit."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(message)s")


@cli.command("ingest-alto")
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--out", help="Manifest output path (default: stdout).")
@click.option("--language", default="mixed", show_default=True)
@click.option("--keep-hyphen/--no-keep-hyphen", default=True, show_default=True,
              help="Append end-of-line hyphens to the line text.")
def ingest_alto(files, out, language, keep_hyphen) -> None:
    """Convert ALTO-XML FILES into a JSON-Lines manifest."""
    entries = []
    for file in files:
        entries.extend(corpus.parse_alto(file, keep_hyphen=keep_hyphen, language=language))
    manifest = corpus.DatasetManifest(
        entries=entries, metadata={"source": "alto", "files": ",".join(map(str, files))}
    )
    _write_output(corpus.manifest_to_jsonl(manifest), out)


def _charset_option():
    return click.option(
        "--charset",
        default="all-sami-special",
        show_default=True,
        help="Built-in charset name or path to a TOML charset file.",
    )


@cli.command("eval")
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True),
              help="Ground truth: tesstrain dir, manifest or ALTO file.")
@click.option("--hyp", "hyp_path", required=True, type=click.Path(exists=True),
              help="Hypotheses: tesstrain dir, manifest or ALTO file.")
@click.option("--match-policy", type=click.Choice(["bbox_iou", "order"]), default=None,
              help="GT/hypothesis pairing policy (default: bbox_iou when boxes exist, else order).")
@_charset_option()
@click.option("--lang-field/--no-lang-field", "group_by_language", default=True,
              show_default=True, help="Group metrics by the reference language tag.")
@click.option("--model-name", default="model", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "md", "csv"]), default="json",
              show_default=True)
@click.option("--out", help="Write the result here instead of stdout.")
def eval_cmd(gt_path, hyp_path, match_policy, charset, group_by_language, model_name, fmt, out):
    """Score hypothesis lines against ground truth (CER, WER, F1)."""
    pairs = _build_pairs(gt_path, hyp_path, match_policy)
    cs = metrics.resolve_charset(charset)
    result = metrics.evaluate(
        pairs, cs, group_by_language=group_by_language, model_name=model_name
    )
    if fmt == "json":
        _write_output(report.emit_report_json(result), out)
    else:
        comparison = report.Comparison(reports=[result])
        text = report.emit_markdown(comparison) if fmt == "md" else report.emit_csv(comparison)
        _write_output(text, out)


@cli.command("errors")
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True))
@click.option("--hyp", "hyp_path", required=True, type=click.Path(exists=True))
@click.option("--match-policy", type=click.Choice(["bbox_iou", "order"]), default=None)
@click.option("--top-n", default=10, show_default=True, help="Number of error rows.")
@click.option("--format", "fmt", type=click.Choice(["md", "csv", "json"]), default="md",
              show_default=True)
@click.option("--out", help="Write the result here instead of stdout.")
def errors_cmd(gt_path, hyp_path, match_policy, top_n, fmt, out):
    """Tabulate the most common error segments."""
    pairs = _build_pairs(gt_path, hyp_path, match_policy)
    rows = align_mod.tabulate_errors(pairs, top_n)
    if fmt == "csv":
        _write_output(align_mod.error_table_csv(rows), out)
    elif fmt == "json":
        payload = [
            {"ref": r.segment.ref_str, "hyp": r.segment.hyp_str,
             "n_e": r.n_e, "n_m": r.n_m, "n_c": r.n_c}
            for r in rows
        ]
        _write_output(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", out)
    else:
        _write_output(align_mod.error_table_markdown(rows), out)


@cli.command("synth")
@click.argument("corpus_files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="TOML config with fonts, colours, degradations, ...")
@click.option("--out", "output_dir", help="Output directory (overrides the config).")
@click.option("--seed", type=int, default=None, help="Master seed (overrides the config).")
@click.option("--max-len", default=200, show_default=True, help="Maximum line length in scalars.")
def synth_cmd(corpus_files, config_path, output_dir, seed, max_len):
    """Generate synthetic line images from plain-text corpus files."""
    overrides = {}
    if output_dir is not None:
        overrides["output_dir"] = Path(output_dir)
    if seed is not None:
        overrides["seed"] = seed
    cfg = synth.load_synth_config(config_path, **overrides)
    lines = synth.load_corpus_lines(corpus_files, max_len=max_len)
    manifest = synth.generate_dataset(lines, cfg)
    sys.stdout.write(json.dumps(manifest.metadata, indent=2, sort_keys=True) + "\n")


@cli.command("select")
@click.option("--reports", "report_paths", multiple=True, required=True,
              type=click.Path(exists=True), help="EvalReport JSON files.")
def select_cmd(report_paths):
    """Print the model with the lowest overall mean(CER, WER)."""
    candidates = {}
    for path in report_paths:
        r = report.parse_report_json(Path(path).read_text(encoding="utf-8"))
        candidates[r.model_name] = r.groups["overall"]
    click.echo(metrics.select_best(candidates))


@cli.command("report")
@click.option("--reports", "report_paths", multiple=True, required=True,
              type=click.Path(exists=True), help="EvalReport JSON files, in column order.")
@click.option("--baseline", default=None, help="Model name to treat as the baseline column.")
@click.option("--format", "fmt", type=click.Choice(["md", "csv", "json"]), default="md",
              show_default=True)
@click.option("--factors", is_flag=True, help="Also print baseline/model improvement factors.")
@click.option("--out", help="Write the result here instead of stdout.")
def report_cmd(report_paths, baseline, fmt, factors, out):
    """Render a multi-model comparison table."""
    reports = [
        report.parse_report_json(Path(p).read_text(encoding="utf-8")) for p in report_paths
    ]
    comparison = report.Comparison(reports=reports, baseline_name=baseline)
    if fmt == "md":
        text = report.emit_markdown(comparison)
    elif fmt == "csv":
        text = report.emit_csv(comparison)
    else:
        text = report.emit_json(comparison)
    if factors:
        values = report.improvement_factors(comparison)
        lines = [
            f"{model}\t{metric}\t{factor:.2f}" for (model, metric), factor in sorted(values.items())
        ]
        text += "\n".join(lines) + "\n"
    _write_output(text, out)


def run(argv: list[str]) -> int:
    """Run the CLI programmatically; returns the process exit code."""
    try:
        cli.main(args=list(argv), standalone_mode=False)
        return 0
    except click.UsageError as exc:
        sys.stderr.write(f"usage error: {exc.format_message()}\n")
        if exc.ctx is not None:
            sys.stderr.write(exc.ctx.get_help() + "\n")
        return 1
    except click.ClickException as exc:
        sys.stderr.write(f"error: {exc.format_message()}\n")
        return 1
    except click.exceptions.Abort:
        return 1
    except DataError as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return 2
    except OcrlineError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

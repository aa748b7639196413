"""Command-line entry points.

Exit codes for `validate`: 0 accepted, 1 NonXml, 2 MalformedXml,
3 IncompleteStructure, 4 UnsupportedNode, 64 usage error.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import datagen as datagen_mod
from . import metrics as metrics_mod
from . import swarm_sim
from .bt_model import CATEGORY_ORDER, default_whitelist, NodeWhitelist, parse_document
from .bt_runtime import TIMEOUT
from .pipeline import CommandInput, ExecutionStatus, PipelineConfig, Session

USAGE_ERROR = 64


def _load_config(path: str | None) -> PipelineConfig:
    path = path or os.environ.get("SWARMCOMMAND_CONFIG")
    if path:
        return PipelineConfig.from_file(path)
    return PipelineConfig()


@click.group()
def main():
    """CommandSwarm: language-to-behavior-tree pipeline and swarm simulator."""


@main.command()
@click.argument("xml_file")
@click.option("--whitelist", "whitelist_path", default=None,
              help="JSON whitelist config overriding the built-in one.")
def validate(xml_file, whitelist_path):
    """Validate a behavior-tree XML file against the whitelist."""
    path = Path(xml_file)
    if not path.is_file():
        click.echo(f"error: no such file: {xml_file}", err=True)
        sys.exit(USAGE_ERROR)
    whitelist = NodeWhitelist.from_file(whitelist_path) if whitelist_path else default_whitelist()
    report = parse_document(path.read_text(encoding="utf-8"), whitelist)
    if report.accepted:
        click.echo("Accepted")
        sys.exit(0)
    click.echo(f"Rejected: {report.category.value}")
    for diag in report.diagnostics:
        click.echo(f"  {diag.location}: {diag.message}")
    sys.exit(CATEGORY_ORDER.index(report.category) + 1)


@main.command()
@click.option("--scenario", "scenario_id", type=int, required=True)
@click.option("--tree", "tree_path", default=None, help="Behavior-tree XML file to execute.")
@click.option("--from-llm", "command_text", default=None,
              help="Run the full pipeline on this command instead of a tree file.")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--ticks", type=int, default=2000, show_default=True)
@click.option("--shots", type=click.IntRange(0, 2), default=0, show_default=True)
@click.option("--config", "config_path", default=None, help="Endpoint config JSON file.")
@click.option("--headless", is_flag=True, default=False,
              help="Accepted for compatibility; the CLI always runs headless.")
def run(scenario_id, tree_path, command_text, seed, ticks, shots, config_path, headless):
    """Execute a tree (or an LLM-generated one) in a screening scenario."""
    try:
        scenario = swarm_sim.load_scenario(scenario_id)
    except KeyError as exc:
        click.echo(f"error: {exc.args[0]}", err=True)
        sys.exit(USAGE_ERROR)
    if tree_path and command_text:
        click.echo("error: --tree and --from-llm are mutually exclusive", err=True)
        sys.exit(USAGE_ERROR)

    if command_text is not None:
        session = Session("cli", scenario_id=scenario_id, seed=seed,
                          config=_load_config(config_path))
        trace = session.handle_command(
            CommandInput(session_id="cli", raw_text=command_text), shots=shots
        )
        if trace.execution_status != ExecutionStatus.RUNNING:
            click.echo(json.dumps(trace.to_dict(), indent=2))
            click.echo("pipeline rejected the command; nothing executed", err=True)
            sys.exit(1)
        status = session.run_until_resolved(max_ticks=ticks)
        world = session.world
        used = world.tick
    else:
        tree = scenario.reference_tree
        if tree_path:
            text = Path(tree_path).read_text(encoding="utf-8")
            report = parse_document(text)
            if not report.accepted:
                click.echo(f"Rejected: {report.category.value}", err=True)
                for diag in report.diagnostics:
                    click.echo(f"  {diag.location}: {diag.message}", err=True)
                sys.exit(CATEGORY_ORDER.index(report.category) + 1)
            tree = report.tree
        status, used, world = swarm_sim.run_scenario(scenario, tree, seed=seed,
                                                     max_ticks=ticks)
        status = {  # align with pipeline execution-status vocabulary
            TIMEOUT: ExecutionStatus.TIMEOUT,
        }.get(status, ExecutionStatus.SUCCEEDED if status.name == "SUCCESS"
              else ExecutionStatus.FAILED)

    click.echo(f"scenario: {scenario_id} ({scenario.description})")
    click.echo(f"status: {status}")
    click.echo(f"ticks_used: {used}")
    click.echo(f"success_predicate: {scenario.success_predicate(world)}")
    click.echo(f"state_hash: {world.state_hash()}")


@main.command(name="eval")
@click.option("--corpus", "corpus_path", default=None, help="JSON-lines corpus of records.")
@click.option("--summary", "summary_path", default=None,
              help="Pre-aggregated report rows (JSON) to render as-is.")
@click.option("--group-by", default="model,shots", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["table", "json", "csv"]),
              default="table", show_default=True)
def eval_cmd(corpus_path, summary_path, group_by, fmt):
    """Score a corpus (BLEU, ROUGE-L, validity) and render the report grid."""
    if group_by != "model,shots":
        click.echo("error: only --group-by model,shots is supported", err=True)
        sys.exit(USAGE_ERROR)
    if (corpus_path is None) == (summary_path is None):
        click.echo("error: exactly one of --corpus/--summary is required", err=True)
        sys.exit(USAGE_ERROR)
    try:
        if summary_path:
            reports = metrics_mod.load_report_fixture(summary_path)
        else:
            records = metrics_mod.load_corpus(corpus_path)
            if not records:
                raise metrics_mod.CorpusError("corpus is empty")
            scored = [(r, metrics_mod.score_record(r)) for r in records]
            reports = metrics_mod.aggregate(scored)
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(metrics_mod.render_report(reports, fmt))


@main.command()
@click.option("--n", "n", type=int, required=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--out", "out_path", required=True)
@click.option("--force", is_flag=True, default=False)
@click.option("--bank", "bank_path", default=None, help="Template bank JSON file.")
def datagen(n, seed, out_path, force, bank_path):
    """Generate a synthetic instruction-tree corpus (JSON-lines)."""
    if Path(out_path).exists() and not force:
        click.echo(f"error: {out_path} exists; pass --force to overwrite", err=True)
        sys.exit(USAGE_ERROR)
    bank = datagen_mod.TemplateBank.from_file(bank_path) if bank_path else None
    pairs = datagen_mod.generate_corpus(n, seed, bank)
    datagen_mod.write_corpus(pairs, out_path)
    click.echo(f"wrote {len(pairs)} pairs to {out_path}")


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--config", "config_path", default=None)
def serve(port, host, config_path):
    """Start the HTTP/WebSocket API service."""
    import uvicorn

    from .service import create_app

    app = create_app(_load_config(config_path))
    click.echo(f"serving on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()

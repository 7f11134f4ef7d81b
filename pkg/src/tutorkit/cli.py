"""Command-line entry points: serve the API, fit and score response logs,
compute gains, run cohort simulations, and inspect banks and transcripts."""

from __future__ import annotations

import functools
import json

import click

from .bank import bank_report, bank_to_doc, bundled_bank, load_bank
from .errors import TutorKitError
from .gateway import GatewayConfig
from .irt import (
    CalibrationConfig,
    calibrate,
    compute_auc,
    learning_gain,
    params_from_doc,
    params_to_doc,
)
from .sim import (
    bundled_transcript_paths,
    log_predictions,
    read_interaction_log,
    run_cohort,
    transcript_stats,
)


def domain_errors(func):
    """Convert library errors into clean CLI failures (non-zero exit)."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except TutorKitError as exc:
            raise click.ClickException(str(exc))

    return wrapper


def _load_json(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def _resolve_item_params(path, concept):
    """Accept either a fitted-parameter document or a bank document; return
    the ItemParams list for the requested concept."""
    doc = _load_json(path)
    if isinstance(doc, list):
        bank = load_bank(doc)
        items = [ex.params for ex in bank.items_for(concept)]
        if not items:
            raise click.ClickException(f"bank has no items for concept {concept!r}")
        return items
    params = params_from_doc(doc)
    concepts = {
        row.get("concept") for row in doc["items"] if isinstance(row, dict)
    } - {None}
    if concepts:
        wanted = [
            params[row["item_id"]]
            for row in doc["items"]
            if row.get("concept") == concept
        ]
        if not wanted:
            raise click.ClickException(f"parameter document has no items for {concept!r}")
        return wanted
    raise click.ClickException(
        "parameter document has no concept labels; pass the bank document to --items instead"
    )


@click.group()
def main():
    """Personalized tutoring toolkit: diagnosis, selection, tutoring service."""


@main.command()
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON configuration file; environment and flags override it.")
@click.option("--host", default=None, help="Listen address.  [default: 127.0.0.1]")
@click.option("--port", default=None, type=int, help="Listen port.  [default: 8000]")
@click.option("--data-dir", default=None,
              help="Directory for event logs and snapshots.  [default: tutorkit-data]")
@click.option("--bank", "bank_path", default=None, help="Bank document (default: bundled).")
@click.option("--provider", default=None, type=click.Choice(["mock", "live"]),
              help="Override the gateway provider (default: env or mock).")
@click.option("--script", "script_path", default=None,
              help="Mock reply script (default: bundled demo script).")
@domain_errors
def serve(config_path, host, port, data_dir, bank_path, provider, script_path):
    """Run the tutoring service.

    Settings resolve weakest first: the configuration file, then gateway
    environment variables, then explicit flags.
    """
    import logging

    import uvicorn

    from .service import ServiceConfig, create_app

    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    file_doc = _load_json(config_path) if config_path else {}
    if not isinstance(file_doc, dict):
        raise click.ClickException("configuration file must hold a JSON object")
    host = host or file_doc.get("host") or "127.0.0.1"
    port = port if port is not None else int(file_doc.get("port", 8000))
    data_dir = data_dir or file_doc.get("data_dir") or "tutorkit-data"
    bank_path = bank_path or file_doc.get("bank")
    overrides = {}
    if provider:
        overrides["provider"] = provider
    if script_path:
        overrides["script_path"] = script_path
    gateway = GatewayConfig.from_env(file_doc.get("gateway"), **overrides)
    app = create_app(ServiceConfig(bank_source=bank_path, data_dir=data_dir, gateway=gateway))
    click.echo(f"serving on http://{host}:{port} (provider: {gateway.provider})")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.argument("log", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False),
              help="Where to write the fitted-parameter document.")
@click.option("--max-iterations", default=500, show_default=True, type=int)
@click.option("--tolerance", default=1e-5, show_default=True, type=float)
@click.option("--no-priors", is_flag=True, help="Fit by plain maximum likelihood.")
@domain_errors
def fit(log, out_path, max_iterations, tolerance, no_priors):
    """Calibrate item parameters from an interaction log."""
    records = read_interaction_log(log)
    config = CalibrationConfig(
        max_iterations=max_iterations, tolerance=tolerance, use_priors=not no_priors
    )
    result = calibrate(records, config)
    doc = params_to_doc(
        result.item_params,
        {"seed": config.seed, "iterations": result.iterations, "converged": result.converged},
    )
    with open(out_path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=2)
        handle.write("\n")
    click.echo(f"records:            {len(records)}")
    click.echo(f"items fitted:       {len(result.item_params)}")
    click.echo(f"students fitted:    {len(result.student_abilities)}")
    click.echo(f"iterations:         {result.iterations}")
    click.echo(f"converged:          {result.converged}")
    click.echo(f"final objective:    {result.final_neg_log_posterior:.4f}")
    click.echo(f"parameters written: {out_path}")


@main.command()
@click.argument("params", type=click.Path(exists=True, dir_okay=False))
@click.argument("log", type=click.Path(exists=True, dir_okay=False))
@domain_errors
def auc(params, log):
    """Score a response log under fitted parameters and report ROC AUC.

    Student abilities are re-estimated from the log itself; each response is
    then predicted from its item's fitted parameters.
    """
    doc = _load_json(params)
    if isinstance(doc, list):
        item_params = {ex.item_id: ex.params for ex in load_bank(doc).exercises}
    else:
        item_params = params_from_doc(doc)
    records = read_interaction_log(log)
    predictions, outcomes = log_predictions(records, item_params)
    value = compute_auc(predictions, outcomes)
    click.echo(f"records: {len(records)}")
    click.echo(f"auc:     {value:.4f}")


@main.command()
@click.option("--pre", "theta_pre", required=True, type=float, help="Pre-test ability.")
@click.option("--post", "theta_post", required=True, type=float, help="Post-test ability.")
@click.option("--items", "items_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Bank document, or a fitted-parameter document with concept labels.")
@click.option("--concept", required=True, help="Concept whose items to average over.")
@domain_errors
def gain(theta_pre, theta_post, items_path, concept):
    """Learning gain: change in expected correctness over a concept's items."""
    items = _resolve_item_params(items_path, concept)
    value = learning_gain(theta_pre, theta_post, items)
    click.echo(f"concept: {concept} ({len(items)} items)")
    click.echo(f"gain:    {value:.6f}")


@main.command()
@click.option("--n", "n_students", required=True, type=int, help="Cohort size.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--bank", "bank_path", default=None, help="Bank document (default: bundled).")
@click.option("--params", "params_path", default=None,
              help="Fitted-parameter document (default: the bank's own parameters).")
@click.option("--selection", default="estimated", show_default=True,
              type=click.Choice(["estimated", "oracle", "random"]))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="Write the full cohort report as JSON.")
@domain_errors
def simulate(n_students, seed, bank_path, params_path, selection, out_path):
    """Run a synthetic cohort through diagnosis, selection, and tests."""
    bank = load_bank(bank_path) if bank_path else bundled_bank()
    params = params_from_doc(_load_json(params_path)) if params_path else None
    report = run_cohort(n_students, bank, params, seed=seed, selection=selection)
    click.echo(f"students:                     {report.n_students}")
    click.echo(f"seed:                         {report.seed}")
    click.echo(f"selection policy:             {report.selection}")
    click.echo(
        "first-response correctness:   "
        f"{report.correctness_ratio_first_response:.4f}"
    )
    click.echo(f"theta recovery rmse:          {report.theta_recovery_rmse:.4f}")
    for concept, value in report.mean_gain.items():
        click.echo(f"mean gain ({concept + '):':<15}{value:+.4f}")
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            json.dump(report.to_doc(), handle, indent=2)
            handle.write("\n")
        click.echo(f"report written:               {out_path}")


@main.command()
@click.argument("transcripts", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@domain_errors
def stats(transcripts):
    """Dialogue and word statistics over event-log transcripts.

    With no arguments, reports on the transcripts bundled with the package.
    """
    paths = list(transcripts) or [str(p) for p in bundled_transcript_paths()]
    result = transcript_stats(paths)
    click.echo(f"transcript files:              {len(paths)}")
    click.echo(f"dialogues:                     {result.dialogues}")
    click.echo(f"total turns:                   {result.total_turns}")
    click.echo(f"avg. turns per dialogue:       {result.avg_turns_per_dialogue:.2f}")
    click.echo(f"avg. words per tutor turn:     {result.avg_words_tutor:.2f}")
    click.echo(f"avg. words per student turn:   {result.avg_words_student:.2f}")


@main.command(name="validate-bank")
@click.argument("bank_path", required=False,
                type=click.Path(exists=True, dir_okay=False))
@domain_errors
def validate_bank(bank_path):
    """Load a bank document, check its invariants, and print coverage."""
    bank = load_bank(bank_path) if bank_path else bundled_bank()
    report = bank_report(bank)
    click.echo(f"items: {report['total_items']}")
    for concept, row in report["concepts"].items():
        roles = ", ".join(f"{role} {count}" for role, count in row["roles"].items())
        lo, hi = row["difficulty_range"]
        click.echo(f"  {concept}: {row['items']} items ({roles}); difficulty {lo} to {hi}")
    click.echo("bank is valid")


if __name__ == "__main__":
    main()

"""Operator CLI: validate configs, replay scenarios, serve, inspect traces."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from agoranet.bus import TraceAction, TraceLog
from agoranet.errors import AgoranetError
from agoranet.kb import KnowledgeBase
from agoranet.runtime import Network
from agoranet.scenario import (
    assert_expectations,
    load_scenario,
    run_scenario,
    shipped_scenario_path,
)
from agoranet.topology import parse_topology, validate_topology, validation_errors


@click.group()
def main():
    """Deterministic hierarchical multi-agent runtime."""


@main.command()
@click.argument("config", type=click.Path(exists=True, path_type=Path))
def validate(config: Path):
    """Parse and validate a topology document; exit nonzero on error."""
    try:
        cfg = parse_topology(config.read_text())
    except AgoranetError as exc:
        click.echo(json.dumps({"errors": [exc.as_dict()]}, indent=2))
        sys.exit(1)
    errors = validation_errors(cfg)
    if errors:
        click.echo(json.dumps({"errors": [e.as_dict() for e in errors]}, indent=2))
        sys.exit(1)
    topo = validate_topology(cfg)
    for warning in cfg.warnings:
        click.echo(f"warning: {warning}", err=True)
    agents = sorted(n.name for n in topo.agents())
    click.echo(json.dumps({
        "ok": True,
        "facilitators": topo.root_facilitators,
        "agents": agents,
        "nodes": len(topo.nodes),
    }, indent=2))


def _resolve_scenario(name_or_path: str) -> Path:
    path = Path(name_or_path)
    if path.exists():
        return path
    return shipped_scenario_path(name_or_path)


@main.command()
@click.argument("scenario")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trace", "trace_out", type=click.Path(path_type=Path),
              help="Write the trace as JSON lines.")
def run(scenario: str, seed: int, trace_out: Path | None):
    """Run a scenario (by path or shipped name) and check its expectations."""
    try:
        scn = load_scenario(_resolve_scenario(scenario))
        result = run_scenario(scn, seed=seed)
    except AgoranetError as exc:
        click.echo(json.dumps({"errors": [exc.as_dict()]}, indent=2))
        sys.exit(1)
    for event in result.transcript:
        click.echo(f"[{event['kind']}] {event['text']}")
    report = assert_expectations(result)
    failed = 0
    for res in report:
        click.echo(res.line())
        failed += 0 if res.ok else 1
    if trace_out:
        trace_out.write_text(result.trace.to_jsonl() + "\n")
        click.echo(f"trace written to {trace_out}")
    if failed:
        sys.exit(1)


@main.command()
@click.argument("config", type=click.Path(exists=True, path_type=Path))
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--kb", "kb_path", type=click.Path(exists=True, path_type=Path),
              help="Knowledge base (JSON lines).")
def serve(config: Path, port: int, host: str, kb_path: Path | None):
    """Serve the gateway for a topology."""
    import uvicorn

    from agoranet.gateway import create_app

    cfg = parse_topology(config.read_text())
    kb = KnowledgeBase.from_jsonl(kb_path.read_text()) if kb_path else KnowledgeBase()
    app = create_app(cfg, kb=kb)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.argument("trace_file", type=click.Path(exists=True, path_type=Path))
@click.option("--request", "request_id", required=True)
def trace(trace_file: Path, request_id: str):
    """Print the agents involved in a request and its stage sequence."""
    records = TraceLog.parse_jsonl(trace_file.read_text())
    matching = [r for r in records if r.request_id == request_id]
    if not matching:
        click.echo(json.dumps({"errors": [{"code": "UnknownRequest",
                                           "detail": request_id}]}))
        sys.exit(1)
    agents = sorted({r.actor for r in matching})
    stages = [int(r.detail) for r in matching
              if r.action == TraceAction.STAGE_ENTERED]
    click.echo(json.dumps({
        "request_id": request_id,
        "agents_involved": agents,
        "stage_sequence": stages,
        "records": len(matching),
    }, indent=2))


@main.command()
@click.argument("config", type=click.Path(exists=True, path_type=Path))
@click.option("--kb", "kb_path", type=click.Path(exists=True, path_type=Path))
@click.option("--division", default=None, help="Shortcut for attrs.division.")
def repl(config: Path, kb_path: Path | None, division: str | None):
    """Chat with a local session; integration prompts are answered inline."""
    cfg = parse_topology(config.read_text())
    topo = validate_topology(cfg)
    kb = KnowledgeBase.from_jsonl(kb_path.read_text()) if kb_path else KnowledgeBase()
    attrs = {"division": division} if division else {}

    pending_prompts: list[str] = []

    def on_event(event: dict):
        kind = event["kind"]
        if kind == "user":
            return
        if kind == "prompt":
            pending_prompts.append(event["request_id"])
        click.echo(f"<{kind}> {event['text']}")

    from agoranet.gateway import DEFAULT_TEMPLATES

    network = Network(cfg=cfg, topology=topo, kb=kb, attrs=attrs,
                      templates=DEFAULT_TEMPLATES, emit=on_event)
    click.echo("type a message, or press Ctrl-D to leave")
    while True:
        try:
            line = click.prompt("you", prompt_suffix="> ")
        except (click.Abort, EOFError):
            click.echo("bye")
            return
        if not line.strip():
            continue
        network.post_user_message(line)
        network.drain(pause_on_prompt=True)
        while pending_prompts:
            rid = pending_prompts.pop(0)
            try:
                reply = click.prompt("details", prompt_suffix="> ")
            except (click.Abort, EOFError):
                break
            network.answer_integration(rid, reply)
            network.drain(pause_on_prompt=True)


if __name__ == "__main__":
    main()

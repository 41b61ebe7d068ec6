"""Command line front door.

    tradespace serve    run the HTTP API
    tradespace report   render figures + scores.csv for a stored session
    tradespace export   dump a stored session as portable JSON
    tradespace vectors  write the shared geometry test vectors
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__
from .errors import TradespaceError
from .serialize import dumps, loads
from .service.config import AppConfig, PersistenceConfig, load_config


@click.group()
@click.version_option(version=__version__, prog_name="tradespace")
def cli() -> None:
    """Interactive exploration of research-idea trade-off spaces."""


def _load_app_config(config_path: str | None, provider: str | None, port: int | None,
                     data_dir: str | None) -> AppConfig:
    config = load_config(config_path)
    if provider is not None:
        config.provider.name = provider
    if port is not None:
        config.server.port = port
    if data_dir is not None:
        config.persistence = PersistenceConfig(
            dir=Path(data_dir),
            snapshot_interval=config.persistence.snapshot_interval,
        )
    return config


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="YAML config file.")
@click.option("--provider", type=click.Choice(["stub", "live"]), default=None,
              help="Override the configured completion provider.")
@click.option("--port", type=int, default=None, help="Override the configured port.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", default=None, help="Override the persistence directory.")
def serve(config_path: str | None, provider: str | None, port: int | None,
          host: str, data_dir: str | None) -> None:
    """Run the session API server."""
    import uvicorn

    from .service.app import create_app

    config = _load_app_config(config_path, provider, port, data_dir)
    app = create_app(config)
    uvicorn.run(app, host=host, port=config.server.port, log_level="warning")


def _load_session(data_dir: str | None, export_path: str | None, session_id: str | None):
    from .service.store import SessionStore

    if export_path is not None:
        return loads(Path(export_path).read_text(encoding="utf-8"))
    if session_id is None:
        raise click.UsageError("pass SESSION_ID (with --data-dir) or --from-export")
    store = SessionStore(Path(data_dir or "data"))
    try:
        return store.get_session(session_id)
    except TradespaceError as exc:
        known = store.list_session_ids()
        hint = f" (stored sessions: {', '.join(known)})" if known else ""
        raise click.ClickException(f"{exc}{hint}") from exc


@cli.command()
@click.argument("session_id", required=False)
@click.option("--data-dir", default="data", show_default=True,
              help="Persistence directory holding the session.")
@click.option("--from-export", "export_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Render from an exported session JSON instead of a data dir.")
@click.option("--out", "out_dir", default="report", show_default=True,
              help="Directory for space.png, tree.png, scores.csv.")
def report(session_id: str | None, data_dir: str, export_path: str | None,
           out_dir: str) -> None:
    """Render the trade-off space and provenance figures plus a score table."""
    from .report import render_report

    session = _load_session(data_dir, export_path, session_id)
    paths = render_report(session, out_dir)
    for name in ("space", "tree", "scores"):
        click.echo(f"{name}: {paths[name]}")


@cli.command()
@click.argument("session_id", required=False)
@click.option("--data-dir", default="data", show_default=True)
@click.option("--from-export", "export_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Re-export an existing export file (normalizes formatting).")
@click.option("--out", "out_path", default=None,
              help="Output file; defaults to stdout.")
def export(session_id: str | None, data_dir: str, export_path: str | None,
           out_path: str | None) -> None:
    """Write a session as portable JSON."""
    session = _load_session(data_dir, export_path, session_id)
    text = dumps(session)
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_path}")


@cli.command()
@click.option("--out", "out_path", default="geometry_vectors.json", show_default=True)
@click.option("--seed", type=int, default=None, help="RNG seed (fixed default).")
@click.option("--drag-count", type=int, default=None,
              help="Number of drag-projection cases.")
def vectors(out_path: str, seed: int | None, drag_count: int | None) -> None:
    """Write seeded geometry test vectors for cross-implementation checks."""
    from .vectors import DEFAULT_DRAG_COUNT, DEFAULT_SEED, write_vectors

    path = write_vectors(
        out_path,
        seed=DEFAULT_SEED if seed is None else seed,
        drag_count=DEFAULT_DRAG_COUNT if drag_count is None else drag_count,
    )
    click.echo(f"wrote {path}")


def main() -> None:
    try:
        cli(standalone_mode=True)
    except TradespaceError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()

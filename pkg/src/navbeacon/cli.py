"""Command-line entry points: serve, replay, bench-cluster, stub-models."""

from __future__ import annotations

import json
import random
import sys
import time

import click

from .clustering import ClusterParams, PointerSample, sequential_cluster
from .config import ConfigError, load_config
from .geometry import Vec3


@click.group()
def main() -> None:
    """Point-and-speak navigation beacon service."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON config file; NAVBEACON_* env vars override fields.")
def serve(config_path: str | None) -> None:
    """Run the operator service (and the embedded robot simulator)."""
    from .service import run_service

    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    run_service(cfg)


@main.command("replay")
@click.option("--session", "session_path", type=click.Path(exists=True), required=True)
@click.option("--ground-truth", "ground_truth_path", type=click.Path(exists=True), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--store-dir", default=None,
              help="World state at session start; defaults to the config's store_dir.")
@click.option("--timings", is_flag=True,
              help="Also report fresh wall-clock stage timings (non-deterministic).")
def replay_cmd(session_path: str, ground_truth_path: str | None,
               config_path: str | None, store_dir: str | None, timings: bool) -> None:
    """Re-run a session log and print the metrics report as JSON."""
    from .events import SessionLogError
    from .replay import load_ground_truth, replay

    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    truth = load_ground_truth(ground_truth_path) if ground_truth_path else None
    try:
        result = replay(session_path, cfg, ground_truth=truth,
                        measure=timings, store_dir=store_dir)
    except (SessionLogError, ValueError) as exc:
        raise click.ClickException(str(exc))
    click.echo(result.report.to_json())


@main.command("bench-cluster")
@click.option("--points", "n_points", type=int, default=10000, show_default=True)
@click.option("--d-th", type=float, default=0.15, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def bench_cluster(n_points: int, d_th: float, seed: int) -> None:
    """Time the sequential clustering pass over a synthetic pointer stream."""
    rng = random.Random(seed)
    x = y = 0.0
    samples = []
    for i in range(n_points):
        x += rng.uniform(-0.05, 0.05)
        y += rng.uniform(-0.05, 0.05)
        if i % 300 == 299:  # occasional jump to a new dwell area
            x += rng.uniform(1.0, 2.0)
        samples.append(PointerSample(i * 0.1, Vec3(x, y, 0.0)))

    params = ClusterParams(d_th=d_th)
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        clusters = sequential_cluster(samples, params)
        best = min(best, time.perf_counter() - t0)
    click.echo(json.dumps({
        "points": n_points,
        "clusters": len(clusters),
        "best_ms": round(best * 1000.0, 3),
    }))


@main.command("stub-models")
@click.option("--port", type=int, default=9100, show_default=True)
@click.option("--stt-text", default="", help="Canned transcript for POST /stt.")
def stub_models(port: int, stt_text: str) -> None:
    """Run the canned STT/LLM backend (useful for console development)."""
    from http.server import ThreadingHTTPServer

    from .stub_backend import StubModelServer

    stub = StubModelServer(stt_text=stt_text)
    # rebind to the requested port instead of an ephemeral one
    stub._server.server_close()
    stub._server = ThreadingHTTPServer(("127.0.0.1", port), stub._make_handler())
    click.echo(f"stub model server on {stub.base_url} (stt={stub.stt_url}, llm={stub.llm_url})")
    try:
        stub._server.serve_forever()
    except KeyboardInterrupt:
        sys.exit(0)


if __name__ == "__main__":
    main()

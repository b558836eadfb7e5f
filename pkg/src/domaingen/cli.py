"""Command-line front end: generate, eval, sweep, serve.

Exit codes: 0 success, 1 usage or input error, 2 generation failure
(exhausted retries, provider/transport errors). Configuration precedence is
flags > environment variables (DOMAINGEN_*) > config file.
"""

from __future__ import annotations

import json
import os
import socket
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import evalharness
from .evalharness import EvalRow, aggregate, evaluate, format_table, load_dataset, rows_to_dict
from .exporters import import_canonical
from .llm import (
    ExhaustedRetries,
    LiveProvider,
    Provider,
    ProviderError,
    RecordingProvider,
    ReplayMiss,
    ReplayProvider,
    TranscriptStore,
)
from .pipeline import (
    ClassMode,
    OverallMode,
    PipelineConfig,
    RelMode,
    run,
    write_run_artifacts,
)

ENV_PREFIX = "DOMAINGEN_"


class GenerationFailure(Exception):
    """Wraps run-time generation errors so main() can map them to exit code 2."""


def _setting(flag_value: str | None, env_key: str, config: dict, config_key: str, default: str = "") -> str:
    if flag_value:
        return flag_value
    env = os.environ.get(ENV_PREFIX + env_key)
    if env:
        return env
    return str(config.get(config_key, default) or default)


def _load_config_file(path: str | None) -> dict:
    candidate = path or os.environ.get(ENV_PREFIX + "CONFIG")
    if not candidate:
        return {}
    try:
        return json.loads(Path(candidate).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config file {candidate}: {exc}")


def _build_provider(
    provider_kind: str,
    transcripts: str | None,
    endpoint: str,
    api_key: str,
    timeout: float,
) -> Provider:
    if provider_kind == "replay":
        if not transcripts:
            raise click.UsageError("--provider replay requires --transcripts")
        return ReplayProvider(TranscriptStore(transcripts))
    if not endpoint:
        raise click.UsageError(
            "a live endpoint is required (flag --endpoint, env DOMAINGEN_ENDPOINT, or config file)"
        )
    live = LiveProvider(endpoint, api_key=api_key, timeout=timeout)
    if provider_kind == "record":
        if not transcripts:
            raise click.UsageError("--provider record requires --transcripts")
        return RecordingProvider(live, TranscriptStore(transcripts))
    return live


def _parse_temps(spec: str | None) -> dict[str, float]:
    temps: dict[str, float] = {}
    if not spec:
        return temps
    for part in spec.split(","):
        if not part.strip():
            continue
        try:
            key, value = part.split("=")
            temps[key.strip()] = float(value)
        except ValueError:
            raise click.UsageError(f"bad --temps entry {part!r}; expected name=value")
        if key.strip() not in ("class", "assoc", "inherit"):
            raise click.UsageError(f"unknown temperature name {key.strip()!r}")
    return temps


@click.group()
def cli() -> None:
    """Generate, review, and score object-oriented domain models."""


_provider_opts = [
    click.option("--provider", "provider_kind", type=click.Choice(["live", "replay", "record"]), default="live", show_default=True),
    click.option("--transcripts", type=click.Path(), default=None, help="Transcript store file (replay input / record output)."),
    click.option("--endpoint", default=None, help="Chat-completions endpoint URL."),
    click.option("--api-key", default=None),
    click.option("--model", "model_name", default=None, help="Model name sent with each request."),
    click.option("--timeout", type=float, default=None, help="Request timeout in seconds."),
    click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file."),
]


def provider_options(fn):
    for opt in reversed(_provider_opts):
        fn = opt(fn)
    return fn


def _resolve_provider_settings(config_path, endpoint, api_key, model_name, timeout):
    config = _load_config_file(config_path)
    endpoint = _setting(endpoint, "ENDPOINT", config, "endpoint")
    api_key = _setting(api_key, "API_KEY", config, "api_key")
    model_name = _setting(model_name, "MODEL", config, "model", "gpt-3.5-turbo")
    timeout_s = _setting(str(timeout) if timeout else None, "TIMEOUT", config, "timeout", "60")
    return endpoint, api_key, model_name, float(timeout_s)


@cli.command()
@click.option("--desc", "desc_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--mode", type=click.Choice(["decomposed", "baseline"]), default="decomposed", show_default=True)
@click.option("--class-mode", type=click.Choice(["two-turn", "single-turn"]), default="two-turn", show_default=True)
@click.option("--rel-mode", type=click.Choice(["split", "combined"]), default="split", show_default=True)
@click.option("--temps", default=None, help="Per-task temperatures, e.g. class=0.4,assoc=0.9,inherit=0.8.")
@click.option("--runs", type=int, default=1, show_default=True)
@click.option("--max-attempts", type=int, default=3, show_default=True)
@click.option("--seed", default="", help="Opaque run id recorded in element provenance.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Parallel runs.")
@provider_options
def generate(desc_path, out_dir, mode, class_mode, rel_mode, temps, runs, max_attempts,
             seed, jobs, provider_kind, transcripts, endpoint, api_key, model_name,
             timeout, config_path):
    """Run the generation pipeline and write per-run artifact directories."""
    endpoint, api_key, model_name, timeout_s = _resolve_provider_settings(
        config_path, endpoint, api_key, model_name, timeout
    )
    provider = _build_provider(provider_kind, transcripts, endpoint, api_key, timeout_s)
    description = Path(desc_path).read_text(encoding="utf-8")
    temp_map = _parse_temps(temps)
    config = PipelineConfig(
        temp_class=temp_map.get("class", 0.4),
        temp_assoc=temp_map.get("assoc", 0.9),
        temp_inherit=temp_map.get("inherit", 0.8),
        class_mode=ClassMode.TWO_TURN if class_mode == "two-turn" else ClassMode.SINGLE_TURN,
        rel_mode=RelMode.SPLIT if rel_mode == "split" else RelMode.COMBINED,
        overall_mode=OverallMode.DECOMPOSED if mode == "decomposed" else OverallMode.BASELINE_ZERO_SHOT,
        max_attempts=max_attempts,
        model_name=model_name,
        run_seed=seed,
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def one_run(index: int) -> Path:
        artifacts = run(description, config, provider)
        return write_run_artifacts(artifacts, out / f"run-{index:03d}")

    try:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                for path in pool.map(one_run, range(runs)):
                    click.echo(f"wrote {path}")
        else:
            for index in range(runs):
                click.echo(f"wrote {one_run(index)}")
    except (ExhaustedRetries, ProviderError, ReplayMiss) as exc:
        partial = getattr(exc, "artifacts", None)
        if partial is not None:
            failed_dir = write_run_artifacts(partial, out / "run-failed")
            click.echo(f"wrote partial artifacts to {failed_dir}", err=True)
        raise GenerationFailure(str(exc)) from exc


def _load_generated_models(path: Path) -> list[tuple[str, object]]:
    if path.is_file():
        return [(path.stem, import_canonical(path.read_text(encoding="utf-8")))]
    models = []
    for file in sorted(path.rglob("*.model.json")) + sorted(path.rglob("model.json")):
        models.append((str(file.relative_to(path)), import_canonical(file.read_text(encoding="utf-8"))))
    return models


@cli.command("eval")
@click.option("--generated", "generated_path", type=click.Path(exists=True), required=True,
              help="A model file, a directory of runs, or (with --batch) a runs root with one directory per system.")
@click.option("--oracle", "oracle_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--batch", "dataset_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Dataset directory; evaluates every system against its oracle.")
@click.option("--json", "json_path", type=click.Path(), default=None, help="Also write the report as JSON.")
@click.option("--include-enums/--exclude-enums", default=True, show_default=True)
def eval_cmd(generated_path, oracle_path, dataset_dir, json_path, include_enums):
    """Score generated models against oracle models and print a metrics table."""
    rows: list[EvalRow] = []
    generated = Path(generated_path)
    if dataset_dir:
        cases = load_dataset(dataset_dir)
        per_system = []
        for case in cases:
            system_dir = generated / case.system_id
            if not system_dir.exists():
                raise click.UsageError(f"no generated models for system {case.system_id} under {generated}")
            models = _load_generated_models(system_dir)
            if not models:
                raise click.UsageError(f"no model files under {system_dir}")
            reports = [evaluate(m, case.oracle, include_enums=include_enums) for _, m in models]
            per_system.append(aggregate(reports))
            rows.append(EvalRow(case.system_id, per_system[-1]))
        rows.append(EvalRow("mean", aggregate(per_system)))
    else:
        if not oracle_path:
            raise click.UsageError("--oracle is required unless --batch is given")
        oracle = import_canonical(Path(oracle_path).read_text(encoding="utf-8"))
        models = _load_generated_models(generated)
        if not models:
            raise click.UsageError(f"no model files under {generated}")
        reports = []
        for label, model in models:
            reports.append(evaluate(model, oracle, include_enums=include_enums))
            rows.append(EvalRow(label, reports[-1]))
        if len(reports) > 1:
            rows.append(EvalRow("mean", aggregate(reports)))
    click.echo(format_table(rows))
    if json_path:
        Path(json_path).write_text(
            json.dumps(rows_to_dict(rows), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def _parse_grid(spec: str) -> tuple[float, ...]:
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise click.UsageError(f"bad --grid {spec!r}; expected start:stop:step")
    if step <= 0 or stop < start:
        raise click.UsageError(f"bad --grid {spec!r}")
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 6) for i in range(count))


@cli.command()
@click.option("--dataset", "dataset_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--grid", default="0.1:1.0:0.1", show_default=True)
@click.option("--runs-per-point", type=int, default=1, show_default=True)
@click.option("--task", type=click.Choice(["class", "assoc", "inherit", "all"]), default="all", show_default=True)
@click.option("--json", "json_path", type=click.Path(), default=None)
@provider_options
def sweep(dataset_dir, grid, runs_per_point, task, json_path, provider_kind, transcripts,
          endpoint, api_key, model_name, timeout, config_path):
    """Measure per-task F1 across a temperature grid and report the best setting."""
    endpoint, api_key, model_name, timeout_s = _resolve_provider_settings(
        config_path, endpoint, api_key, model_name, timeout
    )
    provider = _build_provider(provider_kind, transcripts, endpoint, api_key, timeout_s)
    cases = load_dataset(dataset_dir)
    tasks = evalharness.SWEEP_TASKS if task == "all" else (task,)
    config = PipelineConfig(model_name=model_name)
    result = evalharness.sweep(
        cases, provider, grid=_parse_grid(grid), runs_per_point=runs_per_point,
        tasks=tasks, config=config,
    )
    succeeded = 0
    for point in result.points:
        if point.metrics is not None:
            succeeded += 1
            category = evalharness._PRIMARY_CATEGORY[point.task]
            f1 = point.metrics.categories[category].f1
            click.echo(f"task={point.task} temp={point.temperature:.1f} f1={f1:.3f}")
        else:
            click.echo(f"task={point.task} temp={point.temperature:.1f} error={point.error}", err=True)
    for swept_task in tasks:
        if swept_task in result.best:
            click.echo(f"best temperature for {swept_task}: {result.best[swept_task]:.1f}")
    if json_path:
        doc = {
            "points": [
                {
                    "task": p.task,
                    "temperature": p.temperature,
                    "metrics": p.metrics.to_dict() if p.metrics else None,
                    "error": p.error,
                }
                for p in result.points
            ],
            "best": result.best,
        }
        Path(json_path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if succeeded == 0:
        raise GenerationFailure("every sweep point failed")


@cli.command()
@click.option("--port", type=int, required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", type=click.Path(file_okay=False), required=True)
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None,
              help="Directory of built UI assets to serve under /ui.")
@provider_options
def serve(port, host, data_dir, ui_dir, provider_kind, transcripts, endpoint, api_key,
          model_name, timeout, config_path):
    """Start the review service (and the review UI when assets are built)."""
    import uvicorn

    from .review import create_app

    endpoint, api_key, model_name, timeout_s = _resolve_provider_settings(
        config_path, endpoint, api_key, model_name, timeout
    )
    provider: Provider | None = None
    if provider_kind == "replay" or transcripts or endpoint:
        provider = _build_provider(provider_kind, transcripts, endpoint, api_key, timeout_s)

    # Probe the port up front so a bind failure is a clean exit 1.
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise click.UsageError(f"cannot bind {host}:{port}: {exc}")
    finally:
        probe.close()

    app = create_app(
        data_dir,
        provider=provider,
        base_config=PipelineConfig(model_name=model_name),
        ui_dir=ui_dir,
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except GenerationFailure as exc:
        click.echo(f"generation failed: {exc}", err=True)
        return 2
    except (ExhaustedRetries, ProviderError, ReplayMiss) as exc:
        click.echo(f"generation failed: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

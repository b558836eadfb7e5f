#!/usr/bin/env python3
"""Sweep per-task temperatures over a dataset and report the best settings.

Relationship tasks are fed the oracle class names so class-generation quality
does not influence the measurement.

Usage:
    python3 scripts/run_temperature_sweep.py --dataset data/systems \
        --runs-per-point 50 --endpoint $DOMAINGEN_ENDPOINT --model gpt-3.5-turbo \
        --json results/sweep.json
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from domaingen.evalharness import DEFAULT_GRID, SWEEP_TASKS, load_dataset, sweep
from domaingen.llm import LiveProvider
from domaingen.pipeline import PipelineConfig


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset", required=True)
    parser.add_argument("--runs-per-point", type=int, default=50)
    parser.add_argument("--endpoint", required=True)
    parser.add_argument("--api-key", default="")
    parser.add_argument("--model", default="gpt-3.5-turbo")
    parser.add_argument("--json", dest="json_path", default=None)
    args = parser.parse_args()

    provider = LiveProvider(args.endpoint, api_key=args.api_key)
    result = sweep(
        load_dataset(args.dataset),
        provider,
        grid=DEFAULT_GRID,
        runs_per_point=args.runs_per_point,
        tasks=SWEEP_TASKS,
        config=PipelineConfig(model_name=args.model),
    )
    for point in result.points:
        if point.metrics is None:
            print(f"{point.task} @ {point.temperature:.1f}: ERROR {point.error}")
        else:
            summary = ", ".join(
                f"{name}={point.metrics.categories[name].f1:.3f}"
                for name in ("class", "attribute", "inheritance", "association")
            )
            print(f"{point.task} @ {point.temperature:.1f}: {summary}")
    for task, temperature in result.best.items():
        print(f"best temperature for {task}: {temperature:.1f}")

    if args.json_path:
        doc = {
            "best": result.best,
            "points": [
                {
                    "task": p.task,
                    "temperature": p.temperature,
                    "metrics": p.metrics.to_dict() if p.metrics else None,
                    "error": p.error,
                }
                for p in result.points
            ],
        }
        Path(args.json_path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()

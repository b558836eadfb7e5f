#!/usr/bin/env python3
"""Compare decomposed generation against the single-prompt baseline on a dataset.

For every system in the dataset, both modes run N times against a live (or
recording) provider; the script prints one averaged report row per mode and
writes the structured results next to the run artifacts.

Usage:
    python3 scripts/run_overall_comparison.py --dataset data/systems \
        --out results/exp1 --runs 50 --endpoint $DOMAINGEN_ENDPOINT \
        --api-key $DOMAINGEN_API_KEY --model gpt-3.5-turbo
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from domaingen.evalharness import EvalRow, aggregate, evaluate, format_table, load_dataset, rows_to_dict
from domaingen.llm import LiveProvider, RecordingProvider, TranscriptStore
from domaingen.pipeline import OverallMode, PipelineConfig, run, write_run_artifacts


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--runs", type=int, default=50)
    parser.add_argument("--endpoint", required=True)
    parser.add_argument("--api-key", default="")
    parser.add_argument("--model", default="gpt-3.5-turbo")
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cases = load_dataset(args.dataset)

    rows = []
    for mode in (OverallMode.DECOMPOSED, OverallMode.BASELINE_ZERO_SHOT):
        per_run = []
        for case in cases:
            for index in range(args.runs):
                run_dir = out / mode.value / case.system_id / f"run-{index:03d}"
                store = TranscriptStore(run_dir.parent / "transcripts.ndjson")
                provider = RecordingProvider(
                    LiveProvider(args.endpoint, api_key=args.api_key), store
                )
                config = PipelineConfig(
                    overall_mode=mode, model_name=args.model, run_seed=f"{case.system_id}-{index}"
                )
                artifacts = run(case.description, config, provider)
                write_run_artifacts(artifacts, run_dir)
                per_run.append(evaluate(artifacts.model, case.oracle))
                print(f"{mode.value} {case.system_id} run {index}: done")
        rows.append(EvalRow(mode.value, aggregate(per_run)))

    print(format_table(rows))
    (out / "report.json").write_text(
        json.dumps(rows_to_dict(rows), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


if __name__ == "__main__":
    main()

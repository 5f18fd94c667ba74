"""Command-line entry point for the eigenvalue-sampling pipeline."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .pipeline import STAGES, PipelineError, run_pipeline, run_stage
from .solver import RankDeficiencyError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aces",
        description="Simulate eigenvalue-sampling experiments on noisy "
        "Clifford circuits and estimate per-gate Pauli error rates.",
    )
    parser.add_argument("--config", required=True, help="YAML experiment config")
    parser.add_argument("--stage", choices=STAGES, help="run a single stage")
    parser.add_argument("--out", help="override the configured output directory")
    parser.add_argument("--seed", type=int, help="override the configured master seed")
    parser.add_argument(
        "--shots",
        type=int,
        action="append",
        help="override configured shot counts (repeatable)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(
            args.config,
            seed_override=args.seed,
            shots_override=args.shots,
            out_override=args.out,
        )
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.stage:
            run_stage(cfg, args.stage)
            print(f"stage {args.stage} done -> {cfg.output_dir}")
        else:
            summary = run_pipeline(cfg)
            design = summary.get("design", {})
            print(
                f"pipeline done -> {cfg.output_dir} "
                f"(rank {design.get('rank')}/{design.get('n_vars')}, "
                f"{summary.get('total_batches')} batches)"
            )
    except RankDeficiencyError as exc:
        print(f"rank failure: {exc}", file=sys.stderr)
        for combo in exc.unidentifiable[:5]:
            print(f"  unidentifiable: {' '.join(combo)}", file=sys.stderr)
        return 3
    except (PipelineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line entry point for the benchmark runner.

Exit codes: 0 all runs succeeded, 1 at least one run failed, 2 bad
configuration or usage.
"""

import argparse
import sys

from .runner import (
    ConfigError,
    emit_band_data,
    list_datasets,
    load_config,
    run_ablation_k,
    run_ablation_m,
    run_experiment,
)


def _parse_int_list(text, flag):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"{flag} expects comma-separated integers, got {text!r}") from None


def _add_common(parser):
    parser.add_argument("--config", required=True, help="TOML experiment config")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--seeds", default=None, help="comma-separated seeds (overrides config)")
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker processes; result bytes do not depend on it")


def _print_summary(result):
    print(f"runs: {len(result.records)} total, {result.failed} failed -> {result.out_dir}")
    for (dataset, method), rep in sorted(result.reports.items()):
        print(
            f"  {dataset:<16} {method:<16} "
            f"NLL {rep.nll_mean:.4f} +/- {rep.nll_half_width:.4f}  "
            f"RMSE {rep.rmse_mean:.4f} +/- {rep.rmse_half_width:.4f}"
        )
    for rec in result.records:
        if rec.error:
            print(f"  FAILED {rec.dataset}/{rec.method}/seed={rec.seed}: {rec.error}", file=sys.stderr)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="uqens-bench",
        description="Train uncertainty ensembles on benchmark datasets and score them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("run", help="full sweep: datasets x methods x seeds"))
    p_m = sub.add_parser("ablate-m", help="NLL versus ensemble size")
    _add_common(p_m)
    p_m.add_argument("--values", default="2,3,5,7,10", help="comma-separated ensemble sizes")
    p_k = sub.add_parser("ablate-k", help="NLL versus activation-set cardinality")
    _add_common(p_k)
    p_k.add_argument("--values", default="1,2,3,4,5,6,7", help="comma-separated set sizes")
    _add_common(sub.add_parser("band", help="1-d predictive band data"))
    sub.add_parser("list-datasets", help="list generators and CSV presets")
    args = parser.parse_args(argv)

    if args.command == "list-datasets":
        print(list_datasets())
        return 0

    try:
        seeds = _parse_int_list(args.seeds, "--seeds") if args.seeds else None
        config = load_config(args.config, out_dir=args.out, seeds=seeds, jobs=args.jobs)
        if args.command == "run":
            result = run_experiment(config)
        elif args.command == "ablate-m":
            result = run_ablation_m(config, _parse_int_list(args.values, "--values"))
        elif args.command == "ablate-k":
            result = run_ablation_k(config, _parse_int_list(args.values, "--values"))
        else:  # band
            try:
                written = emit_band_data(config)
            except ConfigError:
                raise
            except Exception as exc:
                print(f"band generation failed: {exc}", file=sys.stderr)
                return 1
            for path in written:
                print(path)
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    _print_summary(result)
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from pathlib import Path

from logprivacy.distance import DistanceMeasure, Penalties
from logprivacy.embedding import EmbeddingModel, TrainConfig, train_act2vec
from logprivacy.eventlog import CsvColumns, LogError, event_durations, log_stats, read_log, write_log
from logprivacy.harness import (
    SweepConfig,
    compare_measures,
    comparison_to_csv,
    read_config_file,
    rows_to_csv,
    run_sweep,
    timings_to_csv,
)
from logprivacy.metrics import MetricError, evaluate, top_x_follower_share
from logprivacy.pretsa import PrivacyParams, anonymize

DATA_DIR_ENV = "LOGPRIVACY_DATA_DIR"

log = logging.getLogger("logprivacy")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _resolve(path: str) -> Path:
    p = Path(path)
    data_dir = os.environ.get(DATA_DIR_ENV)
    if not p.exists() and not p.is_absolute() and data_dir:
        alt = Path(data_dir) / p
        if alt.exists():
            return alt
    return p


def _columns(args) -> CsvColumns:
    return CsvColumns(args.case_column, args.activity_column, args.timestamp_column,
                      args.timestamp_format)


def _load(path, args):
    return read_log(_resolve(path), _columns(args))


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


TRAIN_KEYS = {
    "dimension": int, "window": int, "negative_samples": int, "epochs": int,
    "learning_rate": float, "seed": int, "vectors": str,
}


def _train_config(args, config: dict | None = None) -> TrainConfig:
    config = config or {}
    kwargs = {}
    for key, conv in TRAIN_KEYS.items():
        value = getattr(args, key, None)
        if value is None and key in config:
            value = conv(config[key])
        if value is not None:
            kwargs[key] = value
    return TrainConfig(**kwargs)


def _penalties(args, config: dict | None = None) -> Penalties:
    config = config or {}
    add = args.rho_add if args.rho_add is not None else float(config.get("rho_add", 2.0))
    rem = args.rho_remove if args.rho_remove is not None else float(config.get("rho_remove", 3.0))
    return Penalties(add, rem)


def _add_csv_options(p):
    g = p.add_argument_group("CSV logs")
    g.add_argument("--case-column", default="case")
    g.add_argument("--activity-column", default="activity")
    g.add_argument("--timestamp-column", default="timestamp")
    g.add_argument("--timestamp-format", default=None,
                   help="strptime pattern, e.g. '%%Y-%%m-%%d %%H:%%M:%%S' (default: ISO-8601)")


def _add_train_options(p):
    g = p.add_argument_group("embedding training")
    g.add_argument("--dimension", type=int)
    g.add_argument("--window", type=int)
    g.add_argument("--negative-samples", type=int)
    g.add_argument("--epochs", type=int)
    g.add_argument("--learning-rate", type=float)
    g.add_argument("--vectors", choices=["input", "average"])
    g.add_argument("--seed", type=int)


def _add_distance_options(p):
    p.add_argument("--rho-add", type=float)
    p.add_argument("--rho-remove", type=float)
    p.add_argument("--flip-direction", action="store_true",
                   help="swap source and target in the embedding distance")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="logprivacy", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("stats", help="log characteristics")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--followers", action="store_true", help="also print top-x follower shares")
    _add_csv_options(p)

    p = sub.add_parser("train", help="learn activity embeddings")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True, help="model file (JSON)")
    p.add_argument("--export-csv", help="also write label,v_1..v_d rows here")
    _add_train_options(p)
    _add_csv_options(p)

    p = sub.add_parser("anonymize", help="enforce k-anonymity and t-closeness")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--distance", choices=["levenshtein", "embedding"], default="levenshtein")
    p.add_argument("--embedding-model", help="trained model; trained on --in when omitted")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="merge report CSV")
    _add_distance_options(p)
    _add_train_options(p)
    _add_csv_options(p)

    p = sub.add_parser("evaluate", help="utility metrics of an anonymized log")
    p.add_argument("--original", required=True)
    p.add_argument("--anonymized", required=True)
    p.add_argument("--report", help="metric CSV (default: stdout)")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--embedding-model")
    _add_csv_options(p)

    p = sub.add_parser("sweep", help="run the (measure, k, t) grid")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", help="results CSV (default: stdout)")
    p.add_argument("--config", help="flat 'key = value' file; flags take precedence")
    p.add_argument("--name", help="log name in the results (default: file stem)")
    p.add_argument("--k-values")
    p.add_argument("--t-values")
    p.add_argument("--measures")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--jobs", type=int)
    p.add_argument("--timings", help="per-setting wall times and training timestamp")
    p.add_argument("--comparison", help="embedding vs Levenshtein truly sampled table")
    p.add_argument("--save-model", help="write the trained embedding model here")
    _add_distance_options(p)
    _add_train_options(p)
    _add_csv_options(p)
    return parser


def _write_text(path, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_stats(args):
    lg = _load(args.input, args)
    s = log_stats(lg)
    print("log & cases & variants & avg. cases/var. & max. cases/var.")
    print(f"{Path(args.input).name} & {s.row()}")
    if args.followers:
        shares = top_x_follower_share(lg, (1, 2, 3))
        print(" & ".join(f"x={x}: {v:.1f}%" for x, v in shares.items()))


def cmd_train(args):
    lg = _load(args.input, args)
    model = train_act2vec(lg, _train_config(args))
    model.save(args.out)
    if args.export_csv:
        _write_text(args.export_csv, model.to_csv())


def cmd_anonymize(args):
    lg = event_durations(_load(args.input, args))
    if args.distance == "embedding":
        if args.embedding_model:
            model = EmbeddingModel.load(_resolve(args.embedding_model))
        else:
            model = train_act2vec(lg, _train_config(args))
        measure = DistanceMeasure.embedding(model, _penalties(args), args.flip_direction)
    else:
        measure = DistanceMeasure.levenshtein()
    out, report = anonymize(lg, PrivacyParams(args.k, args.t), measure)
    write_log(out, args.out)
    if args.report:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "source", "target", "distance", "traces"])
        for m in report.merges:
            w.writerow(["merge", " > ".join(m.source), " > ".join(m.target), repr(m.distance), m.traces])
        for key in ("iterations", "truncated", "dropped"):
            w.writerow([key, "", "", "", getattr(report, key)])
        w.writerow(["output_traces", "", "", "", len(out)])
        for msg in report.warnings:
            w.writerow(["warning", msg, "", "", ""])
        _write_text(args.report, buf.getvalue())
    for msg in report.warnings:
        print(f"warning: {msg}", file=sys.stderr)


def cmd_evaluate(args):
    original = event_durations(_load(args.original, args))
    anonymized = event_durations(_load(args.anonymized, args))
    model = EmbeddingModel.load(_resolve(args.embedding_model)) if args.embedding_model else None
    rep = evaluate(original, anonymized, args.epsilon, model)
    rows = [
        ("behavioural_appropriateness", rep.behavioural_appropriateness),
        ("truly_sampled_score", rep.truly_sampled_score),
        ("total_duration_error", rep.total_duration_error),
    ]
    if model is not None:
        rows += [("event_distance_avg", rep.event_distance_avg),
                 ("event_distance_stdev", rep.event_distance_stdev)]
    rows += [(f"top_{x}_follower_share", v) for x, v in rep.top_x_follower_share.items()]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "value"])
    for name, value in rows:
        w.writerow([name, repr(float(value))])
    _write_text(args.report, buf.getvalue())


def cmd_sweep(args):
    cfg = read_config_file(args.config) if args.config else {}

    def pick(flag, key, conv, default):
        if flag is not None:
            return conv(flag) if isinstance(flag, str) else flag
        if key in cfg:
            return conv(cfg[key])
        return default

    defaults = SweepConfig()
    config = SweepConfig(
        k_values=pick(args.k_values, "k_values", _ints, defaults.k_values),
        t_values=pick(args.t_values, "t_values", _floats, defaults.t_values),
        measures=pick(args.measures, "measures", lambda s: s.replace(",", " ").split(),
                      defaults.measures),
        train_config=_train_config(args, cfg),
        penalties=_penalties(args, cfg),
        flip=args.flip_direction or cfg.get("flip", "false").lower() in ("1", "true", "yes"),
        epsilon=pick(args.epsilon, "epsilon", float, defaults.epsilon),
        jobs=pick(args.jobs, "jobs", int, 1),
    )
    lg = _load(args.input, args)
    name = args.name or Path(args.input).name.split(".")[0]
    result = run_sweep(lg, config, name)
    _write_text(args.out, rows_to_csv(result.rows))
    if args.timings:
        _write_text(args.timings, timings_to_csv(result))
    if args.save_model and result.model is not None:
        result.model.save(args.save_model)
    comparison = compare_measures(result.rows)
    if args.comparison:
        _write_text(args.comparison, comparison_to_csv(comparison))
    if comparison:
        wins = sum(c["embedding_tss_at_least_levenshtein"] == "yes" for c in comparison)
        print(f"embedding truly sampled score >= Levenshtein in {wins}/{len(comparison)} settings",
              file=sys.stderr)


COMMANDS = {
    "stats": cmd_stats,
    "train": cmd_train,
    "anonymize": cmd_anonymize,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.error("a command is required")
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (LogError, MetricError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

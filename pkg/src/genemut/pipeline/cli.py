"""``genemut`` command line.

Every subcommand reads an optional ``--config`` file of ``key=value`` lines;
any config key can also be given as a flag (``--fold-subset 0,1``), and
flags win. Exit codes: 0 success, 1 invalid input or failed check, 2 runtime
error.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields

import numpy as np

from ..datagen import SynthConfig, generate_dataset, load_dataset, save_dataset
from ..numkernel import save_tensor
from ..objective import write_metrics_csv, write_summary_csv
from .config import ConfigError, RunConfig, coerce, load_config, parse_config_lines

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _log(msg):
    print(msg, file=sys.stderr, flush=True)


def _add_config_flags(p, cls):
    p.add_argument("--config", help="file of key=value lines (# starts a comment)")
    for f in fields(cls):
        if f.name == "dataset":
            continue
        p.add_argument("--" + f.name.replace("_", "-"), dest="cfg_" + f.name, metavar="VALUE")


def _overrides(args, cls):
    out = {}
    for f in fields(cls):
        raw = getattr(args, "cfg_" + f.name, None)
        if raw is not None:
            out[f.name] = coerce(f.name, raw, cls)
    return out


def _run_config(args):
    over = _overrides(args, RunConfig)
    if getattr(args, "dataset", None):
        over["dataset"] = args.dataset
    cfg = load_config(args.config, over)
    if not cfg.dataset:
        raise ConfigError("no dataset given (--dataset or dataset= in the config file)")
    return cfg


def _synth_config(args):
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            values.update(parse_config_lines(fh, args.config, SynthConfig))
    values.update(_overrides(args, SynthConfig))
    cfg = SynthConfig(**values)
    cfg.validate()
    return cfg


def cmd_gen_data(args):
    ds = generate_dataset(_synth_config(args))
    save_dataset(args.out, ds)
    print(args.out)


def cmd_build_graph(args):
    from .folds import train_indices
    from .model import build_graph
    from .train import dataset_folds

    cfg = _run_config(args)
    ds = load_dataset(cfg.dataset)
    idx = None if args.fold is None else train_indices(dataset_folds(ds, cfg), args.fold)
    g = build_graph(ds, cfg, idx)
    os.makedirs(args.out, exist_ok=True)
    for name, arr in (("G", g.G), ("delta", g.delta), ("E_adj", g.E_adj), ("E_con", g.E_con)):
        save_tensor(os.path.join(args.out, f"{name}.ten"), np.asarray(arr, dtype=np.float64))
    with open(os.path.join(args.out, "genes.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(g.vocab.genes) + "\n")
    print(args.out)


def cmd_train(args):
    from .train import run_cv

    cfg = _run_config(args)
    rec = run_cv(cfg, load_dataset(cfg.dataset), out_dir=args.out, log=_log)
    print(os.path.join(args.out, "summary.csv"))
    return rec


def cmd_eval(args):
    from .train import evaluate, load_trained

    cfg = load_config(os.path.join(args.run, "run_config.txt"))
    folds_run = args.folds or cfg.fold_subset or tuple(range(cfg.folds))
    reports, dataset = [], None
    for fold in folds_run:
        cfg, dataset, folds, model = load_trained(args.run, fold, dataset)
        beta = cfg.beta if args.beta is None else args.beta
        reports.append(evaluate(model, dataset, folds[fold], beta, fold))
    out = args.out or os.path.join(args.run, "eval")
    os.makedirs(out, exist_ok=True)
    write_summary_csv(os.path.join(out, "summary.csv"), reports)
    write_metrics_csv(os.path.join(out, "metrics.csv"), reports)
    print(os.path.join(out, "summary.csv"))


def cmd_ablate(args):
    from .ablation import ablation_suite

    cfg = _run_config(args)
    axes = [a.strip() for a in args.axes.split(",") if a.strip()]
    ablation_suite(cfg, load_dataset(cfg.dataset), axes, out_dir=args.out, log=_log)
    print(os.path.join(args.out, "ablation.csv"))


def cmd_export_attention(args):
    from .train import export_attention, load_trained

    cfg, dataset, folds, model = load_trained(args.run, args.fold)
    if args.slides:
        wanted = [s.strip() for s in args.slides.split(",") if s.strip()]
        index = {s.slide_id: i for i, s in enumerate(dataset.slides)}
        missing = [s for s in wanted if s not in index]
        if missing:
            raise ConfigError(f"unknown slide ids {missing}")
        idx = [index[s] for s in wanted]
    else:
        idx = folds[args.fold].tolist()
    out = os.path.join(args.out or args.run, "attention")
    export_attention(model, dataset, idx, out)
    print(out)


def cmd_check(args):
    from .checks import run_checks

    results = run_checks(log=print)
    failed = [name for name, ok, _ in results if not ok]
    if failed:
        _log(f"{len(failed)} check(s) failed: {', '.join(failed)}")
        return EXIT_INVALID
    return EXIT_OK


def _int_list(raw):
    try:
        return tuple(int(x) for x in raw.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}") from None


def build_parser():
    parser = _Parser(prog="genemut", description="Knowledge-guided gene mutation prediction from slide features.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset directory")
    p.add_argument("--out", required=True)
    _add_config_flags(p, SynthConfig)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("build-graph", help="write the gene graph matrices as tensor files")
    p.add_argument("--dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--fold", type=int, help="use only the training slides of this fold for consistency")
    _add_config_flags(p, RunConfig)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("train", help="cross-validated training; writes a run directory")
    p.add_argument("--dataset")
    p.add_argument("--out", required=True)
    _add_config_flags(p, RunConfig)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="re-evaluate the checkpoints of a run")
    p.add_argument("--run", required=True)
    p.add_argument("--folds", type=_int_list)
    p.add_argument("--beta", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="one-axis-at-a-time ablation table")
    p.add_argument("--dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--axes", default="encodings,association,fusion,loss")
    _add_config_flags(p, RunConfig)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("export-attention", help="per-slide gene-by-patch attention CSVs")
    p.add_argument("--run", required=True)
    p.add_argument("--fold", type=int, default=0)
    p.add_argument("--slides", help="comma-separated slide ids (default: the fold's held-out slides)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_attention)

    p = sub.add_parser("check", help="run the built-in invariant and oracle checks")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    try:
        code = args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - surfaced as a runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return code if isinstance(code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: ``run`` (execute an experiment config file), ``sweep`` (grid
from flags), ``compare`` (design points under one shared fault), ``trace``
(dump one pipeline trace), ``campaign`` (generate/inspect fault campaign
files), and ``make-demo`` (produce the bundled desk-scale model/dataset).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .codec import NEAREST_EVEN, floats_to_words
from .config import DESIGN_NAMES, resolve_design
from .datapath import crossbar_matvec, program_weights
from .errors import ConfigurationError, ModelFormatError, NonFiniteOperandError
from .experiments import (ExperimentConfig, compare_designs,
                          parse_experiment_file, run_experiment)
from .faults import (ADDER_OUTPUT, STAGES, load_campaign, sample_sites,
                     save_campaign, stage_width, stage_units,
                     validate_campaign)
from .harness import build_demo_assets, evaluate, load_dataset, load_model


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cimsim",
        description="Bit-exact FP compute-in-memory crossbar simulator "
                    "with persistent bit-flip fault injection.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute an experiment config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override the config's output CSV")
    p.add_argument("--workers", type=int, help="override worker count")
    p.add_argument("--fresh", action="store_true",
                   help="ignore existing records instead of resuming")

    p = sub.add_parser("sweep", help="run a sweep grid given on the command line")
    p.add_argument("--design", required=True,
                   help=f"one of {DESIGN_NAMES} or a design file")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--stage", required=True, choices=STAGES)
    p.add_argument("--bits", type=_ints, required=True)
    p.add_argument("--fractions", type=_floats, required=True)
    p.add_argument("--seeds", type=_ints, default=(1,))
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("compare",
                       help="accuracy drop of design points under one fault")
    p.add_argument("--designs", required=True,
                   help="comma-separated design names/files; first is reference")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--stage", required=True, choices=STAGES)
    p.add_argument("--bit", type=int, required=True)
    p.add_argument("--fraction", type=float, default=1e-9,
                   help="faulty unit fraction; any positive value places "
                        "at least one fault (default: exactly one)")
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--seeds", type=_ints, default=(1, 2, 3, 4, 5))
    p.add_argument("--samples", type=int, default=0)

    p = sub.add_parser("trace", help="dump one pipeline trace")
    p.add_argument("--design", required=True)
    p.add_argument("--seed", type=int, default=1,
                   help="seed for the random input/weight words")
    p.add_argument("--campaign", help="campaign file to apply")
    p.add_argument("--out", help="write the dump here instead of stdout")

    p = sub.add_parser("campaign", help="generate or inspect campaign files")
    p.add_argument("--design", required=True)
    p.add_argument("--generate", action="store_true")
    p.add_argument("--stage", choices=STAGES)
    p.add_argument("--bit", type=int)
    p.add_argument("--fraction", type=float)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--show", help="print and validate an existing file")

    p = sub.add_parser("make-demo",
                       help="write the demo dataset and trained model")
    p.add_argument("--dir", required=True)
    p.add_argument("--seed", type=int, default=11)

    return parser


def _cmd_run(args) -> int:
    cfg = parse_experiment_file(args.config)
    if args.out:
        cfg = ExperimentConfig(**{**cfg.__dict__, "out": args.out})
    if args.workers:
        cfg = ExperimentConfig(**{**cfg.__dict__, "workers": args.workers})
    records = run_experiment(cfg, resume=not args.fresh, log=print)
    print(f"{len(records)} records -> {cfg.out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = ExperimentConfig(
        design=args.design, model=args.model, dataset=args.dataset,
        stages=(args.stage,), bits=args.bits, fractions=args.fractions,
        seeds=args.seeds, out=args.out, level=args.level,
        samples=args.samples, workers=args.workers)
    records = run_experiment(cfg, log=print)
    print(f"{len(records)} records -> {cfg.out}")
    return 0


def _cmd_compare(args) -> int:
    designs = [d.strip() for d in args.designs.split(",") if d.strip()]
    rows = compare_designs(designs, args.model, args.dataset, args.stage,
                           args.bit, args.fraction, args.seeds,
                           level=args.level, samples=args.samples)
    header = f"{'design':<14} {'baseline':>9} {'faulted':>9} {'drop':>9} {'ratio':>7}"
    print(header)
    for row in rows:
        print(f"{row.design:<14} {row.baseline_accuracy:>9.4f} "
              f"{row.faulted_accuracy:>9.4f} {row.drop:>9.4f} "
              f"{row.drop_ratio_vs_first:>7.3f}")
    return 0


def _cmd_trace(args) -> int:
    config = resolve_design(args.design)
    rng = np.random.default_rng(args.seed)
    if config.precision.is_float:
        inputs = floats_to_words(rng.normal(0, 1, config.rows),
                                 config.precision, NEAREST_EVEN)
        weights = floats_to_words(rng.normal(0, 1, (config.rows, config.cols)),
                                  config.precision, NEAREST_EVEN)
    else:
        inputs = rng.integers(-127, 128, config.rows)
        weights = rng.integers(-127, 128, (config.rows, config.cols))
    faults = load_campaign(args.campaign) if args.campaign else ()
    validate_campaign(faults, config)
    programmed = program_weights(weights, config, faults)
    _, trace = crossbar_matvec(inputs, programmed, faults, trace=True)
    text = trace.dump_text()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"trace -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_campaign(args) -> int:
    config = resolve_design(args.design)
    if args.show:
        specs = load_campaign(args.show)
        validate_campaign(specs, config)
        for f in specs:
            level = f.coords[0] if f.stage == ADDER_OUTPUT else None
            width = stage_width(f.stage, config, level)
            coords = ",".join(str(c) for c in f.coords)
            print(f"{f.stage} {coords} bit {f.bit}/{width}")
        print(f"{len(specs)} faults, valid for design {args.design}")
        return 0
    if not args.generate:
        raise ConfigurationError("campaign needs --generate or --show")
    for name in ("stage", "bit", "fraction", "out"):
        if getattr(args, name) is None:
            raise ConfigurationError(f"campaign --generate needs --{name}")
    level = args.level if args.stage == ADDER_OUTPUT else None
    campaign = sample_sites(args.stage, args.fraction, config, args.seed,
                            args.bit, level)
    save_campaign(campaign.specs, args.out)
    total = stage_units(args.stage, config, level)
    print(f"{len(campaign)} of {total} {args.stage} units -> {args.out}")
    return 0


def _cmd_make_demo(args) -> int:
    paths = build_demo_assets(args.dir, args.seed)
    model = load_model(paths["model"])
    for split in ("train", "test"):
        inputs, labels = load_dataset(paths[split])
        from .config import CrossbarConfig
        result = evaluate(model, inputs, labels, CrossbarConfig.baseline(), ())
        print(f"{split}: {result.accuracy:.4f} pipeline accuracy "
              f"({result.total} samples)")
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
    "trace": _cmd_trace,
    "campaign": _cmd_campaign,
    "make-demo": _cmd_make_demo,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigurationError, ModelFormatError, NonFiniteOperandError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: gen-data, train, evaluate, separate, grad-check. All accept
``--config FILE``, ``--set key=value`` (repeatable), ``--seed`` and
``--out-dir``. Exit codes: 0 success, 1 usage error, 2 validation failure,
3 numerical failure.
"""
import argparse
import json
import logging
import os
import sys

from tacbeam.errors import NumericalError, ValidationError

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config(args):
    from tacbeam.runtime.config import load_config

    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    return load_config(args.config, overrides)


def cmd_gen_data(args):
    from tacbeam.scene.dataset import generate_split

    cfg = _config(args)
    out = args.out_dir or "data"
    for name, n in (("train", cfg.n_train), ("valid", cfg.n_valid), ("test", cfg.n_test)):
        if n <= 0:
            continue
        path = generate_split(out, name, n, cfg.seed, cfg.geometry, cfg.min_mics, cfg.max_mics,
                              cfg.sample_rate, cfg.duration, cfg.speech_dir or None,
                              cfg.noise_dir or None, cfg.workers)
        print(f"{name}: {n} utterances -> {path}")
    return EXIT_OK


def cmd_train(args):
    from tacbeam.runtime.config import dump_config
    from tacbeam.runtime.train import train

    cfg = _config(args)
    if args.manifest:
        cfg = cfg.replace(train_manifest=args.manifest)
    out = args.out_dir or "run"
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "config.txt"), "w") as fh:
        fh.write(dump_config(cfg))
    res = train(cfg, out, resume=args.resume)
    first = res.losses[0] if res.losses else float("nan")
    last = res.losses[-1] if res.losses else float("nan")
    print(f"trained {len(res.losses)} steps: loss {first:.3f} -> {last:.3f}; "
          f"checkpoint {os.path.join(out, 'last.tbm')}")
    return EXIT_OK


def cmd_evaluate(args):
    from tacbeam.runtime.evaluate import evaluate

    cfg = _config(args)
    manifest = args.manifest or cfg.valid_manifest
    if not manifest:
        raise ValidationError("no manifest given (--manifest or valid_manifest)")
    report = evaluate(args.checkpoint, manifest)
    print(report.format())
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "report.json"), "w") as fh:
            json.dump(report.to_dict(), fh, indent=1, sort_keys=True)
    return EXIT_OK


def cmd_separate(args):
    from tacbeam.runtime.separate import separate_files

    paths, _ = separate_files(args.checkpoint, args.inputs, args.out_dir or "separated")
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_grad_check(args):
    from tacbeam.runtime.gradsuite import run_suite

    cfg = _config(args)
    seeds = range(cfg.seed, cfg.seed + args.seeds)
    rows, failed = [], 0
    for seed, name, rep in run_suite(seeds, args.tolerance):
        status = "PASS" if rep.passed else "FAIL"
        failed += not rep.passed
        print(f"{status}  seed={seed}  {name:26s} max rel err {rep.max_rel_error:.2e}")
        rows.append({"seed": seed, "case": name, "max_rel_error": rep.max_rel_error,
                     "passed": rep.passed})
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "grad_check.json"), "w") as fh:
            json.dump(rows, fh, indent=1)
    if failed:
        raise NumericalError(f"{failed} gradient checks failed")
    return EXIT_OK


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out-dir", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="tacbeam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-data", parents=[common], help="render a synthetic dataset")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", parents=[common], help="train a model")
    p.add_argument("--manifest", help="training manifest (overrides train_manifest)")
    p.add_argument("--resume", help="checkpoint to resume from")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="bucketed SI-SNRi on a manifest")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("separate", parents=[common], help="separate N mono wav files")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("inputs", nargs="+", help="one mono wav per microphone, reference first")
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("grad-check", parents=[common], help="finite-difference gradient suite")
    p.add_argument("--seeds", type=int, default=5, help="number of seeds")
    p.add_argument("--tolerance", type=float, default=1e-5)
    p.set_defaults(func=cmd_grad_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FileNotFoundError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 no solution found.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .apis import ApiFamily, default_catalog
from .bench import render_report, resolve_suite, run_suite
from .datagen import ALL_FAMILIES, GenConfig, emit_dataset, grammar_for, load_dataset
from .dsl import parse_program, print_program
from .encoder import EncoderConfig
from .errors import DapipError
from .interp import ExamplePair, apply_all
from .failure import Failure
from .r3nn import R3NN, train_model
from .search import neural_search, uniform_search

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NO_SOLUTION = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_gen_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-size", type=int, default=10)
    p.add_argument("--families", default=",".join(ALL_FAMILIES),
                   help="comma-separated subset of regex,lookup,transform")
    p.add_argument("--api-subset", default=None,
                   help="comma-separated API names restricting the grammar")
    p.add_argument("--seed", type=int, default=0)


def _gen_config(args) -> GenConfig:
    families = tuple(f for f in args.families.split(",") if f)
    subset = tuple(args.api_subset.split(",")) if args.api_subset else None
    return GenConfig(max_size=args.max_size, families=families,
                     api_subset=subset, seed=args.seed,
                     ensure_coverage=getattr(args, "ensure_coverage", False))


def _load_examples(path: str) -> list[ExamplePair]:
    from .datagen import unescape_field

    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if "\t" not in line:
                raise DapipError(f"{path}:{lineno}: expected input<TAB>output")
            left, right = line.split("\t", 1)
            pairs.append(ExamplePair(unescape_field(left), unescape_field(right)))
    if not pairs:
        raise DapipError(f"{path}: no examples found")
    return pairs


def cmd_gen_data(args) -> int:
    cfg = _gen_config(args)
    path = emit_dataset(args.count, cfg, args.out)
    print(f"wrote {args.count} instances to {path}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _gen_config(args)
    grammar = grammar_for(cfg)
    instances = load_dataset(args.data, grammar, max_size=cfg.max_size)
    enc = EncoderConfig(T=args.enc_t, H=args.enc_h, embed_dim=args.embed_dim)
    model = R3NN(grammar, enc, m_dim=args.m_dim, seed=args.seed)
    history = train_model(model, instances, epochs=args.epochs,
                          batch_size=args.batch_size, lr=args.lr,
                          clip=args.clip, seed=args.seed,
                          log=lambda msg: print(msg, flush=True))
    model.save(args.out)
    print(f"saved checkpoint to {args.out}; loss history: "
          + " ".join(f"{h:.4f}" for h in history))
    return EXIT_OK


def _model_from_checkpoint(path: str) -> R3NN:
    # the checkpoint records its grammar; no flags needed
    return R3NN.load_auto(path)


def cmd_synth(args) -> int:
    examples = _load_examples(args.examples)
    rng = np.random.default_rng(args.seed)
    if args.method == "neural":
        if not args.checkpoint:
            raise DapipError("--method neural requires --checkpoint")
        model = _model_from_checkpoint(args.checkpoint)
        result = neural_search(model, examples, args.samples, rng,
                               greedy=args.greedy)
    else:
        result = uniform_search(examples, args.samples,
                                grammar_for(_gen_config(args)), rng,
                                max_size=args.max_size)
    if result.program is None:
        print("no consistent program found "
              f"({result.stats.draws} draws)", file=sys.stderr)
        return EXIT_NO_SOLUTION
    print(print_program(result.program))
    print(f"# found at draw {result.stats.found_at} of {result.stats.draws}",
          file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _gen_config(args)
    grammar = grammar_for(cfg)
    model = None
    if args.method.startswith("neural"):
        if not args.checkpoint:
            raise DapipError("neural methods require --checkpoint")
        model = R3NN.load_auto(args.checkpoint)
        grammar = model.grammar
    benches = resolve_suite(args.suite, grammar)
    ks = tuple(int(k) for k in args.samples.split(","))
    report = run_suite(benches, args.method, ks=ks, seed=args.seed,
                       model=model, grammar=grammar, suite_name=args.suite,
                       max_size=args.max_size)
    print(render_report(report, fmt=args.format,
                        include_timings=args.timings), end="")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(checkpoint=args.checkpoint, budget_s=args.budget)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def cmd_apis(args) -> int:
    catalog = default_catalog()
    family = ApiFamily(args.family) if args.family else None
    specs = catalog.list(family)
    if args.format == "json":
        print(json.dumps([{"name": s.name, "family": s.family.value,
                           "description": s.description} for s in specs],
                         indent=2))
    else:
        for s in specs:
            print(f"{s.name:<42} {s.family.value:<10} {s.description}")
    return EXIT_OK


def cmd_apply(args) -> int:
    program = parse_program(args.program)
    results = apply_all(program, args.inputs)
    for inp, out in zip(args.inputs, results):
        shown = "<failure>" if isinstance(out, Failure) else out
        print(f"{inp}\t{shown}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dapip",
                     description="Programming-by-example string transformations")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", parents=[], help="sample a training corpus")
    _add_gen_config_args(p)
    p.add_argument("--count", "-n", type=int, default=10000)
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--ensure-coverage", action="store_true")
    p.set_defaults(fn=cmd_gen_data)

    p = sub.add_parser("train", help="train a model on a corpus")
    _add_gen_config_args(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--batch-size", type=int, default=10)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--clip", type=float, default=10.0)
    p.add_argument("--m-dim", type=int, default=64)
    p.add_argument("--enc-t", type=int, default=32)
    p.add_argument("--enc-h", type=int, default=32)
    p.add_argument("--embed-dim", type=int, default=16)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("synth", help="synthesize a program from examples")
    _add_gen_config_args(p)
    p.add_argument("--examples", required=True,
                   help="file of input<TAB>output lines")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--method", choices=("uniform", "neural"), default="uniform")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--greedy", action="store_true")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("bench", help="run a benchmark suite")
    _add_gen_config_args(p)
    p.add_argument("--suite", required=True)
    p.add_argument("--method", choices=("uniform", "neural", "neural-greedy"),
                   default="uniform")
    p.add_argument("--samples", default="10,50,100")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--timings", action="store_true")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("serve", help="start the synthesis HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--budget", type=float, default=10.0,
                   help="per-request wall-clock budget in seconds")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("apis", help="list the API catalog")
    p.add_argument("--family", choices=("regex", "lookup", "transform"),
                   default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(fn=cmd_apis)

    p = sub.add_parser("apply", help="apply a program to inputs")
    p.add_argument("program")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(fn=cmd_apply)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except DapipError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: compile, generate, bench, inspect.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
inconsistent inputs), 3 runtime error (provider failures and the like).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from .engine import (
    AdversarialLogitsProvider,
    EndpointConfig,
    GenerationStatus,
    SamplingConfig,
    UniformLogitsProvider,
    external_provider_client,
    guided_sample_tokens,
)
from .errors import (
    GuidedGenError,
    IndexFormatError,
    ProviderError,
    RegexError,
    VocabularyError,
)
from .fsm import compile_regex
from .grammar import load_grammar
from .index import build_index
from .parser_index import GrammarGuide, build_parser_index, guided_sample_tokens_grammar
from .serialize import (
    INDEX_MAGIC,
    PARSER_INDEX_MAGIC,
    deserialize_index,
    deserialize_parser_index,
    serialize_index,
    serialize_parser_index,
)
from .vocab import load_vocabulary

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="guidedgen", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_compile = sub.add_parser("compile", help="build an index file from a regex or grammar")
    source = p_compile.add_mutually_exclusive_group(required=True)
    source.add_argument("--regex", help="pattern to guide generation with")
    source.add_argument("--grammar", help="grammar file path")
    p_compile.add_argument("--vocab", required=True, help="vocabulary JSON path")
    p_compile.add_argument("--out", required=True, help="output index path")
    p_compile.add_argument("--minimize", action="store_true", help="minimize the regex DFA")
    p_compile.add_argument("--depth-bound", type=int, default=8, help="parser index stack depth bound")
    p_compile.add_argument("--workers", type=int, default=None, help="parallel index build processes")
    p_compile.add_argument("--meta", help="also write automaton metadata JSON here (regex only)")

    p_gen = sub.add_parser("generate", help="run guided generation against an index")
    p_gen.add_argument("--index", required=True)
    p_gen.add_argument("--vocab", required=True)
    src2 = p_gen.add_mutually_exclusive_group(required=True)
    src2.add_argument("--regex")
    src2.add_argument("--grammar")
    p_gen.add_argument("--minimize", action="store_true", help="regex was compiled minimized")
    p_gen.add_argument("--provider", default="builtin:seeded-uniform",
                       help="builtin:seeded-uniform | builtin:adversarial | http:<url>")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--max-tokens", type=int, default=32)
    p_gen.add_argument("--temperature", type=float, default=1.0)
    p_gen.add_argument("--strategy", choices=["multinomial", "greedy"], default="multinomial")
    p_gen.add_argument("--timeout", type=float, default=10.0, help="http provider timeout seconds")

    p_bench = sub.add_parser("bench", help="time indexed vs naive-rescan mask construction")
    p_bench.add_argument("--regex", required=True)
    p_bench.add_argument("--vocab-sizes", default="1000,50000",
                         help="comma-separated synthetic vocabulary sizes")
    p_bench.add_argument("--max-tokens", default="50,100,200,400",
                         help="comma-separated run lengths")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--reps", type=int, default=5)
    p_bench.add_argument("--out", default="-", help="CSV path, or - for stdout")

    p_inspect = sub.add_parser("inspect", help="summarize an index file")
    p_inspect.add_argument("--index", required=True)
    return parser


def _cmd_compile(args) -> int:
    vocab = load_vocabulary(args.vocab)
    if args.regex is not None:
        fsm = compile_regex(args.regex, minimize=args.minimize)
        index = build_index(fsm, vocab, workers=args.workers)
        Path(args.out).write_bytes(serialize_index(index))
        if args.meta:
            meta = {
                "pattern": args.regex,
                "n_states": fsm.n_states,
                "start": fsm.start,
                "finals": sorted(fsm.finals),
                "fsm_digest": fsm.digest.hex(),
                "vocab_digest": vocab.digest.hex(),
                "eos_id": vocab.eos_id,
                "n_tokens": len(vocab),
            }
            Path(args.meta).write_text(json.dumps(meta, indent=2) + "\n")
    else:
        grammar = load_grammar(args.grammar)
        guide = GrammarGuide(grammar)
        index = build_parser_index(guide, vocab, depth_bound=args.depth_bound)
        Path(args.out).write_bytes(serialize_parser_index(index))
        if args.meta:
            raise UsageError("--meta is only available for regex indices")
    print(f"wrote {args.out}")
    return EXIT_OK


def _make_provider(spec: str, vocab, seed: int, timeout: float):
    if spec == "builtin:seeded-uniform":
        return UniformLogitsProvider(vocab)
    if spec == "builtin:adversarial":
        return AdversarialLogitsProvider(vocab, seed=seed)
    if spec.startswith("http:"):
        url = spec[len("http:"):]
        if not url.startswith(("http://", "https://")):
            url = "http://" + url.lstrip("/")
        return external_provider_client(EndpointConfig(url=url, timeout=timeout), vocab)
    raise UsageError(f"unknown provider {spec!r}")


def _cmd_generate(args) -> int:
    if args.max_tokens < 1:
        raise UsageError("--max-tokens must be at least 1")
    if args.temperature <= 0:
        raise UsageError("--temperature must be positive")
    vocab = load_vocabulary(args.vocab)
    data = Path(args.index).read_bytes()
    provider = _make_provider(args.provider, vocab, args.seed, args.timeout)
    cfg = SamplingConfig(
        max_tokens=args.max_tokens,
        temperature=args.temperature,
        strategy=args.strategy,
        seed=args.seed,
    )
    if args.regex is not None:
        fsm = compile_regex(args.regex, minimize=args.minimize)
        index = deserialize_index(data, fsm=fsm, vocab=vocab)
        session = guided_sample_tokens(provider, index, fsm, cfg)
        text = session.text(vocab)
    else:
        guide = GrammarGuide(load_grammar(args.grammar))
        index = deserialize_parser_index(data, grammar=guide.grammar, vocab=vocab)
        index.bind(guide, vocab)
        session = guided_sample_tokens_grammar(provider, index, guide, cfg)
        text = session.text()
    print(text)
    print(f"status: {session.status.value}")
    return EXIT_OK if session.status is not GenerationStatus.DEAD_END else EXIT_RUNTIME


def _cmd_bench(args) -> int:
    sizes = [int(x) for x in args.vocab_sizes.split(",") if x]
    lengths = [int(x) for x in args.max_tokens.split(",") if x]
    if not sizes or not lengths:
        raise UsageError("--vocab-sizes and --max-tokens must be non-empty")
    records = bench_mod.run_bench(
        args.regex, sizes, lengths, seed=args.seed, reps=args.reps
    )
    if args.out == "-":
        import io

        buf = io.StringIO()
        import csv as _csv

        writer = _csv.writer(buf)
        writer.writerow(bench_mod.CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [r.method, r.max_tokens, r.vocab_size,
                 f"{r.wall_time:.12f}", f"{r.per_step_mask_time:.12f}"]
            )
        sys.stdout.write(buf.getvalue())
    else:
        bench_mod.write_csv(records, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_inspect(args) -> int:
    data = Path(args.index).read_bytes()
    magic = data[:4]
    if magic == INDEX_MAGIC:
        index = deserialize_index(data)
        print("kind: regex vocabulary index (GGIX)")
        print(f"fsm digest:   {index.fsm_digest.hex()}")
        print(f"vocab digest: {index.vocab_digest.hex()}")
        print(f"states with entries: {len(index.entries)}")
        print(f"total entries: {index.entry_count()}")
        for state in sorted(index.entries):
            print(f"  state {state}: {len(index.entries[state])} allowed tokens")
    elif magic == PARSER_INDEX_MAGIC:
        index = deserialize_parser_index(data)
        print("kind: parser index (GGPX)")
        print(f"grammar digest: {index.grammar_digest.hex()}")
        print(f"vocab digest:   {index.vocab_digest.hex()}")
        print(f"depth bound: {index.depth_bound}")
        print(f"total entries: {index.entry_count()}")
    else:
        # pass through to the strict decoder for a precise error
        deserialize_index(data)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "compile":
            return _cmd_compile(args)
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "inspect":
            return _cmd_inspect(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (VocabularyError, RegexError, IndexFormatError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ProviderError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except GuidedGenError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Emit cross-implementation fixture cases for foreign bindings.

Each case fixes a regex, a vocabulary, and a handful of reachable states,
and records the core engine's mask bits and state advances for them. A
binding reproduces the masks and advances through the public interfaces
(CLI + index file) and compares bit for bit.

    python scripts/make_binding_fixtures.py --count 100 --out fixtures.json
"""

import argparse
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from guidedgen.engine import build_mask
from guidedgen.fsm import compile_regex
from guidedgen.index import build_index
from guidedgen.vocab import Vocabulary

PATTERNS = [
    r"([0-9]*)?\.?[0-9]*",
    r"[^\W\d]\w*",
    r"[0-9]",
    r"no|yes",
    r"(ab|a)*c?",
    r"\s*19[0-9]{2}",
    r"[a-f]{2,4}",
    r"-?(0|[1-9][0-9]*)",
]

TOKEN_ALPHABET = "0123456789abcdefxyz_. -"


def random_vocab(rng: random.Random, size: int) -> Vocabulary:
    tokens = set()
    while len(tokens) < size:
        n = rng.randrange(1, 4)
        tokens.add("".join(rng.choice(TOKEN_ALPHABET) for _ in range(n)))
    ordered = sorted(tokens)
    rng.shuffle(ordered)
    ordered.append("<eos>")
    return Vocabulary(tokens=tuple(ordered), eos_id=len(ordered) - 1)


def make_case(rng: random.Random, pattern: str) -> dict:
    vocab = random_vocab(rng, rng.randrange(8, 30))
    fsm = compile_regex(pattern)
    index = build_index(fsm, vocab)

    states = [fsm.start]
    state = fsm.start
    for _ in range(rng.randrange(0, 6)):
        row = index.entries.get(state)
        if not row:
            break
        token = rng.choice(sorted(row))
        state = row[token]
        states.append(state)

    expectations = []
    for s in dict.fromkeys(states):
        mask = build_mask(index, s, fsm, vocab)
        row = index.entries.get(s, {})
        expectations.append(
            {
                "state": s,
                "mask": [bool(b) for b in mask],
                "advances": {str(tid): end for tid, end in sorted(row.items())},
            }
        )
    return {
        "pattern": pattern,
        "eos_id": vocab.eos_id,
        "tokens": vocab.to_mapping(),
        "expectations": expectations,
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=100)
    parser.add_argument("--seed", type=int, default=20240801)
    parser.add_argument("--out", default="-")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    cases = [
        make_case(rng, PATTERNS[i % len(PATTERNS)]) for i in range(args.count)
    ]
    payload = json.dumps({"cases": cases}, ensure_ascii=False, indent=1)
    if args.out == "-":
        print(payload)
    else:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
        print(f"wrote {args.out} ({len(cases)} cases)", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

import { describe, expect, it } from "vitest";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import {
  BoundIndex,
  ClosedHandleError,
  CoreInvocationError,
  DisallowedTokenError,
  compileIndex,
  type VocabularySpec,
} from "../src/index.js";

const REPO_ROOT = join(dirname(fileURLToPath(import.meta.url)), "..", "..");
const OPTS = { corePath: REPO_ROOT };

const FLOAT_PATTERN = "([0-9]*)?\\.?[0-9]*";
const FLOAT_VOCAB: VocabularySpec = {
  eosId: 5,
  tokens: { A: 0, ".": 1, "42": 2, ".2": 3, "1": 4, "<eos>": 5 },
};

function compileFloat(): BoundIndex {
  return compileIndex(FLOAT_PATTERN, FLOAT_VOCAB, OPTS);
}

describe("compileIndex", () => {
  it("reproduces the five-token walkthrough mask at the start state", () => {
    const index = compileFloat();
    // "A" (id 0) is unreadable; everything else is allowed and the empty
    // string already matches, so the EOS bit is set too
    expect(index.maskBoolean(index.startState)).toEqual([
      false,
      true,
      true,
      true,
      true,
      true,
    ]);
  });

  it("surfaces core messages for invalid patterns", () => {
    expect(() => compileIndex("(?=x)a", FLOAT_VOCAB, OPTS)).toThrowError(
      CoreInvocationError,
    );
    try {
      compileIndex("(?=x)a", FLOAT_VOCAB, OPTS);
    } catch (err) {
      expect(String(err)).toContain("lookahead");
    }
  });

  it("rejects an empty vocabulary with the core validation message", () => {
    expect(() => compileIndex(FLOAT_PATTERN, { eosId: 0, tokens: {} }, OPTS)).toThrowError(
      CoreInvocationError,
    );
  });
});

describe("BoundIndex.mask", () => {
  it("is all-false at a non-final state with no readable tokens", () => {
    // `ab` with only "a" in the vocabulary: the post-"a" state is live but
    // nothing in the vocabulary is readable there and it is not final
    const index = compileIndex(
      "ab",
      { eosId: 1, tokens: { a: 0, "<eos>": 1 } },
      OPTS,
    );
    const after = index.advance(index.startState, 0);
    expect(Array.from(index.mask(after))).toEqual([0, 0]);
  });

  it("is EOS-only once the language is exhausted", () => {
    const index = compileIndex(
      "a",
      { eosId: 2, tokens: { a: 0, b: 1, "<eos>": 2 } },
      OPTS,
    );
    const end = index.advance(index.startState, 0);
    expect(Array.from(index.mask(end))).toEqual([0, 0, 1]);
  });

  it("multiplies elementwise with score vectors", () => {
    const index = compileFloat();
    const mask = index.mask(index.startState);
    const scores = Float64Array.from({ length: mask.length }, (_v, i) => i + 1);
    const masked = scores.map((s, i) => s * mask[i]);
    expect(masked[0]).toBe(0);
    expect(masked[1]).toBeGreaterThan(0);
  });

  it("rejects out-of-range states", () => {
    const index = compileFloat();
    expect(() => index.mask(index.numStates)).toThrowError(RangeError);
  });
});

describe("BoundIndex.advance", () => {
  it("follows the stored traversal end state", () => {
    const index = compileFloat();
    const after = index.advance(index.startState, 3); // ".2"
    expect(new Set(index.allowed(after).keys())).toEqual(new Set([2, 4]));
  });

  it("accepts EOS exactly at final states", () => {
    const index = compileFloat();
    expect(index.advance(index.startState, index.eosId)).toBe(index.startState);
    const strict = compileIndex(
      "ab",
      { eosId: 2, tokens: { a: 0, b: 1, "<eos>": 2 } },
      OPTS,
    );
    const mid = strict.advance(strict.startState, 0);
    expect(() => strict.advance(mid, strict.eosId)).toThrowError(DisallowedTokenError);
  });

  it("rejects disallowed tokens with state and token in the message", () => {
    const index = compileFloat();
    try {
      index.advance(index.startState, 0); // "A"
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(DisallowedTokenError);
      expect(String(err)).toContain("token 0");
      expect(String(err)).toContain("state 0");
    }
  });
});

describe("handle lifecycle", () => {
  it("raises on every operation after close", () => {
    const index = compileFloat();
    index.close();
    expect(() => index.mask(0)).toThrowError(ClosedHandleError);
    expect(() => index.advance(0, 1)).toThrowError(ClosedHandleError);
    expect(() => index.allowed(0)).toThrowError(ClosedHandleError);
  });
});

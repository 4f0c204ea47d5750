/** Thin binding over the guidedgen core.
 *
 * Compilation shells out to the core CLI and consumes its public artifacts:
 * the vocabulary JSON file, the `GGIX` index container, and the metadata
 * sidecar (automaton finals, digests). Mask and advance queries then run
 * locally against the parsed index, bit-for-bit equal to the core engine.
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { parseGgix, type GgixIndex } from "./ggix.js";

export { IndexFormatError, parseGgix, GGIX_MAGIC, GGIX_VERSION } from "./ggix.js";

/** Vocabulary in the core's file schema: dense token->id map plus EOS id. */
export interface VocabularySpec {
  eosId: number;
  tokens: Record<string, number>;
}

export interface CompileOptions {
  /** Command used to reach the core; defaults to `python3 -m guidedgen`. */
  python?: string;
  /** Repo root added to PYTHONPATH so the core resolves without install. */
  corePath?: string;
}

export class CoreInvocationError extends Error {}
export class ClosedHandleError extends Error {}
export class DisallowedTokenError extends Error {
  constructor(
    readonly state: number,
    readonly tokenId: number,
  ) {
    super(`token ${tokenId} is not allowed in state ${state}`);
  }
}

interface IndexMeta {
  pattern: string;
  n_states: number;
  start: number;
  finals: number[];
  fsm_digest: string;
  vocab_digest: string;
  eos_id: number;
  n_tokens: number;
}

/** Handle over a compiled index; immutable, safe for concurrent reads. */
export class BoundIndex {
  private closed = false;

  constructor(
    private readonly index: GgixIndex,
    private readonly meta: IndexMeta,
  ) {}

  get numTokens(): number {
    return this.meta.n_tokens;
  }

  get eosId(): number {
    return this.meta.eos_id;
  }

  get startState(): number {
    return this.meta.start;
  }

  get numStates(): number {
    return this.meta.n_states;
  }

  get fsmDigest(): string {
    return this.index.fsmDigest;
  }

  get vocabDigest(): string {
    return this.index.vocabDigest;
  }

  private ensureOpen(): void {
    if (this.closed) {
      throw new ClosedHandleError("operations on a closed handle");
    }
  }

  private ensureState(state: number): void {
    if (!Number.isInteger(state) || state < 0 || state >= this.meta.n_states) {
      throw new RangeError(`state ${state} out of range for ${this.meta.n_states} states`);
    }
  }

  /** Allowed (token id, end state) pairs at a state; empty for absent keys. */
  allowed(state: number): ReadonlyMap<number, number> {
    this.ensureOpen();
    this.ensureState(state);
    return this.index.entries.get(state) ?? new Map();
  }

  /**
   * Boolean mask over the vocabulary for a state: 1 for every token
   * readable there, and 1 at the EOS position iff the state is final.
   * A Uint8Array multiplies elementwise with logits directly.
   */
  mask(state: number): Uint8Array {
    this.ensureOpen();
    this.ensureState(state);
    const bits = new Uint8Array(this.meta.n_tokens);
    const row = this.index.entries.get(state);
    if (row) {
      for (const tokenId of row.keys()) {
        bits[tokenId] = 1;
      }
    }
    if (this.meta.finals.includes(state)) {
      bits[this.meta.eos_id] = 1;
    }
    return bits;
  }

  maskBoolean(state: number): boolean[] {
    return Array.from(this.mask(state), (b) => b === 1);
  }

  /**
   * Follow one token from a state. EOS requires a final state and leaves
   * the state unchanged (the sequence is finished); any other token must
   * be in the allowed set.
   */
  advance(state: number, tokenId: number): number {
    this.ensureOpen();
    this.ensureState(state);
    if (tokenId === this.meta.eos_id) {
      if (!this.meta.finals.includes(state)) {
        throw new DisallowedTokenError(state, tokenId);
      }
      return state;
    }
    const end = this.index.entries.get(state)?.get(tokenId);
    if (end === undefined) {
      throw new DisallowedTokenError(state, tokenId);
    }
    return end;
  }

  close(): void {
    this.closed = true;
  }
}

function runCore(args: string[], options: CompileOptions): void {
  const command = options.python ?? "python3";
  const env = { ...process.env };
  if (options.corePath) {
    const src = join(options.corePath, "src");
    env.PYTHONPATH = env.PYTHONPATH ? `${src}:${env.PYTHONPATH}` : src;
  }
  try {
    execFileSync(command, ["-m", "guidedgen", ...args], {
      env,
      stdio: ["ignore", "pipe", "pipe"],
    });
  } catch (err) {
    const stderr =
      err && typeof err === "object" && "stderr" in err
        ? String((err as { stderr: unknown }).stderr)
        : String(err);
    throw new CoreInvocationError(stderr.trim() || String(err));
  }
}

/**
 * Compile a regex against a vocabulary through the core CLI and load the
 * resulting index. Core-side failures (bad pattern, invalid vocabulary)
 * surface with the core's message intact.
 */
export function compileIndex(
  pattern: string,
  vocab: VocabularySpec,
  options: CompileOptions = {},
): BoundIndex {
  const dir = mkdtempSync(join(tmpdir(), "guidedgen-"));
  try {
    const vocabPath = join(dir, "vocab.json");
    const indexPath = join(dir, "index.ggix");
    const metaPath = join(dir, "index.meta.json");
    writeFileSync(
      vocabPath,
      JSON.stringify({ eos_id: vocab.eosId, tokens: vocab.tokens }),
    );
    // --flag=value form keeps patterns with a leading "-" out of argparse's way
    runCore(
      [
        "compile",
        `--regex=${pattern}`,
        `--vocab=${vocabPath}`,
        `--out=${indexPath}`,
        `--meta=${metaPath}`,
      ],
      options,
    );
    const index = parseGgix(readFileSync(indexPath));
    const meta = JSON.parse(readFileSync(metaPath, "utf-8")) as IndexMeta;
    return new BoundIndex(index, meta);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

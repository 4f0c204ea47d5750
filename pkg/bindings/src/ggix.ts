/** Decoder for the `GGIX` regex vocabulary index container.
 *
 * Layout (little-endian): magic "GGIX", version u32, fsm digest (32 bytes),
 * vocab digest (32 bytes), then state records until the end of the payload:
 * state u32, count u32, count x (token u32, end-state u32).
 */

export const GGIX_MAGIC = "GGIX";
export const GGIX_VERSION = 1;

export interface GgixIndex {
  fsmDigest: string;
  vocabDigest: string;
  /** state -> (token id -> end state) */
  entries: Map<number, Map<number, number>>;
}

export class IndexFormatError extends Error {}

class Reader {
  private pos = 0;

  constructor(private readonly buf: Buffer) {}

  take(n: number): Buffer {
    if (this.pos + n > this.buf.length) {
      throw new IndexFormatError(
        `truncated payload: ends at byte ${this.buf.length}, needed ${this.pos + n}`,
      );
    }
    const out = this.buf.subarray(this.pos, this.pos + n);
    this.pos += n;
    return out;
  }

  u32(): number {
    return this.take(4).readUInt32LE(0);
  }

  exhausted(): boolean {
    return this.pos === this.buf.length;
  }
}

/** Parse a GGIX payload, validating magic and version. */
export function parseGgix(data: Buffer): GgixIndex {
  const reader = new Reader(data);
  const magic = reader.take(4).toString("latin1");
  if (magic !== GGIX_MAGIC) {
    throw new IndexFormatError(`expected magic ${GGIX_MAGIC}, found ${JSON.stringify(magic)}`);
  }
  const version = reader.u32();
  if (version !== GGIX_VERSION) {
    throw new IndexFormatError(`unsupported container version ${version}`);
  }
  const fsmDigest = reader.take(32).toString("hex");
  const vocabDigest = reader.take(32).toString("hex");
  const entries = new Map<number, Map<number, number>>();
  while (!reader.exhausted()) {
    const state = reader.u32();
    const count = reader.u32();
    const row = new Map<number, number>();
    for (let i = 0; i < count; i++) {
      const token = reader.u32();
      row.set(token, reader.u32());
    }
    entries.set(state, row);
  }
  return { fsmDigest, vocabDigest, entries };
}

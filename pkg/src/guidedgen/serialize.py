"""Versioned binary container for vocabulary indices.

Layout (all integers little-endian, documented in docs/index_format.md):

    magic   4 bytes  "GGIX"
    version u32      currently 1
    fsm digest      32 bytes (sha256)
    vocab digest    32 bytes (sha256)
    records, until end of payload:
        state u32, count u32, then count x (token u32, end-state u32)

States appear in ascending order and tokens ascend within a state, so a
given index always serializes to identical bytes.
"""

from __future__ import annotations

import struct

from .errors import (
    BadMagicError,
    DigestMismatchError,
    TruncatedDataError,
    VersionMismatchError,
)
from .fsm import Fsm
from .index import StateVocabIndex
from .vocab import Vocabulary

INDEX_MAGIC = b"GGIX"
INDEX_VERSION = 1
_HEADER = struct.Struct("<4sI32s32s")
_U32 = struct.Struct("<I")


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedDataError(
                f"payload ends at byte {len(self.data)}, "
                f"needed {self.pos + n}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]

    def exhausted(self) -> bool:
        return self.pos == len(self.data)


def write_header(magic: bytes, version: int, digest_a: bytes, digest_b: bytes) -> bytes:
    return _HEADER.pack(magic, version, digest_a, digest_b)


def read_header(
    reader: _Reader, magic: bytes, version: int
) -> tuple[bytes, bytes]:
    got_magic, got_version, digest_a, digest_b = _HEADER.unpack(reader.take(_HEADER.size))
    if got_magic != magic:
        raise BadMagicError(f"expected magic {magic!r}, found {got_magic!r}")
    if got_version != version:
        raise VersionMismatchError(
            f"unsupported container version {got_version}, expected {version}"
        )
    return digest_a, digest_b


def serialize_index(index: StateVocabIndex) -> bytes:
    """Encode an index; deterministic for a given index."""
    out = [write_header(INDEX_MAGIC, INDEX_VERSION, index.fsm_digest, index.vocab_digest)]
    for state in sorted(index.entries):
        row = index.entries[state]
        out.append(_U32.pack(state))
        out.append(_U32.pack(len(row)))
        for tid in sorted(row):
            out.append(_U32.pack(tid))
            out.append(_U32.pack(row[tid]))
    return b"".join(out)


def deserialize_index(
    data: bytes,
    *,
    fsm: Fsm | None = None,
    vocab: Vocabulary | None = None,
) -> StateVocabIndex:
    """Decode an index, optionally verifying digests against its sources.

    Raises:
        BadMagicError: Not an index payload.
        VersionMismatchError: Unsupported container version.
        DigestMismatchError: fsm/vocab supplied and its digest disagrees.
        TruncatedDataError: Payload ends mid-record.
    """
    reader = _Reader(data)
    fsm_digest, vocab_digest = read_header(reader, INDEX_MAGIC, INDEX_VERSION)
    if fsm is not None and fsm.digest != fsm_digest:
        raise DigestMismatchError("index was built from a different FSM")
    if vocab is not None and vocab.digest != vocab_digest:
        raise DigestMismatchError("index was built from a different vocabulary")
    entries: dict[int, dict[int, int]] = {}
    while not reader.exhausted():
        state = reader.u32()
        count = reader.u32()
        row: dict[int, int] = {}
        for _ in range(count):
            tid = reader.u32()
            row[tid] = reader.u32()
        entries[state] = row
    return StateVocabIndex(
        entries=entries, fsm_digest=fsm_digest, vocab_digest=vocab_digest
    )


# ---------------------------------------------------------------------------
# Parser index container ("GGPX")
# ---------------------------------------------------------------------------

PARSER_INDEX_MAGIC = b"GGPX"
PARSER_INDEX_VERSION = 1


def _write_node(out: list[bytes], node, name_ids: dict[str, int]) -> None:
    out.append(_U32.pack(len(node.entries)))
    for (q, s) in sorted(node.entries):
        row = node.entries[(q, s)]
        out.append(struct.pack("<III", q, s, len(row)))
        for tid in sorted(row):
            d = row[tid]
            out.append(_U32.pack(tid))
            out.append(struct.pack("<III", d.pda_state, d.scanner_state, len(d.candidates)))
            for name in sorted(d.candidates, key=name_ids.__getitem__):
                out.append(_U32.pack(name_ids[name]))
            out.append(struct.pack("<II", d.consumed, len(d.below_known)))
            for sym in d.below_known:
                out.append(_U32.pack(sym))
    out.append(_U32.pack(len(node.markers)))
    for q, s, tid in sorted(node.markers):
        out.append(struct.pack("<III", q, s, tid))
    out.append(_U32.pack(len(node.children)))
    for sym in sorted(node.children):
        out.append(_U32.pack(sym))
        _write_node(out, node.children[sym], name_ids)


def serialize_parser_index(index) -> bytes:
    """Encode a parser index; deterministic for a given index."""
    from .parser_index import ParserIndex  # local to avoid a module cycle

    assert isinstance(index, ParserIndex)
    names = _collect_terminal_names(index.root)
    name_ids = {n: i for i, n in enumerate(names)}
    out = [
        write_header(
            PARSER_INDEX_MAGIC,
            PARSER_INDEX_VERSION,
            index.grammar_digest,
            index.vocab_digest,
        ),
        _U32.pack(index.depth_bound),
        _U32.pack(len(names)),
    ]
    for name in names:
        raw = name.encode("utf-8")
        out.append(_U32.pack(len(raw)))
        out.append(raw)
    _write_node(out, index.root, name_ids)
    return b"".join(out)


def _collect_terminal_names(root) -> list[str]:
    names: set[str] = set()
    stack = [root]
    while stack:
        node = stack.pop()
        for row in node.entries.values():
            for delta in row.values():
                names.update(delta.candidates)
        stack.extend(node.children.values())
    return sorted(names)


def _read_node(reader: _Reader, names: list[str]):
    from .parser_index import TrieNode, _Delta

    node = TrieNode()
    for _ in range(reader.u32()):
        q, s, n_tokens = struct.unpack("<III", reader.take(12))
        row: dict[int, _Delta] = {}
        for _ in range(n_tokens):
            tid = reader.u32()
            pda_state, scanner_state, n_cands = struct.unpack("<III", reader.take(12))
            cands = frozenset(names[reader.u32()] for _ in range(n_cands))
            consumed, n_below = struct.unpack("<II", reader.take(8))
            below = tuple(reader.u32() for _ in range(n_below))
            row[tid] = _Delta(
                pda_state=pda_state,
                scanner_state=scanner_state,
                candidates=cands,
                consumed=consumed,
                below_known=below,
            )
        node.entries[(q, s)] = row
    for _ in range(reader.u32()):
        node.markers.add(struct.unpack("<III", reader.take(12)))
    for _ in range(reader.u32()):
        sym = reader.u32()
        node.children[sym] = _read_node(reader, names)
    return node


def deserialize_parser_index(data: bytes, *, grammar=None, vocab=None):
    """Decode a parser index; digests verified when sources are supplied.

    The result must be bound to its grammar and vocabulary (ParserIndex.bind)
    before queries.
    """
    from .parser_index import ParserIndex

    reader = _Reader(data)
    grammar_digest, vocab_digest = read_header(
        reader, PARSER_INDEX_MAGIC, PARSER_INDEX_VERSION
    )
    if grammar is not None and grammar.digest != grammar_digest:
        raise DigestMismatchError("parser index was built from a different grammar")
    if vocab is not None and vocab.digest != vocab_digest:
        raise DigestMismatchError("parser index was built from a different vocabulary")
    depth_bound = reader.u32()
    names = []
    for _ in range(reader.u32()):
        n = reader.u32()
        names.append(reader.take(n).decode("utf-8"))
    root = _read_node(reader, names)
    if not reader.exhausted():
        raise TruncatedDataError(
            f"{len(reader.data) - reader.pos} trailing bytes after parser index"
        )
    return ParserIndex(
        root=root,
        depth_bound=depth_bound,
        grammar_digest=grammar_digest,
        vocab_digest=vocab_digest,
    )

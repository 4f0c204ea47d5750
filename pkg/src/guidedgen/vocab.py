"""Token vocabularies: dense id -> string maps with a designated EOS token.

File format (UTF-8 JSON): ``{"eos_id": int, "tokens": {"<token>": id, ...}}``
with ids dense in 0..N-1. The EOS token never enters transition indices; it
is handled by termination logic.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

from .errors import VocabularyError


@dataclass(frozen=True)
class Vocabulary:
    """Ordered token strings; position is the token id.

    Attributes:
        tokens: Token strings, indexed by id.
        eos_id: Id of the end-of-sequence token.
    """

    tokens: tuple[str, ...]
    eos_id: int

    def __post_init__(self) -> None:
        if not self.tokens:
            raise VocabularyError("vocabulary is empty")
        if not (0 <= self.eos_id < len(self.tokens)):
            raise VocabularyError(f"eos_id {self.eos_id} out of range")
        seen: set[str] = set()
        for tid, tok in enumerate(self.tokens):
            if tid != self.eos_id and not tok:
                raise VocabularyError(f"token {tid} is empty")
            if tok in seen:
                raise VocabularyError(f"duplicate token string {tok!r}")
            seen.add(tok)

    def __len__(self) -> int:
        return len(self.tokens)

    def __getitem__(self, token_id: int) -> str:
        return self.tokens[token_id]

    def id_of(self, token: str) -> int:
        try:
            return self._ids[token]
        except AttributeError:
            ids = {tok: tid for tid, tok in enumerate(self.tokens)}
            object.__setattr__(self, "_ids", ids)
            return ids[token]

    @property
    def digest(self) -> bytes:
        """32-byte content hash over (eos_id, tokens in id order)."""
        cached = self.__dict__.get("_digest")
        if cached is None:
            h = hashlib.sha256()
            h.update(b"VOC\x01")
            h.update(struct.pack("<II", self.eos_id, len(self.tokens)))
            for tok in self.tokens:
                raw = tok.encode("utf-8")
                h.update(struct.pack("<I", len(raw)))
                h.update(raw)
            cached = h.digest()
            object.__setattr__(self, "_digest", cached)
        return cached

    @classmethod
    def from_mapping(cls, tokens: dict[str, int], eos_id: int) -> "Vocabulary":
        """Build from a token->id mapping, validating id density."""
        n = len(tokens)
        ordered: list[str | None] = [None] * n
        for tok, tid in tokens.items():
            if not isinstance(tid, int) or not (0 <= tid < n):
                raise VocabularyError(f"token id {tid!r} is not dense in 0..{n - 1}")
            if ordered[tid] is not None:
                raise VocabularyError(f"duplicate token id {tid}")
            ordered[tid] = tok
        return cls(tokens=tuple(ordered), eos_id=eos_id)  # type: ignore[arg-type]

    def to_mapping(self) -> dict[str, int]:
        return {tok: tid for tid, tok in enumerate(self.tokens)}


def load_vocabulary(path: str | Path) -> Vocabulary:
    """Load a vocabulary JSON file, validating the schema."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise VocabularyError(f"invalid vocabulary JSON in {path}: {exc}") from exc
    if not isinstance(data, dict) or set(data) != {"eos_id", "tokens"}:
        raise VocabularyError(
            f'vocabulary file {path} must be {{"eos_id": ..., "tokens": ...}}'
        )
    if not isinstance(data["tokens"], dict):
        raise VocabularyError(f"vocabulary file {path}: tokens must be an object")
    return Vocabulary.from_mapping(data["tokens"], data["eos_id"])


def save_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    payload = {"eos_id": vocab.eos_id, "tokens": vocab.to_mapping()}
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )

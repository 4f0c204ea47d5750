"""Token sampling loops, masks, and logits providers.

The guided loop computes scores, applies the boolean mask for the current
FSM state, samples from the renormalized categorical, and advances the state
through the precomputed index entry of the sampled token. EOS is allowed
exactly when the current state is final, so a run that finishes on EOS
always concatenates to a full match of the guiding pattern.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import (
    BindingMismatchError,
    DisallowedTokenError,
    NonFiniteScoreError,
    ProviderConnectionError,
    ProviderError,
    ScoreSizeError,
    SessionFinishedError,
)
from .fsm import Fsm
from .index import StateVocabIndex, allowed
from .vocab import Vocabulary

# A mask is a length-N boolean vector; bit t set means token t may be sampled.
MaskVector = np.ndarray


@runtime_checkable
class LogitsProvider(Protocol):
    """Produces next-token scores for a token-id prefix.

    Implementations are bound to a vocabulary and must return one finite
    score per token id, deterministically for a given seed and prefix.
    """

    vocab: Vocabulary

    def logits(self, prefix: Sequence[int]) -> np.ndarray: ...


class UniformLogitsProvider:
    """Equal score for every token; sampling randomness comes from the seed."""

    def __init__(self, vocab: Vocabulary) -> None:
        self.vocab = vocab

    def logits(self, prefix: Sequence[int]) -> np.ndarray:
        return np.zeros(len(self.vocab), dtype=np.float64)


class AdversarialLogitsProvider:
    """Spikes one (seeded) token per step, mostly landing outside the mask.

    Exercises the renormalization path: nearly all probability mass sits on
    a single token that guidance usually has to zero out.
    """

    def __init__(self, vocab: Vocabulary, seed: int = 0) -> None:
        self.vocab = vocab
        self.seed = seed

    def logits(self, prefix: Sequence[int]) -> np.ndarray:
        rng = np.random.default_rng((self.seed, len(prefix)))
        scores = rng.normal(0.0, 0.1, size=len(self.vocab))
        scores[rng.integers(len(self.vocab))] += 20.0
        return scores


class CyclingLogitsProvider:
    """All mass on a fixed cycle of token ids, one per step. Test helper."""

    def __init__(self, vocab: Vocabulary, cycle: Sequence[int]) -> None:
        self.vocab = vocab
        self.cycle = list(cycle)

    def logits(self, prefix: Sequence[int]) -> np.ndarray:
        scores = np.full(len(self.vocab), -30.0)
        scores[self.cycle[len(prefix) % len(self.cycle)]] = 30.0
        return scores


# ---------------------------------------------------------------------------
# External provider over HTTP
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EndpointConfig:
    """Where and how to reach an external logits provider."""

    url: str
    timeout: float = 10.0


class HttpLogitsProvider:
    """POSTs {"tokens": [...]} and expects {"scores": [... x N]} back."""

    def __init__(self, config: EndpointConfig, vocab: Vocabulary) -> None:
        self.config = config
        self.vocab = vocab

    def logits(self, prefix: Sequence[int]) -> np.ndarray:
        body = json.dumps({"tokens": list(prefix)}).encode("utf-8")
        request = urllib.request.Request(
            self.config.url, data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(request, timeout=self.config.timeout) as resp:
                raw = resp.read()
        except (urllib.error.URLError, OSError, TimeoutError) as exc:
            raise ProviderConnectionError(
                f"provider at {self.config.url} unreachable: {exc}"
            ) from exc
        try:
            payload = json.loads(raw.decode("utf-8"))
            scores = payload["scores"]
        except (json.JSONDecodeError, UnicodeDecodeError, KeyError, TypeError) as exc:
            raise ProviderError(f"malformed provider response: {exc!r}") from exc
        arr = np.asarray(scores, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] != len(self.vocab):
            raise ScoreSizeError(
                f"provider returned {arr.size} scores, expected {len(self.vocab)}"
            )
        if not np.all(np.isfinite(arr)):
            raise NonFiniteScoreError("provider returned non-finite scores")
        return arr


def external_provider_client(
    config: EndpointConfig, vocab: Vocabulary
) -> HttpLogitsProvider:
    """Connect to an external provider and negotiate the vocabulary size.

    The handshake requests scores for the empty prefix and validates the
    response shape, so size mismatches surface at bind time.
    """
    provider = HttpLogitsProvider(config, vocab)
    provider.logits([])
    return provider


# ---------------------------------------------------------------------------
# Sampling configuration and sessions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplingConfig:
    """Knobs of the sampling loops.

    Attributes:
        max_tokens: Cap on emitted tokens, at least 1.
        temperature: Softmax temperature, strictly positive.
        strategy: "multinomial" or "greedy" (greedy breaks ties by lowest id).
        seed: Seed of the sampling RNG.
    """

    max_tokens: int
    temperature: float = 1.0
    strategy: str = "multinomial"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if not (self.temperature > 0):
            raise ValueError("temperature must be > 0")
        if self.strategy not in ("multinomial", "greedy"):
            raise ValueError(f"unknown strategy {self.strategy!r}")


class GenerationStatus(Enum):
    ACTIVE = "active"
    FINISHED_EOS = "finished-eos"
    FINISHED_MAX_TOKENS = "finished-max-tokens"
    DEAD_END = "dead-end"


@dataclass
class GenerationSession:
    """Mutable cursor of one guided run.

    Invariant: replaying ``emitted`` through the index from the FSM start
    state reproduces ``current_state``. Once the status leaves ACTIVE the
    session rejects further sampling and advancing.
    """

    current_state: int
    emitted: list[int] = field(default_factory=list)
    status: GenerationStatus = GenerationStatus.ACTIVE
    rng_seed: int = 0

    def text(self, vocab: Vocabulary) -> str:
        return "".join(vocab[t] for t in self.emitted)


def build_mask(
    index: StateVocabIndex, state: int, fsm: Fsm, vocab: Vocabulary
) -> MaskVector:
    """Boolean mask of the tokens allowed at an FSM state.

    Bits are set for every indexed token at ``state``; the EOS bit is set
    iff the state is final. The vocabulary supplies the mask length and the
    EOS position, which the index itself does not record.
    """
    mask = np.zeros(len(vocab), dtype=bool)
    row = index.entries.get(state)
    if row is not None:
        mask[list(row.keys())] = True
    if state in fsm.finals:
        mask[vocab.eos_id] = True
    return mask


def _softmax(scores: np.ndarray, temperature: float) -> np.ndarray:
    scaled = scores / temperature
    scaled = scaled - np.max(scaled)
    probs = np.exp(scaled)
    return probs / probs.sum()


def _pick(
    rng: np.random.Generator,
    scores: np.ndarray,
    mask: MaskVector | None,
    cfg: SamplingConfig,
) -> int:
    if mask is not None:
        scores = np.where(mask, scores, -np.inf)
    if cfg.strategy == "greedy":
        return int(np.argmax(scores))
    if mask is not None:
        ids = np.flatnonzero(mask)
        probs = _softmax(scores[ids], cfg.temperature)
        return int(ids[rng.choice(len(ids), p=probs)])
    probs = _softmax(scores, cfg.temperature)
    return int(rng.choice(len(scores), p=probs))


def _provider_logits(
    provider: LogitsProvider, prefix: Sequence[int], step: int
) -> np.ndarray:
    try:
        return np.asarray(provider.logits(prefix), dtype=np.float64)
    except ProviderError as exc:
        raise type(exc)(str(exc), step=step) from exc


def sample_tokens(provider: LogitsProvider, cfg: SamplingConfig) -> list[int]:
    """Unguided sampling loop: draw up to max_tokens, stopping before EOS."""
    rng = np.random.default_rng(cfg.seed)
    eos = provider.vocab.eos_id
    out: list[int] = []
    for step in range(cfg.max_tokens):
        scores = _provider_logits(provider, out, step)
        token = _pick(rng, scores, None, cfg)
        if token == eos:
            break
        out.append(token)
    return out


def guided_sample_tokens(
    provider: LogitsProvider,
    index: StateVocabIndex,
    fsm: Fsm,
    cfg: SamplingConfig,
) -> GenerationSession:
    """Guided sampling loop over a regex index; returns the finished session.

    Raises:
        BindingMismatchError: index digests disagree with fsm or the
            provider's vocabulary.
    """
    vocab = provider.vocab
    if index.fsm_digest != fsm.digest:
        raise BindingMismatchError("index was not built from this FSM")
    if index.vocab_digest != vocab.digest:
        raise BindingMismatchError("index was not built from this vocabulary")
    rng = np.random.default_rng(cfg.seed)
    session = GenerationSession(current_state=fsm.start, rng_seed=cfg.seed)
    for step in range(cfg.max_tokens):
        mask = build_mask(index, session.current_state, fsm, vocab)
        if not mask.any():
            session.status = GenerationStatus.DEAD_END
            return session
        scores = _provider_logits(provider, session.emitted, step)
        token = _pick(rng, scores, mask, cfg)
        if token == vocab.eos_id:
            session.status = GenerationStatus.FINISHED_EOS
            return session
        session.emitted.append(token)
        session.current_state = index.entries[session.current_state][token]
    session.status = GenerationStatus.FINISHED_MAX_TOKENS
    return session


def advance(
    session: GenerationSession,
    token_id: int,
    index: StateVocabIndex,
    fsm: Fsm,
    vocab: Vocabulary,
) -> GenerationSession:
    """Feed one token to an active session, updating state and status.

    EOS finishes the session and requires the current state to be final;
    any other token must be allowed at the current state.

    Raises:
        SessionFinishedError: session already terminated.
        DisallowedTokenError: token not in the allowed set at this state.
    """
    if session.status is not GenerationStatus.ACTIVE:
        raise SessionFinishedError(f"session already {session.status.value}")
    if token_id == vocab.eos_id:
        if session.current_state not in fsm.finals:
            raise DisallowedTokenError(session.current_state, token_id)
        session.status = GenerationStatus.FINISHED_EOS
        return session
    row = index.entries.get(session.current_state)
    if row is None or token_id not in row:
        raise DisallowedTokenError(session.current_state, token_id)
    session.emitted.append(token_id)
    session.current_state = row[token_id]
    return session


def replay_state(index: StateVocabIndex, fsm: Fsm, emitted: Sequence[int]) -> int:
    """State reached by replaying emitted tokens through the index."""
    state = fsm.start
    for token_id in emitted:
        state = index.entries[state][token_id]
    return state

"""Exception hierarchy shared across the package."""

from __future__ import annotations


class GuidedGenError(Exception):
    """Base class for all package-specific errors."""


# ---------------------------------------------------------------------------
# Regex compilation
# ---------------------------------------------------------------------------


class RegexError(GuidedGenError, ValueError):
    """Base class for regex compilation failures."""


class RegexParseError(RegexError):
    """Malformed pattern. Carries the offending position."""

    def __init__(self, message: str, pattern: str, position: int) -> None:
        super().__init__(f"{message} at position {position} in {pattern!r}")
        self.pattern = pattern
        self.position = position


class UnsupportedConstructError(RegexError):
    """Syntactically valid construct outside the supported subset."""

    def __init__(self, construct: str, pattern: str, position: int) -> None:
        super().__init__(
            f"unsupported regex construct: {construct} "
            f"at position {position} in {pattern!r}"
        )
        self.construct = construct
        self.pattern = pattern
        self.position = position


# ---------------------------------------------------------------------------
# Vocabulary and index containers
# ---------------------------------------------------------------------------


class VocabularyError(GuidedGenError, ValueError):
    """Invalid vocabulary contents or file."""


class IndexFormatError(GuidedGenError):
    """Base class for index container decode failures."""


class BadMagicError(IndexFormatError):
    """Payload does not start with the expected magic bytes."""


class VersionMismatchError(IndexFormatError):
    """Container version differs from the supported one."""


class DigestMismatchError(IndexFormatError):
    """Embedded digest disagrees with a supplied FSM, grammar, or vocabulary."""


class TruncatedDataError(IndexFormatError):
    """Payload ends before the declared records do."""


# ---------------------------------------------------------------------------
# Generation engine
# ---------------------------------------------------------------------------


class ProviderError(GuidedGenError):
    """Logits provider failed. ``step`` is set when raised inside a sampling loop."""

    def __init__(self, message: str, step: int | None = None) -> None:
        if step is not None:
            message = f"{message} (at sampling step {step})"
        super().__init__(message)
        self.step = step


class ProviderConnectionError(ProviderError):
    """External provider endpoint unreachable or misbehaving at transport level."""


class ScoreSizeError(ProviderError):
    """Provider returned a score vector of the wrong length."""


class NonFiniteScoreError(ProviderError):
    """Provider returned NaN or infinite scores."""


class BindingMismatchError(GuidedGenError):
    """Index digests do not match the FSM/grammar or vocabulary it is used with."""


class DisallowedTokenError(GuidedGenError):
    """A token outside the allowed set was fed to a session."""

    def __init__(self, state: object, token_id: int) -> None:
        super().__init__(f"token {token_id} is not allowed in state {state}")
        self.state = state
        self.token_id = token_id


class SessionFinishedError(GuidedGenError):
    """Operation on a session that already terminated."""


# ---------------------------------------------------------------------------
# Grammar guidance
# ---------------------------------------------------------------------------


class GrammarError(GuidedGenError, ValueError):
    """Base class for grammar handling failures."""


class GrammarFormatError(GrammarError):
    """Malformed grammar file. Carries the offending line number."""

    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class GrammarConflictError(GrammarError):
    """Grammar is not LALR(1); lists the conflicting items."""

    def __init__(self, conflicts: list[str]) -> None:
        super().__init__(
            "grammar is not LALR(1):\n" + "\n".join(f"  {c}" for c in conflicts)
        )
        self.conflicts = conflicts


class UnindexableConfigError(GuidedGenError):
    """Parser configuration exceeds the index depth bound and fallback is disabled."""

"""Guided text generation with precomputed vocabulary indices.

Compiles regular expressions (and LALR(1) grammars) against a token
vocabulary so that each step of a constrained sampling loop only has to
look up the current automaton state instead of rescanning the vocabulary.
"""

from .engine import (
    AdversarialLogitsProvider,
    EndpointConfig,
    GenerationSession,
    GenerationStatus,
    SamplingConfig,
    UniformLogitsProvider,
    advance,
    build_mask,
    external_provider_client,
    guided_sample_tokens,
    sample_tokens,
)
from .fsm import Fsm, TransitionTable, compile_regex
from .grammar import Grammar, load_grammar, parse_grammar
from .index import StateVocabIndex, allowed, build_index, find_sub_sequences
from .lalr import Pda, build_lalr_tables, pda_preimage, tables_to_pda
from .parser_index import (
    GrammarGuide,
    GrammarSession,
    ParserConfig,
    ParserIndex,
    build_parser_index,
    guided_sample_tokens_grammar,
    parser_allowed,
)
from .scanner import CombinedFsm, combine_fsms, scan_candidates
from .serialize import (
    deserialize_index,
    deserialize_parser_index,
    serialize_index,
    serialize_parser_index,
)
from .vocab import Vocabulary, load_vocabulary, save_vocabulary

__version__ = "0.1.0"

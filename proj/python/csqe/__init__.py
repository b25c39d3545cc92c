"""BM25 and RM3 retrieval with LLM query expansion (KEQE and CSQE)."""

from ._core import (
    BackendError,
    ConfigError,
    DataError,
    Error,
    Index,
    MockBackend,
    build_csqe_prompt,
    build_keqe_prompt,
    compose_expanded_query,
    csqe_pipeline,
    evaluate,
    keqe_pipeline,
    parse_csqe_response,
    porter_stem,
    prompt_hash,
    tokenize,
    truncate_tokens,
    verify_extraction,
)

__all__ = [
    "BackendError",
    "ConfigError",
    "DataError",
    "Error",
    "Index",
    "MockBackend",
    "build_csqe_prompt",
    "build_keqe_prompt",
    "compose_expanded_query",
    "csqe_pipeline",
    "evaluate",
    "keqe_pipeline",
    "parse_csqe_response",
    "porter_stem",
    "prompt_hash",
    "tokenize",
    "truncate_tokens",
    "verify_extraction",
]

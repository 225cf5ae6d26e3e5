"""Prompt-mining engine for text-to-image bias discovery.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from ._minegap import (  # noqa: F401
    BackendError,
    ParseError,
    assign_categories,
    bias_score,
    build_similarity_matrix,
    cosine_similarity,
    count_words,
    derive_random_count,
    kth_smallest,
    mse_objective,
    normalize_prompt_key,
    parse_prompt_list,
    pearson_r,
    percentile_index,
    sim_mine,
    sim_score_prompt,
    sim_token_vector,
    spearman_rho,
)

__all__ = [
    "BackendError",
    "ParseError",
    "assign_categories",
    "bias_score",
    "build_similarity_matrix",
    "cosine_similarity",
    "count_words",
    "derive_random_count",
    "kth_smallest",
    "mse_objective",
    "normalize_prompt_key",
    "parse_prompt_list",
    "pearson_r",
    "percentile_index",
    "sim_mine",
    "sim_score_prompt",
    "sim_token_vector",
    "spearman_rho",
]

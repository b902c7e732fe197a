"""Table recognition metrics: structure accuracy and batch TEDS.

Structure accuracy skips samples whose ground truth is longer than the
decoder's token budget (500 by default); TEDS always covers every sample.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..errors import DocstructError, ValidationError
from ..table.tokens import merge_token_strings
from ..teds import FULL, STRUCT_ONLY, PreparedTree, build_tree, similarity

DEFAULT_MAX_TOKENS = 500


@dataclass(frozen=True)
class TableSample:
    """One prediction/ground-truth pair.

    Token lists are raw strings in either vocabulary; ``pred_html`` is
    ``None`` when the prediction could not be turned into HTML at all.
    """

    sample_id: str
    pred_tokens: tuple[str, ...]
    gt_tokens: tuple[str, ...]
    pred_html: str | None
    gt_html: str


@dataclass(frozen=True)
class SampleResult:
    sample_id: str
    gt_length: int
    skipped: bool
    exact_match: bool
    teds: float | None
    teds_struct: float
    pred_failed: bool


def gt_token_length(sample: TableSample) -> int:
    """Ground-truth length measured in the merged vocabulary."""
    return len(merge_token_strings(sample.gt_tokens))


def structure_accuracy(samples: Sequence[TableSample], max_tokens: int = DEFAULT_MAX_TOKENS) -> tuple[float, int, int]:
    """Exact structure-match rate over samples within the token budget.

    Returns ``(accuracy, n_evaluated, n_skipped)``; accuracy is 0 when no
    sample qualifies.
    """
    hits = evaluated = skipped = 0
    for s in samples:
        gt = merge_token_strings(s.gt_tokens)
        if len(gt) > max_tokens:
            skipped += 1
            continue
        evaluated += 1
        hits += merge_token_strings(s.pred_tokens) == gt
    return (hits / evaluated if evaluated else 0.0), evaluated, skipped


def _gt_tree(sample: TableSample) -> PreparedTree:
    try:
        return PreparedTree(build_tree(sample.gt_html))
    except DocstructError as exc:
        raise ValidationError(f"sample {sample.sample_id}: ground truth does not parse: {exc}") from exc


def score_sample(sample: TableSample, max_tokens: int = DEFAULT_MAX_TOKENS, struct_only: bool = False) -> SampleResult:
    gt_tree = _gt_tree(sample)
    gt = merge_token_strings(sample.gt_tokens)
    skipped = len(gt) > max_tokens
    exact = (not skipped) and merge_token_strings(sample.pred_tokens) == gt
    pred_tree = None
    if sample.pred_html is not None:
        try:
            pred_tree = PreparedTree(build_tree(sample.pred_html))
        except DocstructError:
            pred_tree = None
    if pred_tree is None:
        return SampleResult(sample.sample_id, len(gt), skipped, exact, None if struct_only else 0.0, 0.0, True)
    full = None if struct_only else similarity(pred_tree, gt_tree, FULL)
    struct = similarity(pred_tree, gt_tree, STRUCT_ONLY)
    return SampleResult(sample.sample_id, len(gt), skipped, exact, full, struct, False)


def _score_chunk(args) -> list[SampleResult]:
    chunk, max_tokens, struct_only = args
    return [score_sample(s, max_tokens, struct_only) for s in chunk]


def score_samples(
    samples: Sequence[TableSample],
    max_tokens: int = DEFAULT_MAX_TOKENS,
    struct_only: bool = False,
    workers: int = 1,
) -> list[SampleResult]:
    """Score every sample, optionally across worker processes.

    Results come back in input order whatever the worker count.
    """
    if workers <= 1 or len(samples) < 2:
        return [score_sample(s, max_tokens, struct_only) for s in samples]
    n_chunks = workers * 4
    size = max(1, math.ceil(len(samples) / n_chunks))
    chunks = [(samples[i:i + size], max_tokens, struct_only) for i in range(0, len(samples), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [r for part in pool.map(_score_chunk, chunks) for r in part]


def mean(values: Iterable[float]) -> float:
    """Order-independent mean (exactly rounded sum); 0 for no values."""
    vals = list(values)
    return math.fsum(vals) / len(vals) if vals else 0.0


def batch_teds(samples: Sequence[TableSample], struct_only: bool = False, workers: int = 1) -> tuple[float, list[float]]:
    """Mean TEDS (or TEDS-Struct) over all samples, no length filter."""
    results = score_samples(samples, struct_only=struct_only, workers=workers)
    per_sample = [r.teds_struct if struct_only else r.teds for r in results]
    return mean(per_sample), per_sample

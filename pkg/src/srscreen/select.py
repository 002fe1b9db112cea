"""Token ranking by two-sample t-statistics and feature-set assembly.

Each vocabulary column is scored by the Welch statistic of its TF-IDF
values between the relevant and irrelevant classes, zeros included (an
absent token has TF-IDF 0, and dropping those rows would bias the test
toward rare tokens).  Feature sets are the 15 cluster columns, optionally
followed by the top-N tokens by absolute statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .vectorize import TfidfMatrix, Vocabulary


class SelectError(ValueError):
    pass


@dataclass(frozen=True)
class TokenScore:
    token: str
    column: int
    t_stat: float
    abs_rank: int


@dataclass(frozen=True)
class TokenRanking:
    """All vocabulary columns ranked by |t|, with training-fold provenance."""

    scores: tuple[TokenScore, ...]
    n_rows: int
    n_relevant: int

    def top(self, n: int, exclude_columns: frozenset[int] = frozenset()) -> list[TokenScore]:
        picked = []
        for score in self.scores:
            if score.column in exclude_columns:
                continue
            picked.append(score)
            if len(picked) == n:
                return picked
        raise SelectError(
            f"requested top {n} tokens but only {len(picked)} are eligible"
        )


@dataclass(frozen=True)
class FeatureSet:
    """Deterministic column layout: the 15 clusters first, then ranked tokens."""

    cluster_names: tuple[str, ...]
    token_columns: tuple[int, ...]
    token_names: tuple[str, ...]
    n_top: int

    @property
    def n_features(self) -> int:
        return len(self.cluster_names) + len(self.token_columns)


def _class_moments(weights: sp.csr_matrix, mask: np.ndarray) -> tuple[int, np.ndarray, np.ndarray]:
    """(n, per-column mean, per-column sample variance) over masked rows."""
    n = int(mask.sum())
    rows = weights[mask]
    sums = np.asarray(rows.sum(axis=0)).ravel()
    sumsq = np.asarray(rows.multiply(rows).sum(axis=0)).ravel()
    mean = sums / n
    if n >= 2:
        var = (sumsq - n * mean * mean) / (n - 1)
        np.maximum(var, 0.0, out=var)
    else:
        var = np.zeros_like(mean)
    return n, mean, var


def t_statistics(
    tfidf: TfidfMatrix, labels: np.ndarray, denominator: str = "welch_se"
) -> np.ndarray:
    """Vector of per-column statistics; relevant class minus irrelevant.

    denominator="welch_se" divides the mean difference by
    sqrt(s1^2/n1 + s2^2/n2); "unpooled_variance" divides by the variance
    sum itself (no square root), for comparison purposes.

    Columns where both classes have zero variance score 0 when the means
    agree and +/-inf when they differ (constant, perfectly separating
    columns outrank every finite statistic).
    """
    if denominator not in ("welch_se", "unpooled_variance"):
        raise SelectError(f"unknown denominator mode {denominator!r}")
    labels = np.asarray(labels)
    if labels.shape[0] != tfidf.weights.shape[0]:
        raise SelectError("labels length does not match matrix rows")
    rel = labels == 1
    irr = ~rel
    if not rel.any() or not irr.any():
        raise SelectError("both classes must be present to score tokens")
    n1, mean1, var1 = _class_moments(tfidf.weights, rel)
    n2, mean2, var2 = _class_moments(tfidf.weights, irr)
    diff = mean1 - mean2
    denom = var1 / n1 + var2 / n2
    if denominator == "welch_se":
        denom = np.sqrt(denom)
    t = np.zeros_like(diff)
    nonzero = denom > 0
    t[nonzero] = diff[nonzero] / denom[nonzero]
    degenerate = ~nonzero & (diff != 0)
    t[degenerate] = np.sign(diff[degenerate]) * math.inf
    return t


def t_statistic(
    tfidf: TfidfMatrix, labels: np.ndarray, column: int, denominator: str = "welch_se"
) -> float:
    return float(t_statistics(tfidf, labels, denominator)[column])


def rank_tokens(
    tfidf: TfidfMatrix,
    labels: np.ndarray,
    vocab: Vocabulary,
    denominator: str = "welch_se",
) -> TokenRanking:
    """Score every vocabulary column and rank by |t| descending.

    Ties break lexicographically by token.  The ranking records how many
    training rows produced it so downstream assembly can reject scores
    computed on the wrong fold.
    """
    if len(vocab) != tfidf.weights.shape[1]:
        raise SelectError("vocabulary size does not match matrix width")
    t = t_statistics(tfidf, labels, denominator)
    order = sorted(range(len(vocab)), key=lambda c: (-abs(t[c]), vocab.tokens[c]))
    scores = tuple(
        TokenScore(token=vocab.tokens[c], column=c, t_stat=float(t[c]), abs_rank=r + 1)
        for r, c in enumerate(order)
    )
    labels = np.asarray(labels)
    return TokenRanking(scores=scores, n_rows=len(labels), n_relevant=int((labels == 1).sum()))


def assemble_features(
    cluster_m: TfidfMatrix,
    tfidf: TfidfMatrix,
    ranking: TokenRanking,
    n_top: int,
    exclude_columns: frozenset[int] = frozenset(),
) -> tuple[FeatureSet, np.ndarray]:
    """Build the (15 + n_top)-column training feature matrix.

    exclude_columns removes cluster-member token columns from top-N
    eligibility (the default pipeline behaviour); pass an empty set to let
    cluster members compete for token slots too.
    """
    n_rows = tfidf.weights.shape[0]
    if cluster_m.weights.shape[0] != n_rows:
        raise SelectError("cluster matrix and token matrix row counts differ")
    if ranking.n_rows != n_rows:
        raise SelectError(
            f"token ranking was computed on {ranking.n_rows} rows but the"
            f" training matrix has {n_rows}; scores must come from the same"
            " training fold"
        )
    if n_top < 0:
        raise SelectError(f"n_top must be >= 0, got {n_top}")
    if n_top > len(ranking.scores):
        raise SelectError(
            f"n_top={n_top} exceeds the vocabulary size {len(ranking.scores)}"
        )
    picked = ranking.top(n_top, exclude_columns) if n_top else []
    feature_set = FeatureSet(
        cluster_names=cluster_m.feature_names,
        token_columns=tuple(s.column for s in picked),
        token_names=tuple(s.token for s in picked),
        n_top=n_top,
    )
    return feature_set, apply_features(feature_set, cluster_m, tfidf)


def apply_features(
    feature_set: FeatureSet, cluster_m: TfidfMatrix, tfidf: TfidfMatrix
) -> np.ndarray:
    """Materialize the selected columns for any row set (train or validation)."""
    parts = [cluster_m.weights.toarray()]
    if feature_set.token_columns:
        parts.append(tfidf.weights[:, list(feature_set.token_columns)].toarray())
    return np.ascontiguousarray(np.hstack(parts))

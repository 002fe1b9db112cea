"""Evaluation: ROC/PR curves, cross-validation, workload, audit.

Curves sweep the classification cutoff over every distinct predicted
probability (plus sentinels).  ROC AUC uses the trapezoidal rule, which
equals the tie-adjusted pair-counting statistic.  PR curves anchor
precision at recall 0 to the top-scored block and stop at the first
cutoff that reaches full recall.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .boolquery import BooleanPoint, boolean_point
from .corpus import Corpus, CorpusError, RELEVANT, stratified_kfold, subsample_training
from .forest import ForestConfig, ForestError, train_forest
from . import pipeline

logger = logging.getLogger(__name__)


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class ScoredDoc:
    doc_id: str
    label: str
    p_hat: float

    def __post_init__(self):
        if not 0.0 <= self.p_hat <= 1.0:
            raise EvalError(f"p_hat must be in [0, 1], got {self.p_hat}")


@dataclass(frozen=True)
class Curve:
    """Ordered curve points with cutoffs and trapezoidal area."""

    kind: str  # "roc" or "pr"
    cutoffs: tuple[float, ...]
    points: tuple[tuple[float, float], ...]
    auc: float


def _sorted_arrays(scored: list[ScoredDoc]) -> tuple[np.ndarray, np.ndarray]:
    """(scores desc, is_relevant) sorted by score descending."""
    scores = np.array([s.p_hat for s in scored], dtype=np.float64)
    rel = np.array([s.label == RELEVANT for s in scored], dtype=bool)
    order = np.argsort(-scores, kind="stable")
    return scores[order], rel[order]


def _cumulative_counts(scores: np.ndarray, rel: np.ndarray):
    """Per distinct cutoff (descending): cutoff, cumulative TP and FP."""
    boundaries = np.flatnonzero(np.diff(scores) != 0)
    ends = np.concatenate([boundaries, [len(scores) - 1]])
    tp = np.cumsum(rel)[ends]
    fp = np.cumsum(~rel)[ends]
    return scores[ends], tp, fp


def roc_curve(scored: list[ScoredDoc]) -> Curve:
    """ROC points from (0,0) to (1,1) over descending cutoffs.

    Tied scores collapse into single points, so the trapezoidal AUC equals
    pair counting with ties worth one half.
    """
    scores, rel = _sorted_arrays(scored)
    n_rel = int(rel.sum())
    n_irr = len(rel) - n_rel
    if n_rel == 0 or n_irr == 0:
        raise EvalError("ROC needs both classes present")
    cutoffs, tp, fp = _cumulative_counts(scores, rel)
    xs = [0.0]
    ys = [0.0]
    cuts = [math.inf]
    for c, t, f in zip(cutoffs, tp, fp):
        cuts.append(float(c))
        xs.append(float(f / n_irr))
        ys.append(float(t / n_rel))
    if xs[-1] != 1.0 or ys[-1] != 1.0:
        cuts.append(-math.inf)
        xs.append(1.0)
        ys.append(1.0)
    auc = float(np.trapezoid(ys, xs))
    return Curve(kind="roc", cutoffs=tuple(cuts), points=tuple(zip(xs, ys)), auc=auc)


def pr_curve(scored: list[ScoredDoc]) -> Curve:
    """Precision/recall at each distinct cutoff, descending.

    The recall-0 anchor takes the precision of the top-scored block;
    cutoffs past the first one reaching recall 1.0 are dropped.  AUC is
    the trapezoid over recall.
    """
    scores, rel = _sorted_arrays(scored)
    n_rel = int(rel.sum())
    if n_rel == 0:
        raise EvalError("PR needs at least one relevant document")
    cutoffs, tp, fp = _cumulative_counts(scores, rel)
    anchor_precision = tp[0] / (tp[0] + fp[0])
    cuts = [math.inf]
    recalls = [0.0]
    precisions = [float(anchor_precision)]
    for c, t, f in zip(cutoffs, tp, fp):
        cuts.append(float(c))
        recalls.append(float(t / n_rel))
        precisions.append(float(t / (t + f)))
        if t == n_rel:
            break
    auc = float(np.trapezoid(precisions, recalls))
    return Curve(
        kind="pr",
        cutoffs=tuple(cuts),
        points=tuple(zip(recalls, precisions)),
        auc=auc,
    )


@dataclass(frozen=True)
class WorkloadResult:
    """Manual-reading arithmetic at a target recall."""

    target_recall: float
    cutoff: float
    flagged_count: int
    achieved_recall: float
    precision_at: float
    reading_reduction: float
    notes: tuple[str, ...] = ()


def average_precision(scored: list[ScoredDoc]) -> float:
    """Alternate PR summary: precision-weighted recall increments.

    Offered alongside the trapezoidal PR AUC since the two integrators
    disagree slightly on stepped curves.
    """
    scores, rel = _sorted_arrays(scored)
    n_rel = int(rel.sum())
    if n_rel == 0:
        raise EvalError("average precision needs at least one relevant document")
    _, tp, fp = _cumulative_counts(scores, rel)
    ap = 0.0
    prev_tp = 0
    for t, f in zip(tp, fp):
        if t > prev_tp:
            ap += (t - prev_tp) / n_rel * (t / (t + f))
        prev_tp = t
    return float(ap)


def workload(scored: list[ScoredDoc], target_recall: float) -> WorkloadResult:
    """Largest cutoff whose recall meets the target; reports reading saved.

    reading_reduction = 1 - flagged/N.  Targets above 1.0 are clamped with
    a warning note.
    """
    if target_recall < 0:
        raise EvalError(f"target_recall must be >= 0, got {target_recall}")
    notes: list[str] = []
    if target_recall > 1.0:
        notes.append(f"target recall {target_recall} clamped to 1.0")
        logger.warning("target recall %s exceeds 1.0; clamped", target_recall)
        target_recall = 1.0
    scores, rel = _sorted_arrays(scored)
    n_rel = int(rel.sum())
    n = len(scored)
    if n_rel == 0:
        raise EvalError("workload needs at least one relevant document")
    cutoffs, tp, fp = _cumulative_counts(scores, rel)
    # Sentinel above the maximum score: flags nothing, recall 0.
    if target_recall == 0.0:
        return WorkloadResult(
            target_recall=0.0,
            cutoff=math.inf,
            flagged_count=0,
            achieved_recall=0.0,
            precision_at=math.nan,
            reading_reduction=1.0,
            notes=tuple(notes + ["cutoff above all scores: nothing flagged"]),
        )
    for c, t, f in zip(cutoffs, tp, fp):
        recall = t / n_rel
        if recall >= target_recall:
            flagged = int(t + f)
            return WorkloadResult(
                target_recall=target_recall,
                cutoff=float(c),
                flagged_count=flagged,
                achieved_recall=float(recall),
                precision_at=float(t / flagged),
                reading_reduction=1.0 - flagged / n,
                notes=tuple(notes),
            )
    raise AssertionError("recall 1.0 is always reachable at the minimum score")


@dataclass(frozen=True)
class AuditEntry:
    doc_id: str
    label: str
    p_hat: float
    direction: str


def audit_disagreements(
    scored: list[ScoredDoc], high: float = 0.9, low: float = 0.1
) -> list[AuditEntry]:
    """Documents whose model confidence contradicts their manual label.

    Returns irrelevant-labeled documents with p_hat >= high and
    relevant-labeled ones with p_hat <= low, strongest disagreement first.
    """
    if not high > low:
        raise EvalError(f"high ({high}) must exceed low ({low})")
    entries = []
    for s in scored:
        if s.label != RELEVANT and s.p_hat >= high:
            entries.append(
                AuditEntry(s.doc_id, s.label, s.p_hat, "labeled-irrelevant, predicted-relevant")
            )
        elif s.label == RELEVANT and s.p_hat <= low:
            entries.append(
                AuditEntry(s.doc_id, s.label, s.p_hat, "labeled-relevant, predicted-irrelevant")
            )
    entries.sort(key=lambda e: (-abs(e.p_hat - 0.5), e.doc_id))
    return entries


@dataclass(frozen=True)
class OperatingPoint:
    cutoff: float
    precision: float
    recall: float
    fpr: float


def operating_points(scored: list[ScoredDoc], cutoffs: tuple[float, ...]) -> list[OperatingPoint]:
    scores = np.array([s.p_hat for s in scored])
    rel = np.array([s.label == RELEVANT for s in scored])
    n_rel = int(rel.sum())
    n_irr = len(rel) - n_rel
    out = []
    for cutoff in cutoffs:
        flagged = scores >= cutoff
        tp = int((flagged & rel).sum())
        fp = int((flagged & ~rel).sum())
        out.append(
            OperatingPoint(
                cutoff=cutoff,
                precision=tp / (tp + fp) if tp + fp else math.nan,
                recall=tp / n_rel if n_rel else math.nan,
                fpr=fp / n_irr if n_irr else math.nan,
            )
        )
    return out


_DEFAULT_CUTOFF_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))


@dataclass(frozen=True)
class EvalReport:
    """Cross-validated evaluation of one model recipe."""

    model_id: str
    seed: int
    k: int
    n_documents: int
    roc: Curve | None
    pr: Curve | None
    points: tuple[OperatingPoint, ...]
    workload_result: WorkloadResult | None
    fold_auc_roc: tuple[float, ...]
    fold_auc_pr: tuple[float, ...]
    boolean: BooleanPoint | None = None
    average_precision: float | None = None
    scored: tuple[ScoredDoc, ...] = field(default=(), repr=False)
    notes: tuple[str, ...] = ()

    @property
    def has_curves(self) -> bool:
        return self.roc is not None


def cross_validate(
    corpus: Corpus,
    recipe: pipeline.ModelRecipe,
    k: int,
    seed: int,
    forest_config: ForestConfig | None = None,
    assets: pipeline.Assets | None = None,
    target_recall: float = 0.8,
    selection: str = "nested",
) -> EvalReport:
    """k-fold cross-validated report for one model recipe.

    With selection="nested" (the default), vocabulary, idf, and token
    selection are fitted on each fold's training rows only; validation
    scores from all folds are pooled into single ROC/PR curves.
    selection="pooled" fits them once on the whole corpus instead, which
    leaks selection information into validation and exists only for
    comparison runs.  The keyword model needs no training, so it is
    evaluated once on the full corpus and reports a single operating
    point with no AUC.
    """
    if selection not in ("nested", "pooled"):
        raise EvalError(f"unknown selection mode {selection!r}")
    corpus.require_labeled()
    assets = assets or pipeline.Assets.default()
    if recipe.kind == "model1":
        point = boolean_point(corpus, assets.query)
        return EvalReport(
            model_id=recipe.model_id,
            seed=seed,
            k=k,
            n_documents=corpus.n,
            roc=None,
            pr=None,
            points=(),
            workload_result=None,
            fold_auc_roc=(),
            fold_auc_pr=(),
            boolean=point,
            notes=(
                "no AUC: the keyword query is deterministic and yields a single"
                " operating point",
                "evaluated on the full labeled corpus; no training folds needed",
            ),
        )

    base_config = forest_config or ForestConfig()
    plan = stratified_kfold(corpus, k, seed)
    token_seqs = pipeline.preprocess_all(corpus, assets.lemma_table)
    labels = corpus.labels()

    pooled_matrix = None
    if selection == "pooled":
        pooled_fit = pipeline.fit_features(token_seqs, labels, recipe, assets)
        pooled_matrix = pooled_fit.train_matrix

    scored: list[ScoredDoc] = []
    fold_auc_roc: list[float] = []
    fold_auc_pr: list[float] = []
    for fold in range(k):
        train_idx, val_idx = plan.fold_indices(corpus, fold)
        fold_seed = pipeline.derive_seed([seed, fold])
        fold_config = pipeline.config_with_seed(base_config, fold_seed)
        if pooled_matrix is not None:
            model = train_forest(pooled_matrix[train_idx], labels[train_idx], fold_config)
            val_matrix = pooled_matrix[val_idx]
        else:
            fitted = pipeline.fit_features(
                [token_seqs[i] for i in train_idx],
                labels[train_idx],
                recipe,
                assets,
            )
            model = fitted.train_forest(labels[train_idx], fold_config)
            val_matrix = fitted.transform([token_seqs[i] for i in val_idx])
        p_hat = model.predict_proba(val_matrix)
        fold_scored = [
            ScoredDoc(corpus.documents[i].id, corpus.documents[i].label, float(p))
            for i, p in zip(val_idx, p_hat)
        ]
        scored.extend(fold_scored)
        fold_auc_roc.append(roc_curve(fold_scored).auc)
        fold_auc_pr.append(pr_curve(fold_scored).auc)

    roc = roc_curve(scored)
    pr = pr_curve(scored)
    return EvalReport(
        model_id=recipe.model_id,
        seed=seed,
        k=k,
        n_documents=corpus.n,
        roc=roc,
        pr=pr,
        points=tuple(operating_points(scored, _DEFAULT_CUTOFF_GRID)),
        workload_result=workload(scored, target_recall),
        fold_auc_roc=tuple(fold_auc_roc),
        fold_auc_pr=tuple(fold_auc_pr),
        average_precision=average_precision(scored),
        scored=tuple(scored),
        notes=("pooled feature selection (comparison mode)",) if selection == "pooled" else (),
    )


@dataclass(frozen=True)
class SweepPoint:
    fraction: float
    mean_auc_roc: float
    mean_auc_pr: float
    auc_roc: tuple[float, ...]
    auc_pr: tuple[float, ...]
    n_failed: int


def sensitivity_sweep(
    corpus: Corpus,
    recipe: pipeline.ModelRecipe,
    fractions: tuple[float, ...],
    seed: int,
    replicates: int = 5,
    forest_config: ForestConfig | None = None,
    assets: pipeline.Assets | None = None,
) -> list[SweepPoint]:
    """Training-size sensitivity: train on a stratified fraction, score the rest.

    Replicates whose subsample loses a class (tiny fractions) are recorded
    as failed and excluded from the means.
    """
    if recipe.kind == "model1":
        raise EvalError("the keyword model has no training size to sweep")
    corpus.require_labeled()
    assets = assets or pipeline.Assets.default()
    base_config = forest_config or ForestConfig()
    token_seqs = pipeline.preprocess_all(corpus, assets.lemma_table)
    seq_by_id = {s.doc_id: s for s in token_seqs}

    results: list[SweepPoint] = []
    for fi, fraction in enumerate(fractions):
        aucs_roc: list[float] = []
        aucs_pr: list[float] = []
        n_failed = 0
        for rep in range(replicates):
            rep_seed = pipeline.derive_seed([seed, fi, rep])
            train, rest = subsample_training(corpus, fraction, rep_seed)
            try:
                fitted = pipeline.fit_features(
                    [seq_by_id[d.id] for d in train],
                    train.labels(),
                    recipe,
                    assets,
                )
                model = fitted.train_forest(
                    train.labels(),
                    pipeline.config_with_seed(base_config, pipeline.derive_seed([seed, fi, rep, 1])),
                )
            except (ForestError, CorpusError, ValueError) as exc:
                logger.warning(
                    "sensitivity replicate failed (fraction=%s, replicate=%d): %s",
                    fraction,
                    rep,
                    exc,
                )
                n_failed += 1
                continue
            val_matrix = fitted.transform([seq_by_id[d.id] for d in rest])
            p_hat = model.predict_proba(val_matrix)
            rest_scored = [
                ScoredDoc(d.id, d.label, float(p)) for d, p in zip(rest, p_hat)
            ]
            aucs_roc.append(roc_curve(rest_scored).auc)
            aucs_pr.append(pr_curve(rest_scored).auc)
        results.append(
            SweepPoint(
                fraction=fraction,
                mean_auc_roc=float(np.mean(aucs_roc)) if aucs_roc else math.nan,
                mean_auc_pr=float(np.mean(aucs_pr)) if aucs_pr else math.nan,
                auc_roc=tuple(aucs_roc),
                auc_pr=tuple(aucs_pr),
                n_failed=n_failed,
            )
        )
    return results

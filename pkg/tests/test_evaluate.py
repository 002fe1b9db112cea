import math

import numpy as np
import pytest

from srscreen import pipeline
from srscreen.corpus import IRRELEVANT, RELEVANT
from srscreen.evaluate import (
    EvalError,
    ScoredDoc,
    audit_disagreements,
    average_precision,
    cross_validate,
    operating_points,
    pr_curve,
    roc_curve,
    sensitivity_sweep,
    workload,
)
from srscreen.forest import ForestConfig
from srscreen.reports import report_dict
from srscreen.synth import generate_corpus

from conftest import make_corpus


def scored(rel_scores, irr_scores):
    docs = [ScoredDoc(f"r{i}", RELEVANT, s) for i, s in enumerate(rel_scores)]
    docs += [ScoredDoc(f"i{i}", IRRELEVANT, s) for i, s in enumerate(irr_scores)]
    return docs


def mann_whitney_oracle(rel_scores, irr_scores):
    """Pair counting with ties worth one half."""
    wins = 0.0
    for r in rel_scores:
        for i in irr_scores:
            if r > i:
                wins += 1.0
            elif r == i:
                wins += 0.5
    return wins / (len(rel_scores) * len(irr_scores))


class TestRocCurve:
    def test_perfect_separation(self):
        curve = roc_curve(scored([0.9, 0.8], [0.2, 0.1]))
        assert curve.auc == 1.0
        assert curve.points[0] == (0.0, 0.0)
        assert curve.points[-1] == (1.0, 1.0)

    def test_all_scores_equal(self):
        curve = roc_curve(scored([0.5, 0.5], [0.5, 0.5, 0.5]))
        assert curve.auc == 0.5

    def test_three_quarters(self):
        curve = roc_curve(scored([0.9, 0.4], [0.5, 0.1]))
        assert curve.auc == pytest.approx(0.75, abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(EvalError, match="both classes"):
            roc_curve(scored([0.5], []))

    def test_x_non_decreasing(self):
        rng = np.random.default_rng(2)
        docs = scored(rng.random(30).tolist(), rng.random(50).tolist())
        curve = roc_curve(docs)
        xs = [p[0] for p in curve.points]
        assert xs == sorted(xs)

    def test_matches_pair_counting(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            rel = np.round(rng.random(int(rng.integers(1, 40))), 2).tolist()
            irr = np.round(rng.random(int(rng.integers(1, 40))), 2).tolist()
            curve = roc_curve(scored(rel, irr))
            assert curve.auc == pytest.approx(mann_whitney_oracle(rel, irr), abs=1e-9)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(6)
        docs = scored(rng.random(20).tolist(), rng.random(30).tolist())
        base = roc_curve(docs)
        for _ in range(5):
            perm = [docs[i] for i in rng.permutation(len(docs))]
            again = roc_curve(perm)
            assert again.points == base.points
            assert again.auc == base.auc

    def test_score_monotone_invariance(self):
        rng = np.random.default_rng(8)
        docs = scored(rng.random(25).tolist(), rng.random(25).tolist())
        base = roc_curve(docs)
        squeezed = [ScoredDoc(d.doc_id, d.label, d.p_hat**2) for d in docs]
        again = roc_curve(squeezed)
        assert again.points == base.points
        assert again.auc == base.auc


class TestPrCurve:
    def test_perfect_separation(self):
        curve = pr_curve(scored([0.9, 0.8], [0.2, 0.1]))
        assert all(precision == 1.0 for _, precision in curve.points)
        assert curve.auc == 1.0

    def test_all_equal_prevalence_point(self):
        curve = pr_curve(scored([0.5] * 3, [0.5] * 9))
        prevalence = 3 / 12
        assert curve.points == ((0.0, prevalence), (1.0, prevalence))
        assert curve.auc == pytest.approx(prevalence)

    def test_hand_enumerated_four_cutoffs(self):
        # scores desc: 0.9(R) 0.5(I) 0.4(R) 0.1(I)
        # cutoff 0.9: recall 1/2 precision 1/1
        # cutoff 0.5: recall 1/2 precision 1/2
        # cutoff 0.4: recall 2/2 precision 2/3   <- full recall: sweep stops
        # anchor at recall 0 carries the top block's precision (1.0)
        curve = pr_curve(scored([0.9, 0.4], [0.5, 0.1]))
        assert curve.points == (
            (0.0, 1.0),
            (0.5, 1.0),
            (0.5, 0.5),
            (1.0, 2 / 3),
        )
        # trapezoid over recall: 0.5*1.0 + 0 + 0.5*(0.5 + 2/3)/2 = 19/24
        assert curve.auc == pytest.approx(19 / 24, abs=1e-12)

    def test_recall_non_decreasing(self):
        rng = np.random.default_rng(3)
        docs = scored(rng.random(20).tolist(), rng.random(40).tolist())
        curve = pr_curve(docs)
        recalls = [p[0] for p in curve.points]
        assert recalls == sorted(recalls)

    def test_no_relevant_rejected(self):
        with pytest.raises(EvalError, match="relevant"):
            pr_curve(scored([], [0.5, 0.2]))

    def test_score_monotone_invariance(self):
        rng = np.random.default_rng(9)
        docs = scored(rng.random(25).tolist(), rng.random(25).tolist())
        base = pr_curve(docs)
        squeezed = [ScoredDoc(d.doc_id, d.label, d.p_hat**3) for d in docs]
        assert pr_curve(squeezed).points == base.points


class TestAveragePrecision:
    def test_perfect_separation(self):
        assert average_precision(scored([0.9, 0.8], [0.2, 0.1])) == 1.0

    def test_hand_computed(self):
        # recall gains at cutoffs 0.9 (precision 1) and 0.4 (precision 2/3)
        ap = average_precision(scored([0.9, 0.4], [0.5, 0.1]))
        assert ap == pytest.approx(0.5 * 1.0 + 0.5 * 2 / 3)

    def test_all_equal_is_prevalence(self):
        assert average_precision(scored([0.5] * 3, [0.5] * 9)) == pytest.approx(0.25)


class TestWorkload:
    def test_target_zero(self):
        result = workload(scored([0.9], [0.1]), 0.0)
        assert result.flagged_count == 0
        assert result.reading_reduction == 1.0

    def test_perfect_classifier_full_recall(self):
        result = workload(scored([0.9, 0.8, 0.7], [0.2] * 7), 1.0)
        assert result.flagged_count == 3
        assert result.reading_reduction == 1.0 - 3 / 10
        assert result.precision_at == 1.0

    def test_largest_qualifying_cutoff(self):
        docs = scored([0.9, 0.8, 0.3], [0.5, 0.2])
        result = workload(docs, 0.6)  # needs 2 of 3 relevant
        assert result.cutoff == 0.8
        assert result.flagged_count == 2
        assert result.achieved_recall == pytest.approx(2 / 3)

    def test_reduction_identity(self):
        rng = np.random.default_rng(5)
        docs = scored(rng.random(30).tolist(), rng.random(170).tolist())
        for target in (0.2, 0.5, 0.8, 1.0):
            result = workload(docs, target)
            assert result.reading_reduction == 1.0 - result.flagged_count / 200
            assert result.achieved_recall >= target

    def test_overshoot_clamped_with_note(self):
        result = workload(scored([0.9], [0.1]), 1.5)
        assert result.target_recall == 1.0
        assert any("clamped" in n for n in result.notes)

    def test_no_relevant_rejected(self):
        with pytest.raises(EvalError):
            workload(scored([], [0.5]), 0.5)


class TestAudit:
    def test_agreeing_extremes_empty(self):
        docs = scored([0.95, 0.99], [0.01, 0.02])
        assert audit_disagreements(docs, 0.9, 0.1) == []

    def test_single_disagreement(self):
        docs = [ScoredDoc("x", IRRELEVANT, 0.95), ScoredDoc("y", RELEVANT, 0.9)]
        entries = audit_disagreements(docs, 0.9, 0.1)
        assert len(entries) == 1
        assert entries[0].doc_id == "x"
        assert entries[0].direction == "labeled-irrelevant, predicted-relevant"

    def test_forty_planted_disagreements(self):
        docs = []
        for i in range(18):
            docs.append(ScoredDoc(f"ir{i}", IRRELEVANT, 0.91 + i * 0.004))
        for i in range(22):
            docs.append(ScoredDoc(f"re{i}", RELEVANT, 0.09 - i * 0.003))
        for i in range(60):  # agreeing filler
            docs.append(ScoredDoc(f"ok{i}", RELEVANT if i % 2 else IRRELEVANT, 0.5))
        entries = audit_disagreements(docs, 0.9, 0.1)
        assert len(entries) == 40
        directions = [e.direction for e in entries]
        assert directions.count("labeled-irrelevant, predicted-relevant") == 18
        assert directions.count("labeled-relevant, predicted-irrelevant") == 22
        distances = [abs(e.p_hat - 0.5) for e in entries]
        assert distances == sorted(distances, reverse=True)

    def test_thresholds_validated(self):
        with pytest.raises(EvalError, match="exceed"):
            audit_disagreements([], 0.1, 0.9)


class TestOperatingPoints:
    def test_definitions(self):
        docs = scored([0.9, 0.4], [0.5, 0.1])
        (pt,) = operating_points(docs, (0.45,))
        assert pt.precision == 0.5
        assert pt.recall == 0.5
        assert pt.fpr == 0.5


@pytest.fixture(scope="module")
def small_corpus():
    return generate_corpus(400, seed=9)


@pytest.fixture(scope="module")
def assets():
    return pipeline.Assets.default()


FAST_FOREST = ForestConfig(n_trees=40)


class TestCrossValidate:
    def test_model1_single_point_no_auc(self, small_corpus, assets):
        report = cross_validate(small_corpus, pipeline.ModelRecipe.parse("model1"), 5, 1, assets=assets)
        assert report.roc is None and report.pr is None
        assert report.boolean is not None
        assert any("no AUC" in n for n in report.notes)
        as_dict = report_dict(report)
        assert as_dict["auc_roc"] is None

    def test_deterministic_reports(self, small_corpus, assets):
        recipe = pipeline.ModelRecipe.parse("model2")
        a = cross_validate(small_corpus, recipe, 2, 7, forest_config=FAST_FOREST, assets=assets)
        b = cross_validate(small_corpus, recipe, 2, 7, forest_config=FAST_FOREST, assets=assets)
        assert report_dict(a) == report_dict(b)
        assert a.scored == b.scored

    def test_model3_with_zero_tokens_equals_model2(self, small_corpus, assets):
        m2 = cross_validate(
            small_corpus, pipeline.ModelRecipe.parse("model2"), 3, 5,
            forest_config=FAST_FOREST, assets=assets,
        )
        m3_0 = cross_validate(
            small_corpus, pipeline.ModelRecipe("model3", 0), 3, 5,
            forest_config=FAST_FOREST, assets=assets,
        )
        assert m2.scored == m3_0.scored
        assert m2.roc.auc == m3_0.roc.auc
        assert m2.pr.auc == m3_0.pr.auc

    def test_pooled_scores_cover_corpus(self, small_corpus, assets):
        report = cross_validate(
            small_corpus, pipeline.ModelRecipe.parse("model2"), 4, 3,
            forest_config=FAST_FOREST, assets=assets,
        )
        assert sorted(s.doc_id for s in report.scored) == sorted(d.id for d in small_corpus)
        assert len(report.fold_auc_roc) == 4

    def test_unlabeled_rejected(self, assets):
        corpus = make_corpus([("a", "t", "x", RELEVANT), ("b", "t", "x", None)])
        with pytest.raises(Exception, match="unlabeled"):
            cross_validate(corpus, pipeline.ModelRecipe.parse("model2"), 2, 1, assets=assets)

    def test_pooled_selection_mode(self, small_corpus, assets):
        recipe = pipeline.ModelRecipe.parse("model3:20")
        nested = cross_validate(
            small_corpus, recipe, 3, 4, forest_config=FAST_FOREST, assets=assets
        )
        pooled = cross_validate(
            small_corpus, recipe, 3, 4, forest_config=FAST_FOREST, assets=assets,
            selection="pooled",
        )
        assert any("pooled" in n for n in pooled.notes)
        assert pooled.scored != nested.scored  # selection scope changes scores
        again = cross_validate(
            small_corpus, recipe, 3, 4, forest_config=FAST_FOREST, assets=assets,
            selection="pooled",
        )
        assert pooled.scored == again.scored
        with pytest.raises(EvalError, match="selection"):
            cross_validate(small_corpus, recipe, 3, 4, assets=assets, selection="bogus")

    def test_cluster_model_separates_planted_signal(self, assets):
        corpus = generate_corpus(3000, seed=1)
        report = cross_validate(
            corpus, pipeline.ModelRecipe.parse("model2"), 5, 1,
            forest_config=ForestConfig(n_trees=200, threads=2), assets=assets,
        )
        assert report.roc.auc >= 0.9


class TestSensitivitySweep:
    def test_rerun_identical(self, small_corpus, assets):
        recipe = pipeline.ModelRecipe.parse("model2")
        kwargs = dict(replicates=1, forest_config=FAST_FOREST, assets=assets)
        a = sensitivity_sweep(small_corpus, recipe, (0.5,), 3, **kwargs)
        b = sensitivity_sweep(small_corpus, recipe, (0.5,), 3, **kwargs)
        assert a == b

    def test_failed_replicates_recorded(self, assets):
        corpus = generate_corpus(120, seed=2)  # ~11 relevant docs
        recipe = pipeline.ModelRecipe.parse("model2")
        points = sensitivity_sweep(
            corpus, recipe, (0.01,), 5, replicates=2,
            forest_config=FAST_FOREST, assets=assets,
        )
        # a 1-document subsample cannot hold both classes
        assert points[0].n_failed == 2
        assert math.isnan(points[0].mean_auc_roc)

    def test_model1_rejected(self, small_corpus, assets):
        with pytest.raises(EvalError, match="keyword"):
            sensitivity_sweep(small_corpus, pipeline.ModelRecipe.parse("model1"), (0.5,), 1, assets=assets)

    def test_fraction_eighty_percent_matches_cross_validation(self, assets):
        # training on 80% is the same training size as 5-fold CV; the two
        # pipeline paths should land on the same AUC up to resampling noise
        corpus = generate_corpus(3000, seed=1)
        recipe = pipeline.ModelRecipe.parse("model3:100")
        config = ForestConfig(n_trees=200, threads=2)
        cv = cross_validate(corpus, recipe, 5, 1, forest_config=config, assets=assets)
        (point,) = sensitivity_sweep(
            corpus, recipe, (0.8,), 1, replicates=3, forest_config=config, assets=assets
        )
        assert abs(point.mean_auc_roc - cv.roc.auc) <= 0.05


class TestScoredDoc:
    def test_probability_bounds(self):
        with pytest.raises(EvalError):
            ScoredDoc("a", RELEVANT, 1.5)

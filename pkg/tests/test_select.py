import math

import numpy as np
import pytest
import scipy.sparse as sp

from srscreen.select import (
    SelectError,
    apply_features,
    assemble_features,
    rank_tokens,
    t_statistic,
    t_statistics,
)
from srscreen.textprep import TokenSequence
from srscreen.vectorize import TfidfMatrix, Vocabulary, build_vocab, cluster_matrix, count_matrix, tfidf


def matrix_from_dense(values) -> TfidfMatrix:
    arr = np.asarray(values, dtype=np.float64)
    return TfidfMatrix(
        weights=sp.csr_matrix(arr),
        idf=np.ones(arr.shape[1]),
        doc_ids=tuple(f"d{i}" for i in range(arr.shape[0])),
        feature_names=tuple(f"t{i}" for i in range(arr.shape[1])),
    )


def vocab_for(n_cols) -> Vocabulary:
    tokens = tuple(f"t{i}" for i in range(n_cols))
    return Vocabulary(tokens=tokens, df=np.ones(n_cols, dtype=np.int64), n_docs=1)


def welch_oracle(col, labels):
    x1 = col[labels == 1]
    x2 = col[labels == 0]
    m1, m2 = x1.mean(), x2.mean()
    v1 = x1.var(ddof=1) if len(x1) > 1 else 0.0
    v2 = x2.var(ddof=1) if len(x2) > 1 else 0.0
    denom = math.sqrt(v1 / len(x1) + v2 / len(x2))
    if denom == 0:
        return 0.0 if m1 == m2 else math.copysign(math.inf, m1 - m2)
    return (m1 - m2) / denom


class TestTStatistic:
    def test_hand_computed(self):
        # class1 {1,2}: mean 1.5, s^2 0.5; class2 {0,1}: mean 0.5, s^2 0.5
        m = matrix_from_dense([[1.0], [2.0], [0.0], [1.0]])
        labels = np.array([1, 1, 0, 0])
        t = t_statistic(m, labels, 0)
        assert t == pytest.approx(1.4142135623730951, abs=1e-12)

    def test_identical_distributions_zero(self):
        m = matrix_from_dense([[0.5], [1.5], [0.5], [1.5]])
        labels = np.array([1, 1, 0, 0])
        assert t_statistic(m, labels, 0) == 0.0

    def test_zero_variance_means_differ_infinite(self):
        m = matrix_from_dense([[2.0], [2.0], [0.0], [0.0], [0.0], [0.0]])
        labels = np.array([1, 1, 0, 0, 0, 0])
        assert t_statistic(m, labels, 0) == math.inf

    def test_zero_variance_means_equal_zero(self):
        m = matrix_from_dense([[0.0], [0.0], [0.0]])
        labels = np.array([1, 0, 0])
        assert t_statistic(m, labels, 0) == 0.0

    def test_negative_direction(self):
        m = matrix_from_dense([[0.0], [0.0], [3.0], [3.0]])
        labels = np.array([1, 1, 0, 0])
        assert t_statistic(m, labels, 0) == -math.inf

    def test_unpooled_variance_mode(self):
        m = matrix_from_dense([[1.0], [2.0], [0.0], [1.0]])
        labels = np.array([1, 1, 0, 0])
        # mean difference 1.0 divided by the variance sum itself: 1.0 / 0.5
        assert t_statistic(m, labels, 0, denominator="unpooled_variance") == pytest.approx(2.0)

    def test_unknown_mode_rejected(self):
        m = matrix_from_dense([[1.0], [0.0]])
        with pytest.raises(SelectError, match="denominator"):
            t_statistics(m, np.array([1, 0]), denominator="bogus")

    def test_single_class_rejected(self):
        m = matrix_from_dense([[1.0], [2.0]])
        with pytest.raises(SelectError, match="both classes"):
            t_statistics(m, np.array([1, 1]))

    def test_oracle_random_matrices(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            n = int(rng.integers(4, 30))
            p = int(rng.integers(1, 21))
            dense = np.round(rng.random((n, p)) * (rng.random((n, p)) < 0.5), 3)
            labels = np.zeros(n, dtype=np.int64)
            labels[: int(rng.integers(1, n))] = 1
            rng.shuffle(labels)
            if labels.sum() in (0, n):
                continue
            ours = t_statistics(matrix_from_dense(dense), labels)
            for c in range(p):
                expected = welch_oracle(dense[:, c], labels)
                if math.isinf(expected):
                    assert ours[c] == expected
                else:
                    assert ours[c] == pytest.approx(expected, rel=1e-12, abs=1e-12)


class TestRankTokens:
    def test_planted_token_ranks_first(self):
        rng = np.random.default_rng(1)
        docs = []
        labels = []
        for i in range(30):
            relevant = i < 10
            tokens = ["noise" + str(int(rng.integers(4)))] * int(rng.integers(1, 4))
            if relevant:
                tokens.append("q")
            docs.append(TokenSequence(f"d{i}", tuple(tokens)))
            labels.append(1 if relevant else 0)
        vocab = build_vocab(docs)
        tf = tfidf(count_matrix(docs, vocab))
        ranking = rank_tokens(tf, np.array(labels), vocab)
        assert ranking.scores[0].token == "q"
        assert ranking.scores[0].abs_rank == 1

    def test_flat_token_ranks_below_informative(self):
        m = matrix_from_dense(
            [[1.0, 0.7], [2.0, 0.7], [0.0, 0.7], [1.0, 0.7]]
        )
        labels = np.array([1, 1, 0, 0])
        ranking = rank_tokens(m, labels, vocab_for(2))
        assert [s.token for s in ranking.scores] == ["t0", "t1"]
        assert ranking.scores[1].t_stat == 0.0

    def test_ties_break_lexicographically(self):
        m = matrix_from_dense([[1.0, 1.0], [0.0, 0.0]])
        labels = np.array([1, 0])
        ranking = rank_tokens(m, labels, vocab_for(2))
        assert [s.token for s in ranking.scores] == ["t0", "t1"]
        assert [s.abs_rank for s in ranking.scores] == [1, 2]

    def test_scale_invariance_exact_for_powers_of_two(self):
        rng = np.random.default_rng(9)
        dense = rng.random((40, 12)) * (rng.random((40, 12)) < 0.4)
        labels = (rng.random(40) < 0.3).astype(np.int64)
        labels[:2] = 1
        labels[-2:] = 0
        base = rank_tokens(matrix_from_dense(dense), labels, vocab_for(12))
        for c in (0.25, 4.0, 1024.0):
            scaled = rank_tokens(matrix_from_dense(dense * c), labels, vocab_for(12))
            assert [s.abs_rank for s in scaled.scores] == [s.abs_rank for s in base.scores]
            assert [s.token for s in scaled.scores] == [s.token for s in base.scores]

    def test_scale_invariance_arbitrary_factor(self):
        dense = np.array([[3.0, 0.0, 1.0], [1.0, 2.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.0, 0.0]])
        labels = np.array([1, 1, 0, 0])
        base = rank_tokens(matrix_from_dense(dense), labels, vocab_for(3))
        scaled = rank_tokens(matrix_from_dense(dense * 3.7), labels, vocab_for(3))
        assert [s.token for s in scaled.scores] == [s.token for s in base.scores]


def small_cluster_setup(n_extra_tokens=30, n_docs=24, seed=4):
    rng = np.random.default_rng(seed)
    words = [f"w{i:02d}" for i in range(n_extra_tokens - 2)]
    docs, labels = [], []
    for i in range(n_docs):
        relevant = i % 3 == 0
        tokens = ["rape"] * int(rng.integers(0, 3)) + [
            words[j] for j in rng.integers(0, len(words), size=rng.integers(2, 7))
        ]
        if relevant:
            tokens += ["victim", words[0]]
        docs.append(TokenSequence(f"d{i}", tuple(tokens)))
        labels.append(1 if relevant else 0)
    vocab = build_vocab(docs)
    dtm = count_matrix(docs, vocab)
    tf = tfidf(dtm, feature_names=vocab.tokens)
    from srscreen.vectorize import ClusterSpec

    clusters = [
        ClusterSpec(name="rape", exacts=("rape",)),
        ClusterSpec(name="victim", prefixes=("victim",)),
    ]
    cm = cluster_matrix(dtm, vocab, clusters)
    return vocab, tf, cm, np.array(labels)


class TestAssembleFeatures:
    def test_n_top_zero_is_cluster_matrix(self):
        vocab, tf, cm, labels = small_cluster_setup()
        ranking = rank_tokens(tf, labels, vocab)
        fs, X = assemble_features(cm, tf, ranking, 0)
        assert fs.n_features == 2
        assert np.array_equal(X, cm.weights.toarray())

    def test_twenty_extra_columns(self):
        vocab, tf, cm, labels = small_cluster_setup()
        ranking = rank_tokens(tf, labels, vocab)
        fs, X = assemble_features(cm, tf, ranking, 20)
        assert X.shape[1] == len(cm.feature_names) + 20

    def test_token_order_matches_rank(self):
        vocab, tf, cm, labels = small_cluster_setup(n_extra_tokens=30)
        ranking = rank_tokens(tf, labels, vocab)
        n_all = len(vocab)
        fs, X = assemble_features(cm, tf, ranking, n_all)
        assert X.shape[1] == 2 + n_all
        assert list(fs.token_columns) == [s.column for s in ranking.scores]
        assert list(fs.token_names) == [s.token for s in ranking.scores]

    def test_all_fifteen_clusters_plus_thirty_tokens(self):
        # with the full default cluster set: 15 + 30 = 45 columns
        from srscreen.vectorize import (
            cluster_matrix,
            default_cluster_path,
            load_cluster_specs,
        )

        rng = np.random.default_rng(12)
        words = [f"tok{i:02d}" for i in range(28)] + ["abuse", "victim"]
        docs = [TokenSequence("d-all", tuple(words))]  # every word realized
        labels = [1]
        for i in range(40):
            picks = [words[j] for j in rng.integers(0, 30, size=rng.integers(2, 9))]
            docs.append(TokenSequence(f"d{i}", tuple(picks)))
            labels.append(1 if i % 4 == 0 else 0)
        vocab = build_vocab(docs)
        assert len(vocab) == 30
        dtm = count_matrix(docs, vocab)
        tf = tfidf(dtm, feature_names=vocab.tokens)
        clusters, _ = load_cluster_specs(default_cluster_path())
        cm = cluster_matrix(dtm, vocab, clusters)
        ranking = rank_tokens(tf, np.array(labels), vocab)
        fs, X = assemble_features(cm, tf, ranking, 30)
        assert X.shape[1] == 45
        assert len(fs.cluster_names) == 15

    def test_exclusion_removes_cluster_members(self):
        vocab, tf, cm, labels = small_cluster_setup()
        ranking = rank_tokens(tf, labels, vocab)
        member_cols = frozenset({vocab.index["rape"], vocab.index["victim"]})
        fs, _ = assemble_features(cm, tf, ranking, 5, exclude_columns=member_cols)
        assert not set(fs.token_columns) & member_cols
        fs_incl, _ = assemble_features(cm, tf, ranking, len(vocab), frozenset())
        assert set(fs_incl.token_columns) & {vocab.index["victim"]}

    def test_n_top_exceeding_vocabulary(self):
        vocab, tf, cm, labels = small_cluster_setup()
        ranking = rank_tokens(tf, labels, vocab)
        with pytest.raises(SelectError, match="exceeds"):
            assemble_features(cm, tf, ranking, len(vocab) + 1)

    def test_provenance_row_count_guard(self):
        vocab, tf, cm, labels = small_cluster_setup()
        ranking = rank_tokens(tf, labels, vocab)
        object.__setattr__(ranking, "n_rows", ranking.n_rows - 1)
        with pytest.raises(SelectError, match="training fold"):
            assemble_features(cm, tf, ranking, 3)

    def test_apply_features_on_validation_rows(self):
        vocab, tf, cm, labels = small_cluster_setup()
        ranking = rank_tokens(tf, labels, vocab)
        fs, X_train = assemble_features(cm, tf, ranking, 4)
        X_again = apply_features(fs, cm, tf)
        assert np.array_equal(X_train, X_again)

import pytest

from srscreen.boolquery import default_query, match_category
from srscreen.porter import stem
from srscreen.synth import discriminative_tokens, generate_corpus
from srscreen.vectorize import default_cluster_path, load_cluster_specs


class TestGenerateCorpus:
    def test_size_and_imbalance(self):
        corpus = generate_corpus(1100, seed=4)
        assert corpus.n == 1100
        assert corpus.n_relevant == 100
        assert corpus.n_irrelevant == 1000

    def test_deterministic_per_seed(self):
        a = generate_corpus(300, seed=2)
        b = generate_corpus(300, seed=2)
        assert a.documents == b.documents
        c = generate_corpus(300, seed=3)
        assert a.documents != c.documents

    def test_all_docs_have_text_and_labels(self):
        corpus = generate_corpus(200, seed=1)
        for doc in corpus:
            assert doc.title.strip()
            assert doc.abstract.strip()
            assert doc.label in ("relevant", "irrelevant")

    def test_minimum_size_guard(self):
        with pytest.raises(ValueError):
            generate_corpus(10, seed=1)


class TestPlantedTokens:
    def test_exactly_one_hundred(self):
        assert len(discriminative_tokens()) == 100
        assert len(set(discriminative_tokens())) == 100

    def test_invisible_to_clusters_and_keywords(self):
        clusters, _ = load_cluster_specs(default_cluster_path())
        query = default_query()
        for token in discriminative_tokens():
            stemmed = stem(token)
            assert not any(c.matches(stemmed) or c.matches(token) for c in clusters)
            for category in (query.fsw, query.hiv, query.violence):
                assert not match_category([token], token, category)

    def test_planted_in_relevant_class(self):
        corpus = generate_corpus(600, seed=5)
        planted = set(discriminative_tokens())
        rel_hits = sum(
            any(t in planted for t in doc.abstract.split())
            for doc in corpus
            if doc.label == "relevant"
        )
        irr_hits = sum(
            any(t in planted for t in doc.abstract.split())
            for doc in corpus
            if doc.label == "irrelevant"
        )
        assert rel_hits / corpus.n_relevant > 0.9
        assert irr_hits / corpus.n_irrelevant < 0.5

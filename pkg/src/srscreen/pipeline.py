"""Model recipes and the fitted preprocessing-to-forest pipeline.

A recipe names one of the three classifiers: the keyword query (model1),
the random forest on the 15 cluster features (model2), or the forest on
clusters plus the top-N tokens by absolute t-statistic (model3:N).

FittedFeatures captures everything derived from a training fold (vocab,
idf vectors, selected columns) so validation rows are transformed with
training-fold statistics only.  ScreeningModel is the persistent artifact:
fitted features plus the trained forest plus provenance hashes of the
preprocessing assets that produced it.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .boolquery import BooleanQuery, default_query, load_query
from .corpus import Corpus
from .forest import ForestConfig, ForestModel, train_forest
from .select import FeatureSet, TokenRanking, apply_features, assemble_features, rank_tokens
from .textprep import LemmaTable, TokenSequence, default_lemma_table, preprocess_corpus
from .vectorize import (
    ClusterSpec,
    Vocabulary,
    cluster_matrix,
    cluster_members,
    cluster_transform,
    count_matrix,
    build_vocab,
    default_cluster_path,
    load_cluster_specs,
    tfidf,
    tfidf_transform,
)


class PipelineError(ValueError):
    pass


_RECIPE_KINDS = ("model1", "model2", "model3")


@dataclass(frozen=True)
class ModelRecipe:
    """Which classifier to build; n_top applies to model3 only.

    t_denominator selects the token-scoring statistic: the Welch standard
    error (default) or the raw unpooled variance sum.
    """

    kind: str
    n_top: int = 0
    include_cluster_tokens: bool = False
    t_denominator: str = "welch_se"

    def __post_init__(self):
        if self.kind not in _RECIPE_KINDS:
            raise PipelineError(f"unknown model kind {self.kind!r}")
        if self.kind != "model3" and self.n_top:
            raise PipelineError(f"{self.kind} does not take extra tokens")
        if self.n_top < 0:
            raise PipelineError(f"n_top must be >= 0, got {self.n_top}")
        if self.t_denominator not in ("welch_se", "unpooled_variance"):
            raise PipelineError(f"unknown t_denominator {self.t_denominator!r}")

    @property
    def model_id(self) -> str:
        if self.kind == "model3":
            return f"model3_top{self.n_top}"
        return self.kind

    @property
    def trains_forest(self) -> bool:
        return self.kind in ("model2", "model3")

    @classmethod
    def parse(cls, text: str) -> "ModelRecipe":
        """Parse 'model1', 'model2', or 'model3:N'."""
        text = text.strip().lower()
        if ":" in text:
            kind, _, arg = text.partition(":")
            if kind != "model3":
                raise PipelineError(f"only model3 takes an argument, got {text!r}")
            try:
                n_top = int(arg)
            except ValueError:
                raise PipelineError(f"bad token count in {text!r}") from None
            return cls(kind="model3", n_top=n_top)
        if text == "model3":
            return cls(kind="model3", n_top=250)
        return cls(kind=text)


@dataclass(frozen=True)
class Assets:
    """Preprocessing configuration: lemma table, cluster specs, keyword query."""

    lemma_table: LemmaTable
    clusters: list[ClusterSpec]
    cluster_hash: str
    query: BooleanQuery
    min_df: int = 1

    @classmethod
    def default(cls) -> "Assets":
        clusters, cluster_hash = load_cluster_specs(default_cluster_path())
        return cls(
            lemma_table=default_lemma_table(),
            clusters=clusters,
            cluster_hash=cluster_hash,
            query=default_query(),
        )


def derive_seed(parts: list[int]) -> int:
    """Deterministic child seed from a path of integers."""
    return int(np.random.SeedSequence(entropy=parts).generate_state(1, np.uint64)[0])


def config_with_seed(config: ForestConfig, seed: int) -> ForestConfig:
    return dataclasses.replace(config, seed=seed)


def preprocess_all(corpus: Corpus, lemma_table: LemmaTable) -> list[TokenSequence]:
    return preprocess_corpus(corpus.documents, lemma_table)


@dataclass
class FittedFeatures:
    """Feature extraction fitted on one training fold."""

    recipe: ModelRecipe
    assets: Assets
    vocab: Vocabulary
    token_idf: np.ndarray
    cluster_idf: np.ndarray
    feature_set: FeatureSet
    ranking: TokenRanking | None
    train_matrix: np.ndarray = field(repr=False)

    def transform(self, token_seqs: list[TokenSequence]) -> np.ndarray:
        """Feature rows for new documents using training-fold statistics."""
        dtm = count_matrix(token_seqs, self.vocab)
        tf = tfidf_transform(dtm, self.token_idf, feature_names=self.vocab.tokens)
        cm = cluster_transform(dtm, self.vocab, self.assets.clusters, self.cluster_idf)
        return apply_features(self.feature_set, cm, tf)

    def train_forest(self, labels: np.ndarray, config: ForestConfig) -> ForestModel:
        return train_forest(self.train_matrix, labels, config)


def fit_features(
    train_seqs: list[TokenSequence],
    train_labels: np.ndarray,
    recipe: ModelRecipe,
    assets: Assets,
) -> FittedFeatures:
    """Fit vocabulary, idf, clusters, and token selection on training rows."""
    if not recipe.trains_forest:
        raise PipelineError("model1 takes no training; evaluate it directly")
    vocab = build_vocab(train_seqs, min_df=assets.min_df)
    dtm = count_matrix(train_seqs, vocab)
    tf = tfidf(dtm, feature_names=vocab.tokens)
    cm = cluster_matrix(dtm, vocab, assets.clusters)
    ranking = None
    exclude: frozenset[int] = frozenset()
    if recipe.kind == "model3" and recipe.n_top > 0:
        ranking = rank_tokens(tf, train_labels, vocab, denominator=recipe.t_denominator)
        if not recipe.include_cluster_tokens:
            members = cluster_members(vocab, assets.clusters)
            exclude = frozenset(c for cols in members.values() for c in cols)
    feature_set, train_matrix = assemble_features(
        cm, tf, ranking or _empty_ranking(tf, train_labels), recipe.n_top, exclude
    )
    return FittedFeatures(
        recipe=recipe,
        assets=assets,
        vocab=vocab,
        token_idf=tf.idf,
        cluster_idf=cm.idf,
        feature_set=feature_set,
        ranking=ranking,
        train_matrix=train_matrix,
    )


def _empty_ranking(tf, labels) -> TokenRanking:
    return TokenRanking(scores=(), n_rows=tf.weights.shape[0], n_relevant=int((np.asarray(labels) == 1).sum()))


@dataclass(frozen=True)
class ScreeningModel:
    """Persistent trained artifact: features + forest + asset provenance."""

    recipe: ModelRecipe
    vocab: Vocabulary
    token_idf: np.ndarray
    cluster_idf: np.ndarray
    clusters: list[ClusterSpec]
    feature_set: FeatureSet
    forest: ForestModel
    lemma_hash: str
    cluster_hash: str
    n_train: int
    n_train_relevant: int

    def score(self, corpus: Corpus, lemma_table: LemmaTable) -> np.ndarray:
        """Relevance probabilities for a corpus (labels not required).

        The lemma table must be the one the model was trained with; a
        hash mismatch means the token space drifted and scores would be
        silently wrong.
        """
        if lemma_table.content_hash != self.lemma_hash:
            raise PipelineError(
                "provenance error: lemma table hash"
                f" {lemma_table.content_hash[:12]} does not match the model's"
                f" {self.lemma_hash[:12]}"
            )
        token_seqs = preprocess_corpus(corpus.documents, lemma_table)
        dtm = count_matrix(token_seqs, self.vocab)
        tf = tfidf_transform(dtm, self.token_idf, feature_names=self.vocab.tokens)
        cm = cluster_transform(dtm, self.vocab, self.clusters, self.cluster_idf)
        X = apply_features(self.feature_set, cm, tf)
        return self.forest.predict_proba(X)

    def to_dict(self) -> dict:
        return {
            "format": "srscreen-model",
            "version": 1,
            "recipe": {
                "kind": self.recipe.kind,
                "n_top": self.recipe.n_top,
                "include_cluster_tokens": self.recipe.include_cluster_tokens,
                "t_denominator": self.recipe.t_denominator,
            },
            "vocab": {
                "tokens": list(self.vocab.tokens),
                "df": self.vocab.df.tolist(),
                "n_docs": self.vocab.n_docs,
            },
            "token_idf": self.token_idf.tolist(),
            "cluster_idf": self.cluster_idf.tolist(),
            "clusters": [
                {"name": c.name, "prefixes": list(c.prefixes), "exacts": list(c.exacts)}
                for c in self.clusters
            ],
            "feature_set": {
                "cluster_names": list(self.feature_set.cluster_names),
                "token_columns": list(self.feature_set.token_columns),
                "token_names": list(self.feature_set.token_names),
                "n_top": self.feature_set.n_top,
            },
            "forest": self.forest.to_dict(),
            "provenance": {
                "lemma_hash": self.lemma_hash,
                "cluster_hash": self.cluster_hash,
                "vocab_fingerprint": self.vocab.fingerprint(),
            },
            "training": {
                "n_train": self.n_train,
                "n_train_relevant": self.n_train_relevant,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScreeningModel":
        if d.get("format") != "srscreen-model" or d.get("version") != 1:
            raise PipelineError("unrecognized model file format")
        vocab = Vocabulary(
            tokens=tuple(d["vocab"]["tokens"]),
            df=np.asarray(d["vocab"]["df"], dtype=np.int64),
            n_docs=d["vocab"]["n_docs"],
        )
        fs = d["feature_set"]
        return cls(
            recipe=ModelRecipe(
                kind=d["recipe"]["kind"],
                n_top=d["recipe"]["n_top"],
                include_cluster_tokens=d["recipe"]["include_cluster_tokens"],
                t_denominator=d["recipe"].get("t_denominator", "welch_se"),
            ),
            vocab=vocab,
            token_idf=np.asarray(d["token_idf"], dtype=np.float64),
            cluster_idf=np.asarray(d["cluster_idf"], dtype=np.float64),
            clusters=[
                ClusterSpec(
                    name=c["name"],
                    prefixes=tuple(c["prefixes"]),
                    exacts=tuple(c["exacts"]),
                )
                for c in d["clusters"]
            ],
            feature_set=FeatureSet(
                cluster_names=tuple(fs["cluster_names"]),
                token_columns=tuple(fs["token_columns"]),
                token_names=tuple(fs["token_names"]),
                n_top=fs["n_top"],
            ),
            forest=ForestModel.from_dict(d["forest"]),
            lemma_hash=d["provenance"]["lemma_hash"],
            cluster_hash=d["provenance"]["cluster_hash"],
            n_train=d["training"]["n_train"],
            n_train_relevant=d["training"]["n_train_relevant"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "ScreeningModel":
        path = Path(path)
        if not path.exists():
            raise PipelineError(f"model file not found: {path}")
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))


def fit_and_train(
    corpus: Corpus,
    recipe: ModelRecipe,
    forest_config: ForestConfig,
    assets: Assets | None = None,
) -> tuple[ScreeningModel, FittedFeatures]:
    """Fit features and train the forest on a full labeled corpus."""
    if not recipe.trains_forest:
        raise PipelineError("model1 takes no training; evaluate it directly")
    corpus.require_labeled()
    assets = assets or Assets.default()
    token_seqs = preprocess_all(corpus, assets.lemma_table)
    labels = corpus.labels()
    fitted = fit_features(token_seqs, labels, recipe, assets)
    forest = fitted.train_forest(labels, forest_config)
    model = ScreeningModel(
        recipe=recipe,
        vocab=fitted.vocab,
        token_idf=fitted.token_idf,
        cluster_idf=fitted.cluster_idf,
        clusters=assets.clusters,
        feature_set=fitted.feature_set,
        forest=forest,
        lemma_hash=assets.lemma_table.content_hash,
        cluster_hash=assets.cluster_hash,
        n_train=corpus.n,
        n_train_relevant=corpus.n_relevant,
    )
    return model, fitted


def train_model(
    corpus: Corpus,
    recipe: ModelRecipe,
    forest_config: ForestConfig,
    assets: Assets | None = None,
) -> ScreeningModel:
    return fit_and_train(corpus, recipe, forest_config, assets)[0]


def load_assets(
    lemma_path: str | Path | None = None,
    cluster_path: str | Path | None = None,
    keyword_path: str | Path | None = None,
    min_df: int = 1,
) -> Assets:
    """Assets from explicit paths, falling back to the bundled defaults."""
    from .textprep import default_lemma_table_path, load_lemma_table
    from .boolquery import default_query_path

    lemma_table = load_lemma_table(lemma_path or default_lemma_table_path())
    clusters, cluster_hash = load_cluster_specs(cluster_path or default_cluster_path())
    query = load_query(keyword_path or default_query_path())
    return Assets(
        lemma_table=lemma_table,
        clusters=clusters,
        cluster_hash=cluster_hash,
        query=query,
        min_df=min_df,
    )

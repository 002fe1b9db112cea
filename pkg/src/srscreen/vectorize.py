"""Vocabulary, sparse document-term matrix, TF-IDF, and cluster features.

TF-IDF uses raw term counts and a natural-log inverse document frequency,
idf = ln(N / df).  Cluster features sum the counts of semantically grouped
tokens into one column before the same TF-IDF weighting; a document counts
toward a cluster's df if any member token appears.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .textprep import TokenSequence

logger = logging.getLogger(__name__)

CLUSTER_NAMES = (
    "hiv",
    "fsw",
    "violence",
    "offense",
    "abuse",
    "torture",
    "rape",
    "victim",
    "assault",
    "harass",
    "extort",
    "homicide",
    "coercion",
    "ipv",
    "exploit",
)


class VectorizeError(ValueError):
    pass


@dataclass(frozen=True)
class Vocabulary:
    """Token -> column index (lexicographic order) with document frequencies."""

    tokens: tuple[str, ...]
    df: np.ndarray
    n_docs: int
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for t in self.tokens:
            h.update(t.encode("utf-8"))
            h.update(b"\x00")
        return h.hexdigest()


@dataclass(frozen=True)
class DocTermMatrix:
    """Sparse token counts, one row per document in corpus order."""

    counts: sp.csr_matrix
    doc_ids: tuple[str, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape


@dataclass(frozen=True)
class TfidfMatrix:
    """Sparse tf * idf weights plus the idf vector that produced them."""

    weights: sp.csr_matrix
    idf: np.ndarray
    doc_ids: tuple[str, ...]
    feature_names: tuple[str, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.weights.shape


@dataclass(frozen=True)
class ClusterSpec:
    """One semantic cluster: stem prefixes and exact stems that belong to it."""

    name: str
    prefixes: tuple[str, ...] = ()
    exacts: tuple[str, ...] = ()

    def matches(self, token: str) -> bool:
        return token in self.exacts or any(token.startswith(p) for p in self.prefixes)


def build_vocab(token_seqs: list[TokenSequence], min_df: int = 1) -> Vocabulary:
    """Vocabulary over all tokens appearing in at least min_df documents."""
    if min_df < 1:
        raise VectorizeError(f"min_df must be >= 1, got {min_df}")
    df_map: dict[str, int] = {}
    for seq in token_seqs:
        for token in set(seq.tokens):
            df_map[token] = df_map.get(token, 0) + 1
    kept = sorted(t for t, c in df_map.items() if c >= min_df)
    if not kept:
        raise VectorizeError("cannot build a vocabulary: all token sequences are empty")
    df = np.array([df_map[t] for t in kept], dtype=np.int64)
    return Vocabulary(tokens=tuple(kept), df=df, n_docs=len(token_seqs))


def count_matrix(token_seqs: list[TokenSequence], vocab: Vocabulary) -> DocTermMatrix:
    """Exact token counts per document; out-of-vocabulary tokens are skipped."""
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    index = vocab.index
    for seq in token_seqs:
        row_counts: dict[int, int] = {}
        for token in seq.tokens:
            col = index.get(token)
            if col is not None:
                row_counts[col] = row_counts.get(col, 0) + 1
        for col in sorted(row_counts):
            indices.append(col)
            data.append(row_counts[col])
        indptr.append(len(indices))
    counts = sp.csr_matrix(
        (np.array(data, dtype=np.int64), np.array(indices, dtype=np.int32), np.array(indptr, dtype=np.int32)),
        shape=(len(token_seqs), len(vocab)),
    )
    return DocTermMatrix(counts=counts, doc_ids=tuple(s.doc_id for s in token_seqs))


def _idf_from_counts(counts: sp.csr_matrix) -> np.ndarray:
    """Natural-log idf recomputed from the matrix itself; df=0 columns get 0."""
    n_docs = counts.shape[0]
    df = np.asarray((counts > 0).sum(axis=0)).ravel().astype(np.float64)
    idf = np.zeros(counts.shape[1], dtype=np.float64)
    present = df > 0
    idf[present] = np.log(n_docs / df[present])
    return idf


def _weight(counts: sp.csr_matrix, idf: np.ndarray) -> sp.csr_matrix:
    # .multiply broadcasts the idf row across documents and returns COO;
    # eliminate_zeros drops entries where idf is exactly 0 (df = N tokens).
    weights = sp.csr_matrix(counts.astype(np.float64).multiply(idf[np.newaxis, :]))
    weights.eliminate_zeros()
    return weights


def tfidf(matrix: DocTermMatrix, feature_names: tuple[str, ...] | None = None) -> TfidfMatrix:
    """TF-IDF weights with the idf fitted from this matrix's own df."""
    if matrix.counts.shape[0] == 0:
        raise VectorizeError("empty matrix")
    idf = _idf_from_counts(matrix.counts)
    return TfidfMatrix(
        weights=_weight(matrix.counts, idf),
        idf=idf,
        doc_ids=matrix.doc_ids,
        feature_names=feature_names or (),
    )


def tfidf_transform(
    matrix: DocTermMatrix, idf: np.ndarray, feature_names: tuple[str, ...] = ()
) -> TfidfMatrix:
    """Apply a previously fitted idf vector to new rows (validation/test)."""
    if matrix.counts.shape[1] != idf.shape[0]:
        raise VectorizeError(
            f"idf length {idf.shape[0]} does not match matrix width {matrix.counts.shape[1]}"
        )
    return TfidfMatrix(
        weights=_weight(matrix.counts, idf),
        idf=idf,
        doc_ids=matrix.doc_ids,
        feature_names=feature_names,
    )


def cluster_members(vocab: Vocabulary, clusters: list[ClusterSpec]) -> dict[str, list[int]]:
    """Map cluster name -> member column ids; overlap is a configuration error."""
    owner: dict[int, str] = {}
    members: dict[str, list[int]] = {c.name: [] for c in clusters}
    for col, token in enumerate(vocab.tokens):
        for cluster in clusters:
            if cluster.matches(token):
                if col in owner:
                    raise VectorizeError(
                        f"token {token!r} matches clusters {owner[col]!r} and"
                        f" {cluster.name!r}; cluster patterns must not overlap"
                    )
                owner[col] = cluster.name
                members[cluster.name].append(col)
    return members


def cluster_count_matrix(
    matrix: DocTermMatrix, vocab: Vocabulary, clusters: list[ClusterSpec]
) -> DocTermMatrix:
    """Combined member counts per cluster: tf_[c,d] = sum of member tf_[i,d]."""
    members = cluster_members(vocab, clusters)
    cols = []
    for cluster in clusters:
        ids = members[cluster.name]
        if not ids:
            logger.warning(
                "cluster %r matches no vocabulary token; its column will be all zeros",
                cluster.name,
            )
            cols.append(sp.csr_matrix((matrix.counts.shape[0], 1), dtype=np.int64))
        else:
            summed = matrix.counts[:, ids].sum(axis=1)
            cols.append(sp.csr_matrix(summed, dtype=np.int64))
    combined = sp.hstack(cols, format="csr")
    return DocTermMatrix(counts=combined, doc_ids=matrix.doc_ids)


def cluster_matrix(
    matrix: DocTermMatrix, vocab: Vocabulary, clusters: list[ClusterSpec]
) -> TfidfMatrix:
    """TF-IDF over combined cluster counts: one column per cluster."""
    combined = cluster_count_matrix(matrix, vocab, clusters)
    return tfidf(combined, feature_names=tuple(c.name for c in clusters))


def cluster_transform(
    matrix: DocTermMatrix,
    vocab: Vocabulary,
    clusters: list[ClusterSpec],
    idf: np.ndarray,
) -> TfidfMatrix:
    """Apply fitted cluster idf to new rows."""
    combined = cluster_count_matrix(matrix, vocab, clusters)
    return tfidf_transform(combined, idf, feature_names=tuple(c.name for c in clusters))


def load_cluster_specs(path: str | Path) -> tuple[list[ClusterSpec], str]:
    """Parse a cluster config file; returns (specs, content hash).

    Line format: ``name: pattern, pattern, ...`` where a bare pattern is a
    stem prefix and ``exact="token"`` pins an exact stem.  The file must
    define exactly the fifteen canonical cluster names.
    """
    path = Path(path)
    raw = path.read_bytes()
    specs: list[ClusterSpec] = []
    seen: set[str] = set()
    for lineno, line in enumerate(raw.decode("utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise VectorizeError(f"{path}:{lineno}: expected 'name: patterns'")
        name, _, rest = line.partition(":")
        name = name.strip()
        if name not in CLUSTER_NAMES:
            raise VectorizeError(f"{path}:{lineno}: unknown cluster name {name!r}")
        if name in seen:
            raise VectorizeError(f"{path}:{lineno}: duplicate cluster {name!r}")
        seen.add(name)
        prefixes: list[str] = []
        exacts: list[str] = []
        for item in rest.split(","):
            item = item.strip()
            if not item:
                continue
            if item.startswith("exact="):
                value = item[len("exact="):].strip().strip('"')
                if not value:
                    raise VectorizeError(f"{path}:{lineno}: empty exact pattern")
                exacts.append(value)
            else:
                prefixes.append(item)
        if not prefixes and not exacts:
            raise VectorizeError(f"{path}:{lineno}: cluster {name!r} has no patterns")
        specs.append(ClusterSpec(name=name, prefixes=tuple(prefixes), exacts=tuple(exacts)))
    missing = [n for n in CLUSTER_NAMES if n not in seen]
    if missing:
        raise VectorizeError(f"{path}: missing clusters: {', '.join(missing)}")
    specs.sort(key=lambda c: CLUSTER_NAMES.index(c.name))
    return specs, hashlib.sha256(raw).hexdigest()


def default_cluster_path() -> Path:
    return Path(str(resources.files("srscreen").joinpath("data/clusters.cfg")))


def export_triplets(weights: sp.spmatrix, path: str | Path) -> None:
    """Write a sparse matrix as (row, col, value) CSV lines for inspection."""
    coo = sp.coo_matrix(weights)
    order = np.lexsort((coo.col, coo.row))
    integral = np.issubdtype(coo.data.dtype, np.integer)
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("row,col,value\n")
        for i in order:
            value = int(coo.data[i]) if integral else repr(float(coo.data[i]))
            fh.write(f"{int(coo.row[i])},{int(coo.col[i])},{value}\n")

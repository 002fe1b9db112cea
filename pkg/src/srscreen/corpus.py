"""Corpus ingestion, validation, and stratified splitting.

Documents are bibliographic records (id, title, abstract, optional
relevance label).  Corpora are immutable once loaded; splits are
deterministic functions of (corpus order, k, seed).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

RELEVANT = "relevant"
IRRELEVANT = "irrelevant"

_LABELS = {RELEVANT, IRRELEVANT}
_REQUIRED_FIELDS = ("id", "title", "abstract", "label")


class CorpusError(ValueError):
    """Malformed corpus file or invalid corpus operation."""


@dataclass(frozen=True)
class Document:
    """One bibliographic record; label is None for unscreened documents."""

    id: str
    title: str
    abstract: str
    label: str | None = None
    source: str | None = None

    @property
    def labeled(self) -> bool:
        return self.label is not None


@dataclass(frozen=True)
class LoadReport:
    """Summary of a corpus load: rows kept and rows excluded for empty text."""

    path: str
    n_loaded: int
    n_excluded_empty: int

    def summary(self) -> str:
        return (
            f"loaded {self.n_loaded} documents from {self.path}"
            f" ({self.n_excluded_empty} excluded: empty title and abstract)"
        )


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]

    def __post_init__(self):
        seen: set[str] = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    @property
    def n(self) -> int:
        return len(self.documents)

    @property
    def n_relevant(self) -> int:
        return sum(1 for d in self.documents if d.label == RELEVANT)

    @property
    def n_irrelevant(self) -> int:
        return sum(1 for d in self.documents if d.label == IRRELEVANT)

    @property
    def fully_labeled(self) -> bool:
        return all(d.labeled for d in self.documents)

    def labels(self) -> np.ndarray:
        """Label vector: 1 = relevant, 0 = irrelevant; requires full labels."""
        self.require_labeled()
        return np.array(
            [1 if d.label == RELEVANT else 0 for d in self.documents], dtype=np.int64
        )

    def require_labeled(self) -> None:
        unlabeled = [d.id for d in self.documents if not d.labeled]
        if unlabeled:
            raise CorpusError(
                f"{len(unlabeled)} unlabeled documents (first: {unlabeled[0]!r});"
                " training and evaluation need labels"
            )

    def subset(self, indices) -> "Corpus":
        return Corpus(documents=tuple(self.documents[i] for i in indices))


@dataclass(frozen=True)
class SplitPlan:
    """Cross-validation fold assignment: document id -> fold in [0, k)."""

    fold_assignments: dict[str, int]
    k: int
    seed: int

    def fold_indices(self, corpus: Corpus, fold: int) -> tuple[list[int], list[int]]:
        """(train_indices, validation_indices) for one fold, in corpus order."""
        train, val = [], []
        for i, doc in enumerate(corpus):
            if self.fold_assignments[doc.id] == fold:
                val.append(i)
            else:
                train.append(i)
        return train, val


def _normalize_label(raw: str | None, lineno: int, path: Path) -> str | None:
    if raw is None:
        return None
    value = raw.strip().lower()
    if value == "":
        return None
    if value not in _LABELS:
        raise CorpusError(
            f"{path}:{lineno}: unknown label {raw!r} (expected 'relevant', 'irrelevant' or blank)"
        )
    return value


def _build_documents(rows, path: Path) -> tuple[list[Document], int]:
    docs: list[Document] = []
    seen: dict[str, int] = {}
    n_excluded = 0
    for lineno, row in rows:
        missing = [f for f in _REQUIRED_FIELDS if f not in row]
        if missing:
            raise CorpusError(f"{path}:{lineno}: missing fields: {', '.join(missing)}")
        doc_id = str(row["id"]).strip()
        if not doc_id:
            raise CorpusError(f"{path}:{lineno}: empty document id")
        if doc_id in seen:
            raise CorpusError(
                f"{path}:{lineno}: duplicate id {doc_id!r} (first seen on line {seen[doc_id]})"
            )
        seen[doc_id] = lineno
        title = str(row.get("title") or "")
        abstract = str(row.get("abstract") or "")
        if not title.strip() and not abstract.strip():
            n_excluded += 1
            continue
        source = row.get("source")
        docs.append(
            Document(
                id=doc_id,
                title=title,
                abstract=abstract,
                label=_normalize_label(row.get("label"), lineno, path),
                source=str(source) if source else None,
            )
        )
    return docs, n_excluded


def load_corpus(path: str | Path, format: str) -> tuple[Corpus, LoadReport]:
    """Load a JSONL or CSV corpus file.

    Documents whose title and abstract are both empty are dropped and
    counted in the returned LoadReport.  Malformed rows and duplicate
    ids raise CorpusError naming the offending line.
    """
    path = Path(path)
    if format not in ("jsonl", "csv"):
        raise CorpusError(f"unknown corpus format {format!r} (expected 'jsonl' or 'csv')")
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")

    rows: list[tuple[int, dict]] = []
    if format == "jsonl":
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
                if not isinstance(obj, dict):
                    raise CorpusError(f"{path}:{lineno}: expected a JSON object")
                rows.append((lineno, obj))
    else:
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise CorpusError(f"{path}:1: empty CSV file")
            missing = [f for f in _REQUIRED_FIELDS if f not in reader.fieldnames]
            if missing:
                raise CorpusError(f"{path}:1: header missing columns: {', '.join(missing)}")
            for lineno, row in enumerate(reader, start=2):
                if None in row.values() and all(
                    v is None or v == "" for v in row.values()
                ):
                    continue
                rows.append((lineno, row))

    docs, n_excluded = _build_documents(rows, path)
    if not docs:
        raise CorpusError(f"{path}: no usable documents")
    corpus = Corpus(documents=tuple(docs))
    return corpus, LoadReport(path=str(path), n_loaded=len(docs), n_excluded_empty=n_excluded)


def save_corpus(corpus: Corpus, path: str | Path, format: str) -> None:
    """Write a corpus back out; round-trips exactly through load_corpus."""
    path = Path(path)
    if format == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for doc in corpus:
                fh.write(
                    json.dumps(
                        {
                            "id": doc.id,
                            "title": doc.title,
                            "abstract": doc.abstract,
                            "label": doc.label or "",
                            "source": doc.source or "",
                        },
                        sort_keys=True,
                        ensure_ascii=False,
                    )
                    + "\n"
                )
    elif format == "csv":
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "title", "abstract", "label", "source"])
            for doc in corpus:
                writer.writerow(
                    [doc.id, doc.title, doc.abstract, doc.label or "", doc.source or ""]
                )
    else:
        raise CorpusError(f"unknown corpus format {format!r}")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _class_indices(corpus: Corpus) -> dict[str, list[int]]:
    by_class: dict[str, list[int]] = {RELEVANT: [], IRRELEVANT: []}
    for i, doc in enumerate(corpus):
        by_class[doc.label].append(i)
    return by_class


def stratified_kfold(corpus: Corpus, k: int, seed: int) -> SplitPlan:
    """Assign every labeled document to one of k folds, stratified by class.

    Each class is shuffled independently (seeded) and dealt round-robin,
    so per-fold class counts deviate from exact proportionality by less
    than one document.
    """
    corpus.require_labeled()
    if k < 2:
        raise CorpusError(f"k must be >= 2, got {k}")
    if corpus.n < k:
        raise CorpusError(f"cannot split {corpus.n} documents into {k} folds")
    by_class = _class_indices(corpus)
    for label, members in by_class.items():
        if not members:
            raise CorpusError(
                f"degenerate stratification: class {label!r} has no documents"
            )
    rng = np.random.default_rng(seed)
    assignments: dict[str, int] = {}
    cursor = 0  # shared across classes so total fold sizes stay within 1 too
    for label in (RELEVANT, IRRELEVANT):
        members = np.array(by_class[label], dtype=np.int64)
        rng.shuffle(members)
        for idx in members:
            assignments[corpus.documents[idx].id] = cursor % k
            cursor += 1
    return SplitPlan(fold_assignments=assignments, k=k, seed=seed)


def subsample_training(
    corpus: Corpus, fraction: float, seed: int
) -> tuple[Corpus, Corpus]:
    """Draw a stratified training subsample of round(fraction * N) documents.

    Returns (train, rest); the two partition the corpus.  Per-class counts
    are apportioned by largest remainder, so each is within one document
    of fraction * class_count.  Rounding is half-up.
    """
    corpus.require_labeled()
    if not 0.0 < fraction <= 1.0:
        raise CorpusError(f"fraction must be in (0, 1], got {fraction}")
    n_total = _round_half_up(fraction * corpus.n)
    by_class = _class_indices(corpus)
    labels = [lbl for lbl in (RELEVANT, IRRELEVANT) if by_class[lbl]]
    quotas = {lbl: fraction * len(by_class[lbl]) for lbl in labels}
    counts = {lbl: math.floor(quotas[lbl]) for lbl in labels}
    shortfall = n_total - sum(counts.values())
    # Distribute the remaining slots to the largest fractional remainders.
    order = sorted(labels, key=lambda lbl: quotas[lbl] - counts[lbl], reverse=True)
    for lbl in order[:shortfall]:
        counts[lbl] += 1

    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    for lbl in (RELEVANT, IRRELEVANT):
        if lbl not in counts:
            continue
        members = np.array(by_class[lbl], dtype=np.int64)
        rng.shuffle(members)
        train_idx.extend(int(i) for i in members[: counts[lbl]])
    train_set = set(train_idx)
    train = corpus.subset(sorted(train_set))
    rest = corpus.subset([i for i in range(corpus.n) if i not in train_set])
    return train, rest

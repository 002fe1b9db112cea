"""Boolean keyword classifier: fsw AND (hiv OR violence).

Terms match unstemmed lowercase tokens (single words) or the
whitespace-normalized raw text (phrases); a trailing '*' marks a prefix.
The query structure is fixed; only the three category term lists are
configurable.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .corpus import Corpus, Document, RELEVANT, IRRELEVANT
from .textprep import tokenize

CATEGORY_NAMES = ("fsw", "hiv", "violence")


class QueryConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Term:
    """One search term: words (>= 1), optionally prefix-matched on the last."""

    words: tuple[str, ...]
    prefix: bool = False

    def __post_init__(self):
        if not self.words or any(not w for w in self.words):
            raise QueryConfigError(f"empty term: {self.words!r}")

    @property
    def kind(self) -> str:
        if len(self.words) > 1:
            return "phrase"
        return "prefix" if self.prefix else "exact"


@dataclass(frozen=True)
class KeywordCategory:
    name: str
    terms: tuple[Term, ...]


@dataclass(frozen=True)
class BooleanQuery:
    """fsw AND (hiv OR violence) over three keyword categories."""

    fsw: KeywordCategory
    hiv: KeywordCategory
    violence: KeywordCategory
    content_hash: str = field(default="", compare=False)


def _match_single(tokens, word: str, prefix: bool) -> bool:
    if prefix:
        return any(t.startswith(word) for t in tokens)
    return any(t == word for t in tokens)


def _is_letter(ch: str) -> bool:
    return "a" <= ch <= "z"


def _match_phrase(raw_text: str, words: tuple[str, ...], prefix: bool) -> bool:
    """Contiguous phrase containment with letter boundaries on both ends.

    With prefix=True the phrase's last word may continue ("commercial sex
    work*" would match "...sex workers").
    """
    needle = " ".join(words)
    start = 0
    while True:
        pos = raw_text.find(needle, start)
        if pos < 0:
            return False
        end = pos + len(needle)
        left_ok = pos == 0 or not _is_letter(raw_text[pos - 1])
        right_ok = prefix or end == len(raw_text) or not _is_letter(raw_text[end])
        if left_ok and right_ok:
            return True
        start = pos + 1


def normalize_raw_text(doc: Document) -> str:
    """Lowercased title+abstract with whitespace runs collapsed to spaces."""
    return " ".join((doc.title + " " + doc.abstract).lower().split())


def match_category(tokens: list[str], raw_text: str, category: KeywordCategory) -> bool:
    """True iff any term of the category occurs in the document."""
    for term in category.terms:
        if len(term.words) == 1:
            if _match_single(tokens, term.words[0], term.prefix):
                return True
        elif _match_phrase(raw_text, term.words, term.prefix):
            return True
    return False


def classify_boolean(doc: Document, query: BooleanQuery) -> str:
    tokens = tokenize(doc.title + " " + doc.abstract)
    raw = normalize_raw_text(doc)
    if match_category(tokens, raw, query.fsw) and (
        match_category(tokens, raw, query.hiv)
        or match_category(tokens, raw, query.violence)
    ):
        return RELEVANT
    return IRRELEVANT


@dataclass(frozen=True)
class BooleanPoint:
    """Single operating point of the deterministic keyword classifier."""

    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    fpr: float
    tpr: float
    notes: tuple[str, ...] = ()


def boolean_point(corpus: Corpus, query: BooleanQuery) -> BooleanPoint:
    """Confusion counts and precision/recall of the query against labels.

    Undefined ratios (no predicted positives, or a class absent from the
    corpus) are reported as NaN with an explanatory note.
    """
    corpus.require_labeled()
    tp = fp = fn = tn = 0
    for doc in corpus:
        predicted = classify_boolean(doc, query)
        if doc.label == RELEVANT:
            if predicted == RELEVANT:
                tp += 1
            else:
                fn += 1
        else:
            if predicted == RELEVANT:
                fp += 1
            else:
                tn += 1
    notes: list[str] = []
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision = math.nan
        notes.append("precision undefined: query matched no documents")
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall = math.nan
        notes.append("recall undefined: corpus has no relevant documents")
    fpr = fp / (fp + tn) if fp + tn > 0 else math.nan
    if fp + tn == 0:
        notes.append("fpr undefined: corpus has no irrelevant documents")
    return BooleanPoint(
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        precision=precision,
        recall=recall,
        fpr=fpr,
        tpr=recall,
        notes=tuple(notes),
    )


def _parse_term(line: str, path: Path, lineno: int) -> Term:
    prefix = False
    if line.startswith('"'):
        if not line.endswith('"') or len(line) < 3:
            raise QueryConfigError(f"{path}:{lineno}: unterminated quoted phrase")
        inner = line[1:-1].strip()
        if inner.endswith("*"):
            prefix = True
            inner = inner[:-1].rstrip()
        words = tuple(inner.lower().split())
        if not words:
            raise QueryConfigError(f"{path}:{lineno}: empty phrase")
        return Term(words=words, prefix=prefix)
    word = line.lower()
    if word.endswith("*"):
        prefix = True
        word = word[:-1]
    if not word:
        raise QueryConfigError(f"{path}:{lineno}: empty term")
    if " " in word:
        raise QueryConfigError(f"{path}:{lineno}: multi-word terms must be quoted")
    return Term(words=(word,), prefix=prefix)


def load_query(path: str | Path) -> BooleanQuery:
    """Parse a three-section keyword config into the fixed Boolean query."""
    path = Path(path)
    raw = path.read_bytes()
    sections: dict[str, list[Term]] = {name: [] for name in CATEGORY_NAMES}
    current: str | None = None
    for lineno, line in enumerate(raw.decode("utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in sections:
                raise QueryConfigError(
                    f"{path}:{lineno}: unknown section {name!r} (expected fsw, hiv, violence)"
                )
            current = name
            continue
        if current is None:
            raise QueryConfigError(f"{path}:{lineno}: term outside any [section]")
        sections[current].append(_parse_term(line, path, lineno))
    empty = [name for name, terms in sections.items() if not terms]
    if empty:
        raise QueryConfigError(f"{path}: empty categories: {', '.join(empty)}")
    categories = {
        name: KeywordCategory(name=name, terms=tuple(terms))
        for name, terms in sections.items()
    }
    return BooleanQuery(
        fsw=categories["fsw"],
        hiv=categories["hiv"],
        violence=categories["violence"],
        content_hash=hashlib.sha256(raw).hexdigest(),
    )


def default_query_path() -> Path:
    return Path(str(resources.files("srscreen").joinpath("data/keywords.cfg")))


def default_query() -> BooleanQuery:
    return load_query(default_query_path())

"""Text normalization: tokenization, lemma-list lookup, stemming.

The pipeline is tokenize -> lemmatize -> stem.  Lemmatization happens on
inflected surface forms (before stemming), since the lemma list is keyed
by dictionary forms.  All operations are pure functions over immutable
inputs, so documents can be preprocessed in parallel.
"""

from __future__ import annotations

import functools
import hashlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .corpus import Document
from .porter import stem as porter_stem

_ASCII_LETTERS = frozenset("abcdefghijklmnopqrstuvwxyz")


@dataclass(frozen=True)
class TokenSequence:
    """Normalized tokens of one document, in original text order."""

    doc_id: str
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class LemmaTable:
    """Inflected form -> lemma lookup; absent forms pass through unchanged."""

    entries: dict[str, str]
    content_hash: str = field(default="", compare=False)

    def lookup(self, token: str) -> str:
        return self.entries.get(token, token)


def tokenize(text: str) -> list[str]:
    """Split on whitespace, lowercase, strip everything but ASCII letters.

    Pieces that become empty (pure punctuation, numbers, non-Latin text)
    are dropped.  Note that stripping joins letters across removed
    characters: "HIV/AIDS" becomes the single token "hivaids".
    """
    tokens = []
    for piece in text.split():
        cleaned = "".join(ch for ch in piece.lower() if ch in _ASCII_LETTERS)
        if cleaned:
            tokens.append(cleaned)
    return tokens


def lemmatize(tokens: list[str], table: LemmaTable) -> list[str]:
    return [table.lookup(t) for t in tokens]


@functools.lru_cache(maxsize=262144)
def _cached_stem(token: str) -> str:
    return porter_stem(token)


def stem(tokens: list[str]) -> list[str]:
    """Porter-stem each token; length preserving."""
    return [_cached_stem(t) for t in tokens]


def preprocess(doc: Document, table: LemmaTable) -> TokenSequence:
    """Full normalization of a document's combined title and abstract."""
    tokens = stem(lemmatize(tokenize(doc.title + " " + doc.abstract), table))
    return TokenSequence(doc_id=doc.id, tokens=tuple(tokens))


def preprocess_corpus(docs, table: LemmaTable) -> list[TokenSequence]:
    return [preprocess(d, table) for d in docs]


def load_lemma_table(path: str | Path) -> LemmaTable:
    """Read a two-column tab-separated lemma list.

    Each line is ``form<TAB>lemma``; blank lines and lines starting with
    '#' are ignored.  Forms and lemmas are lowercased; an empty lemma is
    a format error.
    """
    path = Path(path)
    raw = path.read_bytes()
    entries: dict[str, str] = {}
    for lineno, line in enumerate(raw.decode("utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'form<TAB>lemma', got {line!r}")
        form, lemma = parts[0].strip().lower(), parts[1].strip().lower()
        if not form or not lemma:
            raise ValueError(f"{path}:{lineno}: empty form or lemma")
        entries[form] = lemma
    return LemmaTable(entries=entries, content_hash=hashlib.sha256(raw).hexdigest())


def default_lemma_table_path() -> Path:
    return Path(str(resources.files("srscreen").joinpath("data/lemmas.tsv")))


def default_lemma_table() -> LemmaTable:
    return load_lemma_table(default_lemma_table_path())

import json
from pathlib import Path

import pytest

from srscreen.corpus import Corpus, Document
from srscreen.textprep import default_lemma_table

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def lemma_table():
    return default_lemma_table()


@pytest.fixture(scope="session")
def porter_golden():
    """(word, stem) pairs frozen from the canonical reference implementation."""
    pairs = []
    for line in (DATA_DIR / "porter_golden.tsv").read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        word, stem = line.split("\t")
        pairs.append((word, stem))
    return pairs


def make_doc(doc_id, title="", abstract="", label=None):
    return Document(id=doc_id, title=title, abstract=abstract, label=label)


def make_corpus(rows):
    """rows: (id, title, abstract, label) tuples."""
    return Corpus(documents=tuple(Document(*row) for row in rows))


def write_jsonl(path, rows):
    """rows: dicts written one per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return path

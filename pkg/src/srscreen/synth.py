"""Synthetic screening corpus with planted signal.

Generates a labeled corpus (default 10,000 documents, one relevant per
ten irrelevant) whose relevant class carries three kinds of signal:

* cluster terms: surface forms that stem into the 15 semantic clusters
  and mostly also fire the Boolean keyword query,
* exactly 100 discriminative pseudo-tokens that match no cluster pattern
  and no keyword (visible to the token-selection model only),
* higher term intensity (multiple mentions) than irrelevant documents.

Irrelevant documents contain enough stray keyword hits (crime reporting,
off-topic clinical text) to keep the Boolean query's precision modest.
Everything is a pure function of (n_docs, seed); the token pools come
from a fixed internal generator so the vocabulary is stable across seeds.
"""

from __future__ import annotations

import numpy as np

from .corpus import Corpus, Document, IRRELEVANT, RELEVANT

# Surface forms grouped by the cluster their stems land in.
_CLUSTER_SURFACE = {
    "hiv": ["hiv", "aids"],
    "fsw": ["fsw", "fsws", "csw", "prostitution", "prostitutes"],
    "violence": ["violence", "violent", "violently"],
    "offense": ["offense", "offenses", "offensive"],
    "abuse": ["abuse", "abused", "abusive", "abuses"],
    "torture": ["torture", "tortured", "torturing"],
    "rape": ["rape", "raped", "rapes", "rapist"],
    "victim": ["victim", "victims", "victimization"],
    "assault": ["assault", "assaulted", "assaults"],
    "harass": ["harassed", "harassment", "harassing"],
    "extort": ["extortion", "extorted"],
    "homicide": ["homicide", "homicides"],
    "coercion": ["coercion", "coerced", "coercive"],
    "ipv": ["ipv", "ipsv"],
    "exploit": ["exploitation", "exploited", "exploitative"],
}

_VIOLENCE_SIDE = [
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
]

# Keyword-only bait: fires the Boolean violence category but belongs to no
# cluster, so it degrades the keyword model without touching the forests.
_KEYWORD_BAIT = [
    "crime",
    "crimes",
    "criminal",
    "battered",
    "battery",
    "intimidation",
    "intimidated",
]

_FSW_PHRASES = [
    ("sex", "worker"),
    ("sex", "workers"),
    ("commercial", "sex"),
    ("sex", "trade"),
    ("transactional", "sex"),
]

_COMMON_FILLER = (
    "the of and to in a for with on by from at as is are was were study results "
    "methods analysis data among between during after before using based found "
    "reported associated increased decreased higher lower significant sample "
    "population health care model approach survey region period outcome risk "
    "level group compared review evidence research country national community"
).split()

_CONSONANTS = "bcdfgklmnprstvz"
_VOWELS = "aeiou"


def _pseudo_words(rng: np.random.Generator, count: int, taken: set[str]) -> list[str]:
    """Pronounceable 8-letter pseudo-words that fire no cluster or keyword."""
    from .boolquery import default_query, match_category
    from .porter import stem
    from .vectorize import default_cluster_path, load_cluster_specs

    clusters, _ = load_cluster_specs(default_cluster_path())
    query = default_query()
    categories = (query.fsw, query.hiv, query.violence)

    words: list[str] = []
    while len(words) < count:
        syllables = [
            _CONSONANTS[rng.integers(len(_CONSONANTS))] + _VOWELS[rng.integers(len(_VOWELS))]
            for _ in range(4)
        ]
        w = "".join(syllables)
        s = stem(w)
        if w in taken:
            continue
        if any(c.matches(s) or c.matches(w) for c in clusters):
            continue
        if any(match_category([w], w, cat) for cat in categories):
            continue
        taken.add(w)
        words.append(w)
    return words


def _build_pools() -> tuple[list[str], list[str]]:
    """(100 discriminative tokens, noise vocabulary); fixed across seeds."""
    rng = np.random.default_rng(20240917)
    taken: set[str] = set(_COMMON_FILLER) | set(_KEYWORD_BAIT)
    for forms in _CLUSTER_SURFACE.values():
        taken.update(forms)
    for phrase in _FSW_PHRASES:
        taken.update(phrase)
    discriminative = _pseudo_words(rng, 100, taken)
    noise = _pseudo_words(rng, 1200, taken) + list(_COMMON_FILLER)
    return discriminative, noise


_DISCRIMINATIVE, _NOISE = _build_pools()


def discriminative_tokens() -> tuple[str, ...]:
    """The 100 planted non-cluster, non-keyword signal tokens."""
    return tuple(_DISCRIMINATIVE)


def _sample(rng, pool, size) -> list[str]:
    return [pool[i] for i in rng.integers(0, len(pool), size=size)]


def _relevant_tokens(rng: np.random.Generator) -> list[str]:
    tokens: list[str] = []
    if rng.random() < 0.75:
        n = 1 + rng.poisson(1.6)
        tokens += _sample(rng, _CLUSTER_SURFACE["fsw"], n)
        if rng.random() < 0.5:
            tokens += list(_FSW_PHRASES[rng.integers(len(_FSW_PHRASES))])
    if rng.random() < 0.55:
        tokens += _sample(rng, _CLUSTER_SURFACE["hiv"], 1 + rng.poisson(1.8))
    if rng.random() < 0.60:
        n_clusters = 1 + rng.integers(3)
        for ci in rng.integers(0, len(_VIOLENCE_SIDE), size=n_clusters):
            cluster = _VIOLENCE_SIDE[ci]
            tokens += _sample(rng, _CLUSTER_SURFACE[cluster], 1 + rng.poisson(1.2))
    tokens += _sample(rng, _DISCRIMINATIVE, rng.integers(5, 15))
    return tokens


def _irrelevant_tokens(rng: np.random.Generator) -> list[str]:
    tokens: list[str] = []
    if rng.random() < 0.22:
        tokens += _sample(rng, _CLUSTER_SURFACE["fsw"], 1)
        if rng.random() < 0.15:
            tokens += list(_FSW_PHRASES[rng.integers(len(_FSW_PHRASES))])
    if rng.random() < 0.02:
        tokens.append("sw")  # stray abbreviation; a known keyword hazard
    if rng.random() < 0.30:
        tokens += _sample(rng, _CLUSTER_SURFACE["hiv"], 1)
    if rng.random() < 0.30:
        cluster = _VIOLENCE_SIDE[rng.integers(len(_VIOLENCE_SIDE))]
        tokens += _sample(rng, _CLUSTER_SURFACE[cluster], 1)
    if rng.random() < 0.25:
        tokens += _sample(rng, _KEYWORD_BAIT, 1 + rng.poisson(0.5))
    if rng.random() < 0.35:
        tokens += _sample(rng, _DISCRIMINATIVE, 1 + rng.integers(2))
    return tokens


def generate_corpus(n_docs: int = 10000, seed: int = 1) -> Corpus:
    """Deterministic labeled corpus with a one-to-ten class ratio."""
    if n_docs < 22:
        raise ValueError("need at least 22 documents to keep both classes populated")
    rng = np.random.default_rng(np.random.SeedSequence([916680132, seed]))
    n_rel = round(n_docs / 11)
    docs: list[tuple[str, list[str]]] = []
    for _ in range(n_rel):
        docs.append((RELEVANT, _relevant_tokens(rng)))
    for _ in range(n_docs - n_rel):
        docs.append((IRRELEVANT, _irrelevant_tokens(rng)))

    order = rng.permutation(len(docs))
    width = len(str(n_docs))
    documents = []
    for pos, di in enumerate(order):
        label, signal = docs[di]
        body = signal + _sample(rng, _NOISE, int(rng.integers(60, 120)))
        rng.shuffle(body)
        title = " ".join(_sample(rng, _NOISE, 3) + body[:3])
        abstract = " ".join(body)
        documents.append(
            Document(
                id=f"synth-{pos + 1:0{width}d}",
                title=title,
                abstract=abstract,
                label=label,
                source="synthetic",
            )
        )
    return Corpus(documents=tuple(documents))

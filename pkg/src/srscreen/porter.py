"""Porter suffix-stripping stemmer.

Implements the classic Porter algorithm (steps 1a through 5b) as defined
by its author's reference implementation, which is also the behaviour the
published test vocabulary was generated with.  That reference departs from
the 1980 journal description in three documented points, all reproduced
here:

* words of length 1 or 2 are returned unchanged,
* step 2 rewrites ``-bli`` to ``-ble`` (the paper had ``-abli`` -> ``-able``),
* step 2 gains the rule ``-logi`` -> ``-log``.

Input is expected to be a lowercase ASCII-alphabetic token; output is the
stem, which is frequently not a dictionary word ("stay" -> "stai").
"""

from __future__ import annotations

_VOWELS = frozenset("aeiou")


def _cons_mask(word: str) -> list[bool]:
    """True where the character acts as a consonant.

    'y' is a consonant at position 0 or after a vowel, otherwise a vowel
    ("toy" -> t,o are c,v and y is a consonant; "syzygy" -> every y is a
    vowel).
    """
    mask: list[bool] = []
    for i, ch in enumerate(word):
        if ch in _VOWELS:
            mask.append(False)
        elif ch == "y":
            mask.append(i == 0 or not mask[i - 1])
        else:
            mask.append(True)
    return mask


def _measure(stem: str) -> int:
    """Number of vowel-to-consonant transitions ([C](VC)^m[V] form)."""
    mask = _cons_mask(stem)
    m = 0
    prev_vowel = False
    for is_cons in mask:
        if is_cons and prev_vowel:
            m += 1
        prev_vowel = not is_cons
    return m


def _has_vowel(stem: str) -> bool:
    return not all(_cons_mask(stem))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _cons_mask(word)[-1]
    )


def _ends_cvc(word: str) -> bool:
    """consonant-vowel-consonant ending where the final c is not w, x or y.

    Used to restore a trailing e on short stems (hop-e) but not after
    snow/box/tray shapes.
    """
    if len(word) < 3:
        return False
    mask = _cons_mask(word)
    return mask[-3] and not mask[-2] and mask[-1] and word[-1] not in "wxy"


# (suffix, replacement) rules applied first-match-wins within a step; the
# replacement fires only when measure(stem) > threshold, otherwise the
# step ends without change (matching consumes the step, as in the
# reference implementation).
_STEP2_RULES = (
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("bli", "ble"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
    ("logi", "log"),
)

_STEP3_RULES = (
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
)

_STEP4_SUFFIXES = (
    "al",
    "ance",
    "ence",
    "er",
    "ic",
    "able",
    "ible",
    "ant",
    "ement",
    "ment",
    "ent",
    "ion",
    "ou",
    "ism",
    "ate",
    "iti",
    "ous",
    "ive",
    "ize",
)


def _step1a(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s"):
        return word[:-1]
    return word


def _step1b(word: str) -> str:
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            return word[:-1]
        return word
    if word.endswith("ed"):
        stem = word[:-2]
        if not _has_vowel(stem):
            return word
    elif word.endswith("ing"):
        stem = word[:-3]
        if not _has_vowel(stem):
            return word
    else:
        return word
    # -ed/-ing was removed; tidy up the exposed stem.
    if stem.endswith(("at", "bl", "iz")):
        return stem + "e"
    if _ends_double_consonant(stem) and stem[-1] not in "lsz":
        return stem[:-1]
    if _measure(stem) == 1 and _ends_cvc(stem):
        return stem + "e"
    return stem


def _step1c(word: str) -> str:
    if word.endswith("y") and _has_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


def _apply_rules(word: str, rules: tuple[tuple[str, str], ...]) -> str:
    for suffix, repl in rules:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if _measure(stem) > 0:
                return stem + repl
            return word
    return word


def _step4(word: str) -> str:
    for suffix in _STEP4_SUFFIXES:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if suffix == "ion" and not stem.endswith(("s", "t")):
                continue
            if _measure(stem) > 1:
                return stem
            return word
    return word


def _step5a(word: str) -> str:
    if word.endswith("e"):
        m = _measure(word)
        if m > 1 or (m == 1 and not _ends_cvc(word[:-1])):
            return word[:-1]
    return word


def _step5b(word: str) -> str:
    if word.endswith("ll") and _measure(word) > 1:
        return word[:-1]
    return word


def stem(word: str) -> str:
    """Return the Porter stem of a lowercase token.

    Words shorter than three characters are returned unchanged.
    """
    if len(word) <= 2:
        return word
    word = _step1a(word)
    word = _step1b(word)
    word = _step1c(word)
    word = _apply_rules(word, _STEP2_RULES)
    word = _apply_rules(word, _STEP3_RULES)
    word = _step4(word)
    word = _step5a(word)
    word = _step5b(word)
    return word

"""Stemmer checks against the frozen reference vocabulary.

The golden file pairs were produced with the algorithm author's canonical
reference implementation (the behaviour of the published test data),
which departs from the 1980 journal text in three documented points
(length <= 2 guard, -bli -> -ble, -logi -> -log).
"""

import pytest

from srscreen.porter import stem


def test_full_golden_vocabulary(porter_golden):
    assert len(porter_golden) >= 1000
    mismatches = [(w, e, stem(w)) for w, e in porter_golden if stem(w) != e]
    assert mismatches == []


@pytest.mark.parametrize(
    "word,expected",
    [
        # step 1a
        ("caresses", "caress"),
        ("ponies", "poni"),
        ("ties", "ti"),
        ("caress", "caress"),
        ("cats", "cat"),
        # step 1b and its tidy-up
        ("feed", "feed"),
        ("agreed", "agre"),  # step 1b gives "agree"; step 5a strips the e
        ("plastered", "plaster"),
        ("bled", "bled"),
        ("motoring", "motor"),
        ("sing", "sing"),
        ("conflated", "conflat"),
        ("troubled", "troubl"),
        ("sized", "size"),
        ("hopping", "hop"),
        ("tanned", "tan"),
        ("falling", "fall"),
        ("hissing", "hiss"),
        ("fizzed", "fizz"),
        ("failing", "fail"),
        ("filing", "file"),
        # step 1c
        ("happy", "happi"),
        ("sky", "sky"),
        ("stay", "stai"),
        # step 2 (including the bli/logi departures)
        ("relational", "relat"),
        ("conditional", "condit"),
        ("rational", "ration"),
        ("valenci", "valenc"),
        ("hesitanci", "hesit"),
        ("digitizer", "digit"),
        ("conformabli", "conform"),
        ("radicalli", "radic"),
        ("differentli", "differ"),
        ("vileli", "vile"),
        ("analogousli", "analog"),
        ("vietnamization", "vietnam"),
        ("predication", "predic"),
        ("operator", "oper"),
        ("feudalism", "feudal"),
        ("decisiveness", "decis"),
        ("hopefulness", "hope"),
        ("callousness", "callous"),
        ("formaliti", "formal"),
        ("sensitiviti", "sensit"),
        ("sensibiliti", "sensibl"),
        ("apology", "apolog"),
        # step 3
        ("triplicate", "triplic"),
        ("formative", "form"),
        ("formalize", "formal"),
        ("electriciti", "electr"),
        ("electrical", "electr"),
        ("hopeful", "hope"),
        ("goodness", "good"),
        # step 4
        ("revival", "reviv"),
        ("allowance", "allow"),
        ("inference", "infer"),
        ("airliner", "airlin"),
        ("gyroscopic", "gyroscop"),
        ("adjustable", "adjust"),
        ("defensible", "defens"),
        ("irritant", "irrit"),
        ("replacement", "replac"),
        ("adjustment", "adjust"),
        ("dependent", "depend"),
        ("adoption", "adopt"),
        ("communism", "commun"),
        ("activate", "activ"),
        ("angulariti", "angular"),
        ("homologous", "homolog"),
        ("effective", "effect"),
        ("bowdlerize", "bowdler"),
        # step 5
        ("probate", "probat"),
        ("rate", "rate"),
        ("cease", "ceas"),
        ("controll", "control"),
        ("roll", "roll"),
        # short-word guard
        ("is", "is"),
        ("be", "be"),
        ("as", "as"),
    ],
)
def test_rule_examples(word, expected):
    assert stem(word) == expected


def test_domain_stems():
    assert stem("violence") == "violenc"
    assert stem("prostitution") == "prostitut"
    assert stem("exploitation") == "exploit"
    assert stem("rapist") == "rapist"
    assert stem("coercion") == "coercion"


@pytest.mark.xfail(
    strict=True,
    reason="the cited normalization example claims automates/automation -> automat,"
    " but every faithful implementation of the algorithm (including the"
    " published reference) yields autom; automatic -> automat is the true member"
    " of that family",
)
def test_claimed_automates_stem():
    assert stem("automates") == "automat" and stem("automation") == "automat"


def test_output_is_lowercase_alpha(porter_golden):
    for word, _ in porter_golden[::53]:
        s = stem(word)
        assert s and s == s.lower()


def test_idempotence_scan_reports_counterexamples(porter_golden):
    """Re-stemming is not guaranteed stable; report exceptions, don't forbid them."""
    stems = sorted({s for _, s in porter_golden})
    counterexamples = [(s, stem(s)) for s in stems if stem(s) != s]
    rate = len(counterexamples) / len(stems)
    print(
        f"\nidempotence scan: {len(counterexamples)} counterexamples over"
        f" {len(stems)} distinct stems ({rate:.2%}); first few: {counterexamples[:5]}"
    )
    assert len(stems) >= 1000  # the scan must actually cover the fixture

"""Canonical forms, the shift, the dyadic metric, and cylinder handling."""

import numpy as np
import pytest

from l2tf import (
    CylinderWord,
    EventuallyPeriodic,
    all_words,
    cylinder_of,
    distance,
    equals,
    representative,
    shift,
)
from l2tf.symbolic import word_from_index, word_index

from conftest import pt, random_point


def test_canonical_form_is_minimal():
    x = EventuallyPeriodic((1, 2), (1, 2), 2)
    assert x.prefix == () and x.period == (1, 2)
    y = EventuallyPeriodic((), (1, 1, 1), 2)
    assert y.period == (1,)
    z = EventuallyPeriodic((3,), (1,), 3)
    assert z.prefix == (3,) and z.period == (1,)


def test_equality_examples():
    assert equals(EventuallyPeriodic((), (1, 1), 2), EventuallyPeriodic((), (1,), 2))
    assert not equals(pt("|12"), pt("|21"))
    # prefix (1) + period (2,1) denotes 1,2,1,2,... = (1,2)^inf
    assert equals(EventuallyPeriodic((1,), (2, 1), 2), pt("|12"))
    assert EventuallyPeriodic((1,), (2, 1), 2) == pt("|12")


def test_equals_rejects_alphabet_mismatch():
    with pytest.raises(ValueError):
        equals(pt("|1", 2), pt("|1", 3))
    with pytest.raises(ValueError):
        distance(pt("|1", 2), pt("|1", 3))


def test_distance_examples():
    one = EventuallyPeriodic.constant(1, 2)
    assert distance(one, one) == 0.0
    assert distance(one, pt("|12")) == 0.25  # first mismatch at index 2
    assert distance(EventuallyPeriodic.constant(2, 2), one) == 0.5


def test_distance_is_exact_dyadic():
    # agree on 7 symbols, differ at the 8th
    x = EventuallyPeriodic((1, 1, 1, 1, 1, 1, 1), (2,), 2)
    y = EventuallyPeriodic.constant(1, 2)
    assert distance(x, y) == 2.0**-8


def test_shift_examples():
    assert shift(pt("|12")) == pt("|21")
    assert shift(EventuallyPeriodic((3,), (1,), 3)) == EventuallyPeriodic.constant(1, 3)
    assert shift(shift(pt("|12"))) == pt("|12")


def test_shift_by_matches_iterated_shift():
    rng = np.random.default_rng(11)
    for _ in range(50):
        x = random_point(rng, 3)
        steps = int(rng.integers(0, 9))
        y = x
        for _ in range(steps):
            y = shift(y)
        assert x.shift_by(steps) == y


def test_prepend_inverts_shift():
    rng = np.random.default_rng(12)
    for _ in range(50):
        x = random_point(rng, 2)
        a = int(rng.integers(1, 3))
        assert shift(x.prepend(a)) == x
        assert x.prepend(a).first(4) == (a,) + x.first(3)


def test_ultrametric_inequality():
    rng = np.random.default_rng(13)
    for _ in range(200):
        x, y, z = (random_point(rng, 2) for _ in range(3))
        assert distance(x, z) <= max(distance(x, y), distance(y, z)) + 0.0


def test_distance_zero_iff_equals():
    rng = np.random.default_rng(14)
    for _ in range(200):
        x, y = random_point(rng, 2), random_point(rng, 2)
        assert (distance(x, y) == 0.0) == equals(x, y)
        assert equals(x, y) == (x == y)


def test_equals_is_equivalence():
    rng = np.random.default_rng(15)
    pts = [random_point(rng, 2, max_prefix=2, max_period=2) for _ in range(30)]
    for x in pts:
        assert equals(x, x)
    for x in pts:
        for y in pts:
            assert equals(x, y) == equals(y, x)
            for z in pts:
                if equals(x, y) and equals(y, z):
                    assert equals(x, z)


def test_cylinder_and_representative():
    assert cylinder_of(pt("|12"), 3).word == (1, 2, 1)
    assert representative(CylinderWord((2, 1), 2)) == pt("|21")
    rng = np.random.default_rng(16)
    for _ in range(100):
        x = random_point(rng, 2)
        k = int(rng.integers(1, 7))
        rep = representative(cylinder_of(x, k))
        assert rep.first(k) == x.first(k)
        assert distance(x, rep) <= 2.0**-k


def test_shift_is_m_to_one_on_representatives():
    m, k = 2, 3
    for word in all_words(m, k):
        hits = [
            v
            for v in all_words(m, k + 1)
            if shift(representative(CylinderWord(v, m))).first(k) == word
        ]
        assert len(hits) == m
        assert hits == [(a,) + word for a in range(1, m + 1)]


def test_word_index_round_trip():
    for depth in (1, 2, 3):
        for idx, word in enumerate(all_words(3, depth)):
            assert word_index(word, 3) == idx
            assert word_from_index(idx, depth, 3) == word


def test_text_round_trip():
    x = EventuallyPeriodic((3,), (1, 2), 3)
    assert x.to_text() == "3|12"
    assert EventuallyPeriodic.from_text("3|12", 3) == x
    assert pt("|1").to_text() == "|1"
    with pytest.raises(ValueError):
        EventuallyPeriodic.from_text("12", 2)


def test_symbol_validation():
    with pytest.raises(ValueError):
        EventuallyPeriodic((), (3,), 2)
    with pytest.raises(ValueError):
        EventuallyPeriodic((), (), 2)
    with pytest.raises(ValueError):
        EventuallyPeriodic((0,), (1,), 2)

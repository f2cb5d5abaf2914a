import itertools

import pytest

from dmelodies import rhythm
from dmelodies.rhythm import RhythmPattern


def _oracle():
    return [RhythmPattern.from_positions(c) for c in itertools.combinations(range(8), 6)]


def test_all_patterns():
    pats = rhythm.all_patterns()
    assert len(pats) == 28
    assert len(set(pats)) == 28
    assert all(sum(p.onsets) == 6 for p in pats)
    assert pats[0].positions == (0, 1, 2, 3, 4, 5)
    assert pats[-1].positions == (2, 3, 4, 5, 6, 7)


def test_unrank_matches_enumeration():
    oracle = _oracle()
    for r in range(28):
        assert rhythm.pattern_from_rank(r) == oracle[r]


def test_rank_round_trip():
    for r, p in enumerate(_oracle()):
        assert rhythm.rank_from_pattern(p) == r
        assert rhythm.rank_from_pattern(rhythm.pattern_from_rank(r)) == r


def test_rank_examples():
    assert rhythm.rank_from_pattern(RhythmPattern.from_positions([0, 1, 2, 3, 4, 5])) == 0
    assert rhythm.rank_from_pattern(RhythmPattern.from_positions([2, 3, 4, 5, 6, 7])) == 27


@pytest.mark.parametrize("r", [-1, 28])
def test_unrank_out_of_range(r):
    with pytest.raises(IndexError):
        rhythm.pattern_from_rank(r)


def test_rank_rejects_wrong_onset_count():
    with pytest.raises(ValueError):
        rhythm.rank_from_pattern(RhythmPattern.from_positions([0, 1, 2]))
    with pytest.raises(ValueError):
        rhythm.rank_from_pattern([True] * 7)


def test_pattern_str():
    assert str(rhythm.pattern_from_rank(27)) == "..xxxxxx"

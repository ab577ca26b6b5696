import pytest

from strumscribe import RhythmicPattern, TimeSignature, Vocabulary


def make_pattern(pattern_id, sig_text, *measure_onsets):
    return RhythmicPattern(
        id=pattern_id,
        time_signature=TimeSignature.parse(sig_text),
        onsets=tuple(tuple(m) for m in measure_onsets),
    )


def make_vocab(*specs):
    """Build a vocabulary from (id, 'N/D', onsets_per_measure...) tuples."""
    return Vocabulary.build(make_pattern(*spec) for spec in specs)


@pytest.fixture
def basic_vocab():
    """Well-separated patterns in two time signatures, one of them 2 measures."""
    return make_vocab(
        ("QUARTERS", "4/4", [0.0, 0.25, 0.5, 0.75]),
        ("HALVES", "4/4", [0.0, 0.5]),
        ("WALTZ", "3/4", [0.0, 1 / 3, 2 / 3]),
        ("TWOBAR", "4/4", [0.0, 0.5, 0.75], [0.0, 0.25, 0.5]),
    )

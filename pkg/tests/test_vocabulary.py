import io
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from strumscribe import (
    RhythmicPattern,
    TimeSignature,
    Vocabulary,
    VocabularyError,
    load_vocabulary,
    pattern_positions_global,
)
from strumscribe.vocabulary import dump_vocabulary, empty_pattern

from conftest import make_pattern


def load_from(payload) -> Vocabulary:
    return load_vocabulary(json.dumps(payload))


class TestTimeSignature:
    def test_parse_and_str(self):
        sig = TimeSignature.parse("6/8")
        assert (sig.numerator, sig.denominator) == (6, 8)
        assert str(sig) == "6/8"

    def test_componentwise_equality(self):
        assert TimeSignature(6, 8) != TimeSignature(3, 4)
        assert TimeSignature(4, 4) == TimeSignature(4, 4)

    @pytest.mark.parametrize("num,den", [(0, 4), (-1, 4), (4, 3), (4, 0), (4, 64)])
    def test_invalid(self, num, den):
        with pytest.raises(VocabularyError):
            TimeSignature(num, den)

    @pytest.mark.parametrize("text", ["44", "4/4/4", "x/y", ""])
    def test_unparseable(self, text):
        with pytest.raises(VocabularyError):
            TimeSignature.parse(text)


class TestRhythmicPattern:
    def test_basic(self):
        p = make_pattern("P1", "4/4", [0.0, 0.5])
        assert p.measures == 1
        assert not p.is_empty

    def test_is_empty_iff_all_measures_empty(self):
        assert make_pattern("E", "4/4", []).is_empty
        assert not make_pattern("H", "4/4", [0.0], []).is_empty

    def test_position_at_one_rejected(self):
        with pytest.raises(VocabularyError):
            make_pattern("P", "4/4", [0.0, 1.0])

    def test_non_ascending_rejected(self):
        with pytest.raises(VocabularyError):
            make_pattern("P", "4/4", [0.5, 0.25])

    def test_duplicate_position_rejected(self):
        with pytest.raises(VocabularyError):
            make_pattern("P", "4/4", [0.25, 0.25])

    def test_three_measures_rejected(self):
        with pytest.raises(VocabularyError):
            make_pattern("P", "4/4", [0.0], [0.0], [0.0])


class TestLoadVocabulary:
    def test_single_pattern_gets_empty(self):
        vocab = load_from(
            {"patterns": [{"id": "P1", "time_signature": "4/4", "measures": 1,
                           "onsets": [[0.0, 0.25, 0.5, 0.75]]}]}
        )
        assert [p.id for p in vocab] == ["P1", "EMPTY_4_4"]
        assert vocab.by_id("EMPTY_4_4").is_empty

    def test_one_empty_per_signature(self):
        vocab = load_from(
            {"patterns": [
                {"id": "A", "time_signature": "4/4", "measures": 1, "onsets": [[0.0]]},
                {"id": "B", "time_signature": "3/4", "measures": 1, "onsets": [[0.0]]},
            ]}
        )
        empties = [p for p in vocab if p.is_empty]
        assert len(empties) == 2
        assert {str(p.time_signature) for p in empties} == {"4/4", "3/4"}

    def test_non_ascending_positions_error(self):
        with pytest.raises(VocabularyError):
            load_from({"patterns": [{"id": "P", "time_signature": "4/4",
                                     "measures": 1, "onsets": [[0.5, 0.25]]}]})

    def test_measures_field_must_match(self):
        with pytest.raises(VocabularyError):
            load_from({"patterns": [{"id": "P", "time_signature": "4/4",
                                     "measures": 2, "onsets": [[0.0]]}]})

    def test_duplicate_id_rejected(self):
        with pytest.raises(VocabularyError):
            load_from({"patterns": [
                {"id": "P", "time_signature": "4/4", "measures": 1, "onsets": [[0.0]]},
                {"id": "P", "time_signature": "4/4", "measures": 1, "onsets": [[0.5]]},
            ]})

    def test_duplicate_shape_rejected(self):
        with pytest.raises(VocabularyError):
            load_from({"patterns": [
                {"id": "A", "time_signature": "4/4", "measures": 1, "onsets": [[0.0, 0.5]]},
                {"id": "B", "time_signature": "4/4", "measures": 1, "onsets": [[0.0, 0.5]]},
            ]})

    def test_same_onsets_other_signature_allowed(self):
        vocab = load_from({"patterns": [
            {"id": "A", "time_signature": "4/4", "measures": 1, "onsets": [[0.0, 0.5]]},
            {"id": "B", "time_signature": "3/4", "measures": 1, "onsets": [[0.0, 0.5]]},
        ]})
        assert len(vocab) == 4

    def test_explicit_empty_not_duplicated(self):
        vocab = load_from({"patterns": [
            {"id": "SILENT", "time_signature": "4/4", "measures": 1, "onsets": [[]]},
            {"id": "A", "time_signature": "4/4", "measures": 1, "onsets": [[0.0]]},
        ]})
        empties = [p for p in vocab if p.is_empty]
        assert [p.id for p in empties] == ["SILENT"]

    def test_unknown_key_rejected(self):
        with pytest.raises(VocabularyError):
            load_from({"patterns": [{"id": "P", "time_signature": "4/4",
                                     "measures": 1, "onsets": [[0.0]], "tempo": 100}]})

    def test_bad_json(self):
        with pytest.raises(VocabularyError):
            load_vocabulary(b"{not json")

    def test_byte_stream(self):
        stream = io.BytesIO(json.dumps(
            {"patterns": [{"id": "P", "time_signature": "4/4",
                           "measures": 1, "onsets": [[0.0]]}]}
        ).encode())
        assert len(load_vocabulary(stream)) == 2


def test_round_trip(basic_vocab):
    buffer = io.StringIO()
    dump_vocabulary(basic_vocab, buffer)
    assert load_vocabulary(buffer.getvalue()) == basic_vocab


@given(
    st.lists(
        st.tuples(
            st.sampled_from(["4/4", "3/4", "6/8"]),
            st.lists(st.integers(0, 15), min_size=1, max_size=6, unique=True),
        ),
        min_size=1,
        max_size=6,
    )
)
def test_round_trip_property(specs):
    patterns = []
    seen = set()
    for i, (sig, grid) in enumerate(specs):
        onsets = tuple(g / 16 for g in sorted(grid))
        if (sig, onsets) in seen:
            continue
        seen.add((sig, onsets))
        patterns.append(make_pattern(f"P{i}", sig, onsets))
    vocab = Vocabulary.build(patterns)
    assert load_vocabulary(json.dumps(vocab.to_dict())) == vocab
    empties = sum(1 for p in vocab if p.is_empty)
    assert empties == len({p.time_signature for p in vocab if not p.is_empty})


def test_empty_pattern_id_format():
    assert empty_pattern(TimeSignature(6, 8)).id == "EMPTY_6_8"


class TestPatternPositionsGlobal:
    def test_one_measure(self):
        assert pattern_positions_global(make_pattern("P", "4/4", [0.0, 0.5])) == [
            (0, 0.0),
            (0, 0.5),
        ]

    def test_two_measures(self):
        assert pattern_positions_global(make_pattern("P", "4/4", [0.0], [0.5])) == [
            (0, 0.0),
            (1, 0.5),
        ]

    def test_empty(self):
        assert pattern_positions_global(empty_pattern(TimeSignature(4, 4))) == []


def test_vocabulary_requires_empties_for_raw_constructor():
    with pytest.raises(VocabularyError):
        Vocabulary((make_pattern("P", "4/4", [0.0]),))

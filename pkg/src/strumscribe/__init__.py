"""Guitar strum onsets in, readable rhythmic-pattern transcriptions out."""

from .barlines import PostprocConfig, discontinuity_rate, postprocess_barlines
from .decoder import Transcription, TranscriptionEntry, decode, reconstruct_strums
from .likelihood import (
    FORBIDDEN,
    DecoderConfig,
    emission_cost,
    raw_mismatch,
    transition_cost,
)
from .metrics import (
    MatchResult,
    TranscriptionReport,
    evaluate_transcription,
    match_events,
    pattern_discontinuity,
    timesig_discontinuity,
)
from .onsets import AudioBuffer, OnsetConfig, detect_onsets, load_wav, onset_strength, pick_peaks
from .render import RenderOptions, render_text
from .synth import SynthSong, SynthSpec, generate_song
from .timeline import (
    BarlineTrack,
    MeasureStrums,
    StrumSequence,
    bin_strums,
    measure_durations,
)
from .vocabulary import (
    RhythmicPattern,
    TimeSignature,
    Vocabulary,
    VocabularyError,
    load_vocabulary,
    pattern_positions_global,
)

__all__ = [
    "AudioBuffer",
    "BarlineTrack",
    "DecoderConfig",
    "FORBIDDEN",
    "MatchResult",
    "MeasureStrums",
    "OnsetConfig",
    "PostprocConfig",
    "RenderOptions",
    "RhythmicPattern",
    "StrumSequence",
    "SynthSong",
    "SynthSpec",
    "TimeSignature",
    "Transcription",
    "TranscriptionEntry",
    "TranscriptionReport",
    "Vocabulary",
    "VocabularyError",
    "bin_strums",
    "decode",
    "detect_onsets",
    "discontinuity_rate",
    "emission_cost",
    "evaluate_transcription",
    "generate_song",
    "load_vocabulary",
    "load_wav",
    "match_events",
    "measure_durations",
    "onset_strength",
    "pattern_discontinuity",
    "pattern_positions_global",
    "pick_peaks",
    "postprocess_barlines",
    "raw_mismatch",
    "reconstruct_strums",
    "render_text",
    "timesig_discontinuity",
    "transition_cost",
]

__version__ = "0.1.0"

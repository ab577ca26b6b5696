"""Command-line entry point wiring the library into pipelines.

Subcommands: onsets, barlines, decode, eval, synth, render, pipeline.
Configuration comes from defaults, then an optional JSON config file
(unknown keys are hard errors), then explicit flags. Exit codes: 0 success,
1 validation or decoding failure, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import barlines as barlines_mod
from . import decoder as decoder_mod
from . import metrics as metrics_mod
from . import onsets as onsets_mod
from . import render as render_mod
from . import synth as synth_mod
from . import timeline
from .likelihood import DecoderConfig
from .vocabulary import Vocabulary, load_vocabulary


@dataclass(frozen=True)
class RunConfig:
    decoder: DecoderConfig = DecoderConfig()
    barlines: barlines_mod.PostprocConfig = barlines_mod.PostprocConfig()
    onsets: onsets_mod.OnsetConfig = onsets_mod.OnsetConfig()
    render: render_mod.RenderOptions = render_mod.RenderOptions()
    strum_tolerance_sec: float = 0.05
    barline_tolerance_sec: float = 0.07
    seed: int = 0


_SECTIONS = {
    "decoder": DecoderConfig,
    "barlines": barlines_mod.PostprocConfig,
    "onsets": onsets_mod.OnsetConfig,
    "render": render_mod.RenderOptions,
}
_SCALARS = ("strum_tolerance_sec", "barline_tolerance_sec", "seed")


def load_run_config(path: str) -> RunConfig:
    """Parse a JSON config file, rejecting any unknown key."""
    with open(path, encoding="utf-8") as fp:
        payload = json.load(fp)
    if not isinstance(payload, dict):
        raise ValueError("config must be a JSON object")
    unknown = set(payload) - set(_SECTIONS) - set(_SCALARS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for section, cls in _SECTIONS.items():
        overrides = payload.get(section, {})
        if not isinstance(overrides, dict):
            raise ValueError(f"config section {section!r} must be an object")
        fields = {f.name for f in dataclasses.fields(cls)}
        bad = set(overrides) - fields
        if bad:
            raise ValueError(f"unknown keys in config section {section!r}: {sorted(bad)}")
        if "subdivision_factors" in overrides:
            overrides = dict(overrides, subdivision_factors=tuple(overrides["subdivision_factors"]))
        kwargs[section] = cls(**overrides)
    for key in _SCALARS:
        if key in payload:
            kwargs[key] = payload[key]
    return RunConfig(**kwargs)


def _override(obj, args: argparse.Namespace, mapping: dict[str, str]):
    changes = {
        field: getattr(args, attr)
        for field, attr in mapping.items()
        if getattr(args, attr, None) is not None
    }
    return dataclasses.replace(obj, **changes) if changes else obj


_DECODER_FLAGS = {
    "timing_sigma": "timing_sigma",
    "pattern_change_penalty": "pattern_change_penalty",
    "timesig_change_penalty": "timesig_change_penalty",
}
_POSTPROC_FLAGS = {
    "deletion_penalty": "deletion_penalty",
    "insertion_penalty": "insertion_penalty",
    "tempo_change_penalty": "tempo_change_penalty",
    "snap_tolerance_sec": "snap_tolerance",
    "lookahead": "lookahead",
}
_ONSET_FLAGS = {
    "frame_size": "frame_size",
    "hop_size": "hop_size",
    "n_mels": "n_mels",
    "fmin_hz": "fmin",
    "fmax_hz": "fmax",
    "delta": "delta",
    "pre_max": "pre_max",
    "post_max": "post_max",
    "pre_avg": "pre_avg",
    "post_avg": "post_avg",
    "min_gap_sec": "min_gap",
}


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = load_run_config(args.config) if getattr(args, "config", None) else RunConfig()
    decoder_cfg = _override(cfg.decoder, args, _DECODER_FLAGS)
    postproc_cfg = _override(cfg.barlines, args, _POSTPROC_FLAGS)
    if getattr(args, "subdivision_factors", None):
        factors = tuple(int(f) for f in args.subdivision_factors.split(","))
        postproc_cfg = dataclasses.replace(postproc_cfg, subdivision_factors=factors)
    onset_cfg = _override(cfg.onsets, args, _ONSET_FLAGS)
    render_opts = cfg.render
    if getattr(args, "no_repeat_symbol", False):
        render_opts = dataclasses.replace(render_opts, use_repeat_symbol=False)
    if getattr(args, "show_pattern_ids", False):
        render_opts = dataclasses.replace(render_opts, show_pattern_ids=True)
    if getattr(args, "grid_resolution", None) is not None:
        render_opts = dataclasses.replace(render_opts, grid_resolution=args.grid_resolution)
    changes: dict = {
        "decoder": decoder_cfg,
        "barlines": postproc_cfg,
        "onsets": onset_cfg,
        "render": render_opts,
    }
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "tolerance", None) is not None:
        changes["strum_tolerance_sec"] = args.tolerance
    return dataclasses.replace(cfg, **changes)


def _read_vocab(path: str) -> Vocabulary:
    with open(path, encoding="utf-8") as fp:
        return load_vocabulary(fp)


def _write_json(payload: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(payload, fp, indent=2, sort_keys=True)
        fp.write("\n")


def cmd_onsets(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    audio = onsets_mod.load_wav(args.audio)
    strums = onsets_mod.detect_onsets(audio, cfg.onsets)
    with open(args.out, "w", encoding="utf-8") as fp:
        timeline.save_strums(strums, fp)
    print(f"detected {len(strums)} onsets", file=sys.stderr)
    return 0


def cmd_barlines(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    with open(args.raw, "rb") as fp:
        raw_bytes = fp.read()
    raw = timeline.load_barlines(io.BytesIO(raw_bytes))
    if args.no_barline_postproc:
        with open(args.out, "wb") as out:
            out.write(raw_bytes)
        return 0
    cleaned = barlines_mod.postprocess_barlines(raw, cfg.barlines)
    with open(args.out, "w", encoding="utf-8") as fp:
        timeline.save_barlines(cleaned, fp)
    return 0


def _decode_files(strums_path: str, barlines_path: str, vocab: Vocabulary, cfg: RunConfig):
    with open(strums_path, encoding="utf-8") as fp:
        strums = timeline.load_strums(fp)
    with open(barlines_path, encoding="utf-8") as fp:
        bars = timeline.load_barlines(fp)
    measures, discarded = timeline.bin_strums(strums, bars)
    transcription = decoder_mod.decode(measures, vocab, cfg.decoder)
    return transcription, bars, discarded


def cmd_decode(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    vocab = _read_vocab(args.vocab)
    transcription, _, discarded = _decode_files(args.strums, args.barlines, vocab, cfg)
    with open(args.out, "w", encoding="utf-8") as fp:
        decoder_mod.save_transcription(transcription, fp)
    print(f"discarded {discarded} out-of-range strums", file=sys.stderr)
    return 0


def _eval_one(record: dict, base_dir: Path, fallback_vocab: str | None, tolerance: float) -> dict:
    def resolve(key: str) -> str:
        try:
            return str((base_dir / record[key]).resolve())
        except KeyError:
            raise ValueError(f"manifest record missing {key!r}") from None

    vocab_path = str((base_dir / record["vocab"]).resolve()) if "vocab" in record else fallback_vocab
    if not vocab_path:
        raise ValueError("manifest record has no vocab and no --vocab fallback was given")
    vocab = _read_vocab(vocab_path)
    with open(resolve("transcription"), encoding="utf-8") as fp:
        transcription = decoder_mod.load_transcription(fp)
    with open(resolve("barlines"), encoding="utf-8") as fp:
        bars = timeline.load_barlines(fp)
    with open(resolve("ground_truth"), encoding="utf-8") as fp:
        ground_truth = timeline.load_strums(fp)
    report = metrics_mod.evaluate_transcription(transcription, bars, vocab, ground_truth, tolerance)
    return {"song_id": record.get("song_id", "?"), **report.to_dict()}


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    tolerance = cfg.strum_tolerance_sec
    if args.manifest:
        base_dir = Path(args.manifest).parent
        with open(args.manifest, encoding="utf-8") as fp:
            records = [json.loads(line) for line in fp if line.strip()]
        jobs = args.jobs or os.cpu_count() or 1
        if jobs > 1 and len(records) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                songs = list(
                    pool.map(
                        _eval_one,
                        records,
                        [base_dir] * len(records),
                        [args.vocab] * len(records),
                        [tolerance] * len(records),
                    )
                )
        else:
            songs = [_eval_one(record, base_dir, args.vocab, tolerance) for record in records]
    else:
        for required in ("transcription", "barlines", "vocab", "ground_truth"):
            if getattr(args, required) is None:
                raise ValueError(f"eval needs --{required.replace('_', '-')} (or --manifest)")
        record = {
            "song_id": Path(args.transcription).stem,
            "transcription": args.transcription,
            "barlines": args.barlines,
            "ground_truth": args.ground_truth,
        }
        songs = [_eval_one(record, Path("."), args.vocab, tolerance)]
    reports = [
        metrics_mod.TranscriptionReport(
            strum_match=metrics_mod.MatchResult.from_counts(
                song["true_positives"], song["false_positives"], song["false_negatives"]
            ),
            pattern_disc=song["pattern_disc"],
            timesig_disc=song["timesig_disc"],
            measure_disc=song["measure_disc"],
        )
        for song in songs
    ]
    payload = {"songs": songs, "aggregate": metrics_mod.aggregate_reports(reports)}
    _write_json(payload, args.out)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    vocab = _read_vocab(args.vocab)
    spec = synth_mod.SynthSpec(
        seed=cfg.seed,
        vocab=vocab,
        measures=args.measures,
        tempo_bpm=args.tempo_bpm,
        sigma_norm=args.sigma_norm,
        switch_prob=args.switch_prob,
        miss_rate=args.miss_rate,
        spurious_rate=args.spurious_rate,
    )
    song = synth_mod.generate_song(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "strums.json", "w", encoding="utf-8") as fp:
        timeline.save_strums(song.observed, fp)
    with open(out_dir / "nominal_strums.json", "w", encoding="utf-8") as fp:
        timeline.save_strums(song.nominal, fp)
    with open(out_dir / "barlines.json", "w", encoding="utf-8") as fp:
        timeline.save_barlines(song.barlines, fp)
    with open(out_dir / "transcription.json", "w", encoding="utf-8") as fp:
        decoder_mod.save_transcription(song.ground_truth, fp)
    bundle = {
        "transcription": song.ground_truth.to_dict(),
        "barlines_sec": list(song.barlines.times_sec),
        "nominal_sec": list(song.nominal.times_sec),
        "observed_sec": list(song.observed.times_sec),
    }
    _write_json(bundle, str(out_dir / "ground_truth.json"))
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    vocab = _read_vocab(args.vocab)
    with open(args.transcription, encoding="utf-8") as fp:
        transcription = decoder_mod.load_transcription(fp)
    text = render_mod.render_text(transcription, vocab, cfg.render)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fp:
            fp.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    vocab = _read_vocab(args.vocab)
    audio = onsets_mod.load_wav(args.audio)
    strums = onsets_mod.detect_onsets(audio, cfg.onsets)
    with open(args.raw_barlines, encoding="utf-8") as fp:
        raw_bars = timeline.load_barlines(fp)
    bars = raw_bars if args.no_barline_postproc else barlines_mod.postprocess_barlines(
        raw_bars, cfg.barlines
    )
    measures, discarded = timeline.bin_strums(strums, bars)
    transcription = decoder_mod.decode(measures, vocab, cfg.decoder)
    text = render_mod.render_text(transcription, vocab, cfg.render)
    with open(args.out, "w", encoding="utf-8") as fp:
        decoder_mod.save_transcription(transcription, fp)
    if args.out_text:
        with open(args.out_text, "w", encoding="utf-8") as fp:
            fp.write(text + "\n")
    else:
        print(text)
    if args.dump_dir:
        dump = Path(args.dump_dir)
        dump.mkdir(parents=True, exist_ok=True)
        with open(dump / "strums.json", "w", encoding="utf-8") as fp:
            timeline.save_strums(strums, fp)
        with open(dump / "barlines.json", "w", encoding="utf-8") as fp:
            timeline.save_barlines(bars, fp)
        with open(dump / "transcription.json", "w", encoding="utf-8") as fp:
            decoder_mod.save_transcription(transcription, fp)
        with open(dump / "rendered.txt", "w", encoding="utf-8") as fp:
            fp.write(text + "\n")
    print(f"discarded {discarded} out-of-range strums", file=sys.stderr)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; unknown keys are errors")
    parser.add_argument("--seed", type=int, help="RNG seed")


def _add_decoder_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--timing-sigma", dest="timing_sigma", type=float)
    parser.add_argument("--pattern-change-penalty", dest="pattern_change_penalty", type=float)
    parser.add_argument("--timesig-change-penalty", dest="timesig_change_penalty", type=float)


def _add_postproc_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--subdivision-factors", dest="subdivision_factors",
                        help="comma-separated, e.g. 1,2,3,4")
    parser.add_argument("--deletion-penalty", dest="deletion_penalty", type=float)
    parser.add_argument("--insertion-penalty", dest="insertion_penalty", type=float)
    parser.add_argument("--tempo-change-penalty", dest="tempo_change_penalty", type=float)
    parser.add_argument("--snap-tolerance", dest="snap_tolerance", type=float)
    parser.add_argument("--lookahead", dest="lookahead", type=int)
    parser.add_argument("--no-barline-postproc", action="store_true")


def _add_onset_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--frame-size", dest="frame_size", type=int)
    parser.add_argument("--hop-size", dest="hop_size", type=int)
    parser.add_argument("--n-mels", dest="n_mels", type=int)
    parser.add_argument("--fmin", dest="fmin", type=float)
    parser.add_argument("--fmax", dest="fmax", type=float)
    parser.add_argument("--delta", dest="delta", type=float)
    parser.add_argument("--pre-max", dest="pre_max", type=int)
    parser.add_argument("--post-max", dest="post_max", type=int)
    parser.add_argument("--pre-avg", dest="pre_avg", type=int)
    parser.add_argument("--post-avg", dest="post_avg", type=int)
    parser.add_argument("--min-gap", dest="min_gap", type=float)


def _add_render_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--no-repeat-symbol", dest="no_repeat_symbol", action="store_true")
    parser.add_argument("--grid-resolution", dest="grid_resolution", type=int)
    parser.add_argument("--show-pattern-ids", dest="show_pattern_ids", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strumscribe",
        description="Transcribe guitar strums into readable rhythmic-pattern sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("onsets", help="detect strum onsets in a WAV file")
    p.add_argument("--in", "--audio", dest="audio", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    _add_onset_flags(p)
    p.set_defaults(func=cmd_onsets)

    p = sub.add_parser("barlines", help="clean up a noisy bar-line track")
    p.add_argument("--raw", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    _add_postproc_flags(p)
    p.set_defaults(func=cmd_barlines)

    p = sub.add_parser("decode", help="decode strums into a pattern sequence")
    p.add_argument("--strums", required=True)
    p.add_argument("--barlines", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    _add_decoder_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="score a transcription against ground truth")
    p.add_argument("--transcription")
    p.add_argument("--barlines")
    p.add_argument("--vocab")
    p.add_argument("--ground-truth", dest="ground_truth")
    p.add_argument("--manifest", help="newline-delimited JSON records for batch evaluation")
    p.add_argument("--out", required=True)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--jobs", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic ground-truth song")
    p.add_argument("--vocab", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--measures", type=int, default=32)
    p.add_argument("--tempo-bpm", dest="tempo_bpm", type=float, default=120.0)
    p.add_argument("--sigma-norm", dest="sigma_norm", type=float, default=0.0)
    p.add_argument("--switch-prob", dest="switch_prob", type=float, default=0.0)
    p.add_argument("--miss-rate", dest="miss_rate", type=float, default=0.0)
    p.add_argument("--spurious-rate", dest="spurious_rate", type=float, default=0.0)
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("render", help="render a transcription as slash-notation text")
    p.add_argument("--transcription", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out")
    _add_common(p)
    _add_render_flags(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("pipeline", help="WAV + raw bar lines to transcription and text")
    p.add_argument("--audio", required=True)
    p.add_argument("--raw-barlines", dest="raw_barlines", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--out-text", dest="out_text")
    p.add_argument("--dump-dir", dest="dump_dir")
    _add_common(p)
    _add_decoder_flags(p)
    _add_postproc_flags(p)
    _add_onset_flags(p)
    _add_render_flags(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Cleanup of noisy downbeat estimates into a stable bar-line sequence.

Neural downbeat trackers occasionally emit spurious bar lines mid-measure or
skip one entirely, which doubles or halves the apparent measure length. Under
a steady-tempo assumption this module repairs such tracks with two edits:
deleting individual estimates, and subdividing the span between two kept
estimates into k equal measures. A dynamic program picks the edit sequence
minimizing

    deletion_penalty * (estimates dropped from the track)
  + insertion_penalty * (bar lines invented by subdivision)
  + tempo_change_penalty * sum over consecutive output measures of
        max(0, |len_m - len_{m-1}| / len_{m-1} - 0.05)

A dropped estimate within snap_tolerance_sec of a kept one counts as a match
rather than a deletion, so near-duplicate detector output is removed for
free. Charging insertions matters: without it, one spurious estimate near a
measure's midpoint would let the whole track reinterpret at doubled tempo at
zero cost. The 5% band leaves natural tempo drift unpenalized. The first and
last estimates are always kept. Remaining cost ties prefer fewer inserted
lines, then fewer deletions, so an already-steady track passes through
unchanged rather than being uniformly subdivided.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .timeline import BarlineTrack

TEMPO_FREE_BAND = 0.05
DISCONTINUITY_THRESHOLD = 0.35


@dataclass(frozen=True)
class PostprocConfig:
    """Edit penalties and search bounds for bar-line cleanup.

    `lookahead` caps how far ahead the next kept estimate may be, i.e. at
    most lookahead - 1 consecutive estimates can be deleted in one span.
    """

    subdivision_factors: tuple[int, ...] = (1, 2, 3, 4)
    deletion_penalty: float = 1.0
    insertion_penalty: float = 1.0
    tempo_change_penalty: float = 8.0
    snap_tolerance_sec: float = 0.07
    lookahead: int = 4

    def __post_init__(self) -> None:
        factors = tuple(sorted(set(int(f) for f in self.subdivision_factors)))
        object.__setattr__(self, "subdivision_factors", factors)
        if not factors or factors[0] < 1:
            raise ValueError("subdivision factors must be integers >= 1")
        if min(self.deletion_penalty, self.insertion_penalty, self.tempo_change_penalty) < 0:
            raise ValueError("penalties must be >= 0")
        if not self.snap_tolerance_sec > 0:
            raise ValueError("snap tolerance must be > 0")
        if self.lookahead < 1:
            raise ValueError("lookahead must be >= 1")


def tempo_step_cost(prev_len: float, cur_len: float, cfg: PostprocConfig) -> float:
    """Smoothness penalty between two consecutive measure lengths."""
    change = abs(cur_len - prev_len) / prev_len
    return cfg.tempo_change_penalty * max(0.0, change - TEMPO_FREE_BAND)


def span_deletions(times: np.ndarray, j: int, i: int, cfg: PostprocConfig) -> int:
    """Dropped estimates strictly between kept estimates j and i, not counting
    near-duplicates of the kept endpoints."""
    a, b = times[j], times[i]
    return sum(1 for e in times[j + 1 : i] if min(e - a, b - e) > cfg.snap_tolerance_sec)


def postprocess_barlines(raw: BarlineTrack, cfg: PostprocConfig | None = None) -> BarlineTrack:
    """Repair a noisy bar-line track; see the module docstring for the model."""
    track, _ = postprocess_barlines_with_cost(raw, cfg)
    return track


def postprocess_barlines_with_cost(
    raw: BarlineTrack, cfg: PostprocConfig | None = None
) -> tuple[BarlineTrack, float]:
    """postprocess_barlines plus the objective value the DP achieved.

    The DP state is (index of last kept estimate, incoming measure length);
    lengths are carried as exact values, so only lengths reachable through
    some (previous kept, factor) choice ever appear.
    """
    cfg = cfg or PostprocConfig()
    times = np.asarray(raw.times_sec, dtype=float)
    n = len(times)
    last = n - 1

    # states[(i, incoming_len)] = (cost_tuple, parent_state, factor_used)
    # cost_tuple = (cost, inserted, deleted), compared lexicographically
    states: dict[tuple[int, float], tuple[tuple[float, int, int], tuple | None, int]] = {
        (0, 0.0): ((0.0, 0, 0), None, 0)
    }
    frontier = [(0, 0.0)]
    for j in range(n - 1):
        layer = [key for key in frontier if key[0] == j]
        if not layer:
            frontier = [key for key in frontier if key[0] > j]
            continue
        for key in layer:
            (cost, inserted, deleted), _, _ = states[key]
            _, incoming = key
            for i in range(j + 1, min(j + cfg.lookahead, last) + 1):
                step_deleted = span_deletions(times, j, i, cfg)
                for k in cfg.subdivision_factors:
                    length = (times[i] - times[j]) / k
                    step_cost = (
                        cfg.deletion_penalty * step_deleted
                        + cfg.insertion_penalty * (k - 1)
                    )
                    if incoming > 0.0:
                        step_cost += tempo_step_cost(incoming, length, cfg)
                    new_key = (i, length)
                    new_cost = (cost + step_cost, inserted + k - 1, deleted + step_deleted)
                    known = states.get(new_key)
                    if known is None or new_cost < known[0]:
                        states[new_key] = (new_cost, key, k)
                        if known is None:
                            frontier.append(new_key)
        frontier = [key for key in frontier if key[0] > j]

    finals = [key for key in states if key[0] == last]
    if not finals:
        raise ValueError("bar-line cleanup found no path to the final estimate")
    best = min(finals, key=lambda key: states[key][0])

    # walk parents to recover kept estimates and their subdivision factors
    spans: list[tuple[int, int]] = []  # (kept index, factor of the span ending there)
    key: tuple[int, float] | None = best
    while key is not None:
        entry = states[key]
        spans.append((key[0], entry[2]))
        key = entry[1]
    spans.reverse()

    output: list[float] = [times[0]]
    for (j, _), (i, k) in zip(spans, spans[1:]):
        a, b = times[j], times[i]
        output.extend(a + step * (b - a) / k for step in range(1, k))
        output.append(b)
    return BarlineTrack(tuple(output)), states[best][0][0]


def discontinuity_rate(bars: BarlineTrack) -> float:
    """Fraction of measures whose length jumps more than 35% from the
    previous measure's length."""
    lengths = np.diff(np.asarray(bars.times_sec))
    if len(lengths) < 2:
        return 0.0
    jumps = np.abs(np.diff(lengths)) / lengths[:-1]
    return float(np.count_nonzero(jumps > DISCONTINUITY_THRESHOLD)) / len(lengths)

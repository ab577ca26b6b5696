"""Independent brute-force oracles the fast implementations are checked against.

Everything here is deliberately plain Python: exhaustive recursion and naive
arithmetic, sharing no code path with the library internals it verifies.
"""

from __future__ import annotations

from functools import lru_cache


def nearest_sq(x, ys):
    return min((x - y) ** 2 for y in ys)


def two_way_mismatch(observed, onsets):
    """Naive evaluation of the two-way mismatch sum."""
    if not observed and not onsets:
        return 0.0
    return sum(nearest_sq(s, onsets) for s in observed) + sum(
        nearest_sq(r, observed) for r in onsets
    )


def half_cost(observed, onsets, cfg):
    """Per-measure emission contribution, or None when forbidden."""
    if not observed and not onsets:
        return 0.0
    if not observed or not onsets:
        return None
    return two_way_mismatch(observed, onsets) / (2.0 * cfg.timing_sigma**2)


def transition(prev, cur, cfg):
    if prev.id == cur.id:
        return 0.0
    if prev.time_signature == cur.time_signature:
        return cfg.pattern_change_penalty
    return cfg.pattern_change_penalty + cfg.timesig_change_penalty


def enumerate_decode(measures, vocab, cfg):
    """Exhaustive search over all pattern tilings.

    Returns (total_cost, [(pattern_id, phase), ...]) for the tiling that is
    minimal under (cost, number of pattern changes, lexicographic per-measure
    index sequence) -- the decoder's documented tie-break. Costs accumulate
    in measure order with the transition added before each instance's
    emissions, mirroring the decoder's summation order so that exact ties
    compare identically. Returns None when no tiling is feasible.
    """
    positions = [list(m.positions) for m in measures]
    n = len(positions)
    patterns = list(vocab.patterns)
    best: list = [None]  # [(cost, switches, index_seq, labels)]

    def recurse(m, prev, cum, switches, index_seq, labels):
        if best[0] is not None and cum > best[0][0]:
            return
        if m == n:
            key = (cum, switches, tuple(index_seq))
            if best[0] is None or key < best[0][:3]:
                best[0] = (cum, switches, tuple(index_seq), list(labels))
            return
        for idx, pattern in enumerate(patterns):
            if m + pattern.measures > n:
                continue
            cost = cum
            if prev is not None:
                cost = cost + transition(prev, pattern, cfg)
            step_switches = switches + (1 if prev is not None and prev.id != pattern.id else 0)
            feasible = True
            for phase in range(pattern.measures):
                contribution = half_cost(positions[m + phase], list(pattern.onsets[phase]), cfg)
                if contribution is None:
                    feasible = False
                    break
                cost = cost + contribution
            if not feasible:
                continue
            index_seq.extend([idx] * pattern.measures)
            labels.extend((pattern.id, phase) for phase in range(pattern.measures))
            recurse(m + pattern.measures, pattern, cost, step_switches, index_seq, labels)
            del index_seq[-pattern.measures :]
            del labels[-pattern.measures :]

    recurse(0, None, 0.0, 0, [], [])
    if best[0] is None:
        return None
    return best[0][0], best[0][3]


def brute_max_matching(reference, estimate, tolerance):
    """Maximum one-to-one matching size by exhaustive search."""
    reference = tuple(reference)
    estimate = tuple(estimate)

    @lru_cache(maxsize=None)
    def recurse(i, used):
        if i == len(reference):
            return 0
        size = recurse(i + 1, used)
        for j, e in enumerate(estimate):
            if not used & (1 << j) and abs(reference[i] - e) <= tolerance:
                size = max(size, 1 + recurse(i + 1, used | (1 << j)))
        return size

    return recurse(0, 0)


def brute_barline_cost(times, cfg, free_band=0.05):
    """Minimum cleanup cost by enumerating every keep-subset and factor
    assignment, scoring the resulting measure-length sequence directly."""
    times = list(times)
    n = len(times)
    best = [float("inf")]

    def span_cost(j, i, k):
        a, b = times[j], times[i]
        deleted = sum(
            1
            for e in times[j + 1 : i]
            if abs(e - a) > cfg.snap_tolerance_sec and abs(e - b) > cfg.snap_tolerance_sec
        )
        return deleted, [(b - a) / k] * k

    def recurse(j, lengths, deleted, inserted):
        if j == n - 1:
            cost = cfg.deletion_penalty * deleted + cfg.insertion_penalty * inserted
            for prev, cur in zip(lengths, lengths[1:]):
                cost += cfg.tempo_change_penalty * max(0.0, abs(cur - prev) / prev - free_band)
            best[0] = min(best[0], cost)
            return
        for i in range(j + 1, min(j + cfg.lookahead, n - 1) + 1):
            for k in cfg.subdivision_factors:
                extra_deleted, extra_lengths = span_cost(j, i, k)
                recurse(i, lengths + extra_lengths, deleted + extra_deleted, inserted + k - 1)

    recurse(0, [], 0, 0)
    return best[0]

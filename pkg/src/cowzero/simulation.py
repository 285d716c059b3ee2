"""Seeded Monte Carlo simulation of the zero-error attack.

Signals are stored as small integer arrays of :class:`SignalKind` values and
measurement outcomes as integer arrays holding the identified signal index
(0, 1, 2) or ``INCONCLUSIVE``.  Pulses are listed in temporal order: a bit-0
signal is (occupied, vacuum) and a bit-1 signal is (vacuum, occupied).

Eve's post-processing cuts the outcome sequence into blocks of ``k``
conclusive results plus one signal forced to vacuum.  Inside each block she
keeps the longest contiguous run whose outer pulses border vacuum, so the
monitoring interferometer never sees a coherent pulse next to a removed one.
"""

from __future__ import annotations

import enum
import functools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .usd import ProtocolParams, UsdSolution, optimal_usd

__all__ = [
    "SignalKind",
    "INCONCLUSIVE",
    "DEFAULT_SEED",
    "pulse_train",
    "generate_stream",
    "measure_stream",
    "best_subblock",
    "EveOutput",
    "eve_transform",
    "BobTally",
    "bob_count",
    "SimReport",
    "run_simulation",
]

INCONCLUSIVE = -1
DEFAULT_SEED = 20190712
MIN_SIGNALS = 10_000


class SignalKind(enum.IntEnum):
    BIT0 = 0
    BIT1 = 1
    DECOY = 2
    VACUUM = 3

    @property
    def pulse_pair(self) -> tuple[bool, bool]:
        """Occupation of the (first, second) temporal pulse."""
        return tuple(bool(x) for x in _PULSES[self])


# rows indexed by SignalKind
_PULSES = np.array([[1, 0], [0, 1], [1, 1], [0, 0]], dtype=bool)


def pulse_train(signals) -> np.ndarray:
    """Flattened temporal pulse occupation, two entries per signal."""
    return _PULSES[np.asarray(signals, dtype=np.intp)].reshape(-1)


def generate_stream(params: ProtocolParams, n: int, seed) -> np.ndarray:
    """Alice's random signal sequence with priors ((1-f)/2, (1-f)/2, f)."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    p_bit = (1.0 - params.f) / 2.0
    return rng.choice(3, size=n, p=[p_bit, p_bit, params.f]).astype(np.int8)


def measure_stream(stream, usd: UsdSolution, seed) -> np.ndarray:
    """Sample Eve's USD outcome for every signal.

    A conclusive outcome always names the signal that was actually sent.
    """
    stream = np.asarray(stream, dtype=np.int8)
    rng = np.random.default_rng(seed)
    q = np.array([usd.q_ss, usd.q_ss, usd.q_ds, 0.0])[stream]
    hit = rng.random(stream.size) < q
    return np.where(hit, stream, np.int8(INCONCLUSIVE)).astype(np.int8)


def best_subblock(block) -> tuple[int, int] | None:
    """Longest resendable range ``(a, b)`` (1-indexed, inclusive) of a block.

    The range may start at ``a`` if signal ``a`` opens with a vacuum pulse
    (bit 1) or signal ``a-1`` in the block closes with one (bit 0).  It may
    end at ``b`` if signal ``b`` closes with a vacuum pulse (bit 0) or signal
    ``b+1`` in the block opens with one (bit 1).  Neighbours outside the
    block are unknown to Eve and never count.  Ties go to the smallest ``a``.
    """
    return _best_subblock(tuple(int(j) for j in block))


@functools.lru_cache(maxsize=1 << 16)
def _best_subblock(block: tuple[int, ...]) -> tuple[int, int] | None:
    k = len(block)
    starts = [a for a in range(1, k + 1) if block[a - 1] == 1 or (a > 1 and block[a - 2] == 0)]
    ends = [b for b in range(1, k + 1) if block[b - 1] == 0 or (b < k and block[b] == 1)]
    best = None
    for a in starts:
        # the furthest admissible end gives the longest range for this start
        b = max((e for e in ends if e >= a), default=None)
        if b is not None and (best is None or b - a > best[1] - best[0]):
            best = (a, b)
    return best


@dataclass
class EveOutput:
    """Eve's resent stream and the block decomposition that produced it.

    ``block_start[i]`` and ``block_k[i]`` give the first position and the
    number of conclusive results of block ``i``.  ``sub_a``/``sub_b`` are the
    resent range within the block (1-indexed) or 0 when nothing is resent.
    A trailing block cut off by the end of the stream is included.
    """

    transmitted: np.ndarray
    block_start: np.ndarray
    block_k: np.ndarray
    sub_a: np.ndarray
    sub_b: np.ndarray

    @property
    def block_len(self) -> np.ndarray:
        return self.block_k + 1

    def block_clicks(self) -> np.ndarray:
        return np.where(self.sub_a > 0, self.sub_b - self.sub_a + 1, 0)


def _segment_blocks(conclusive: np.ndarray, m_max: int) -> tuple[np.ndarray, np.ndarray]:
    n = conclusive.size
    # a virtual inconclusive result closes the final run
    inc = np.flatnonzero(~np.append(conclusive, False))
    prev = np.concatenate(([-1], inc[:-1]))
    run_start = prev + 1
    run_len = inc - prev - 1

    # a run of length L splits into full m_max-blocks, each followed by a
    # forced vacuum, plus one remainder block of r >= 0 results
    full = np.where(run_len >= m_max, (run_len - m_max) // (m_max + 1) + 1, 0)
    rem = run_len - full * (m_max + 1)
    count = full + (rem >= 0)

    run_id = np.repeat(np.arange(run_len.size), count)
    offset = np.arange(run_id.size) - np.repeat(np.cumsum(count) - count, count)
    k = np.where(offset < full[run_id], m_max, rem[run_id])
    start = run_start[run_id] + offset * (m_max + 1)
    assert start.size == 0 or start[-1] + k[-1] <= n
    return start, k


def eve_transform(outcomes, m_max: int) -> EveOutput:
    """Apply Eve's block post-processing to a sequence of USD outcomes.

    Every resent signal is the one Eve identified, which is Alice's signal
    at that position.  Amplification of the resent pulses is not modelled;
    downstream every occupied resent signal clicks.
    """
    outcomes = np.asarray(outcomes, dtype=np.int8)
    if int(m_max) != m_max or m_max < 2:
        raise ValueError(f"m_max must be an integer >= 2, got {m_max}")
    n = outcomes.size
    start, k = _segment_blocks(outcomes >= 0, m_max)
    sub_a = np.zeros(start.size, dtype=np.int64)
    sub_b = np.zeros(start.size, dtype=np.int64)

    sel = np.flatnonzero(k >= 2)
    if sel.size:
        cols = np.arange(m_max)
        ks = k[sel]
        idx = np.minimum(start[sel, None] + cols, n - 1)
        inside = cols < ks[:, None]
        digits = np.where(inside, outcomes[idx], 0).astype(np.int64)
        code = (digits * 3 ** cols).sum(axis=1) * (m_max + 1) + ks
        uniq, inverse = np.unique(code, return_inverse=True)
        lookup = np.zeros((uniq.size, 2), dtype=np.int64)
        for i, c in enumerate(uniq.tolist()):
            kk, c = c % (m_max + 1), c // (m_max + 1)
            block = tuple((c // 3**p) % 3 for p in range(kk))
            rng = _best_subblock(block)
            if rng is not None:
                lookup[i] = rng
        sub_a[sel] = lookup[inverse.ravel(), 0]
        sub_b[sel] = lookup[inverse.ravel(), 1]

    keep = np.zeros(n + 1, dtype=np.int64)
    has = sub_a > 0
    np.add.at(keep, start[has] + sub_a[has] - 1, 1)
    np.add.at(keep, start[has] + sub_b[has], -1)
    mask = np.cumsum(keep[:n]) > 0
    transmitted = np.where(mask, outcomes, np.int8(SignalKind.VACUUM)).astype(np.int8)
    return EveOutput(transmitted, start, k, sub_a, sub_b)


@dataclass
class BobTally:
    """Bob's data-line record.

    ``bits`` holds -1 where nothing clicked, the decoded bit for a single
    click, and 2 for a double click (decoy), which Bob maps to a random bit.
    """

    clicks: int
    bits: np.ndarray
    qber_violations: int
    monitored_pair_violations: int


def bob_count(transmitted, alice_stream) -> BobTally:
    """Count Bob's clicks and the two error signatures.

    A click on a bit signal counts as a QBER violation unless it decodes to
    Alice's bit with certainty.  A monitored-pair violation is an adjacent
    pair of pulses both occupied in Alice's stream of which exactly one
    reaches Bob.
    """
    tx = np.asarray(transmitted, dtype=np.int8)
    alice = np.asarray(alice_stream, dtype=np.int8)
    if tx.shape != alice.shape:
        raise ValueError(f"length mismatch: {tx.size} transmitted vs {alice.size} sent")

    clicked = tx != SignalKind.VACUUM
    bits = np.where(clicked, tx, -1).astype(np.int8)
    alice_bit = alice <= SignalKind.BIT1
    qber = int(np.count_nonzero(clicked & alice_bit & (bits != alice)))

    a_pulse = pulse_train(alice)
    t_pulse = pulse_train(tx)
    both = a_pulse[:-1] & a_pulse[1:]
    broken = t_pulse[:-1] ^ t_pulse[1:]
    monitored = int(np.count_nonzero(both & broken))
    return BobTally(int(np.count_nonzero(clicked)), bits, qber, monitored)


@dataclass
class SimReport:
    n_signals: int
    clicks: int
    gain_estimate: float
    gain_std_error: float
    qber_violations: int
    monitored_pair_violations: int
    block_length_histogram: list[int]
    seed: int
    n_blocks: int = 0
    segments: int = 1
    params: ProtocolParams | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "n_signals": self.n_signals,
            "clicks": self.clicks,
            "gain_estimate": self.gain_estimate,
            "gain_std_error": self.gain_std_error,
            "qber_violations": self.qber_violations,
            "monitored_pair_violations": self.monitored_pair_violations,
            "seed": self.seed,
            "histogram": list(self.block_length_histogram),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass
class _Partial:
    n: int
    clicks: int
    qber: int
    monitored: int
    hist: np.ndarray
    # block moments for the ratio-estimator standard error
    blocks: int
    s_cc: int
    s_cl: int
    s_ll: int


def _simulate_segment(params: ProtocolParams, usd: UsdSolution, n: int, seq) -> _Partial:
    stream_seq, measure_seq = seq.spawn(2)
    alice = generate_stream(params, n, stream_seq)
    outcomes = measure_stream(alice, usd, measure_seq)
    eve = eve_transform(outcomes, params.m_max)
    tally = bob_count(eve.transmitted, alice)

    c = eve.block_clicks()
    ell = eve.block_len
    return _Partial(
        n=n,
        clicks=tally.clicks,
        qber=tally.qber_violations,
        monitored=tally.monitored_pair_violations,
        hist=np.bincount(eve.block_k, minlength=params.m_max + 1),
        blocks=int(c.size),
        s_cc=int(np.dot(c, c)),
        s_cl=int(np.dot(c, ell)),
        s_ll=int(np.dot(ell, ell)),
    )


def run_simulation(
    params: ProtocolParams,
    n: int,
    seed: int = DEFAULT_SEED,
    *,
    segments: int = 1,
    workers: int | None = None,
) -> SimReport:
    """Simulate Alice, Eve and Bob over ``n`` signals.

    The stream is split into ``segments`` independently seeded pieces (each
    restarting Eve's block count) whose tallies are summed in order; results
    depend only on ``(params, n, seed, segments)``, not on ``workers``.
    """
    if n < MIN_SIGNALS:
        raise ValueError(f"n must be at least {MIN_SIGNALS}, got {n}")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    if segments < 1 or segments > n:
        raise ValueError(f"invalid number of segments: {segments}")

    usd = optimal_usd(params)
    sizes = [n // segments + (i < n % segments) for i in range(segments)]
    seqs = np.random.SeedSequence(seed).spawn(segments)
    jobs = [(params, usd, m, s) for m, s in zip(sizes, seqs)]
    if workers and workers > 1 and segments > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_segment, *zip(*jobs)))
    else:
        parts = [_simulate_segment(*job) for job in jobs]

    clicks = sum(p.clicks for p in parts)
    gain = clicks / n
    blocks = sum(p.blocks for p in parts)
    total_len = sum(p.n for p in parts) + len(parts)  # each segment's virtual closing slot
    resid = sum(p.s_cc for p in parts) - 2 * gain * sum(p.s_cl for p in parts)
    resid += gain**2 * sum(p.s_ll for p in parts)
    if blocks > 1:
        se = math.sqrt(max(resid, 0.0) * blocks / (blocks - 1)) / total_len
    else:
        se = 0.0
    hist = np.sum([p.hist for p in parts], axis=0)
    return SimReport(
        n_signals=n,
        clicks=clicks,
        gain_estimate=gain,
        gain_std_error=se,
        qber_violations=sum(p.qber for p in parts),
        monitored_pair_violations=sum(p.monitored for p in parts),
        block_length_histogram=[int(x) for x in hist],
        seed=seed,
        n_blocks=blocks,
        segments=segments,
        params=params,
    )

"""Closed-form statistics of the zero-error sequential attack.

Eve's stream is cut into blocks: ``k`` consecutive conclusive results
followed by one signal replaced with vacuum (``k`` is capped at ``m_max``).
The attack gain is the mean number of Bob clicks per block divided by the
mean block length.  ``p_click(k)`` is the mean number of clicks produced by
a block with ``k`` conclusive results, which depends only on ``p(1|c)``
because ``p(0|c) == p(1|c)``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

from .usd import ProtocolParams, optimal_usd

__all__ = [
    "BlockDistribution",
    "avg_block_length",
    "p_click_given_first",
    "p_click",
    "p_click_recursive",
    "brute_force_p_click",
    "gain_zero",
]

BRUTE_FORCE_MAX_K = 9


def _powers(x: float, n: int) -> list[float]:
    """``[x**0, ..., x**n]`` by repeated multiplication."""
    out = [1.0]
    for _ in range(n):
        out.append(out[-1] * x)
    return out


def _check_pc(p_c: float, m_max: int) -> None:
    if not 0 <= p_c < 1:
        raise ValueError(f"p_c must lie in [0, 1), got {p_c}")
    if int(m_max) != m_max or m_max < 2:
        raise ValueError(f"m_max must be an integer >= 2, got {m_max}")


@dataclass(frozen=True)
class BlockDistribution:
    """Probabilities of the block types Eve sends to Bob.

    ``p_v[k]`` (k = 0, 1) is the probability of an all-vacuum block of
    ``k + 1`` signals; ``p_s[k]`` (k = 2..m_max) that of a block with ``k``
    conclusive results plus a trailing vacuum signal.
    """

    p_v: dict[int, float]
    p_s: dict[int, float]

    @classmethod
    def from_pc(cls, p_c: float, m_max: int) -> "BlockDistribution":
        _check_pc(p_c, m_max)
        pw = _powers(p_c, m_max)
        p_v = {k: pw[k] * (1.0 - p_c) for k in (0, 1)}
        p_s = {k: pw[k] * (1.0 - p_c) for k in range(2, m_max)}
        p_s[m_max] = pw[m_max]
        return cls(p_v=p_v, p_s=p_s)

    @property
    def m_max(self) -> int:
        return max(self.p_s)

    def total(self) -> float:
        return sum(self.p_v.values()) + sum(self.p_s.values())

    def mean_length(self) -> float:
        """Expected number of signals in a block, ``sum (k+1) p(k)``."""
        items = itertools.chain(self.p_v.items(), self.p_s.items())
        return sum((k + 1) * p for k, p in items)

    def as_list(self) -> list[float]:
        """Probabilities indexed by ``k = 0..m_max``."""
        return [self.p_v.get(k, self.p_s.get(k, 0.0)) for k in range(self.m_max + 1)]


def avg_block_length(p_c: float, m_max: int) -> float:
    _check_pc(p_c, m_max)
    return (1.0 - _powers(p_c, m_max + 1)[-1]) / (1.0 - p_c)


def _check_p1c(p1c: float) -> None:
    if not 0 < p1c <= 0.5:
        raise ValueError(f"p(1|c) must lie in (0, 1/2], got {p1c}")


@functools.lru_cache(maxsize=256)
def _first_tables(p1c: float, k_max: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    # index k holds the clicks for a k-block starting with phi_1 / phi_0
    r = 1.0 - 2.0 * p1c
    t1 = [0.0, 0.0]
    t0 = [0.0, 0.0]
    for k in range(2, k_max + 1):
        t1.append(p1c * (2 * k - 1) + r * t1[-1])
        t0.append(p1c * (2 * k - 3) + r * t0[-1])
    return tuple(t1), tuple(t0)


@functools.lru_cache(maxsize=256)
def _click_table(p1c: float, k_max: int) -> tuple[float, ...]:
    # p_click(0) = p_click(1) = 0; the k=2 step reproduces 4 p1c^2.
    r = 1.0 - 2.0 * p1c
    table = [0.0, 0.0]
    rk = r
    for k in range(2, k_max + 1):
        rk *= r
        table.append(2 * k * p1c + rk - 1.0 + r * table[-1])
    return tuple(table)


def p_click_given_first(k: int, first: int, p1c: float) -> float:
    """Mean clicks from a ``k``-block whose first conclusive result is ``first``.

    Always evaluated through the recursions, which stay regular at
    ``p1c == 1/2`` where the closed forms divide by zero.  ``k == 1`` is
    accepted for ``first`` in {0, 1} and gives the anchor value 0.
    """
    _check_p1c(p1c)
    if first not in (0, 1, 2):
        raise ValueError(f"first must be 0, 1 or 2, got {first}")
    if k < 2 and not (k == 1 and first in (0, 1)):
        raise ValueError(f"k must be >= 2, got {k}")
    if first == 2:
        return _click_table(p1c, k)[k - 1]
    t1, t0 = _first_tables(p1c, k)
    return t1[k] if first == 1 else t0[k]


def p_click(k: int, p1c: float) -> float:
    """Mean clicks from a block of ``k >= 2`` conclusive results (closed form)."""
    _check_p1c(p1c)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    r = 1.0 - 2.0 * p1c
    return (-1.0 + (k + 1) * p1c + r**k * (1.0 + (k - 1) * p1c)) / p1c


def p_click_recursive(k: int, p1c: float) -> float:
    """Same quantity as :func:`p_click`, from the first-order recursion."""
    _check_p1c(p1c)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    return _click_table(p1c, k)[k]


def brute_force_p_click(k: int, p_cond) -> float:
    """Exact mean clicks by enumerating all ``3**k`` conclusive blocks.

    Each block is weighted by the product of its conditional probabilities
    and contributes the length of the sub-block Eve would resend.
    """
    from .simulation import best_subblock

    if not 2 <= k <= BRUTE_FORCE_MAX_K:
        raise ValueError(f"brute force supports 2 <= k <= {BRUTE_FORCE_MAX_K}, got {k}")
    probs = tuple(float(p) for p in p_cond)
    if len(probs) != 3:
        raise ValueError("p_cond must have three entries")
    total = 0.0
    for block in itertools.product(range(3), repeat=k):
        rng = best_subblock(block)
        if rng is None:
            continue
        w = 1.0
        for j in block:
            w *= probs[j]
        total += w * (rng[1] - rng[0] + 1)
    return total


def gain_zero(params: ProtocolParams) -> float:
    """Largest data-line gain Eve reproduces without introducing errors."""
    sol = optimal_usd(params)
    p_c = sol.p_c
    if p_c == 0.0 or sol.p1c == 0.0:
        # no conclusive results, or only decoys identified: nothing resent
        return 0.0
    m = params.m_max
    clicks = _click_table(sol.p1c, m)
    pw = _powers(p_c, m + 1)
    acc = sum(pw[k] * (1.0 - p_c) * clicks[k] for k in range(2, m))
    acc += pw[m] * clicks[m]
    # (1 - p_c) / (1 - p_c**(m+1)) written as a finite geometric sum
    return acc / sum(pw[: m + 1])

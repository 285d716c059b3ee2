"""Independent reference computations used by several test modules."""

import itertools
import math

import numpy as np


def feasible_grid_max(mu, f, step=1e-3, tol=1e-12):
    """Best (1-f) s + f d over a grid of symmetric USD assignments (s, s, d).

    Feasibility is decided by the principal minors of G - diag(s, s, d),
    evaluated in closed form on the whole grid at once.
    """
    s = np.arange(0.0, 1.0 + step / 2, step)
    S, D = np.meshgrid(s, s, indexing="ij")
    a, b = math.exp(-mu), math.exp(-mu / 2)
    d1, d3 = 1.0 - S, 1.0 - D
    minors = [
        d1,
        d3,
        d1 * d1 - a * a,
        d1 * d3 - b * b,
        d1 * (d1 * d3 - b * b) - a * (a * d3 - b * b) + b * (a * b - d1 * b),
    ]
    ok = np.logical_and.reduce([m >= -tol for m in minors])
    obj = np.where(ok, (1 - f) * S + f * D, -np.inf)
    i = np.unravel_index(np.argmax(obj), obj.shape)
    return float(obj[i]), float(S[i]), float(D[i])


def psd_by_eigenvalues(mu, gamma, tol=1e-10):
    a, b = math.exp(-mu), math.exp(-mu / 2)
    g = np.array([[1, a, b], [a, 1, b], [b, b, 1]], dtype=float) - np.diag(gamma)
    return bool(np.linalg.eigvalsh(g).min() >= -tol)


def valid_range(block, a, b):
    """Boundary rule for a resendable range, checked pulse by pulse.

    Builds the temporal pulse train of the block, keeps only the range, and
    requires that the pulse just before and just after the range is vacuum
    in Alice's train (pulses outside the block count as unknown/occupied).
    """
    pulses = {0: (1, 0), 1: (0, 1), 2: (1, 1)}
    train = [p for j in block for p in pulses[j]]
    first, last = 2 * (a - 1), 2 * b - 1
    kept_first = train[first]
    kept_last = train[last]
    before = train[first - 1] if first > 0 else 1
    after = train[last + 1] if last + 1 < len(train) else 1
    # a vacuum pulse inside the kept range at its edge also isolates it
    left_ok = kept_first == 0 or before == 0
    right_ok = kept_last == 0 or after == 0
    return left_ok and right_ok


def longest_valid_range(block):
    k = len(block)
    best = None
    for a, b in itertools.combinations_with_replacement(range(1, k + 1), 2):
        if valid_range(block, a, b) and (best is None or b - a > best[1] - best[0]):
            best = (a, b)
    return best


def gain_series(p_c, p1c, m_max, clicks):
    """Block-renewal gain sum_k P(k) clicks(k) / sum_k P(k) (k + 1)."""
    probs = [p_c**k * (1 - p_c) for k in range(m_max)] + [p_c**m_max]
    num = sum(probs[k] * clicks(k, p1c) for k in range(2, m_max + 1))
    den = sum(probs[k] * (k + 1) for k in range(m_max + 1))
    return num / den


def eve_reference(outcomes, m_max):
    """Signal-by-signal replay of Eve's procedure; returns the resent list.

    Entries are the identified signal index or 3 for vacuum; outcomes use -1
    for inconclusive.
    """
    n = len(outcomes)
    out = [3] * n
    i = 0
    while i < n:
        block = []
        j = i
        while j < n and outcomes[j] >= 0 and len(block) < m_max:
            block.append(outcomes[j])
            j += 1
        # position j (if any) is the forced vacuum closing the block
        if len(block) >= 2:
            best = longest_valid_range(block)
            if best is not None:
                a, b = best
                for p in range(a - 1, b):
                    out[i + p] = block[p]
        i = j + 1
    return out

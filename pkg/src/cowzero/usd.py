"""Optimal unambiguous discrimination of the three COW signals.

Alice emits ``|0>|a>``, ``|a>|0>`` and ``|a>|a>`` (two bit signals and a
decoy) with priors ``(1-f)/2, (1-f)/2, f``.  The optimal measurement that
maximises the total conclusive probability has a closed form in three
regimes, selected by comparing ``sqrt(gamma)`` (``gamma = f / (2(1-f))``)
with ``exp(-mu/2)`` and ``cosh(mu/2)``.

The third regime comes from reducing the problem to a two-state
discrimination after projecting out one bit signal; only the resulting
closed form ``tanh(mu/2)`` is exposed here.  Its optimality, like that of
the other two regimes, is checked independently by :func:`usd_feasible`:
a vector of conclusive probabilities is realisable iff the Gram matrix
minus ``diag(probabilities)`` is positive semidefinite.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ProtocolParams",
    "Regime",
    "UsdSolution",
    "gram_matrix",
    "usd_feasible",
    "optimal_usd",
]

PSD_TOL = 1e-12


@dataclass(frozen=True)
class ProtocolParams:
    """Alice's source settings and Eve's truncation depth.

    Attributes:
        mu: Mean photon number of each coherent pulse, ``|alpha|^2``.
        f: Probability of emitting a decoy signal, in (0, 1).
        m_max: Maximum number of consecutive conclusive results Eve
            accumulates before forcing a block boundary.
    """

    mu: float
    f: float = 0.155
    m_max: int = 10

    def __post_init__(self):
        if not (self.mu >= 0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be a finite non-negative number, got {self.mu}")
        if not 0 < self.f < 1:
            raise ValueError(f"f must lie strictly inside (0, 1), got {self.f}")
        if int(self.m_max) != self.m_max or self.m_max < 2:
            raise ValueError(f"m_max must be an integer >= 2, got {self.m_max}")

    @property
    def gamma(self) -> float:
        return self.f / (2.0 * (1.0 - self.f))


class Regime(enum.Enum):
    R1 = 1  # decoys never identified
    R2 = 2  # all three signals identified with non-zero probability
    R3 = 3  # bit signals never identified


@dataclass(frozen=True)
class UsdSolution:
    """Optimal measurement statistics.

    ``q_ss`` and ``q_ds`` are the conclusive probabilities for a bit signal
    and a decoy signal; the inconclusive probabilities are their complements.
    ``p_cond`` holds ``(p(0|c), p(1|c), p(2|c))``, the distribution of the
    identified signal given a conclusive outcome.
    """

    regime: Regime
    q_ss: float
    q_ds: float
    p_c: float
    p_cond: tuple[float, float, float]

    @property
    def q_inc_s(self) -> float:
        return 1.0 - self.q_ss

    @property
    def q_inc_d(self) -> float:
        return 1.0 - self.q_ds

    @property
    def p1c(self) -> float:
        return self.p_cond[1]


def gram_matrix(mu: float) -> np.ndarray:
    """Inner products of the three signals for pulse intensity ``mu``."""
    if mu < 0:
        raise ValueError(f"mu must be non-negative, got {mu}")
    a = math.exp(-mu)
    b = math.exp(-mu / 2.0)
    return np.array([[1.0, a, b], [a, 1.0, b], [b, b, 1.0]])


def usd_feasible(mu: float, gamma_vec) -> bool:
    """Whether conclusive probabilities ``gamma_vec`` are achievable.

    Checks positive semidefiniteness of ``gram_matrix(mu) - diag(gamma_vec)``
    through the signs of all its principal minors, with tolerance
    ``PSD_TOL``.
    """
    g = np.asarray(gamma_vec, dtype=float)
    if g.shape != (3,):
        raise ValueError("gamma_vec must have three components")
    if np.any(g < 0) or np.any(g > 1) or not np.all(np.isfinite(g)):
        raise ValueError(f"conclusive probabilities must lie in [0, 1], got {gamma_vec}")
    m = gram_matrix(mu) - np.diag(g)
    # Leading minors alone do not certify semidefiniteness when one vanishes.
    for size in (1, 2, 3):
        for idx in itertools.combinations(range(3), size):
            if _det(m[np.ix_(idx, idx)]) < -PSD_TOL:
                return False
    return True


def _det(m: np.ndarray) -> float:
    if m.shape == (1, 1):
        return float(m[0, 0])
    if m.shape == (2, 2):
        return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    return float(
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )


def optimal_usd(params: ProtocolParams) -> UsdSolution:
    """Maximum-conclusive-probability USD measurement for ``params``.

    Boundary ties go to the earlier regime.  When no conclusive outcome is
    possible (``mu == 0``) the conditional distribution is set to
    ``(1/2, 1/2, 0)`` so downstream expressions stay defined.
    """
    mu, f = params.mu, params.f
    root_gamma = math.sqrt(params.gamma)
    half = math.exp(-mu / 2.0)

    if root_gamma <= half:
        regime = Regime.R1
        q_ss = -math.expm1(-mu)
        q_ds = 0.0
    elif math.cosh(min(mu / 2.0, 700.0)) >= root_gamma:
        regime = Regime.R2
        q_ss = 1.0 + math.exp(-mu) - half * math.sqrt(2.0 * f / (1.0 - f))
        q_ds = 1.0 - half / root_gamma
    else:
        regime = Regime.R3
        q_ss = 0.0
        q_ds = math.tanh(mu / 2.0)

    # Rounding at the R2/R3 boundary can push q_ss a few ulps below zero.
    q_ss = min(max(q_ss, 0.0), 1.0)
    q_ds = min(max(q_ds, 0.0), 1.0)

    p_c = (1.0 - f) * q_ss + f * q_ds
    if p_c > 0:
        p_bit = (1.0 - f) * q_ss / (2.0 * p_c)
        p_cond = (p_bit, p_bit, f * q_ds / p_c)
    else:
        p_cond = (0.5, 0.5, 0.0)
    return UsdSolution(regime=regime, q_ss=q_ss, q_ds=q_ds, p_c=p_c, p_cond=p_cond)

"""Channel model and the distance / intensity / key-rate limits it implies.

The attack is indistinguishable from an honest run whenever the expected
gain of the real link does not exceed ``gain_zero``.  Solving for that
crossing in fibre length gives ``l_zero``; solving in pulse intensity for a
fixed overall transmittance gives ``mu_max`` and the key-rate bound
``r_upp = (1 - f) * eta * mu_max``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from scipy import optimize

from .analytics import gain_zero
from .usd import ProtocolParams

__all__ = [
    "BracketError",
    "ChannelParams",
    "channel_transmittance",
    "expected_gain",
    "expected_gain_ideal",
    "l_zero",
    "mu_max",
    "r_upp",
    "sweep_mu_max",
    "sweep_r_upp",
    "to_csv",
]

MAX_ITER = 200
MU_RTOL = 1e-12
MU_CEILING = 1e4


class BracketError(ArithmeticError):
    """A root could not be bracketed or did not converge."""


@dataclass(frozen=True)
class ChannelParams:
    """Bob's detector and the fibre.

    Attributes:
        p_d: Dark-count probability per detection gate.
        eta_det: Detection efficiency of the data-line detector.
        t_bob: Transmittance of Bob's data/monitoring beamsplitter.
        alpha_att: Fibre attenuation in dB/km.
    """

    p_d: float
    eta_det: float
    t_bob: float = 0.9
    alpha_att: float = 0.2

    def __post_init__(self):
        for name in ("p_d", "eta_det", "t_bob"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not self.alpha_att > 0:
            raise ValueError(f"alpha_att must be positive, got {self.alpha_att}")

    @classmethod
    def from_link(cls, p_d, eta_det, t_bob, attenuation_db, length_km) -> "ChannelParams":
        """Channel whose attenuation coefficient is total loss over length."""
        return cls(p_d, eta_det, t_bob, attenuation_db / length_km)


def channel_transmittance(channel: ChannelParams, distance_km: float) -> float:
    return 10.0 ** (-channel.alpha_att * distance_km / 10.0)


def _click_prob(x: float, f: float) -> float:
    # 1 - [(1-f) e^{-x} + f e^{-2x}], without cancellation at small x
    return -(1.0 - f) * math.expm1(-x) - f * math.expm1(-2.0 * x)


def expected_gain(channel: ChannelParams, params: ProtocolParams, distance_km: float) -> float:
    """Data-line gain of the honest link at ``distance_km``."""
    if distance_km < 0:
        raise ValueError(f"distance must be non-negative, got {distance_km}")
    x = params.mu * channel.t_bob * channel.eta_det * channel_transmittance(channel, distance_km)
    return channel.p_d + (1.0 - channel.p_d) * _click_prob(x, params.f)


def expected_gain_ideal(eta: float, params: ProtocolParams) -> float:
    """Gain with no dark counts and the whole signal in the data line."""
    if not 0 <= eta <= 1:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    return _click_prob(eta * params.mu, params.f)


def l_zero(channel: ChannelParams, params: ProtocolParams) -> float:
    """Fibre length at which the honest gain drops to ``gain_zero``."""
    target = gain_zero(params)
    g0 = expected_gain(channel, params, 0.0)
    if target <= channel.p_d:
        raise BracketError(
            f"no finite solution: gain_zero={target:.3e} is at or below the dark-count floor"
        )
    if target >= g0:
        raise BracketError(
            f"no finite solution: gain_zero={target:.3e} exceeds the zero-length gain {g0:.3e}"
        )

    def resid(L):
        return expected_gain(channel, params, L) - target

    hi = 1.0
    while resid(hi) > 0:
        hi *= 2.0
        if hi > 1e7:
            raise BracketError("could not bracket the distance")
    try:
        L = optimize.bisect(resid, 0.0, hi, xtol=1e-12, maxiter=MAX_ITER)
    except RuntimeError as exc:
        raise BracketError(str(exc)) from exc
    return L


def _margin(eta: float, mu: float, f: float, m_max: int) -> float:
    p = ProtocolParams(mu, f, m_max)
    return expected_gain_ideal(eta, p) - gain_zero(p)


def mu_max(eta: float, f: float = 0.155, m_max: int = 10) -> float:
    """Largest intensity for which ``gain_zero`` stays strictly below the gain.

    The crossing is bracketed by doubling from ``mu = eta`` and refined by
    bisection on the sign of the gain margin to relative width ``MU_RTOL``.
    The returned value is the lower bracket end, so the margin there is
    positive.
    """
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    ProtocolParams(0.0, f, m_max)  # validates f, m_max

    lo = hi = eta
    if _margin(eta, hi, f, m_max) > 0:
        while _margin(eta, hi, f, m_max) > 0:
            lo = hi
            hi *= 2.0
            if hi > MU_CEILING:
                raise BracketError(f"gain_zero never overtakes the gain for eta={eta}")
    else:
        while _margin(eta, lo, f, m_max) <= 0:
            hi = lo
            lo /= 2.0
            if lo < 1e-300:
                raise BracketError(f"no positive intensity is safe for eta={eta}")

    for _ in range(MAX_ITER):
        if hi - lo <= MU_RTOL * hi:
            return lo
        mid = 0.5 * (lo + hi)
        if _margin(eta, mid, f, m_max) > 0:
            lo = mid
        else:
            hi = mid
    raise BracketError(f"bisection for mu_max did not converge at eta={eta}")


def r_upp(eta: float, f: float = 0.155, m_max: int = 10) -> float:
    """Upper bound on the secret key rate per signal."""
    if eta == 0:
        return 0.0
    return (1.0 - f) * eta * mu_max(eta, f, m_max)


def sweep_mu_max(etas, f: float = 0.155, m_max: int = 10) -> list[tuple[float, float]]:
    return [(float(e), mu_max(e, f, m_max)) for e in etas]


def sweep_r_upp(etas, f: float = 0.155, m_max: int = 10) -> list[tuple[float, float, float]]:
    return [(float(e), r_upp(e, f, m_max), float(e) ** 2) for e in etas]


def to_csv(header, rows, digits: int = 10) -> str:
    """Render rows as CSV text with ``digits`` significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{v:.{digits}g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()

"""Fiber and detector model: transmittance, n-photon yields, overall gains.

Overall gains are available two ways: by summing the photon-number series
(:func:`gain_series`, valid for every source family) and, for HPCS, by the
closed forms in terms of I0 (:func:`gain_closed_form_hpcs`).  The two must
agree; the series is the reference.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigurationError, DomainError, UnsupportedFamilyError
from .numerics import DEFAULT_SERIES, SeriesConfig, bessel_i0, weighted_series_sum
from .sources import SourceFamily, SourceModel, photon_distribution

__all__ = [
    "Protocol",
    "ChannelParams",
    "GainPair",
    "transmittance",
    "yield_error",
    "yield_error_bb84",
    "yield_error_sarg",
    "vacuum_yield",
    "gain_series",
    "xi_zeta",
    "gain_closed_form_hpcs",
]


class Protocol(str, enum.Enum):
    BB84 = "BB84"
    SARG = "SARG"

    @classmethod
    def parse(cls, value: "str | Protocol") -> "Protocol":
        raw = value.value if isinstance(value, cls) else str(value).upper()
        if raw == "SARG04":
            raw = "SARG"
        try:
            return cls(raw)
        except ValueError:
            raise ConfigurationError(
                f"unknown protocol {value!r}; expected BB84 or SARG"
            ) from None


@dataclass(frozen=True)
class ChannelParams:
    """Fiber loss (dB/km), receiver efficiency, dark counts and misalignment.

    Defaults are the GYS experimental values.
    """

    alpha: float = 0.21
    eta_bob: float = 0.045
    p_dark: float = 1.7e-6
    e_det: float = 0.033

    def __post_init__(self) -> None:
        if not self.alpha > 0.0:
            raise ConfigurationError(f"alpha must be positive, got {self.alpha}")
        if not (0.0 < self.eta_bob <= 1.0):
            raise ConfigurationError(f"eta_bob must lie in (0, 1], got {self.eta_bob}")
        if not (0.0 <= self.p_dark < 1.0):
            raise ConfigurationError(f"p_dark must lie in [0, 1), got {self.p_dark}")
        if not (0.0 <= self.e_det < 0.5):
            raise ConfigurationError(f"e_det must lie in [0, 0.5), got {self.e_det}")


@dataclass(frozen=True)
class GainPair:
    """Gain ``q``, error gain ``eq`` and their ratio, the QBER ``e``."""

    q: float
    eq: float

    @property
    def e(self) -> float:
        return self.eq / self.q if self.q > 0.0 else 0.0


def transmittance(params: ChannelParams, distance_km: float) -> float:
    """Total transmittance ``eta_bob * 10**(-alpha L / 10)``."""
    if not distance_km >= 0.0:
        raise DomainError(f"distance must be >= 0 km, got {distance_km}")
    return params.eta_bob * 10.0 ** (-params.alpha * distance_km / 10.0)


def _eta_n(eta: float, n: int) -> float:
    if not (0.0 < eta <= 1.0):
        raise DomainError(f"transmittance must lie in (0, 1], got {eta}")
    if int(n) != n or n < 0:
        raise DomainError(f"photon number must be a nonnegative integer, got {n}")
    # 1 - (1-eta)**n without cancellation at small eta
    return -math.expm1(n * math.log1p(-eta)) if eta < 1.0 else (1.0 if n > 0 else 0.0)


def _error_gain(params: ChannelParams, eta_n: float) -> float:
    return eta_n * params.e_det / 2.0 + (1.0 - eta_n) * params.p_dark / 4.0


def _ratio(eyn: float, y: float) -> float:
    # a zero yield only happens for vacuum with no dark counts; its outcome is random
    return eyn / y if y > 0.0 else 0.5


def yield_error_bb84(params: ChannelParams, eta: float, n: int) -> tuple[float, float]:
    """BB84 yield and bit error rate of an n-photon pulse."""
    eta_n = _eta_n(eta, n)
    y = (eta_n + (1.0 - eta_n) * params.p_dark) / 2.0
    return y, _ratio(_error_gain(params, eta_n), y)


def yield_error_sarg(params: ChannelParams, eta: float, n: int) -> tuple[float, float]:
    """SARG yield and bit error rate of an n-photon pulse."""
    eta_n = _eta_n(eta, n)
    y = eta_n * (params.e_det / 2.0 + 0.25) + (1.0 - eta_n) * params.p_dark / 2.0
    return y, _ratio(_error_gain(params, eta_n), y)


def yield_error(
    protocol: Protocol, params: ChannelParams, eta: float, n: int
) -> tuple[float, float]:
    if Protocol.parse(protocol) is Protocol.BB84:
        return yield_error_bb84(params, eta, n)
    return yield_error_sarg(params, eta, n)


def vacuum_yield(params: ChannelParams) -> tuple[float, float]:
    """``(Y0, e0)``: dark-count yield ``p_dark/2`` with random outcome, both protocols."""
    return params.p_dark / 2.0, 0.5


def gain_series(
    src: SourceModel,
    protocol: Protocol,
    params: ChannelParams,
    eta: float,
    cfg: SeriesConfig = DEFAULT_SERIES,
) -> GainPair:
    """Overall gain and error gain summed over photon number."""
    protocol = Protocol.parse(protocol)
    pn = photon_distribution(src, cfg.n_max)
    ye = [yield_error(protocol, params, eta, n) for n in range(cfg.n_max + 1)]
    q = weighted_series_sum(lambda n: ye[n][0] * pn[n], cfg)
    eq = weighted_series_sum(lambda n: ye[n][1] * ye[n][0] * pn[n], cfg)
    return GainPair(q, eq)


def xi_zeta(src: SourceModel, eta: float) -> tuple[float, float]:
    """HPCS closed-form sums.

    ``xi = sum_n P(mu, n)`` is the heralding probability and
    ``zeta = sum_n (1 - eta)**n P(mu, n)``, both expressed through I0.
    """
    if src.family is not SourceFamily.HPCS:
        raise UnsupportedFamilyError("closed forms exist only for HPCS sources")
    if not (0.0 < eta <= 1.0):
        raise DomainError(f"transmittance must lie in (0, 1], got {eta}")
    mu = src.mu
    eta_a, d_a = src.trigger.eta_a, src.trigger.d_a
    norm = bessel_i0(2 * mu)
    xi = 1.0 + d_a - bessel_i0(2 * mu * math.sqrt(1.0 - eta_a)) / norm
    zeta = (
        (1.0 + d_a) * bessel_i0(2 * mu * math.sqrt(1.0 - eta))
        - bessel_i0(2 * mu * math.sqrt((1.0 - eta) * (1.0 - eta_a)))
    ) / norm
    return xi, zeta


def gain_closed_form_hpcs(
    src: SourceModel, protocol: Protocol, params: ChannelParams, eta: float
) -> GainPair:
    """HPCS gain and error gain from I0 closed forms.

    The BB84 gain is ``(xi - (1 - p_dark) zeta) / 2``: the 1/2 multiplies both
    terms, as summing the series shows.  A variant with the 1/2 on ``xi`` only
    circulates in print; it goes negative at long distance and is not used.
    """
    protocol = Protocol.parse(protocol)
    xi, zeta = xi_zeta(src, eta)
    half_ed = params.e_det / 2.0
    eq = half_ed * xi - (half_ed - params.p_dark / 4.0) * zeta
    if protocol is Protocol.BB84:
        q = (xi - (1.0 - params.p_dark) * zeta) / 2.0
    else:
        q = (half_ed + 0.25) * xi - (half_ed + 0.25 - params.p_dark / 2.0) * zeta
    return GainPair(q, eq)

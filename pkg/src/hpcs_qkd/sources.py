"""Photon-number statistics of the three source families.

WCP pulses are Poissonian.  HSPS and HPCS sources are heralded: a trigger
detector watches the idler mode and a pulse only counts as sent when it
clicks.  Heralded probabilities returned here are *joint* probabilities
(n photons emitted and the trigger clicked), so every gain and rate built
on them is per pulse emitted by Alice, trigger failures included.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import ConfigurationError, DomainError, UnsupportedFamilyError
from .numerics import DEFAULT_SERIES, SeriesConfig, bessel_i0

__all__ = [
    "SourceFamily",
    "TriggerParams",
    "SourceModel",
    "HSPS_STATISTICS",
    "pcs_pn",
    "wcp_pn",
    "thermal_pn",
    "heralded_pn",
    "photon_number_pn",
    "photon_distribution",
    "heralding_probability",
]


class SourceFamily(str, enum.Enum):
    WCP = "WCP"
    HSPS = "HSPS"
    HPCS = "HPCS"

    @classmethod
    def parse(cls, value: "str | SourceFamily") -> "SourceFamily":
        try:
            return cls(str(value.value if isinstance(value, cls) else value).upper())
        except ValueError:
            raise ConfigurationError(
                f"unknown source family {value!r}; expected one of WCP, HSPS, HPCS"
            ) from None


@dataclass(frozen=True)
class TriggerParams:
    """Alice's trigger detector: efficiency ``eta_a`` and dark-count probability ``d_a``."""

    eta_a: float = 0.6
    d_a: float = 5e-8

    def __post_init__(self) -> None:
        if not (0.0 < self.eta_a <= 1.0):
            raise ConfigurationError(f"trigger eta_a must lie in (0, 1], got {self.eta_a}")
        if not (0.0 <= self.d_a < 1.0):
            raise ConfigurationError(f"trigger d_a must lie in [0, 1), got {self.d_a}")

    def click_factor(self, n: int) -> float:
        """Probability-like bracket ``1 - (1 - eta_a)**n + d_a``.

        The dark count enters additively, so the bracket may exceed 1 by d_a.
        """
        return 1.0 - (1.0 - self.eta_a) ** n + self.d_a


def _check_mu(mu: float) -> float:
    mu = float(mu)
    if not (0.0 < mu <= 1.0) or not math.isfinite(mu):
        raise DomainError(f"intensity mu must lie in (0, 1], got {mu}")
    return mu


def _check_n(n: int) -> int:
    if int(n) != n or n < 0:
        raise DomainError(f"photon number must be a nonnegative integer, got {n}")
    return int(n)


def pcs_pn(mu: float, n: int) -> float:
    """Single-mode photon-number distribution of a pair-coherent state.

    ``mu**(2n) / (n!)**2 / I0(2 mu)``; sub-Poissonian for every mu > 0.
    """
    mu = _check_mu(mu)
    n = _check_n(n)
    return math.exp(2 * n * math.log(mu) - 2 * math.lgamma(n + 1)) / bessel_i0(2 * mu)


def wcp_pn(mu: float, n: int) -> float:
    """Poisson probability ``exp(-mu) mu**n / n!``."""
    mu = float(mu)
    if not (mu > 0.0) or not math.isfinite(mu):
        raise DomainError(f"intensity mu must be positive, got {mu}")
    n = _check_n(n)
    return math.exp(-mu + n * math.log(mu) - math.lgamma(n + 1))


def thermal_pn(mu: float, n: int) -> float:
    """Single-mode thermal (Bose-Einstein) distribution with mean ``mu``."""
    mu = float(mu)
    if not (mu > 0.0) or not math.isfinite(mu):
        raise DomainError(f"intensity mu must be positive, got {mu}")
    n = _check_n(n)
    return math.exp(n * math.log(mu) - (n + 1) * math.log1p(mu))


# Un-heralded statistics available for the HSPS family.
HSPS_STATISTICS: dict[str, Callable[[float, int], float]] = {
    "thermal": thermal_pn,
    "poisson": wcp_pn,
}


@dataclass(frozen=True)
class SourceModel:
    """A photon source at intensity ``mu``.

    ``trigger`` must be given for the heralded families and omitted for WCP.
    ``hsps_statistics`` selects the un-heralded HSPS distribution
    (a key of :data:`HSPS_STATISTICS`); it is ignored by the other families.
    """

    family: SourceFamily
    mu: float
    trigger: Optional[TriggerParams] = None
    hsps_statistics: str = field(default="thermal")

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", SourceFamily.parse(self.family))
        if not (0.0 < self.mu <= 1.0):
            raise ConfigurationError(f"source intensity mu must lie in (0, 1], got {self.mu}")
        if self.family is SourceFamily.WCP and self.trigger is not None:
            raise ConfigurationError("a WCP source takes no trigger detector")
        if self.family is not SourceFamily.WCP and self.trigger is None:
            raise ConfigurationError(f"a {self.family.value} source needs trigger parameters")
        if self.hsps_statistics not in HSPS_STATISTICS:
            raise ConfigurationError(
                f"unknown HSPS statistics {self.hsps_statistics!r}; "
                f"choose from {sorted(HSPS_STATISTICS)}"
            )

    @property
    def heralded(self) -> bool:
        return self.family is not SourceFamily.WCP

    def with_mu(self, mu: float) -> "SourceModel":
        return SourceModel(self.family, mu, self.trigger, self.hsps_statistics)


def heralded_pn(src: SourceModel, n: int) -> float:
    """Joint probability that ``n`` photons are emitted and the trigger clicks."""
    if src.family is SourceFamily.WCP:
        raise UnsupportedFamilyError("heralded_pn is undefined for WCP sources")
    if src.trigger is None:
        raise ConfigurationError(f"{src.family.value} source is missing its trigger")
    n = _check_n(n)
    if src.family is SourceFamily.HPCS:
        base = pcs_pn(src.mu, n)
    else:
        base = HSPS_STATISTICS[src.hsps_statistics](src.mu, n)
    return base * src.trigger.click_factor(n)


def photon_number_pn(src: SourceModel, n: int) -> float:
    """P(mu, n) for any family: Poisson for WCP, heralded otherwise."""
    if src.family is SourceFamily.WCP:
        return wcp_pn(src.mu, n)
    return heralded_pn(src, n)


def photon_distribution(src: SourceModel, n_max: int = DEFAULT_SERIES.n_max) -> list[float]:
    """``[P(mu, 0), ..., P(mu, n_max)]`` computed by recurrence.

    Agrees with :func:`photon_number_pn` term by term; used on hot paths.
    """
    mu = src.mu
    out = []
    if src.family is SourceFamily.WCP:
        p = math.exp(-mu)
        for n in range(n_max + 1):
            out.append(p)
            p *= mu / (n + 1)
        return out
    if src.family is SourceFamily.HPCS:
        p = 1.0 / bessel_i0(2 * mu)
        step = lambda n: mu * mu / ((n + 1) * (n + 1))  # noqa: E731
    elif src.hsps_statistics == "thermal":
        p = 1.0 / (1.0 + mu)
        step = lambda n: mu / (1.0 + mu)  # noqa: E731
    else:
        p = math.exp(-mu)
        step = lambda n: mu / (n + 1)  # noqa: E731
    trig = src.trigger
    for n in range(n_max + 1):
        out.append(p * trig.click_factor(n))
        p *= step(n)
    return out


def heralding_probability(src: SourceModel, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Probability that the trigger clicks at all (1 for WCP).

    Divide a per-pulse rate by this to get a per-herald rate.
    """
    if src.family is SourceFamily.WCP:
        return 1.0
    return math.fsum(photon_distribution(src, cfg.n_max))

"""Decoy-state estimators for heralded pair-coherent sources.

One signal intensity ``mu`` and two decoys ``nu1 > nu2`` give a lower bound
on the single-photon yield, an upper bound on its error rate, and the same
pair for two-photon pulses.  Throughout, ``a = nu1**2``, ``b = nu2**2`` and
``c = mu**2``; every bound follows from ``P(x, n) I0(2x) = x**(2n)/(n!)**2 *
click(n)`` and from ``a**n - b**n <= (a**k - b**k) c**(n-k)`` for ``n >= k``,
which holds whenever ``a + b <= c``.

Two variants of the two-photon bounds exist:

``"literal"``
    Prefactor 2 on Y2 with the single-photon lower bound substituted and the
    trigger efficiency alone multiplying Y1; no factor on e2.
``"derived"``
    The coefficients that fall out of the series: ``(2!)**2 = 4`` on both
    bounds, ``eta_a + d_a`` on Y1, and an *upper* bound on Y1 (its term enters
    the Y2 bracket with a minus sign).

The randomized soundness check in the test-suite rejects ``"literal"``: its e2
bound is four times too small.  ``"derived"`` is therefore the default.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .channel import GainPair
from .errors import CannotBoundError, ConfigurationError, UnsupportedFamilyError
from .numerics import DEFAULT_SERIES, SeriesConfig, bessel_i0, weighted_series_sum
from .sources import SourceFamily, SourceModel, TriggerParams, photon_distribution

__all__ = [
    "VARIANTS",
    "DEFAULT_VARIANT",
    "DecoyProtocolParams",
    "ObservedStats",
    "DecoyBounds",
    "BoundCheck",
    "OracleReport",
    "estimate_y1",
    "estimate_y1_upper",
    "estimate_e1",
    "estimate_y2",
    "estimate_e2",
    "estimate_bounds",
    "observe",
    "soundness_oracle",
]

VARIANTS = ("derived", "literal")
DEFAULT_VARIANT = "derived"


@dataclass(frozen=True)
class DecoyProtocolParams:
    """Signal intensity ``mu`` and decoy intensities ``nu1 > nu2``."""

    mu: float
    nu1: float
    nu2: float

    def __post_init__(self) -> None:
        if not (1.0 > self.mu > self.nu1 > self.nu2 > 0.0):
            raise ConfigurationError(
                "decoy intensities must satisfy 1 > mu > nu1 > nu2 > 0, "
                f"got mu={self.mu}, nu1={self.nu1}, nu2={self.nu2}"
            )
        if self.nu1**2 + self.nu2**2 > self.mu**2:
            raise ConfigurationError(
                "decoy intensities must satisfy nu1**2 + nu2**2 <= mu**2, "
                f"got {self.nu1**2 + self.nu2**2:.6g} > {self.mu**2:.6g}"
            )

    def scaled(self, mu: float) -> "DecoyProtocolParams":
        """Same decoy-to-signal ratios at a new signal intensity."""
        k = mu / self.mu
        return DecoyProtocolParams(mu, self.nu1 * k, self.nu2 * k)


@dataclass(frozen=True)
class ObservedStats:
    q_mu: GainPair
    q_nu1: GainPair
    q_nu2: GainPair
    y0: float
    trigger: TriggerParams

    def __post_init__(self) -> None:
        for name in ("q_mu", "q_nu1", "q_nu2"):
            g = getattr(self, name)
            if not (0.0 <= g.eq <= g.q <= 1.0):
                raise ConfigurationError(f"{name} needs 0 <= eq <= q <= 1, got {g}")
        if not (0.0 <= self.y0 <= 1.0):
            raise ConfigurationError(f"y0 must lie in [0, 1], got {self.y0}")


@dataclass(frozen=True)
class DecoyBounds:
    y1_lower: float
    e1_upper: float
    y2_lower: float
    e2_upper: float


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def _check_variant(variant: str) -> str:
    if variant not in VARIANTS:
        raise ConfigurationError(f"unknown estimator variant {variant!r}; use one of {VARIANTS}")
    return variant


# Rounding guard: every bound is moved outward by this many ulps of the
# summed magnitudes of its terms (observed gains carry a few ulps of error
# from their own series).  Without it, nearly equal decoys or decoys near
# zero cancel catastrophically and a bound can land on the wrong side.
_GUARD = 256 * sys.float_info.epsilon


def _guarded_sum(*terms: float) -> tuple[float, float]:
    return math.fsum(terms), _GUARD * math.fsum(abs(t) for t in terms)


def _lower(numer: float, err: float, denom: float, denom_rel: float) -> float:
    return _clamp01((numer - err) / (denom * (1.0 + denom_rel)))


def _upper(numer: float, err: float, denom: float, denom_rel: float) -> float:
    return _clamp01((numer + err) / (denom * (1.0 - denom_rel)))


class _Powers:
    """Differences of powers of a = nu1**2, b = nu2**2 in factored form."""

    def __init__(self, dp: DecoyProtocolParams):
        self.a, self.b, self.c = dp.nu1**2, dp.nu2**2, dp.mu**2
        a, b, c = self.a, self.b, self.c
        self.d1 = (dp.nu1 - dp.nu2) * (dp.nu1 + dp.nu2)  # a - b
        self.d2 = self.d1 * (a + b)  # a**2 - b**2
        self.d3 = self.d1 * (a * a + a * b + b * b)  # a**3 - b**3
        self.room = 1.0 - (a + b) / c  # >= 0 by the intensity constraint

    def rel_err(self) -> float:
        # conditioning of 1 - (a + b)/c; factored differences are accurate
        if self.room <= 0.0:
            return math.inf
        return _GUARD * (1.0 + 1.0 / self.room)


def _scaled_gains(obs: ObservedStats, dp: DecoyProtocolParams, attr: str) -> tuple[float, float, float]:
    """``I0(2x) * Q_x`` (or ``EQ_x``) for x = mu, nu1, nu2."""
    return (
        bessel_i0(2 * dp.mu) * getattr(obs.q_mu, attr),
        bessel_i0(2 * dp.nu1) * getattr(obs.q_nu1, attr),
        bessel_i0(2 * dp.nu2) * getattr(obs.q_nu2, attr),
    )


def estimate_y1(obs: ObservedStats, dp: DecoyProtocolParams) -> float:
    """Lower bound on the single-photon yield, clamped to [0, 1]."""
    pw = _Powers(dp)
    s_mu, s_1, s_2 = _scaled_gains(obs, dp, "q")
    d_a = obs.trigger.d_a
    k = pw.d2 / (pw.c * pw.c)
    denom = (obs.trigger.eta_a + d_a) * pw.d1 * pw.room
    if not denom > 0.0:
        raise ConfigurationError(f"single-photon bound denominator is {denom:.3e} <= 0")
    numer, err = _guarded_sum(s_1, -s_2, -k * s_mu, k * d_a * obs.y0)
    return _lower(numer, err, denom, pw.rel_err())


def estimate_y1_upper(obs: ObservedStats, dp: DecoyProtocolParams) -> float:
    """Upper bound on the single-photon yield.

    Each decoy alone gives ``I0(2 nu) Q_nu - d_a Y0 >= (eta_a + d_a) nu**2 Y1``
    since all other terms are nonnegative; the weaker decoy is usually the
    tighter one.  Both are evaluated and the smaller kept.
    """
    eta1 = obs.trigger.eta_a + obs.trigger.d_a
    vac = obs.trigger.d_a * obs.y0
    best = math.inf
    for nu, g in ((dp.nu1, obs.q_nu1), (dp.nu2, obs.q_nu2)):
        numer, err = _guarded_sum(bessel_i0(2 * nu) * g.q, -vac)
        best = min(best, (numer + err) / (eta1 * nu * nu) * (1.0 + _GUARD))
    return best


def estimate_e1(obs: ObservedStats, dp: DecoyProtocolParams, y1_lower: float) -> float:
    """Upper bound on the single-photon error rate, clamped to [0, 1]."""
    if not y1_lower > 0.0:
        raise CannotBoundError("single-photon error rate needs a positive yield bound")
    _, s_1, s_2 = _scaled_gains(obs, dp, "eq")
    eta1 = obs.trigger.eta_a + obs.trigger.d_a
    numer, err = _guarded_sum(s_1, -s_2)
    return _upper(numer, err, eta1 * y1_lower * _Powers(dp).d1, _GUARD)


def estimate_y2(
    obs: ObservedStats,
    dp: DecoyProtocolParams,
    y0: float,
    y1: float,
    variant: str = DEFAULT_VARIANT,
) -> float:
    """Lower bound on the two-photon yield, clamped to [0, 1].

    ``y1`` is substituted for the single-photon yield; pass an upper bound
    with the ``"derived"`` variant.
    """
    _check_variant(variant)
    pw = _Powers(dp)
    a, b, c = pw.a, pw.b, pw.c
    trig = obs.trigger
    s_mu, s_1, s_2 = _scaled_gains(obs, dp, "q")
    k3 = pw.d3 / c**3
    # (a^2 - b^2) - (a^3 - b^3)/c, with the common factor (a - b) pulled out
    inner = (a + b) - (a * a + a * b + b * b) / c
    denom = trig.click_factor(2) * pw.d1 * inner
    if not denom > 0.0:
        raise ConfigurationError(f"two-photon bound denominator is {denom:.3e} <= 0")
    if variant == "literal":
        prefactor, eta1 = 2.0, trig.eta_a
    else:
        prefactor, eta1 = 4.0, trig.eta_a + trig.d_a
    # (a - b) - (a^3 - b^3)/c^2 = (a - b) (1 - (a^2 + ab + b^2)/c^2)
    y1_coeff = pw.d1 * (1.0 - (a * a + a * b + b * b) / (c * c))
    numer, err = _guarded_sum(s_1, -s_2, -k3 * s_mu, y0 * trig.d_a * k3, -y1 * eta1 * y1_coeff)
    rel = _GUARD * (1.0 + (a * a + a * b + b * b) / (c * inner)) if inner > 0.0 else math.inf
    return _lower(prefactor * numer, prefactor * err, denom, rel)


def estimate_e2(
    obs: ObservedStats,
    dp: DecoyProtocolParams,
    y2: float,
    y0: float,
    variant: str = DEFAULT_VARIANT,
) -> float:
    """Upper bound on the two-photon error rate, clamped to [0, 1]."""
    _check_variant(variant)
    if not y2 > 0.0:
        raise CannotBoundError("two-photon error rate needs a positive yield bound")
    pw = _Powers(dp)
    _, s_1, s_2 = _scaled_gains(obs, dp, "eq")
    numer, err = _guarded_sum(pw.b * s_1, -pw.a * s_2, 0.5 * pw.d1 * y0 * obs.trigger.d_a)
    denom = y2 * obs.trigger.click_factor(2) * pw.a * pw.b * pw.d1
    prefactor = 1.0 if variant == "literal" else 4.0
    return _upper(prefactor * numer, prefactor * err, denom, _GUARD)


def estimate_bounds(
    obs: ObservedStats, dp: DecoyProtocolParams, variant: str = DEFAULT_VARIANT
) -> DecoyBounds:
    """Run all four estimators.

    A yield bound of zero makes the matching error bound unavailable; it is
    then reported as 1, which zeroes that contribution to any key rate.
    """
    _check_variant(variant)
    y1 = estimate_y1(obs, dp)
    e1 = estimate_e1(obs, dp, y1) if y1 > 0.0 else 1.0
    y1_sub = y1 if variant == "literal" else estimate_y1_upper(obs, dp)
    y2 = estimate_y2(obs, dp, obs.y0, y1_sub, variant)
    e2 = estimate_e2(obs, dp, y2, obs.y0, variant) if y2 > 0.0 else 1.0
    return DecoyBounds(y1, e1, y2, e2)


def observe(
    yields: Sequence[tuple[float, float]],
    dp: DecoyProtocolParams,
    trigger: TriggerParams,
    family: SourceFamily = SourceFamily.HPCS,
) -> ObservedStats:
    """Forward-compute the statistics Alice and Bob would see.

    ``yields[n] = (Y_n, e_n)`` for n = 0..n_max.
    """
    if SourceFamily.parse(family) is not SourceFamily.HPCS:
        raise UnsupportedFamilyError("the decoy estimators are built for HPCS sources")
    n_max = len(yields) - 1
    cfg = SeriesConfig(n_max=n_max, tail_tol=DEFAULT_SERIES.tail_tol)

    def gains(x: float) -> GainPair:
        pn = photon_distribution(SourceModel(SourceFamily.HPCS, x, trigger), n_max)
        q = weighted_series_sum(lambda n: yields[n][0] * pn[n], cfg)
        eq = weighted_series_sum(lambda n: yields[n][1] * yields[n][0] * pn[n], cfg)
        return GainPair(q, min(eq, q))

    return ObservedStats(gains(dp.mu), gains(dp.nu1), gains(dp.nu2), yields[0][0], trigger)


@dataclass(frozen=True)
class BoundCheck:
    """One estimator compared with the quantity it bounds.

    ``slack`` is positive when the bound holds (distance on the safe side).
    ``sound`` is None when the estimator signalled it cannot bound.
    """

    name: str
    bound: Optional[float]
    true: float
    kind: str  # "lower" or "upper"
    sound: Optional[bool]
    slack: Optional[float]


@dataclass(frozen=True)
class OracleReport:
    checks: tuple[BoundCheck, ...]
    bounds: DecoyBounds
    observed: ObservedStats = field(repr=False)

    @property
    def sound(self) -> bool:
        return all(c.sound is not False for c in self.checks)

    def __getitem__(self, name: str) -> BoundCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _check(name: str, bound: Optional[float], true: float, kind: str, tol: float) -> BoundCheck:
    if bound is None:
        return BoundCheck(name, None, true, kind, None, None)
    slack = true - bound if kind == "lower" else bound - true
    return BoundCheck(name, bound, true, kind, slack >= -tol * max(1.0, abs(true)), slack)


def soundness_oracle(
    true_yields: Sequence[tuple[float, float]],
    src_family: SourceFamily,
    dp: DecoyProtocolParams,
    trigger: TriggerParams,
    variant: str = DEFAULT_VARIANT,
    tol: float = 1e-12,
) -> OracleReport:
    """Check the four estimators against a known yield vector.

    The observed gains are generated from ``true_yields`` by summing over
    photon number, the estimators run on them, and each bound is compared
    with the true value.  ``tol`` absorbs floating-point round-off only.
    """
    obs = observe(true_yields, dp, trigger, src_family)
    bounds = estimate_bounds(obs, dp, variant)
    (y1, e1), (y2, e2) = true_yields[1], true_yields[2]
    checks = (
        _check("y1", bounds.y1_lower, y1, "lower", tol),
        _check("e1", bounds.e1_upper if bounds.y1_lower > 0.0 else None, e1, "upper", tol),
        _check("y2", bounds.y2_lower, y2, "lower", tol),
        _check("e2", bounds.e2_upper if bounds.y2_lower > 0.0 else None, e2, "upper", tol),
    )
    return OracleReport(checks, bounds, obs)

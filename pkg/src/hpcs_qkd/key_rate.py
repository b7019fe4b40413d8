"""Secure key rates for BB84 and SARG and per-distance intensity optimization.

Rates are in bits per pulse emitted by Alice.  SARG needs the two maps
``g`` (single-photon bit error -> phase error) and ``h`` (two-photon phase
error input); these live outside this package's model and must be supplied
by the caller as a :class:`SargMappings`.  No validated default ships: the
only built-in, ``IDENTITY_MAPPINGS``, is a structural placeholder.
"""
from __future__ import annotations

import importlib
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .channel import (
    ChannelParams,
    GainPair,
    Protocol,
    gain_series,
    transmittance,
    yield_error,
    vacuum_yield,
)
from .decoy import DEFAULT_VARIANT, DecoyProtocolParams, estimate_bounds, observe
from .errors import ConfigurationError, DomainError
from .numerics import DEFAULT_SERIES, SeriesConfig, binary_entropy
from .sources import SourceFamily, SourceModel, TriggerParams, photon_distribution

__all__ = [
    "F_EC",
    "RATE_CUTOFF",
    "RateInputs",
    "SargMappings",
    "IDENTITY_MAPPINGS",
    "load_mappings",
    "SearchConfig",
    "Optimum",
    "RateModel",
    "rate_bb84",
    "rate_sarg",
    "ideal_scenario_inputs",
    "decoy_scenario_inputs",
    "golden_section_max",
    "optimize_mu",
]

F_EC = 1.22
# optimized rates at or below this count as zero (rate extinction)
RATE_CUTOFF = 1e-12


@dataclass(frozen=True)
class RateInputs:
    q_mu: GainPair
    q1: float
    e1: float
    q2: float = 0.0
    e2: float = 0.0
    f_ec: float = F_EC

    def __post_init__(self) -> None:
        if not self.f_ec >= 1.0:
            raise ConfigurationError(f"f_ec must be >= 1, got {self.f_ec}")
        if self.q1 < 0.0 or self.q2 < 0.0:
            raise DomainError(f"q1 and q2 must be >= 0, got {self.q1}, {self.q2}")
        for name in ("e1", "e2"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise DomainError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class SargMappings:
    """The SARG error maps ``g`` and ``h``.

    Both must send [0, 1/2] into [0, 1/2] monotonically; this is spot-checked
    on a grid at construction.
    """

    g: Callable[[float], float]
    h: Callable[[float], float]
    name: str = "custom"

    def __post_init__(self) -> None:
        grid = [0.5 * k / 64 for k in range(65)]
        for label, fn in (("g", self.g), ("h", self.h)):
            values = [fn(x) for x in grid]
            if any(not (0.0 <= v <= 0.5) for v in values):
                raise ConfigurationError(f"SARG map {label} must send [0, 1/2] into [0, 1/2]")
            if any(v1 > v2 for v1, v2 in zip(values, values[1:])):
                raise ConfigurationError(f"SARG map {label} must be non-decreasing")


def _identity(x: float) -> float:
    return x


# Placeholder only: phase error taken equal to bit error.  Not a security bound.
IDENTITY_MAPPINGS = SargMappings(_identity, _identity, name="identity")


def load_mappings(spec: str) -> SargMappings:
    """Resolve ``"identity"`` or a ``"package.module:attribute"`` path."""
    if spec == "identity":
        return IDENTITY_MAPPINGS
    module_name, sep, attr = spec.partition(":")
    if not sep or not module_name or not attr:
        raise ConfigurationError(
            f"SARG mappings must be 'identity' or 'module:attribute', got {spec!r}"
        )
    try:
        obj = getattr(importlib.import_module(module_name), attr)
    except (ImportError, AttributeError) as exc:
        raise ConfigurationError(f"cannot load SARG mappings {spec!r}: {exc}") from exc
    if not isinstance(obj, SargMappings):
        raise ConfigurationError(f"{spec!r} is not a SargMappings instance")
    return obj


def _clip_half(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def _leak(inp: RateInputs) -> float:
    return inp.q_mu.q * inp.f_ec * binary_entropy(_clip_half(inp.q_mu.e))


def rate_bb84(inp: RateInputs) -> float:
    """GLLP rate ``-Q f H(E) + Q1 (1 - H(e1))`` clamped at zero."""
    return max(0.0, -_leak(inp) + inp.q1 * (1.0 - binary_entropy(inp.e1)))


def rate_sarg(inp: RateInputs, maps: Optional[SargMappings]) -> float:
    """SARG rate with single- and two-photon contributions, clamped at zero."""
    if maps is None:
        raise ConfigurationError("SARG rates need g/h mappings (SargMappings)")
    value = (
        -_leak(inp)
        + inp.q1 * (1.0 - binary_entropy(_clip_half(maps.g(inp.e1))))
        + inp.q2 * (1.0 - binary_entropy(_clip_half(maps.h(inp.e2))))
    )
    return max(0.0, value)


def ideal_scenario_inputs(
    src: SourceModel,
    protocol: Protocol,
    params: ChannelParams,
    distance_km: float,
    cfg: SeriesConfig = DEFAULT_SERIES,
    f_ec: float = F_EC,
) -> RateInputs:
    """Rate inputs with Y1, e1, Y2, e2 taken straight from the channel model."""
    protocol = Protocol.parse(protocol)
    eta = transmittance(params, distance_km)
    q_mu = gain_series(src, protocol, params, eta, cfg)
    pn = photon_distribution(src, 2)
    y1, e1 = yield_error(protocol, params, eta, 1)
    q2 = e2 = 0.0
    if protocol is Protocol.SARG:
        y2, e2 = yield_error(protocol, params, eta, 2)
        q2 = y2 * pn[2]
    return RateInputs(q_mu, y1 * pn[1], e1, q2, e2, f_ec)


def decoy_scenario_inputs(
    src: SourceModel,
    protocol: Protocol,
    params: ChannelParams,
    distance_km: float,
    decoy: DecoyProtocolParams,
    variant: str = DEFAULT_VARIANT,
    cfg: SeriesConfig = DEFAULT_SERIES,
    f_ec: float = F_EC,
) -> RateInputs:
    """Rate inputs from the decoy estimators applied to channel-model statistics.

    ``decoy`` fixes the decoy-to-signal ratios; it is rescaled to ``src.mu``.
    """
    if src.family is not SourceFamily.HPCS:
        raise ConfigurationError("decoy estimation is implemented for HPCS sources only")
    protocol = Protocol.parse(protocol)
    eta = transmittance(params, distance_km)
    yields = [vacuum_yield(params)] + [
        yield_error(protocol, params, eta, n) for n in range(1, cfg.n_max + 1)
    ]
    dp = decoy.scaled(src.mu)
    obs = observe(yields, dp, src.trigger)
    bounds = estimate_bounds(obs, dp, variant)
    pn = photon_distribution(src, 2)
    q2 = e2 = 0.0
    if protocol is Protocol.SARG:
        q2, e2 = bounds.y2_lower * pn[2], bounds.e2_upper
    return RateInputs(obs.q_mu, bounds.y1_lower * pn[1], bounds.e1_upper, q2, e2, f_ec)


@dataclass(frozen=True)
class SearchConfig:
    """Intensity search: bracket, coarse grid size, final resolution."""

    mu_min: float = 1e-3
    mu_max: float = 1.0
    grid_points: int = 50
    tol: float = 1e-4

    def __post_init__(self) -> None:
        if not (0.0 < self.mu_min < self.mu_max <= 1.0):
            raise ConfigurationError(
                f"search bracket needs 0 < mu_min < mu_max <= 1, got [{self.mu_min}, {self.mu_max}]"
            )
        if self.grid_points < 3:
            raise ConfigurationError("search grid needs at least 3 points")
        if not self.tol > 0.0:
            raise ConfigurationError("search tolerance must be positive")

    def grid(self, upper: Optional[float] = None) -> list[float]:
        # geometric spacing resolves the narrow low-mu window near extinction
        hi = self.mu_max if upper is None else min(upper, self.mu_max)
        ratio = (hi / self.mu_min) ** (1.0 / (self.grid_points - 1))
        pts = [self.mu_min * ratio**k for k in range(self.grid_points)]
        pts[-1] = hi
        return pts


INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-4
) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on [a, b]; return ``(x, f(x))``.

    Stops once the bracket is narrower than ``tol``.
    """
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


@dataclass(frozen=True)
class Optimum:
    mu_opt: float
    rate: float
    beyond_threshold: bool = False


@dataclass(frozen=True)
class RateModel:
    """Everything needed to turn (mu, distance) into a key rate."""

    family: SourceFamily
    protocol: Protocol
    channel: ChannelParams = field(default_factory=ChannelParams)
    trigger: TriggerParams = field(default_factory=TriggerParams)
    mappings: Optional[SargMappings] = None
    hsps_statistics: str = "thermal"
    decoy: Optional[DecoyProtocolParams] = None
    variant: str = DEFAULT_VARIANT
    f_ec: float = F_EC
    series: SeriesConfig = DEFAULT_SERIES

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", SourceFamily.parse(self.family))
        object.__setattr__(self, "protocol", Protocol.parse(self.protocol))
        if self.protocol is Protocol.SARG and self.mappings is None:
            raise ConfigurationError("SARG rates need g/h mappings (SargMappings)")

    @property
    def uses_decoy(self) -> bool:
        return self.decoy is not None and self.family is SourceFamily.HPCS

    def source(self, mu: float) -> SourceModel:
        trig = None if self.family is SourceFamily.WCP else self.trigger
        return SourceModel(self.family, mu, trig, self.hsps_statistics)

    def inputs(self, mu: float, distance_km: float) -> RateInputs:
        src = self.source(mu)
        if self.uses_decoy:
            return decoy_scenario_inputs(
                src, self.protocol, self.channel, distance_km,
                self.decoy, self.variant, self.series, self.f_ec,
            )
        return ideal_scenario_inputs(
            src, self.protocol, self.channel, distance_km, self.series, self.f_ec
        )

    def rate(self, mu: float, distance_km: float) -> float:
        inp = self.inputs(mu, distance_km)
        if self.protocol is Protocol.BB84:
            return rate_bb84(inp)
        return rate_sarg(inp, self.mappings)

    def optimize(self, distance_km: float, search: SearchConfig = SearchConfig()) -> Optimum:
        """Best intensity at one distance: coarse grid, then golden section."""
        upper = 1.0 - 1e-9 if self.uses_decoy else None
        grid = search.grid(upper)
        values = [self.rate(mu, distance_km) for mu in grid]
        best = max(range(len(grid)), key=values.__getitem__)
        if values[best] <= RATE_CUTOFF:
            mid = grid[len(grid) // 2]
            return Optimum(mid, values[len(grid) // 2], beyond_threshold=True)
        lo = grid[max(best - 1, 0)]
        hi = grid[min(best + 1, len(grid) - 1)]
        mu, r = golden_section_max(lambda m: self.rate(m, distance_km), lo, hi, search.tol)
        if r < values[best]:
            mu, r = grid[best], values[best]
        return Optimum(mu, r)


def optimize_mu(
    src_family: SourceFamily,
    protocol: Protocol,
    params: ChannelParams,
    distance_km: float,
    search: SearchConfig = SearchConfig(),
    **model_kwargs,
) -> Optimum:
    """Optimized rate at one distance; extra keywords go to :class:`RateModel`."""
    model = RateModel(src_family, protocol, params, **model_kwargs)
    return model.optimize(distance_km, search)

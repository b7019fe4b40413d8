"""Distance sweeps, extinction and crossover search, gain reports, CSV output."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .channel import ChannelParams, Protocol
from .decoy import DEFAULT_VARIANT, DecoyProtocolParams
from .errors import ConfigurationError, NotFoundError
from .key_rate import RATE_CUTOFF, RateModel, SargMappings, SearchConfig
from .sources import SourceFamily, TriggerParams

__all__ = [
    "CSV_HEADER",
    "BRACKET_KM",
    "SweepSpec",
    "RatePoint",
    "GainReport",
    "model_for",
    "evaluate_point",
    "run_sweep",
    "find_threshold",
    "find_crossover",
    "gain_report",
    "emit_csv",
    "format_csv",
]

CSV_HEADER = "distance_km,protocol,source,mu_opt,q_mu,e_mu,rate"
BRACKET_KM = (0.0, 500.0)


@dataclass(frozen=True)
class SweepSpec:
    l_min: float = 0.0
    l_max: float = 200.0
    step: float = 1.0
    protocols: tuple[Protocol, ...] = (Protocol.BB84,)
    sources: tuple[SourceFamily, ...] = (SourceFamily.WCP, SourceFamily.HSPS, SourceFamily.HPCS)
    channel: ChannelParams = field(default_factory=ChannelParams)
    trigger: TriggerParams = field(default_factory=TriggerParams)
    decoy: Optional[DecoyProtocolParams] = None
    mappings: Optional[SargMappings] = None
    hsps_statistics: str = "thermal"
    variant: str = DEFAULT_VARIANT
    search: SearchConfig = field(default_factory=SearchConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "protocols", tuple(sorted({Protocol.parse(p) for p in self.protocols})))
        object.__setattr__(self, "sources", tuple(sorted({SourceFamily.parse(s) for s in self.sources})))
        if not (0.0 <= self.l_min < self.l_max):
            raise ConfigurationError(
                f"sweep needs 0 <= l_min < l_max, got l_min={self.l_min}, l_max={self.l_max}"
            )
        if not self.step > 0.0:
            raise ConfigurationError(f"sweep step must be positive, got {self.step}")
        if not self.protocols:
            raise ConfigurationError("sweep needs at least one protocol")
        if not self.sources:
            raise ConfigurationError("sweep needs at least one source")
        if Protocol.SARG in self.protocols and self.mappings is None:
            raise ConfigurationError("SARG sweeps need g/h mappings (SargMappings)")

    def distances(self) -> list[float]:
        count = int(math.floor((self.l_max - self.l_min) / self.step + 1e-9)) + 1
        return [self.l_min + k * self.step for k in range(count)]

    def model(self, protocol: Protocol, source: SourceFamily) -> RateModel:
        return RateModel(
            source, protocol, self.channel, self.trigger, self.mappings,
            self.hsps_statistics, self.decoy, self.variant,
        )


@dataclass(frozen=True)
class RatePoint:
    distance_km: float
    protocol: str
    source: str
    mu_opt: float
    q_mu: float
    e_mu: float
    rate: float


def model_for(
    protocol: Protocol,
    source: SourceFamily,
    channel: ChannelParams = ChannelParams(),
    trigger: TriggerParams = TriggerParams(),
    **kwargs,
) -> RateModel:
    return RateModel(source, protocol, channel, trigger, **kwargs)


def evaluate_point(model: RateModel, distance_km: float, search: SearchConfig = SearchConfig()) -> RatePoint:
    """Optimize mu at one distance and report the resulting row."""
    opt = model.optimize(distance_km, search)
    inp = model.inputs(opt.mu_opt, distance_km)
    rate = 0.0 if opt.beyond_threshold else opt.rate
    return RatePoint(
        distance_km, model.protocol.value, model.family.value,
        opt.mu_opt, inp.q_mu.q, inp.q_mu.e, rate,
    )


def _evaluate_job(job: tuple[RateModel, float, SearchConfig]) -> RatePoint:
    return evaluate_point(*job)


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[RatePoint]:
    """One optimized row per (distance, protocol, source).

    With ``workers > 1`` points are evaluated in a process pool; the result
    is sorted, so output does not depend on completion order.
    """
    jobs = [
        (spec.model(p, s), L, spec.search)
        for p in spec.protocols
        for s in spec.sources
        for L in spec.distances()
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_evaluate_job, jobs, chunksize=8))
    else:
        points = [_evaluate_job(j) for j in jobs]
    return sorted(points, key=lambda r: (r.protocol, r.source, r.distance_km))


def _optimized_rate(model: RateModel, distance_km: float, search: SearchConfig) -> float:
    opt = model.optimize(distance_km, search)
    return 0.0 if opt.beyond_threshold else opt.rate


def find_threshold(
    protocol: Protocol,
    source: SourceFamily,
    channel: ChannelParams = ChannelParams(),
    trigger: TriggerParams = TriggerParams(),
    search: SearchConfig = SearchConfig(),
    resolution_km: float = 0.25,
    **kwargs,
) -> float:
    """Distance where the optimized rate falls to the extinction cutoff.

    Bisection on [0, 500] km; the returned midpoint is within
    ``resolution_km / 2`` of the last bracket.
    """
    model = model_for(protocol, source, channel, trigger, **kwargs)
    lo, hi = BRACKET_KM
    alive = lambda L: _optimized_rate(model, L, search) > RATE_CUTOFF  # noqa: E731
    if not alive(lo):
        raise NotFoundError(f"{source}+{protocol} has no positive rate even at {lo} km")
    if alive(hi):
        raise NotFoundError(f"{source}+{protocol} rate stays positive up to {hi} km")
    while hi - lo > resolution_km:
        mid = 0.5 * (lo + hi)
        if alive(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _sign(x: float) -> int:
    return (x > 0.0) - (x < 0.0)


def find_crossover(
    protocol: Protocol,
    source_a: SourceFamily,
    source_b: SourceFamily,
    channel: ChannelParams = ChannelParams(),
    trigger: TriggerParams = TriggerParams(),
    search: SearchConfig = SearchConfig(),
    scan_step_km: float = 2.0,
    resolution_km: float = 0.25,
    **kwargs,
) -> Optional[float]:
    """First distance where the two optimized rates cross, or None.

    Scans [0, 500] km for a strict sign change of ``rate_a - rate_b`` and
    refines it by bisection.  Scanning stops once both rates are zero.
    """
    ma = model_for(protocol, source_a, channel, trigger, **kwargs)
    mb = model_for(protocol, source_b, channel, trigger, **kwargs)

    def diff(L: float) -> tuple[float, bool]:
        ra = _optimized_rate(ma, L, search)
        rb = _optimized_rate(mb, L, search)
        return ra - rb, ra == 0.0 and rb == 0.0

    lo_l, end = BRACKET_KM
    d_lo, dead = diff(lo_l)
    while not dead and lo_l < end:
        hi_l = min(lo_l + scan_step_km, end)
        d_hi, dead = diff(hi_l)
        if _sign(d_lo) * _sign(d_hi) < 0:
            s_lo = _sign(d_lo)
            while hi_l - lo_l > resolution_km:
                mid = 0.5 * (lo_l + hi_l)
                if _sign(diff(mid)[0]) == s_lo:
                    lo_l = mid
                else:
                    hi_l = mid
            return 0.5 * (lo_l + hi_l)
        lo_l, d_lo = hi_l, d_hi
    return None


@dataclass(frozen=True)
class GainReport:
    """Mean of ``rate_a / max(rate_b...)`` over distances where both are positive."""

    gain: float
    l_from: float
    l_to: float
    samples: int


def gain_report(
    points: Iterable[RatePoint],
    protocol: Protocol | str,
    source_a: SourceFamily | str,
    sources_b: Sequence[SourceFamily | str],
) -> GainReport:
    protocol = Protocol.parse(protocol).value
    a = SourceFamily.parse(source_a).value
    bs = {SourceFamily.parse(s).value for s in sources_b}
    if not bs:
        raise ConfigurationError("gain report needs at least one reference source")
    rate_a: dict[float, float] = {}
    rate_b: dict[float, list[float]] = {}
    for p in points:
        if p.protocol != protocol:
            continue
        if p.source == a:
            rate_a[p.distance_km] = p.rate
        if p.source in bs:
            rate_b.setdefault(p.distance_km, []).append(p.rate)
    ratios = []
    for L in sorted(rate_a):
        refs = rate_b.get(L, [])
        if len(refs) != len(bs):
            continue
        ref = max(refs)
        if rate_a[L] > RATE_CUTOFF and ref > RATE_CUTOFF:
            ratios.append((L, rate_a[L] / ref))
    if not ratios:
        raise NotFoundError(f"{a} and {sorted(bs)} have no common positive-rate range")
    return GainReport(
        math.fsum(r for _, r in ratios) / len(ratios), ratios[0][0], ratios[-1][0], len(ratios)
    )


def _fmt(x: float) -> str:
    return format(x, ".15g")


def format_csv(points: Iterable[RatePoint]) -> str:
    lines = [CSV_HEADER]
    for p in points:
        lines.append(",".join([
            _fmt(p.distance_km), p.protocol, p.source,
            _fmt(p.mu_opt), _fmt(p.q_mu), _fmt(p.e_mu), _fmt(p.rate),
        ]))
    return "\n".join(lines) + "\n"


def emit_csv(points: Iterable[RatePoint], path: str | os.PathLike) -> None:
    """Write the sweep as CSV (``\\n`` line endings, 15 significant digits)."""
    text = format_csv(points)
    try:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {os.fspath(path)!r}: {exc.strerror or exc}") from exc

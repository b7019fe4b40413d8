"""Command-line interface: ``hpcs-qkd <command> [options]``.

Commands: rate, sweep, threshold, crossover, bounds, gain.  Settings come
from defaults, then an optional ``--config`` file, then command-line flags.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from . import __version__
from .channel import Protocol, transmittance, vacuum_yield, yield_error
from .config import Settings, load_config
from .decoy import VARIANTS, DecoyProtocolParams, soundness_oracle
from .errors import QKDError
from .experiment import (
    SweepSpec,
    evaluate_point,
    emit_csv,
    find_crossover,
    find_threshold,
    format_csv,
    gain_report,
    model_for,
    run_sweep,
)
from .sources import HSPS_STATISTICS, SourceFamily

log = logging.getLogger("hpcs_qkd")

# used by `bounds` when no decoy intensities are configured
DEFAULT_DECOY = DecoyProtocolParams(0.6, 0.3, 0.1)


def _csv_list(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in _csv_list(text))


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model settings (override --config)")
    g.add_argument("--config", help="key = value settings file")
    g.add_argument("--alpha", type=float, help="fiber loss, dB/km")
    g.add_argument("--eta-bob", type=float, help="receiver efficiency")
    g.add_argument("--p-dark", type=float, help="receiver dark-count probability")
    g.add_argument("--e-det", type=float, help="misalignment error probability")
    g.add_argument("--eta-a", type=float, help="trigger detector efficiency")
    g.add_argument("--d-a", type=float, help="trigger detector dark-count probability")
    g.add_argument("--decoy-mu", dest="mu", type=float, help="decoy signal intensity")
    g.add_argument("--nu1", type=float, help="first decoy intensity")
    g.add_argument("--nu2", type=float, help="second decoy intensity")
    g.add_argument("--hsps-statistics", choices=sorted(HSPS_STATISTICS))
    g.add_argument("--sarg-mappings", help="'identity' or module:attribute of a SargMappings")
    g.add_argument("--variant", choices=VARIANTS, help="two-photon estimator variant")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _range_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--l-min", type=float)
    p.add_argument("--l-max", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hpcs-qkd",
        description="Key rates of BB84/SARG with WCP, HSPS and HPCS sources.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    p = sub.add_parser("rate", parents=[common], help="key rate at one distance")
    p.add_argument("--protocol", default="BB84")
    p.add_argument("--source", default="HPCS")
    p.add_argument("--distance", type=float, required=True, help="km")
    p.add_argument("--intensity", type=float, help="fixed mu instead of optimizing")

    p = sub.add_parser("sweep", parents=[common], help="optimized rates vs distance as CSV")
    _range_args(p)
    p.add_argument("--protocols", type=_csv_list)
    p.add_argument("--sources", type=_csv_list)
    p.add_argument("-o", "--out", default="-", help="CSV path, '-' for stdout")

    p = sub.add_parser("threshold", parents=[common], help="rate-extinction distance")
    p.add_argument("--protocol", default="BB84")
    p.add_argument("--source", default="WCP")

    p = sub.add_parser("crossover", parents=[common], help="distance where two sources cross")
    p.add_argument("--protocol", default="BB84")
    p.add_argument("--source-a", default="WCP")
    p.add_argument("--source-b", default="HSPS")

    p = sub.add_parser("bounds", parents=[common], help="decoy-bound soundness report")
    p.add_argument("--protocol", default="BB84")
    p.add_argument("--distances", type=_float_list, default=(10.0, 50.0, 100.0))

    p = sub.add_parser("gain", parents=[common], help="average rate gain of one source over others")
    _range_args(p)
    p.add_argument("--protocol", default="BB84")
    p.add_argument("--source-a", default="HPCS")
    p.add_argument("--versus", type=_csv_list, default=("WCP", "HSPS"))
    return parser


_SETTING_FLAGS = (
    "alpha", "eta_bob", "p_dark", "e_det", "eta_a", "d_a", "mu", "nu1", "nu2",
    "hsps_statistics", "sarg_mappings", "variant",
    "l_min", "l_max", "step", "workers", "protocols", "sources",
)


def settings_from_args(args: argparse.Namespace) -> Settings:
    settings = Settings()
    if args.config:
        settings = settings.updated(load_config(args.config))
    flags = {k: getattr(args, k, None) for k in _SETTING_FLAGS}
    return settings.updated(flags)


def _spec(s: Settings, protocols=None, sources=None) -> SweepSpec:
    return SweepSpec(
        s.l_min, s.l_max, s.step,
        tuple(protocols or s.protocols), tuple(sources or s.sources),
        s.channel, s.trigger, s.decoy, s.mappings, s.hsps_statistics, s.variant,
    )


def _cmd_rate(args, s: Settings) -> int:
    model = model_for(args.protocol, args.source, s.channel, s.trigger, **s.model_kwargs())
    if args.intensity is None:
        point = evaluate_point(model, args.distance)
        mu, rate, q, e = point.mu_opt, point.rate, point.q_mu, point.e_mu
    else:
        mu = args.intensity
        inp = model.inputs(mu, args.distance)
        rate, q, e = model.rate(mu, args.distance), inp.q_mu.q, inp.q_mu.e
    print(f"protocol={model.protocol.value} source={model.family.value} distance_km={args.distance:g}")
    print(f"mu={mu:.6g} q_mu={q:.6e} e_mu={e:.6g} rate={rate:.6e}")
    return 0


def _cmd_sweep(args, s: Settings) -> int:
    points = run_sweep(_spec(s), workers=s.workers)
    if args.out == "-":
        sys.stdout.write(format_csv(points))
    else:
        emit_csv(points, args.out)
        log.info("wrote %d rows to %s", len(points), args.out)
    return 0


def _cmd_threshold(args, s: Settings) -> int:
    L = find_threshold(args.protocol, args.source, s.channel, s.trigger, **s.model_kwargs())
    print(f"{SourceFamily.parse(args.source).value}+{Protocol.parse(args.protocol).value} "
          f"extinction distance: {L:.2f} km")
    return 0


def _cmd_crossover(args, s: Settings) -> int:
    L = find_crossover(
        args.protocol, args.source_a, args.source_b, s.channel, s.trigger, **s.model_kwargs()
    )
    label = f"{args.source_a.upper()} vs {args.source_b.upper()} ({args.protocol.upper()})"
    print(f"{label}: " + ("no crossover in [0, 500] km" if L is None else f"crossover at {L:.2f} km"))
    return 0


def _cmd_bounds(args, s: Settings) -> int:
    dp = s.decoy or DEFAULT_DECOY
    protocol = Protocol.parse(args.protocol)
    ok = True
    print(f"decoy mu={dp.mu:g} nu1={dp.nu1:g} nu2={dp.nu2:g} variant={s.variant}")
    print("distance_km,bound,kind,estimate,true,slack,sound")
    for L in args.distances:
        eta = transmittance(s.channel, L)
        yields = [vacuum_yield(s.channel)] + [
            yield_error(protocol, s.channel, eta, n) for n in range(1, 41)
        ]
        report = soundness_oracle(yields, SourceFamily.HPCS, dp, s.trigger, s.variant)
        ok &= report.sound
        for c in report.checks:
            est = "n/a" if c.bound is None else f"{c.bound:.6e}"
            slack = "n/a" if c.slack is None else f"{c.slack:.3e}"
            sound = "n/a" if c.sound is None else ("yes" if c.sound else "NO")
            print(f"{L:g},{c.name},{c.kind},{est},{c.true:.6e},{slack},{sound}")
    return 0 if ok else 1


def _cmd_gain(args, s: Settings) -> int:
    sources = {args.source_a, *args.versus}
    points = run_sweep(_spec(s, protocols=[args.protocol], sources=sources), workers=s.workers)
    rep = gain_report(points, args.protocol, args.source_a, args.versus)
    print(f"average gain {rep.gain:.4f} of {args.source_a.upper()} over "
          f"max({', '.join(v.upper() for v in args.versus)}) on "
          f"[{rep.l_from:g}, {rep.l_to:g}] km ({rep.samples} points, mean of ratios)")
    return 0


_COMMANDS = {
    "rate": _cmd_rate,
    "sweep": _cmd_sweep,
    "threshold": _cmd_threshold,
    "crossover": _cmd_crossover,
    "bounds": _cmd_bounds,
    "gain": _cmd_gain,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        settings = settings_from_args(args)
        return _COMMANDS[args.command](args, settings)
    except (QKDError, OSError) as exc:
        print(f"hpcs-qkd {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

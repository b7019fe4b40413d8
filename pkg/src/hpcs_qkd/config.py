"""Plain-text ``key = value`` configuration files.

One pair per line; ``#`` starts a comment.  Every key is optional and has a
default (GYS channel, eta_a = 0.6, d_a = 5e-8).  List values are
comma-separated.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from typing import Any, Mapping, Optional

from .channel import ChannelParams
from .decoy import DEFAULT_VARIANT, DecoyProtocolParams
from .errors import ConfigurationError
from .key_rate import SargMappings, load_mappings
from .sources import TriggerParams

__all__ = ["Settings", "parse_config", "load_config"]


def _floats(*names: str) -> dict[str, type]:
    return {n: float for n in names}


def _list(value: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in value.split(",") if v.strip())


_KEYS: dict[str, Any] = {
    **_floats("alpha", "eta_bob", "p_dark", "e_det", "eta_a", "d_a",
              "mu", "nu1", "nu2", "l_min", "l_max", "step"),
    "protocols": _list,
    "sources": _list,
    "hsps_statistics": str,
    "sarg_mappings": str,
    "variant": str,
    "workers": int,
}


@dataclass(frozen=True)
class Settings:
    alpha: float = 0.21
    eta_bob: float = 0.045
    p_dark: float = 1.7e-6
    e_det: float = 0.033
    eta_a: float = 0.6
    d_a: float = 5e-8
    mu: Optional[float] = None
    nu1: Optional[float] = None
    nu2: Optional[float] = None
    l_min: float = 0.0
    l_max: float = 200.0
    step: float = 1.0
    protocols: tuple[str, ...] = ("BB84",)
    sources: tuple[str, ...] = ("WCP", "HSPS", "HPCS")
    hsps_statistics: str = "thermal"
    sarg_mappings: Optional[str] = None
    variant: str = DEFAULT_VARIANT
    workers: int = 1

    def updated(self, overrides: Mapping[str, Any]) -> "Settings":
        known = {f.name for f in fields(self)}
        clean = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(clean) - known
        if unknown:
            raise ConfigurationError(f"unknown setting(s): {', '.join(sorted(unknown))}")
        return replace(self, **clean)

    @property
    def channel(self) -> ChannelParams:
        return ChannelParams(self.alpha, self.eta_bob, self.p_dark, self.e_det)

    @property
    def trigger(self) -> TriggerParams:
        return TriggerParams(self.eta_a, self.d_a)

    @property
    def decoy(self) -> Optional[DecoyProtocolParams]:
        given = [v is not None for v in (self.mu, self.nu1, self.nu2)]
        if not any(given):
            return None
        if not all(given):
            raise ConfigurationError("decoy settings need all of mu, nu1 and nu2")
        return DecoyProtocolParams(self.mu, self.nu1, self.nu2)

    @property
    def mappings(self) -> Optional[SargMappings]:
        return None if self.sarg_mappings is None else load_mappings(self.sarg_mappings)

    def model_kwargs(self) -> dict[str, Any]:
        return {
            "mappings": self.mappings,
            "hsps_statistics": self.hsps_statistics,
            "decoy": self.decoy,
            "variant": self.variant,
        }


def parse_config(text: str, source: str = "<config>") -> dict[str, Any]:
    """Parse config text into a dict of typed overrides."""
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in _KEYS:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _KEYS[key](value)
        except ValueError:
            raise ConfigurationError(f"{source}:{lineno}: bad value {value!r} for {key}") from None
    return out


def load_config(path: str | os.PathLike) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {os.fspath(path)!r}: {exc.strerror}") from exc
    return parse_config(text, os.fspath(path))

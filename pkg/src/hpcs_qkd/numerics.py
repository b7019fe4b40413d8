"""Special functions and truncated-series helpers.

Every routine here is a pure function of its arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import DomainError, TruncationError

__all__ = [
    "SeriesConfig",
    "DEFAULT_SERIES",
    "bessel_i0",
    "binary_entropy",
    "weighted_series_sum",
]


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation settings for sums over photon number."""

    n_max: int = 40
    tail_tol: float = 1e-12

    def __post_init__(self) -> None:
        if int(self.n_max) != self.n_max or self.n_max < 10:
            raise DomainError(f"n_max must be an integer >= 10, got {self.n_max}")
        if not (0.0 < self.tail_tol <= 1e-10):
            raise DomainError(f"tail_tol must lie in (0, 1e-10], got {self.tail_tol}")


DEFAULT_SERIES = SeriesConfig()


def bessel_i0(x: float) -> float:
    """Modified Bessel function of the first kind, order zero.

    Summed from the power series ``sum_k (x/2)**(2k) / (k!)**2``.  Only
    nonnegative arguments of moderate size are needed here (x <= 2 in the
    operating regime), where the series converges quickly.

    >>> bessel_i0(0.0)
    1.0
    >>> round(bessel_i0(2.0), 7)
    2.2795853
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"bessel_i0 needs a finite argument, got {x}")
    if x < 0.0:
        raise DomainError(f"bessel_i0 is only defined here for x >= 0, got {x}")
    q = 0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if term <= 1e-17 * total:
            return total


def binary_entropy(p: float) -> float:
    """Binary Shannon entropy in bits, with H(0) = H(1) = 0."""
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"binary entropy needs p in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def weighted_series_sum(
    term: Callable[[int], float], cfg: SeriesConfig = DEFAULT_SERIES
) -> float:
    """Return ``sum(term(n) for n in 0..n_max)``.

    Raises TruncationError when the last retained term is not below
    ``cfg.tail_tol``, i.e. when n_max is too small for the intensity in use.
    """
    total = 0.0
    last = 0.0
    for n in range(cfg.n_max + 1):
        last = term(n)
        total += last
    if not abs(last) < cfg.tail_tol:
        raise TruncationError(
            f"series term at n_max={cfg.n_max} is {last:.3e}, "
            f"not below tail_tol={cfg.tail_tol:.1e}"
        )
    return total

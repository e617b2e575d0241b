"""Binary Kullback-Leibler divergence and its asymmetry function.

All logarithms are natural. Infinite results are returned deliberately as
``math.inf`` / ``-math.inf`` from explicit branches, never through floating
overflow, so callers can test ``math.isinf`` to detect a vacuous value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


def _xlogx_over(p: float, q: float) -> float:
    """``p * log(p / q)`` with ``0 log 0 = 0`` and ``p log(p/0) = inf``."""
    if p == 0.0:
        return 0.0
    if q == 0.0:
        return math.inf
    return p * math.log(p / q)


def s2(p: float, q: float) -> float:
    """Kullback-Leibler divergence between ``(p, 1-p)`` and ``(q, 1-q)``.

    Returns ``math.inf`` when ``q`` sits on the boundary and ``p`` puts mass
    where ``q`` has none.
    """
    if not (0.0 <= p <= 1.0) or not (0.0 <= q <= 1.0):
        raise DomainError(f"s2 needs probabilities in [0, 1], got p={p!r}, q={q!r}")
    return _xlogx_over(p, q) + _xlogx_over(1.0 - p, 1.0 - q)


@dataclass(frozen=True)
class BinaryPoint:
    """A point ``(p, t)`` in the domain of :func:`asym_a`."""

    p: float
    t: float

    def __post_init__(self):
        check_domain(self.p, self.t)


def check_domain(p: float, t: float) -> None:
    """Raise :class:`DomainError` naming the violated constraint."""
    if not (-1.0 <= t <= 1.0):
        raise DomainError(f"shift t={t!r} violates -1 <= t <= 1")
    if p < max(0.0, -t):
        raise DomainError(f"p={p!r} violates p >= max(0, -t) = {max(0.0, -t)!r}")
    if p > min(1.0, 1.0 - t):
        raise DomainError(f"p={p!r} violates p <= min(1, 1 - t) = {min(1.0, 1.0 - t)!r}")


def asym_a(p: float, t: float) -> float:
    """Asymmetry ``s2(p+t || p) - s2(p || p+t)`` in closed form.

    Uses ``(2p+t) log1p(t/p) + (2(1-p)-t) log1p(-t/(1-p))``. At the edges
    of the domain the continuous limit is returned, which may be infinite.
    ``a(0, 0)`` is taken as 0 by continuity along ``t = 0``.
    """
    check_domain(p, t)
    if t == 0.0:
        return 0.0
    q = 1.0 - p
    # p + t -> 0 with p > 0 (t < 0), or p -> 0 with t > 0
    if p == 0.0:
        return math.inf
    if q == 0.0:
        return math.inf
    u = t / p
    v = -t / q
    first = (2.0 * p + t) * math.log1p(u) if u > -1.0 else -math.inf
    second = (2.0 * q - t) * math.log1p(v) if v > -1.0 else -math.inf
    return first + second


def asym_a_difference(p: float, t: float) -> float:
    """Same quantity as :func:`asym_a`, evaluated as a difference of ``s2`` values."""
    check_domain(p, t)
    return s2(p + t, p) - s2(p, p + t)


_TAYLOR_ORDERS = (3, 4)


def asym_taylor(p: float, t: float, order: int = 4) -> float:
    """Partial sum of the small-``t`` expansion of :func:`asym_a`.

    ``(p^-2 - (1-p)^-2) t^3/6 - (p^-3 + (1-p)^-3) t^4/6``, truncated after
    the ``t^order`` term. The quartic coefficient is a sum: both logarithms
    contribute ``-t^4/(6 p^3)`` and ``-t^4/(6 (1-p)^3)`` with the same sign.
    """
    if order not in _TAYLOR_ORDERS:
        raise ValueError(f"unsupported Taylor order {order!r}; choose from {_TAYLOR_ORDERS}")
    if not (0.0 < p < 1.0):
        raise DomainError(f"Taylor expansion needs 0 < p < 1, got {p!r}")
    q = 1.0 - p
    value = (p**-2 - q**-2) * t**3 / 6.0
    if order >= 4:
        value -= (p**-3 + q**-3) * t**4 / 6.0
    return value

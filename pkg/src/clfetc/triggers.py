"""The four sampling policies and their pure decision functions.

A policy never integrates anything; it answers "should the control be
recomputed here?" given the current segment (last update time, state and
frozen control) and a query point.  The simulation engine owns time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .core import ClfCertificate, ControlSystem, lyapunov_derivative
from .errors import ConfigurationError, DomainError

__all__ = [
    "EventTriggered",
    "SelfTriggered",
    "TimeTriggered",
    "PeriodicEventTriggered",
    "TriggerPolicy",
    "TriggerDecision",
    "SegmentState",
    "equilibrium_threshold",
    "event_guard",
    "predicate_p",
    "next_decision",
]

# the exact equilibrium test V = 0 is unattainable in floating point
EQ_ABS_FLOOR = 1e-24
EQ_REL_FLOOR = 1e-12


def equilibrium_threshold(v0: float) -> float:
    return max(EQ_ABS_FLOOR, EQ_REL_FLOOR * v0)


@dataclass(frozen=True)
class EventTriggered:
    """Recompute the control at the first zero of the event guard."""

    sigma: float

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise DomainError(f"sigma must lie in (0, 1), got {self.sigma}")

    kind = "event"


@dataclass(frozen=True)
class SelfTriggered:
    """Recompute at ``t_n + tau_fn(x(t_n))``; nothing is monitored between."""

    sigma: float
    tau_fn: Callable[[np.ndarray], float]

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise DomainError(f"sigma must lie in (0, 1), got {self.sigma}")

    kind = "self"


@dataclass(frozen=True)
class TimeTriggered:
    """Recompute on a trajectory-independent schedule.

    Either a fixed period or an explicit strictly increasing list of
    instants.  Whether the period is small enough for the rate guarantee is
    the caller's concern (a sufficient bound comes from the dwell module).
    """

    period: Optional[float] = None
    instants: Optional[tuple] = None

    def __post_init__(self):
        if (self.period is None) == (self.instants is None):
            raise ConfigurationError("give exactly one of period or instants")
        if self.period is not None and self.period <= 0:
            raise DomainError("period must be positive")
        if self.instants is not None:
            inst = tuple(float(t) for t in self.instants)
            if any(b <= a for a, b in zip(inst, inst[1:])) or (inst and inst[0] <= 0):
                raise DomainError("instants must be strictly increasing and positive")
            object.__setattr__(self, "instants", inst)

    kind = "time"

    def instant_after(self, index: int) -> Optional[float]:
        """The (index+1)-th update instant after t=0, or None when the
        explicit list is exhausted."""
        if self.period is not None:
            return (index + 1) * self.period
        if index < len(self.instants):
            return self.instants[index]
        return None


@dataclass(frozen=True)
class PeriodicEventTriggered:
    """Check a predicate every ``h`` seconds; recompute only when it fails.

    ``big_m`` is the velocity-to-decrease ratio bound of the operating
    region, entering the predicate's second conjunct.
    """

    sigma: float
    sigma_tilde: float
    k_big: float
    h: float
    big_m: float

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise DomainError(f"sigma must lie in (0, 1), got {self.sigma}")
        if not self.sigma < self.sigma_tilde < 1.0:
            raise DomainError("sigma_tilde must lie in (sigma, 1)")
        if self.k_big <= 1.0:
            raise DomainError("k_big must exceed 1")
        if self.h <= 0.0:
            raise DomainError("h must be positive")
        if self.big_m <= 0.0:
            raise DomainError("big_m must be positive")

    kind = "periodic-event"


TriggerPolicy = Union[EventTriggered, SelfTriggered, TimeTriggered, PeriodicEventTriggered]


@dataclass(frozen=True)
class TriggerDecision:
    fire: bool
    guard_value: float
    reason: str  # guard_zero | clock | predicate_false | equilibrium_frozen | hold


@dataclass(frozen=True)
class SegmentState:
    """What a policy may look at: the last update and the run's initial level."""

    index: int
    t_n: float
    x_n: np.ndarray
    u_n: np.ndarray
    v0: float


def event_guard(cert: ClfCertificate, sys: ControlSystem, x, u_frozen,
                sigma: Optional[float] = None) -> float:
    """Signed margin ``g = W(x, u) + sigma*gamma(V(x))``.

    Negative means the retained-decrease condition holds strictly; the event
    surface is ``g = 0``.
    """
    s = cert.sigma if sigma is None else sigma
    w = lyapunov_derivative(cert, sys, x, u_frozen)
    return w + s * cert.rate(cert.v(np.asarray(x, dtype=float)))


def predicate_p(cert: ClfCertificate, sys: ControlSystem, big_m: float, x, u,
                sigma_tilde: float, k_big: float) -> bool:
    """Periodic-check predicate: keep the current control iff the decrease
    still has margin ``sigma_tilde`` and the speed-to-decrease ratio stays
    within ``k_big`` times the regional bound.

    ``W = 0`` away from the origin makes the ratio infinite: the predicate
    is false, not an error.
    """
    x = np.asarray(x, dtype=float)
    g = cert.grad(x)
    fx = sys.f(x, u)
    w = float(g @ fx)
    if not w < -sigma_tilde * cert.rate(cert.v(x)):
        return False
    if w == 0.0:
        return False
    fn = float(np.linalg.norm(fx))
    ratio = (float(np.linalg.norm(g)) * fn + fn * fn) / (big_m * abs(w))
    return ratio <= k_big


def next_decision(policy: TriggerPolicy, cert: ClfCertificate, sys: ControlSystem,
                  seg: SegmentState, t: float, x) -> TriggerDecision:
    """Evaluate the policy's firing rule at the query point ``(t, x)``.

    The engine localizes event times itself; this function states, for any
    queried instant, whether the rule holds there — and with which reason.
    """
    x = np.asarray(x, dtype=float)
    if cert.v(seg.x_n) <= equilibrium_threshold(seg.v0):
        return TriggerDecision(fire=False, guard_value=0.0, reason="equilibrium_frozen")

    if isinstance(policy, EventTriggered):
        g = event_guard(cert, sys, x, seg.u_n, policy.sigma)
        return TriggerDecision(fire=g >= 0.0, guard_value=g,
                               reason="guard_zero" if g >= 0.0 else "hold")

    if isinstance(policy, SelfTriggered):
        dwell = float(policy.tau_fn(seg.x_n))
        if dwell <= 0.0:
            raise ConfigurationError("self-triggered dwell function returned a "
                                     f"non-positive dwell {dwell}")
        g = event_guard(cert, sys, x, seg.u_n, policy.sigma)
        return TriggerDecision(fire=t >= seg.t_n + dwell, guard_value=g,
                               reason="clock" if t >= seg.t_n + dwell else "hold")

    if isinstance(policy, TimeTriggered):
        nxt = policy.instant_after(seg.index)
        g = event_guard(cert, sys, x, seg.u_n)
        if nxt is None:
            return TriggerDecision(fire=False, guard_value=g, reason="hold")
        return TriggerDecision(fire=t >= nxt, guard_value=g,
                               reason="clock" if t >= nxt else "hold")

    if isinstance(policy, PeriodicEventTriggered):
        g = event_guard(cert, sys, x, seg.u_n, policy.sigma)
        k = t / policy.h
        on_grid = abs(k - round(k)) <= 1e-9 * max(1.0, abs(k)) and round(k) >= 1
        if not on_grid:
            return TriggerDecision(fire=False, guard_value=g, reason="hold")
        ok = predicate_p(cert, sys, policy.big_m, x, seg.u_n,
                         policy.sigma_tilde, policy.k_big)
        return TriggerDecision(fire=not ok, guard_value=g,
                               reason="predicate_false" if not ok else "hold")

    raise ConfigurationError(f"unknown policy {policy!r}")


def policy_sigma(policy: TriggerPolicy, cert: ClfCertificate) -> float:
    """The retention fraction governing a run (time-triggered schedules
    inherit the certificate's)."""
    return getattr(policy, "sigma", cert.sigma)


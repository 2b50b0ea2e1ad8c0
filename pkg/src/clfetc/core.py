"""Systems, decrease-rate functions, energy-time maps and CLF certificates.

The central objects are :class:`ControlSystem` (a vector field ``F(x, u)``),
:class:`RateFunction` (the decrease rate ``gamma``), :class:`EnergyTimeMap`
(the antiderivative of ``1/gamma`` and its inverse, which converts between
Lyapunov levels and time) and :class:`ClfCertificate` (a Lyapunov function
``V`` with gradient, rate and feedback map).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import DimensionMismatchError, DomainError

__all__ = [
    "ControlSystem",
    "RateFunction",
    "EnergyTimeMap",
    "ClfCertificate",
    "ClfCheckReport",
    "lyapunov_derivative",
    "gamma_big",
    "gamma_big_inverse",
    "convergence_bound",
    "decay_envelope",
    "verify_clf_pointwise",
    "finite_difference_gradient",
    "finite_difference_jacobian",
]

_QUAD_REL_TOL = 1e-10
_BISECT_REL_TOL = 1e-10


def _as_vector(x, dim: int, what: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (dim,):
        raise DimensionMismatchError(f"{what} must have length {dim}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{what} contains non-finite entries")
    return v


@dataclass(frozen=True)
class ControlSystem:
    """A controlled vector field ``xdot = F(x, u)`` with fixed dimensions.

    ``rhs`` must be deterministic: identical inputs produce bitwise-identical
    outputs.  Validation of dimensions happens in :meth:`f`.
    """

    state_dim: int
    input_dim: int
    rhs: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = ""

    def __post_init__(self):
        if self.state_dim < 1 or self.input_dim < 1:
            raise DomainError("state_dim and input_dim must be positive")

    def f(self, x, u) -> np.ndarray:
        x = _as_vector(x, self.state_dim, "state")
        u = _as_vector(u, self.input_dim, "control")
        out = np.asarray(self.rhs(x, u), dtype=float)
        if out.shape != (self.state_dim,):
            raise DimensionMismatchError(
                f"rhs returned shape {out.shape}, expected ({self.state_dim},)")
        return out


@dataclass(frozen=True)
class RateFunction:
    """Decrease rate ``gamma`` with ``gamma(v) > 0`` for ``v > 0``.

    ``form`` tags the analytic family when one is known:
    ``("linear", ae)`` for ``gamma(v) = ae*v`` and ``("power", ae, a)`` for
    ``gamma(v) = ae*v**a``; ``None`` means a custom rate evaluated only
    pointwise.  ``gamma_prime`` is optional and only needed for rates that
    are not non-decreasing.
    """

    gamma: Callable[[float], float]
    gamma_prime: Optional[Callable[[float], float]] = None
    monotone_nondecreasing: bool = False
    form: Optional[tuple] = None

    @staticmethod
    def linear(ae: float) -> "RateFunction":
        if ae <= 0:
            raise DomainError("linear rate requires ae > 0")
        return RateFunction(
            gamma=lambda v, _a=ae: _a * v,
            gamma_prime=lambda v, _a=ae: _a,
            monotone_nondecreasing=True,
            form=("linear", float(ae)),
        )

    @staticmethod
    def power(ae: float, a: float) -> "RateFunction":
        if ae <= 0 or a <= 0:
            raise DomainError("power rate requires ae > 0 and a > 0")
        return RateFunction(
            gamma=lambda v, _c=ae, _a=a: _c * v ** _a,
            gamma_prime=lambda v, _c=ae, _a=a: _c * _a * v ** (_a - 1.0) if v > 0 else (
                _c if _a == 1.0 else (0.0 if _a > 1.0 else math.inf)),
            monotone_nondecreasing=True,
            form=("power", float(ae), float(a)),
        )

    @staticmethod
    def custom(gamma, gamma_prime=None, monotone_nondecreasing=False) -> "RateFunction":
        return RateFunction(gamma=gamma, gamma_prime=gamma_prime,
                            monotone_nondecreasing=monotone_nondecreasing, form=None)

    def __call__(self, v: float) -> float:
        if v < 0:
            raise DomainError("rate evaluated at negative level")
        g = float(self.gamma(v))
        if v > 0 and g <= 0:
            raise DomainError(f"gamma({v}) = {g} must be positive for v > 0")
        return g

    def validate_samples(self, v_max: float, n: int = 200, fd_rel_tol: float = 1e-5):
        """Sampled consistency audit: positivity on (0, v_max], monotonicity
        when flagged, and gamma_prime against central differences when given.
        Raises on the first failure."""
        vs = np.linspace(v_max / n, v_max, n)
        vals = [self(v) for v in vs]  # positivity enforced per call
        if self.monotone_nondecreasing:
            for (va, a), (vb, b) in zip(zip(vs, vals), zip(vs[1:], vals[1:])):
                if b < a * (1.0 - 1e-12):
                    raise DomainError(
                        f"rate flagged non-decreasing but gamma({vb}) < gamma({va})")
        if self.gamma_prime is not None:
            for v in vs[::10]:
                h = 1e-6 * (1.0 + v)
                if v - h <= 0:
                    continue
                fd = (self.gamma(v + h) - self.gamma(v - h)) / (2.0 * h)
                gp = float(self.gamma_prime(v))
                if abs(gp - fd) > fd_rel_tol * (1.0 + abs(gp)):
                    raise DomainError(
                        f"gamma_prime({v}) = {gp} disagrees with finite "
                        f"differences ({fd})")


def _quad_chunked(f, s: float) -> float:
    """Adaptive quadrature of ``f`` from 1 to ``s``, split into moderate
    chunks so oscillatory integrands keep enough subdivisions per span."""
    sign = 1.0
    lo, hi = 1.0, s
    if s < 1.0:
        sign, lo, hi = -1.0, s, 1.0
    total = 0.0
    x = lo
    for _ in range(100_000):
        if x >= hi:
            break
        nxt = min(hi, x + max(50.0, 0.5 * x))
        val, _err = quad(f, x, nxt, epsabs=0.0, epsrel=_QUAD_REL_TOL, limit=200)
        total += val
        x = nxt
    else:
        raise DomainError("quadrature range too wide to chunk")
    return sign * total


@dataclass(frozen=True)
class EnergyTimeMap:
    """The increasing map ``G(s) = integral_1^s dv/gamma(v)`` and its inverse.

    ``G(v0) - G(v1)`` is the time the closed loop needs to descend from
    Lyapunov level ``v0`` to level ``v1`` when ``Vdot = -gamma(V)`` holds with
    equality.  ``lower_limit``/``upper_limit`` are the limits of ``G`` at
    ``0+`` and ``+inf``; a finite ``lower_limit`` means finite-time
    convergence, and the inverse is clamped to 0 at and below it.
    """

    rate: RateFunction
    lower_limit: float = -math.inf
    upper_limit: float = math.inf

    @staticmethod
    def from_rate(rate: RateFunction, lower_limit=None, upper_limit=None) -> "EnergyTimeMap":
        lo, hi = -math.inf, math.inf
        if rate.form is not None:
            if rate.form[0] == "linear":
                lo, hi = -math.inf, math.inf
            elif rate.form[0] == "power":
                _, ae, a = rate.form
                if a > 1.0:
                    lo, hi = -math.inf, 1.0 / (ae * (a - 1.0))
                elif a < 1.0:
                    lo, hi = 1.0 / (ae * (a - 1.0)), math.inf
        if lower_limit is not None:
            lo = float(lower_limit)
        if upper_limit is not None:
            hi = float(upper_limit)
        return EnergyTimeMap(rate=rate, lower_limit=lo, upper_limit=hi)

    def gamma_big(self, s: float) -> float:
        """Evaluate ``G(s)`` for ``s > 0`` (closed form when available)."""
        if s <= 0:
            raise DomainError(f"energy-time map needs s > 0, got {s}")
        form = self.rate.form
        if form is not None:
            if form[0] == "linear":
                return math.log(s) / form[1]
            if form[0] == "power":
                _, ae, a = form
                if a == 1.0:
                    return math.log(s) / ae
                return (1.0 - s ** (1.0 - a)) / (ae * (a - 1.0))
        if s == 1.0:
            return 0.0
        return _quad_chunked(lambda v: 1.0 / self.rate(v), s)

    def gamma_big_inverse(self, r: float) -> float:
        """Evaluate ``G^-1(r)``; returns 0 for ``r <= lower_limit``."""
        if r >= self.upper_limit:
            raise DomainError(f"argument {r} is at or above the map's upper limit")
        if r <= self.lower_limit:
            return 0.0
        form = self.rate.form
        if form is not None:
            if form[0] == "linear":
                return math.exp(form[1] * r)
            if form[0] == "power":
                _, ae, a = form
                if a == 1.0:
                    return math.exp(ae * r)
                base = 1.0 - ae * (a - 1.0) * r
                return base ** (1.0 / (1.0 - a))
        return self._inverse_by_bisection(r)

    def _inverse_by_bisection(self, r: float) -> float:
        lo = hi = 1.0
        glo = ghi = 0.0
        for _ in range(1100):
            if ghi >= r:
                break
            hi *= 2.0
            if hi > 1e300:
                raise DomainError("argument is above the numerically reachable range")
            ghi = self.gamma_big(hi)
        for _ in range(1100):
            if glo <= r:
                break
            lo *= 0.5
            if lo < 1e-300:
                if math.isfinite(self.lower_limit):
                    return 0.0
                raise DomainError("argument is below the numerically reachable range")
            glo = self.gamma_big(lo)
        # log-space bisection keeps relative accuracy across many decades
        for _ in range(200):
            if hi - lo <= _BISECT_REL_TOL * max(1.0, hi):
                break
            mid = math.sqrt(lo * hi)
            if mid <= lo or mid >= hi:
                break
            if self.gamma_big(mid) < r:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def bound_after(self, v0: float, t: float, sigma: float = 1.0) -> float:
        """Upper bound ``G^-1(G(v0) - sigma*t)`` on the level after time t."""
        if v0 < 0:
            raise DomainError("initial level must be non-negative")
        if t < 0:
            raise DomainError("elapsed time must be non-negative")
        if not 0.0 < sigma <= 1.0:
            raise DomainError("sigma must lie in (0, 1]")
        if v0 == 0.0:
            return 0.0
        arg = self.gamma_big(v0) - sigma * t
        if arg <= self.lower_limit:
            return 0.0
        return self.gamma_big_inverse(arg)


@dataclass(frozen=True)
class ClfCertificate:
    """A Lyapunov function with quantified decrease under a feedback map.

    ``value`` is ``V`` (positive definite), ``gradient`` its row gradient,
    ``rate`` the decrease rate ``gamma``, and ``feedback`` the map ``U(x)``
    that achieves ``V'(x) F(x, U(x)) <= -gamma(V(x))``.  ``sigma`` in (0, 1)
    is the fraction of that decrease the sampled-data controllers must
    retain.  The feedback may be discontinuous; it is never differentiated.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    rate: RateFunction
    feedback: Callable[[np.ndarray], np.ndarray]
    sigma: float = 0.9
    energy_map: EnergyTimeMap = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise DomainError(f"sigma must lie in (0, 1), got {self.sigma}")
        object.__setattr__(self, "energy_map", EnergyTimeMap.from_rate(self.rate))

    def v(self, x) -> float:
        return float(self.value(np.asarray(x, dtype=float)))

    def grad(self, x) -> np.ndarray:
        return np.asarray(self.gradient(np.asarray(x, dtype=float)), dtype=float)

    def u(self, x) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.feedback(np.asarray(x, dtype=float)), dtype=float))


def lyapunov_derivative(cert: ClfCertificate, sys: ControlSystem, x, u) -> float:
    """``W(x, u) = V'(x) F(x, u)``, the derivative of V along the field."""
    x = _as_vector(x, sys.state_dim, "state")
    u = _as_vector(u, sys.input_dim, "control")
    g = cert.grad(x)
    if g.shape != (sys.state_dim,):
        raise DimensionMismatchError(
            f"gradient returned shape {g.shape}, expected ({sys.state_dim},)")
    return float(g @ sys.f(x, u))


def gamma_big(emap: EnergyTimeMap, s: float) -> float:
    return emap.gamma_big(s)


def gamma_big_inverse(emap: EnergyTimeMap, r: float) -> float:
    return emap.gamma_big_inverse(r)


def decay_envelope(emap: EnergyTimeMap, v0: float, t: float, sigma: float = 1.0) -> float:
    return emap.bound_after(v0, t, sigma)


def convergence_bound(cert: ClfCertificate, v0: float, t: float) -> float:
    """Level bound after time ``t`` under the certificate's own ``sigma``."""
    return cert.energy_map.bound_after(v0, t, cert.sigma)


@dataclass(frozen=True)
class ClfCheckReport:
    """Outcome of a pointwise decrease check over a sample set.

    ``margins[i] = gamma(V(x_i)) + W(x_i, U(x_i))`` must be <= 0 (up to a
    relative floating-point tolerance).  Violations are data, not errors.
    """

    n_samples: int
    n_skipped: int
    violations: tuple  # (sample index, state tuple, margin)
    worst_margin: float

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_clf_pointwise(cert: ClfCertificate, sys: ControlSystem,
                         samples: Sequence, rel_tol: float = 1e-9,
                         skip_level: float = 1e-24) -> ClfCheckReport:
    """Check ``W(x, U(x)) <= -gamma(V(x))`` at each sample.

    Samples with ``V(x) <= skip_level`` are skipped (the decrease condition
    is vacuous at the equilibrium).  Results are accumulated in sample order,
    so the report is deterministic regardless of any parallel fan-out.
    """
    if len(samples) == 0:
        raise DomainError("verify_clf_pointwise needs a non-empty sample list")
    violations = []
    worst = -math.inf
    n_skipped = 0
    for i, x in enumerate(samples):
        x = _as_vector(x, sys.state_dim, "sample")
        v = cert.v(x)
        if v <= skip_level:
            n_skipped += 1
            continue
        w = lyapunov_derivative(cert, sys, x, cert.u(x))
        margin = cert.rate(v) + w
        worst = max(worst, margin)
        if margin > rel_tol * (1.0 + abs(w)):
            violations.append((i, tuple(float(c) for c in x), float(margin)))
    return ClfCheckReport(
        n_samples=len(samples),
        n_skipped=n_skipped,
        violations=tuple(violations),
        worst_margin=float(worst),
    )


def finite_difference_gradient(f: Callable[[np.ndarray], float], x: np.ndarray,
                               scale: float = 1e-6) -> np.ndarray:
    """Central differences with per-coordinate step ``scale*(1+|x_i|)``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        h = scale * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        out[i] = (float(f(xp)) - float(f(xm))) / (2.0 * h)
    return out


def finite_difference_jacobian(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                               scale: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian, same stepping rule as the gradient."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x), dtype=float)
    jac = np.empty((f0.size, x.size))
    for j in range(x.size):
        h = scale * (1.0 + abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        jac[:, j] = (np.asarray(f(xp), dtype=float) - np.asarray(f(xm), dtype=float)) / (2.0 * h)
    return jac

"""Built-in example systems, each packaged as a (system, certificate) pair
with its default initial condition and known assumption status.

Four models ship:

* ``acc`` — cruise-control distance keeping via backstepping; linear rate.
* ``homog2d`` — cubic planar system with a quadratic-rate (polynomial
  convergence) certificate.
* ``zeno-polar`` — a planar system whose rotating feedback is exponentially
  stabilizing in continuous time yet defeats every finite sampling rate near
  the origin; the non-degeneracy check must reject it.
* ``relay1d`` — scalar relay with a finite-time square-root rate; also
  rejected by the non-degeneracy check (finite-time designs always are).

Note on ``relay1d``: the source material prints the relay feedback as
``sgn(x)``, which makes V increase; the implementation uses ``-sgn(x)``,
which actually delivers the stated decrease and the stated event schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .core import ClfCertificate, ControlSystem, RateFunction
from .errors import ConfigurationError, DomainError

__all__ = [
    "Model",
    "acc_backstepping",
    "homogeneous_planar",
    "zeno_polar",
    "relay_1d",
    "build_model",
    "MODEL_NAMES",
    "acc_state_from_physical",
    "acc_physical_from_state",
    "zeno_first_event_bound",
]


@dataclass(frozen=True)
class Model:
    """A named system/certificate pair ready for simulation and audits.

    ``known_constants`` may carry closed-form sublevel constants when a
    model has them; the shipped models leave it unset and rely on the
    sampled estimators (even the affine one: its Lipschitz constant depends
    on the operating region's frozen input).
    """

    name: str
    system: ControlSystem
    certificate: ClfCertificate
    params: dict
    default_x0: np.ndarray
    expected_assumption_status: str  # 'satisfies_all' | 'violates_nondegeneracy'
    known_constants: object = None
    extras: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# cruise control via backstepping


def acc_state_from_physical(d, v, a, k, v0, d0) -> np.ndarray:
    """Map gap, speed and acceleration to backstepping coordinates."""
    x1 = d - d0
    x2 = (v0 - v) + k * x1
    x3 = -a + 2.0 * k * (v0 - v) + k * k * x1
    return np.array([x1, x2, x3])


def acc_physical_from_state(x, k, v0, d0):
    """Inverse of :func:`acc_state_from_physical`; returns ``(d, v, a)``."""
    x1, x2, x3 = float(x[0]), float(x[1]), float(x[2])
    d = x1 + d0
    v = v0 - (x2 - k * x1)
    a = 2.0 * k * x2 - k * k * x1 - x3
    return d, v, a


def acc_backstepping(k: float = 1.01, tau_lag: Union[float, Callable] = 0.3,
                     v0: float = 20.0, d0: float = 10.0,
                     sigma: float = 0.9) -> Model:
    """Third-order longitudinal vehicle model in backstepping coordinates.

    The commanded acceleration tracks the actual one through a first-order
    lag ``tau_lag`` (a constant or a function of speed).  The quadratic CLF
    ``V = |x|^2/2`` with the printed feedback gives the linear decrease rate
    ``2(k-1) V``, so ``k > 1`` is required.
    """
    if k <= 1.0:
        raise DomainError(f"backstepping gain k must exceed 1, got {k}")
    if callable(tau_lag):
        tau_of_v = tau_lag
    else:
        if tau_lag <= 0:
            raise DomainError("tau_lag must be positive")
        tau_of_v = lambda _v, _tl=float(tau_lag): _tl  # noqa: E731

    kk = float(k)
    ae = 2.0 * (kk - 1.0)

    def rhs(x, u):
        x1, x2, x3 = x
        v = v0 - (x2 - kk * x1)
        tl = tau_of_v(v)
        z = 2.0 * kk * x2 - kk * kk * x1 - x3  # the (negated) acceleration
        return np.array([
            x2 - kk * x1,
            x3 - kk * x2,
            kk * kk * (x2 - kk * x1) + (1.0 / tl - 2.0 * kk) * z - u[0] / tl,
        ])

    def feedback(x):
        x1, x2, x3 = x
        v = v0 - (x2 - kk * x1)
        tl = tau_of_v(v)
        z = 2.0 * kk * x2 - kk * kk * x1 - x3
        return np.array([tl * kk * kk * (x2 - kk * x1)
                         + (1.0 - 2.0 * kk * tl) * z - tl * (x1 - kk * x3)])

    system = ControlSystem(state_dim=3, input_dim=1, rhs=rhs, name="acc")
    cert = ClfCertificate(
        value=lambda x: 0.5 * float(x @ x),
        gradient=lambda x: np.asarray(x, dtype=float),
        rate=RateFunction.linear(ae),
        feedback=feedback,
        sigma=sigma,
    )
    params = {"k": kk, "tau_lag": tau_lag if not callable(tau_lag) else "callable",
              "v0": v0, "d0": d0, "sigma": sigma}
    x0 = np.array([10.0, 10.0 * kk, 10.0 * kk * kk])  # close a 10 m gap
    return Model(name="acc", system=system, certificate=cert, params=params,
                 default_x0=x0, expected_assumption_status="satisfies_all",
                 extras={
                     "case1_x0": x0.copy(),
                     "case2_x0": np.array([0.0, -2.0, -4.0 * kk]),
                     "state_from_physical": lambda d, v, a: acc_state_from_physical(
                         d, v, a, kk, v0, d0),
                     "physical_from_state": lambda x: acc_physical_from_state(
                         x, kk, v0, d0),
                 })


# ---------------------------------------------------------------------------
# homogeneous planar system


def homogeneous_planar(rate_scale: float = 1.0, sigma: float = 0.9) -> Model:
    """Cubic planar system with quadratic CLF and rate ``rate_scale * v^2``.

    The decrease identity is ``V'(x) F(x, U(x)) = -(x1^4 + x2^4)``, which
    supports the rate ``v^2`` (and a fortiori ``v^2/2``); ``rate_scale``
    selects between the two readings.
    """
    if rate_scale not in (1.0, 0.5):
        raise DomainError("rate_scale must be 1.0 or 0.5")

    def rhs(x, u):
        x1, x2 = x
        return np.array([
            -x1 ** 3 + x1 * x2 ** 2,
            x1 * x2 ** 2 + u[0] - x1 ** 2 * x2,
        ])

    system = ControlSystem(state_dim=2, input_dim=1, rhs=rhs, name="homog2d")
    cert = ClfCertificate(
        value=lambda x: 0.5 * float(x @ x),
        gradient=lambda x: np.asarray(x, dtype=float),
        rate=RateFunction.power(rate_scale, 2.0),
        feedback=lambda x: np.array([-x[1] ** 3 - x[0] * x[1] ** 2]),
        sigma=sigma,
    )
    return Model(name="homog2d", system=system, certificate=cert,
                 params={"rate_scale": rate_scale, "sigma": sigma},
                 default_x0=np.array([0.1, 0.4]),
                 expected_assumption_status="satisfies_all")


# ---------------------------------------------------------------------------
# the rotating-feedback counterexample


def zeno_first_event_bound(r_star: float) -> float:
    """Analytic upper bound on the first inter-update time as a function of
    the initial radius; it vanishes as the radius does."""
    if not 0.0 < r_star < 1.0:
        raise DomainError(f"r_star must lie in (0, 1), got {r_star}")
    s = math.sqrt(1.0 + r_star ** 2)
    return r_star * s * math.atan(r_star) / (r_star * s + 1.0 - r_star ** 2)


def zeno_polar(r_star: float = 0.01, phi_star: float = 0.0,
               sigma: float = 0.9) -> Model:
    """Harmonic rotation with a feedback that cancels it only in continuous
    time.  The feedback speed does not vanish near the origin, so the
    velocity-to-decrease ratio diverges and inter-update times collapse.
    """
    if not 0.0 < r_star < 1.0:
        raise DomainError(f"r_star must lie in (0, 1), got {r_star}")

    def rhs(x, u):
        return np.array([x[1] + u[0], -x[0] + u[1]])

    def feedback(x):
        r = math.hypot(float(x[0]), float(x[1]))
        if r == 0.0:
            return np.zeros(2)
        return np.array([-x[0] + x[1] / r, -x[1] - x[0] / r])

    system = ControlSystem(state_dim=2, input_dim=2, rhs=rhs, name="zeno-polar")
    cert = ClfCertificate(
        value=lambda x: 0.5 * float(x @ x),
        gradient=lambda x: np.asarray(x, dtype=float),
        rate=RateFunction.linear(2.0),
        feedback=feedback,
        sigma=sigma,
    )
    x0 = r_star * np.array([math.cos(phi_star), math.sin(phi_star)])
    return Model(name="zeno-polar", system=system, certificate=cert,
                 params={"r_star": r_star, "phi_star": phi_star, "sigma": sigma},
                 default_x0=x0,
                 expected_assumption_status="violates_nondegeneracy",
                 extras={"first_event_bound": zeno_first_event_bound,
                         "r_star": r_star})


# ---------------------------------------------------------------------------
# scalar relay


def relay_1d(sigma: float = 0.9) -> Model:
    """Integrator with relay feedback ``-sgn(x)`` and square-root rate.

    Finite-time convergence: the event schedule under the guard policy is
    exactly {0, |x0|}, after which the control freezes at 0.  Being a
    finite-time design, it fails non-degeneracy near the origin.
    """

    def rhs(x, u):
        return np.array([u[0]])

    system = ControlSystem(state_dim=1, input_dim=1, rhs=rhs, name="relay1d")
    cert = ClfCertificate(
        value=lambda x: float(x[0] * x[0]),
        gradient=lambda x: np.array([2.0 * x[0]]),
        rate=RateFunction.power(2.0, 0.5),
        feedback=lambda x: np.array([-np.sign(x[0]) + 0.0]),  # avoids -0.0
        sigma=sigma,
    )
    return Model(name="relay1d", system=system, certificate=cert,
                 params={"sigma": sigma}, default_x0=np.array([1.0]),
                 expected_assumption_status="violates_nondegeneracy")


# ---------------------------------------------------------------------------
# registry

_BUILDERS = {
    "acc": acc_backstepping,
    "homog2d": homogeneous_planar,
    "zeno-polar": zeno_polar,
    "relay1d": relay_1d,
}

MODEL_NAMES = tuple(sorted(_BUILDERS))


def build_model(name: str, params: Optional[dict] = None) -> Model:
    """Instantiate a built-in model by name with constructor keyword args."""
    if name not in _BUILDERS:
        raise ConfigurationError(
            f"unknown model {name!r}; available: {', '.join(MODEL_NAMES)}")
    try:
        return _BUILDERS[name](**(params or {}))
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for model {name!r}: {exc}") from exc

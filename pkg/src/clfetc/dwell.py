"""Dwell-time calculus: every closed-form lower bound on the time between
control updates, plus the sampled infimum of those bounds over a sublevel set
and the admissible checking period for periodic event-triggered control.

All bounds are built from the constants of :mod:`clfetc.certificates` and a
retention fraction ``sigma``.  Two families exist: the same-anchor bounds
(``tau_tilde``/``tau_hat``/``tau_select``) used by event-, self- and
time-triggered schemes, and the perturbed-anchor bounds
(``tau_bar``/``tau_breve``/``tau0_select``) used by the periodic scheme,
which additionally depend on a stricter margin ``sigma_tilde`` and a ratio
cap ``k_big``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .certificates import (CertificateConstants, SublevelRegion, estimate_constants,
                           estimate_rho, bound_sublevel_box, sample_in_region)
from .core import ClfCertificate, ControlSystem
from .errors import ConfigurationError, DomainError

__all__ = [
    "DwellInputs",
    "DwellEstimate",
    "TauMinReport",
    "c_bound",
    "tau_tilde",
    "tau_hat",
    "tau_select",
    "tau_bar",
    "tau_breve",
    "tau0_select",
    "tau_min_over_sublevel",
    "admissible_period",
]

GAMMA_MODES = ("nondecreasing", "c1")


@dataclass(frozen=True)
class DwellInputs:
    """Constants plus scheduler parameters feeding the dwell formulas."""

    constants: CertificateConstants
    sigma: float
    sigma_tilde: Optional[float] = None
    k_big: Optional[float] = None
    gamma_mode: str = "nondecreasing"

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise DomainError(f"sigma must lie in (0, 1), got {self.sigma}")
        if self.gamma_mode not in GAMMA_MODES:
            raise DomainError(f"gamma_mode must be one of {GAMMA_MODES}")
        if self.sigma_tilde is not None and not self.sigma < self.sigma_tilde < 1.0:
            raise DomainError(
                f"sigma_tilde must lie in (sigma, 1), got {self.sigma_tilde}")
        if self.k_big is not None and self.k_big <= 1.0:
            raise DomainError(f"k_big must exceed 1, got {self.k_big}")


@dataclass(frozen=True)
class DwellEstimate:
    """A strictly positive dwell bound with the active min-branch recorded.

    Every formula includes the cap ``1/(1+2 kappa)``, so values above it
    indicate a construction bug and are rejected.
    """

    value: float
    formula_branch: str
    inputs_echo: DwellInputs

    def __post_init__(self):
        if not self.value > 0.0:
            raise DomainError(f"dwell estimate must be positive, got {self.value}")
        cap = 1.0 / (1.0 + 2.0 * self.inputs_echo.constants.kappa)
        if self.value > cap * (1.0 + 1e-12):
            raise DomainError(f"dwell estimate {self.value} exceeds the cap {cap}")


def c_bound(kappa: float, t: float) -> float:
    """Growth envelope ``c(t) = sqrt((exp((2k+1)t) - 1) / (2k+1))``.

    Bounds how far a frozen-input solution can drift from its start state,
    in units of the initial speed.  For ``(2k+1)t`` below 1e-8 the
    first-order form ``sqrt(t)`` avoids cancellation.
    """
    if kappa < 0:
        raise DomainError("kappa must be non-negative")
    if t < 0:
        raise DomainError("t must be non-negative")
    z = (2.0 * kappa + 1.0) * t
    if z < 1e-8:
        return math.sqrt(t)
    return math.sqrt(math.expm1(z) / (2.0 * kappa + 1.0))


def _tau_tilde_parts(sigma: float, mu: float, big_m: float, kappa: float):
    cap = 1.0 / (1.0 + 2.0 * kappa)
    mm = mu * big_m
    rate_term = math.inf if mm == 0.0 else (1.0 - sigma) ** 2 / (mm * mm)
    if rate_term <= cap:
        return rate_term, "rate"
    return cap, "cap"


def tau_tilde(inp: DwellInputs) -> DwellEstimate:
    """Same-anchor bound ``min((1-sigma)^2/(mu M)^2, 1/(1+2 kappa))``."""
    c = inp.constants
    value, branch = _tau_tilde_parts(inp.sigma, c.mu, c.big_m, c.kappa)
    return DwellEstimate(value=value, formula_branch=branch, inputs_echo=inp)


def tau_hat(inp: DwellInputs) -> DwellEstimate:
    """Same-anchor bound for differentiable, possibly non-monotone rates.

    Evaluates ``tau_tilde`` at ``sigma0 = (1+sigma)/2`` and caps it by the
    rate-derivative term ``(sigma0-sigma)/(sigma (2-sigma0) rho)``.
    """
    if inp.gamma_mode != "c1":
        raise ConfigurationError(
            "tau_hat applies to the C1 branch; use tau_select for dispatch")
    c = inp.constants
    sigma0 = 0.5 * (1.0 + inp.sigma)
    value, branch = _tau_tilde_parts(sigma0, c.mu, c.big_m, c.kappa)
    if c.rho > 0.0:
        rho_term = (sigma0 - inp.sigma) / (inp.sigma * (2.0 - sigma0) * c.rho)
        if rho_term < value:
            value, branch = rho_term, "rho"
    return DwellEstimate(value=value, formula_branch=branch, inputs_echo=inp)


def tau_select(inp: DwellInputs) -> DwellEstimate:
    """Dispatch on the rate's shape: monotone rates use ``tau_tilde``,
    differentiable non-monotone ones use ``tau_hat``."""
    if inp.gamma_mode == "nondecreasing":
        return tau_tilde(inp)
    return tau_hat(inp)


def _require_periodic_fields(inp: DwellInputs):
    if inp.sigma_tilde is None or inp.k_big is None:
        raise ConfigurationError(
            "periodic dwell bounds need sigma_tilde in (sigma, 1) and k_big > 1")


def _tau_bar_parts(sigma: float, sigma_tilde: float, k_big: float,
                   mu: float, big_m: float, kappa: float):
    cap = 1.0 / (1.0 + 2.0 * kappa)
    mm = k_big * mu * big_m * sigma_tilde
    rate_term = math.inf if mm == 0.0 else (sigma_tilde - sigma) ** 2 / (mm * mm)
    if rate_term <= cap:
        return rate_term, "rate"
    return cap, "cap"


def tau_bar(inp: DwellInputs) -> DwellEstimate:
    """Perturbed-anchor bound
    ``min((st-s)^2/(K^2 mu^2 M^2 st^2), 1/(1+2 kappa))``."""
    _require_periodic_fields(inp)
    c = inp.constants
    value, branch = _tau_bar_parts(inp.sigma, inp.sigma_tilde, inp.k_big,
                                   c.mu, c.big_m, c.kappa)
    return DwellEstimate(value=value, formula_branch=branch, inputs_echo=inp)


def tau_breve(inp: DwellInputs) -> DwellEstimate:
    """Perturbed-anchor bound for the C1 branch: ``tau_bar`` at
    ``sigma1 = (sigma_tilde+sigma)/2`` capped by the rate-derivative term
    ``(sigma1-sigma)/(sigma (2 sigma_tilde - sigma1) rho)``."""
    if inp.gamma_mode != "c1":
        raise ConfigurationError(
            "tau_breve applies to the C1 branch; use tau0_select for dispatch")
    _require_periodic_fields(inp)
    c = inp.constants
    sigma1 = 0.5 * (inp.sigma_tilde + inp.sigma)
    value, branch = _tau_bar_parts(sigma1, inp.sigma_tilde, inp.k_big,
                                   c.mu, c.big_m, c.kappa)
    if c.rho > 0.0:
        rho_term = (sigma1 - inp.sigma) / (
            inp.sigma * (2.0 * inp.sigma_tilde - sigma1) * c.rho)
        if rho_term < value:
            value, branch = rho_term, "rho"
    return DwellEstimate(value=value, formula_branch=branch, inputs_echo=inp)


def tau0_select(inp: DwellInputs) -> DwellEstimate:
    """Perturbed-anchor dispatch: monotone rates use ``tau_bar``,
    differentiable non-monotone ones use ``tau_breve``."""
    if inp.gamma_mode == "nondecreasing":
        return tau_bar(inp)
    return tau_breve(inp)


@dataclass(frozen=True)
class TauMinReport:
    """Sampled infimum of a dwell bound over a sublevel set."""

    value: float
    which: str  # 'tau' or 'tau0'
    n_anchors: int
    per_anchor: bool
    tau_safety: float
    argmin_anchor: tuple
    constants: CertificateConstants

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "which": self.which,
            "n_anchors": self.n_anchors,
            "per_anchor": self.per_anchor,
            "tau_safety": self.tau_safety,
            "argmin_anchor": list(self.argmin_anchor),
            "constants": self.constants.to_json_dict(),
        }


def tau_min_over_sublevel(sys: ControlSystem, cert: ClfCertificate,
                          region: SublevelRegion, sigma: float, *,
                          n_anchors: int = 256, seed: int = 0,
                          which: str = "tau",
                          sigma_tilde: Optional[float] = None,
                          k_big: Optional[float] = None,
                          constants: Optional[CertificateConstants] = None,
                          per_anchor: bool = False,
                          n_estimate: int = 192,
                          sample_safety: float = 1.25,
                          tau_safety: float = 1.1) -> TauMinReport:
    """Sampled estimate of ``inf`` of the dwell bound over the sublevel set.

    The infimum over the (uncountable) set is approximated by the minimum
    over ``n_anchors`` sampled anchors, divided by ``tau_safety``.  By
    default one set of constants estimated over the whole region serves
    every anchor; that is conservative, since suprema over an anchor's own
    (smaller) sublevel set can only be smaller.  ``per_anchor=True`` instead
    estimates constants on each anchor's own region.
    """
    if which not in ("tau", "tau0"):
        raise DomainError("which must be 'tau' or 'tau0'")
    if constants is None:
        constants, _ = estimate_constants(sys, cert, region, n=n_estimate,
                                          seed=seed, safety=sample_safety)
    gamma_mode = "nondecreasing" if cert.rate.monotone_nondecreasing else "c1"
    anchors = [region.anchor]
    if n_anchors > 1 and not region.degenerate:
        anchors.extend(sample_in_region(cert, region, n_anchors - 1, seed=seed))

    best = math.inf
    best_anchor = anchors[0]
    for anchor in anchors:
        if per_anchor and not region.degenerate:
            sub = bound_sublevel_box(cert, anchor, seed=seed)
            consts_a, _ = estimate_constants(sys, cert, sub, n=n_estimate,
                                             seed=seed, safety=sample_safety)
        else:
            level_a = cert.v(anchor)
            rho_a = constants.rho if gamma_mode == "nondecreasing" else \
                estimate_rho(cert, level_a)
            consts_a = replace(constants, rho=rho_a)
        inp = DwellInputs(constants=consts_a, sigma=sigma,
                          sigma_tilde=sigma_tilde, k_big=k_big,
                          gamma_mode=gamma_mode)
        est = tau_select(inp) if which == "tau" else tau0_select(inp)
        if est.value < best:
            best = est.value
            best_anchor = anchor

    return TauMinReport(value=best / tau_safety, which=which,
                        n_anchors=len(anchors), per_anchor=per_anchor,
                        tau_safety=tau_safety,
                        argmin_anchor=tuple(float(c) for c in best_anchor),
                        constants=constants)


def admissible_period(tau0_min_value: float, margin: float = 0.95) -> float:
    """A checking period strictly inside ``(0, inf tau0)``."""
    if tau0_min_value <= 0:
        raise DomainError("tau0 infimum must be positive")
    if not 0.0 < margin < 1.0:
        raise DomainError("margin must lie in (0, 1)")
    return margin * tau0_min_value

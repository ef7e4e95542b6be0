"""Significance of binary-pixel counts under a Bernoulli naive model.

The significance of observing ``kappa`` true pixels among ``nu`` is
``S = -ln(NFA)`` where ``NFA = eta2 * P[Binomial(nu, p) >= kappa]``.
Two evaluations are provided: the exact binomial upper tail (in log space,
safe up to nu ~ 1e6) and the Hoeffding/Kullback-Leibler approximation used
inside detection loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp


class DensityBelowModelError(ValueError):
    """Observed density kappa/nu is below the naive model probability.

    The Hoeffding form is a one-sided bound, only valid for densities at or
    above p. Detection loops must filter kappa/nu > p before calling.
    """


@dataclass(frozen=True)
class NaiveModel:
    """Bernoulli naive model: pixel true-probability and log test budget."""

    p: float
    ln_eta2: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if not math.isfinite(self.ln_eta2) or self.ln_eta2 < 0.0:
            raise ValueError(f"ln_eta2 must be finite and >= 0, got {self.ln_eta2}")


@dataclass(frozen=True)
class SignificanceResult:
    kappa: int
    nu: int
    s: float

    def __post_init__(self):
        if not 0 <= self.kappa <= self.nu:
            raise ValueError(f"need 0 <= kappa <= nu, got ({self.kappa}, {self.nu})")


def _check_counts(kappa, nu, p):
    if kappa < 0 or nu < 0 or kappa > nu:
        raise ValueError(f"need 0 <= kappa <= nu, got kappa={kappa}, nu={nu}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")


def binomial_tail_log(kappa: int, nu: int, p: float) -> float:
    """ln of the upper binomial tail P[X >= kappa], X ~ Binomial(nu, p).

    Evaluated as a log-sum-exp over log binomial terms so that large nu
    (up to ~1e6) neither overflows nor underflows. Always <= 0.
    """
    _check_counts(kappa, nu, p)
    if kappa == 0:
        return 0.0
    if p == 0.0:
        return -math.inf  # kappa >= 1 is impossible
    if p == 1.0:
        return 0.0  # all nu pixels are true with certainty
    i = np.arange(kappa, nu + 1, dtype=np.float64)
    log_terms = (
        gammaln(nu + 1.0)
        - gammaln(i + 1.0)
        - gammaln(nu - i + 1.0)
        + i * math.log(p)
        + (nu - i) * math.log1p(-p)
    )
    return min(float(logsumexp(log_terms)), 0.0)


def significance_exact(kappa: int, nu: int, model: NaiveModel) -> SignificanceResult:
    """S = -ln(NFA) with the exact binomial tail of the naive model."""
    s = -(model.ln_eta2 + binomial_tail_log(kappa, nu, model.p))
    return SignificanceResult(kappa=kappa, nu=nu, s=s)


def hoeffding_significance(kappa, nu, p, ln_eta2=0.0):
    """Hoeffding-approximated significance, vectorized over kappa/nu.

    s = nu * KL(kappa/nu || p) - ln_eta2, with the 0*ln(0) convention at
    density 1. Caller is responsible for restricting to kappa/nu >= p;
    values computed below p are not meaningful as significances.
    """
    kappa = np.asarray(kappa, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    q = kappa / nu
    with np.errstate(divide="ignore", invalid="ignore"):
        term1 = np.where(q > 0.0, kappa * np.log(q / p), 0.0)
        term2 = np.where(q < 1.0, (nu - kappa) * np.log((1.0 - q) / (1.0 - p)), 0.0)
    return term1 + term2 - ln_eta2


def significance_hoeffding(kappa: int, nu: int, model: NaiveModel) -> SignificanceResult:
    """Hoeffding approximation of the significance (diagnostic scalar form).

    Requires kappa/nu >= p (raises DensityBelowModelError below); the
    boundary kappa/nu == p is accepted here and yields the -ln_eta2 floor.
    """
    _check_counts(kappa, nu, model.p)
    if not 0.0 < model.p < 1.0:
        raise ValueError(f"Hoeffding form needs 0 < p < 1, got {model.p}")
    if nu == 0 or kappa / nu < model.p:
        raise DensityBelowModelError(
            f"density {kappa}/{nu} is below model p={model.p}"
        )
    s = float(hoeffding_significance(kappa, nu, model.p, model.ln_eta2))
    return SignificanceResult(kappa=kappa, nu=nu, s=s)

"""Log-space evaluation of the non-central chi-squared density.

The density is evaluated through its Poisson mixture form

    f(x) = sum_j  Pois(j; lam/2) * chi2_{k+2j}(x)

summed as a log-sum-exp over a window of indices centred on the dominant
term.  Nothing here calls a Bessel routine, so lam of order 1e4 and beyond
neither overflows nor underflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.special import gammaln

__all__ = [
    "DomainError",
    "DivergentDensityError",
    "Params",
    "log_pdf",
    "pdf",
    "dlogpdf_dx",
    "log_pdf_ratio",
    "log_pdf_mixture_oracle",
    "oracle_terms",
]

# Terms smaller than this fraction of the sum are dropped.
SERIES_RTOL = 1e-17
_LOG_SERIES_RTOL = math.log(SERIES_RTOL)
_LN2 = math.log(2.0)


class DomainError(ValueError):
    """Raised for parameters or evaluation points outside the support."""


class DivergentDensityError(DomainError):
    """The density is unbounded at x = 0 (k < 2)."""


@dataclass(frozen=True)
class Params:
    """Degrees of freedom ``k`` and non-centrality ``lam``."""

    k: float
    lam: float

    def __post_init__(self):
        k, lam = float(self.k), float(self.lam)
        if not math.isfinite(k) or k <= 0.0:
            raise DomainError(f"degrees of freedom must be finite and > 0, got {self.k!r}")
        if not math.isfinite(lam) or lam < 0.0:
            raise DomainError(f"non-centrality must be finite and >= 0, got {self.lam!r}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "lam", lam)


def _check_x(x, *, positive=False):
    x = float(x)
    if not math.isfinite(x) or x < 0.0 or (positive and x == 0.0):
        bound = "> 0" if positive else ">= 0"
        raise DomainError(f"evaluation point must be finite and {bound}, got {x!r}")
    return x


def _peak_index(p, x):
    # Consecutive terms have ratio (lam*x/4) / ((j+1)(j+k/2)); the largest
    # term sits where that ratio crosses one.
    h = 0.5 * p.k
    b = 1.0 + h
    disc = b * b - 4.0 * (h - 0.25 * p.lam * x)
    if disc <= 0.0:
        return 0
    return max(0, int(math.floor(0.5 * (-b + math.sqrt(disc)))))


def _log_prefactor(p, x):
    """Index-independent part of every log mixture term."""
    return -0.5 * (p.lam + x) + (0.5 * p.k - 1.0) * math.log(x) - 0.5 * p.k * _LN2


def _log_terms(p, x, j):
    """Index-dependent part of the log mixture terms at ``j`` (x, lam > 0).

    The full log term is this plus :func:`_log_prefactor`; keeping the two
    apart stops the ``-x/2`` piece from swamping the differences between
    terms when x is huge.
    """
    z = 0.25 * p.lam * x
    # z underflows only for absurdly small lam*x; then just the j = 0 term survives.
    power = j * math.log(z) if z > 0.0 else np.where(j == 0.0, 0.0, -np.inf)
    return power - gammaln(j + 1.0) - gammaln(0.5 * p.k + j)


def _window(p, x):
    """Index window holding every term above SERIES_RTOL of the sum.

    Returns ``(j, log_terms)``.  The window is centred on the peak and widened
    until both edge terms are negligible (or the lower edge hits j = 0).
    """
    j0 = _peak_index(p, x)
    half = int(10.0 * math.sqrt(j0 + 1.0)) + 20
    while True:
        lo = max(0, j0 - half)
        j = np.arange(lo, j0 + half + 1, dtype=float)
        t = _log_terms(p, x, j)
        top = t.max()
        edge_ok = t[-1] - top < _LOG_SERIES_RTOL + _LN2 and (
            lo == 0 or t[0] - top < _LOG_SERIES_RTOL + _LN2
        )
        if edge_ok:
            return j, t
        half *= 2


def _log_central(k, x):
    return (0.5 * k - 1.0) * math.log(x) - 0.5 * x - 0.5 * k * _LN2 - math.lgamma(0.5 * k)


def _log_at_zero(p):
    if p.k < 2.0:
        raise DivergentDensityError(
            f"density diverges at x=0 for k={p.k} < 2"
        )
    if p.k > 2.0:
        return -math.inf
    return -0.5 * p.lam - _LN2


def log_pdf(p: Params, x: float) -> float:
    """Natural log of the density at ``x``.

    Returns ``-inf`` where the density is zero (x = 0 with k > 2).  Raises
    :class:`DivergentDensityError` at x = 0 for k < 2.
    """
    x = _check_x(x)
    if x == 0.0:
        return _log_at_zero(p)
    if p.lam == 0.0:
        return _log_central(p.k, x)
    _, t = _window(p, x)
    top = t.max()
    return float(_log_prefactor(p, x) + top + math.log(np.exp(t - top).sum()))


def pdf(p: Params, x: float) -> float:
    """Density at ``x``; thin wrapper around :func:`log_pdf`."""
    lf = log_pdf(p, x)
    return 0.0 if lf == -math.inf else math.exp(lf)


def _mixture_weights(p, x):
    j, t = _window(p, x)
    w = np.exp(t - t.max())
    return j, w / w.sum()


def dlogpdf_dx(p: Params, x: float) -> float:
    """Analytic derivative of the log-density with respect to ``x``.

    Each mixture term is ``c_j x^(k/2+j-1) exp(-x/2)``, so the derivative is
    the mixture-weighted mean of ``(k/2+j-1)/x`` minus one half.
    """
    x = _check_x(x, positive=True)
    if p.lam == 0.0:
        return (0.5 * p.k - 1.0) / x - 0.5
    j, w = _mixture_weights(p, x)
    return float(np.dot(w, 0.5 * p.k - 1.0 + j)) / x - 0.5


def log_pdf_ratio(p: Params, x: float, y: float) -> float:
    """``log_pdf(p, y) - log_pdf(p, x)`` for x, y > 0.

    For nearby points the difference is formed term by term from the mixture
    weights at ``x``, which keeps its absolute error at a few ulps of
    ``|y - x|`` instead of a few ulps of ``|log_pdf|``.  Comparisons close to
    the mode depend on this.
    """
    x = _check_x(x, positive=True)
    y = _check_x(y, positive=True)
    if x == y:
        return 0.0
    h = y - x
    log_step = math.log1p(h / x)
    if p.lam == 0.0:
        return (0.5 * p.k - 1.0) * log_step - 0.5 * h

    jx, _ = _window(p, x)
    jy, _ = _window(p, y)
    lo = min(jx[0], jy[0])
    hi = max(jx[-1], jy[-1])
    j = np.arange(lo, hi + 1.0)
    delta = (0.5 * p.k - 1.0 + j) * log_step - 0.5 * h
    if np.abs(delta).max() > 1.0:
        return log_pdf(p, y) - log_pdf(p, x)
    t = _log_terms(p, x, j)
    w = np.exp(t - t.max())
    w /= w.sum()
    return float(math.log1p(np.dot(w, np.expm1(delta))))


def oracle_terms(lam: float, x: float = 0.0) -> int:
    """Series length that makes the mixture oracle's truncation negligible."""
    return int(0.5 * lam + 10.0 * math.sqrt(0.5 * lam + 1.0) + 20.0 + math.sqrt(lam * x))


def log_pdf_mixture_oracle(p: Params, x: float, terms: int, dps: int = 40) -> float:
    """Reference log-density: the first ``terms`` mixture terms, summed in
    ``dps``-digit arithmetic from j = 0.  Slow; meant for tests.

    Truncation is the caller's responsibility; :func:`oracle_terms` gives a
    safe length.
    """
    x = _check_x(x)
    if terms < 1:
        raise DomainError("terms must be a positive integer")
    if x == 0.0:
        return _log_at_zero(p)
    mp = mpmath.mp
    with mpmath.workdps(dps):
        lam = mp.mpf(p.lam)
        half_k = mp.mpf(p.k) / 2
        xm = mp.mpf(x)
        pois = mp.exp(-lam / 2)
        total = mp.mpf(0)
        for j in range(terms):
            a = half_k + j
            total += pois * xm ** (a - 1) * mp.exp(-xm / 2) / (2**a * mp.gamma(a))
            pois *= lam / 2 / (j + 1)
        return float(mp.log(total))

"""Exact mode search: edge-case dispatch, region doubling, golden section,
and residual certificates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .density import DomainError, Params, dlogpdf_dx, log_pdf, log_pdf_ratio
from .mode_approx import (
    GUESS_FLOOR,
    ModeTag,
    approx_mode,
    choose_initial_guess,
    classify_mode,
    naive_guess,
)

__all__ = [
    "DEFAULT_XTOL",
    "DEFAULT_RTOL",
    "DEFAULT_MAX_DOUBLINGS",
    "Strategy",
    "ResultTag",
    "BracketTrace",
    "ModeResult",
    "ModeSearchError",
    "FailedToBracket",
    "CertificationFailed",
    "bracket_expand",
    "maximize_unimodal",
    "initial_guess",
    "exact_mode",
    "master_residual",
    "ode_residual",
]

DEFAULT_XTOL = 1e-10
DEFAULT_RTOL = 1e-6
DEFAULT_MAX_DOUBLINGS = 60
MAX_GOLDEN_ITER = 200
SIGN_SCAN_POINTS = 64

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Strategy(enum.Enum):
    NAIVE = "naive"
    CORRECTED = "corrected"
    AUTO = "auto"


class ResultTag(enum.Enum):
    INTERIOR = "INTERIOR"
    AT_ZERO = "AT_ZERO"
    UNBOUNDED_AT_ZERO = "UNBOUNDED_AT_ZERO"


@dataclass(frozen=True)
class BracketTrace:
    """Record of one region-doubling search.

    ``final_bracket`` is ``(x0 / 2**doublings, x0 * 2**doublings)`` except
    when ``anchored_at_zero`` is set; then it is ``(0, x0)`` and no doubling
    took place (see :func:`exact_mode`).
    """

    initial_guess: float
    doublings: int
    density_evaluations: int
    final_bracket: Tuple[float, float]
    anchored_at_zero: bool = False


@dataclass(frozen=True)
class ModeResult:
    tag: ResultTag
    location: Optional[float] = None
    residual: Optional[float] = None
    trace: Optional[BracketTrace] = None


class ModeSearchError(RuntimeError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class FailedToBracket(ModeSearchError):
    pass


class CertificationFailed(ModeSearchError):
    pass


def bracket_expand(p: Params, x0: float, max_doublings: int = DEFAULT_MAX_DOUBLINGS) -> BracketTrace:
    """Check regions ``[x0/2**i, x0*2**i]`` for i = 1, 2, ... and stop at the
    first whose endpoint log-densities are both strictly below the one at x0.
    """
    x0 = float(x0)
    if not (math.isfinite(x0) and x0 > 0.0):
        raise DomainError(f"initial guess must be finite and > 0, got {x0!r}")
    if max_doublings < 1:
        raise DomainError("max_doublings must be >= 1")
    f0 = log_pdf(p, x0)
    if f0 == -math.inf:
        raise DomainError(f"density vanishes at the initial guess {x0!r}")
    evals = 1
    lo = hi = x0
    for i in range(1, max_doublings + 1):
        lo = math.ldexp(x0, -i)
        hi = math.ldexp(x0, i)
        flo = log_pdf(p, lo)
        fhi = log_pdf(p, hi)
        evals += 2
        if flo < f0 and fhi < f0:
            return BracketTrace(x0, i, evals, (lo, hi))
    raise FailedToBracket(
        f"no bracket around x0={x0!r} after {max_doublings} doublings (k={p.k}, lam={p.lam})",
        trace=BracketTrace(x0, max_doublings, evals, (lo, hi)),
    )


def maximize_unimodal(
    p: Params, lo: float, hi: float, xtol: float = DEFAULT_XTOL, max_iter: int = MAX_GOLDEN_ITER
) -> float:
    """Golden-section search for the maximum of the log-density on [lo, hi].

    Points are compared through :func:`log_pdf_ratio`, which resolves the
    nearly flat top far below ``sqrt(eps)``.  Stops once the returned midpoint
    is within ``xtol * max(1, x)`` of the maximiser.
    """
    lo, hi = float(lo), float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi) and 0.0 <= lo < hi):
        raise DomainError(f"malformed bracket [{lo!r}, {hi!r}]")
    if not xtol > 0.0:
        raise DomainError("xtol must be > 0")
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    for _ in range(max_iter):
        if b - a <= 2.0 * xtol * max(1.0, a):
            break
        if log_pdf_ratio(p, c, d) > 0.0:
            a, c = c, d
            d = a + _INV_PHI * (b - a)
        else:
            b, d = d, c
            c = b - _INV_PHI * (b - a)
    return 0.5 * (a + b)


def master_residual(p: Params, x: float) -> float:
    """Stationarity residual ``sqrt(lam x) I'_nu / I_nu - x + (k-2)/2``.

    Evaluated as ``2 x d(log f)/dx``; zero exactly at an interior mode.
    """
    return 2.0 * x * dlogpdf_dx(p, x)


def ode_residual(p: Params, x: float, xprime: float) -> float:
    """Residual of ``lam x' (x - k - lam + 4) + x (x - k - lam + 2) = 0``,
    the equation the mode obeys as a function of lam at fixed k."""
    if p.lam <= 0.0:
        raise DomainError("mode ODE residual needs lam > 0")
    k, lam = p.k, p.lam
    return lam * xprime * (x - k - lam + 4.0) + x * (x - k - lam + 2.0)


def initial_guess(p: Params, strategy: Strategy) -> float:
    strategy = Strategy(strategy)
    if strategy is Strategy.NAIVE:
        return naive_guess(p)
    if strategy is Strategy.CORRECTED:
        return max(approx_mode(p).value, GUESS_FLOOR)
    return choose_initial_guess(p)


def _certify_boundary(p):
    # Every sampled slope must be non-positive for the maximum to sit at 0.
    xs = np.geomspace(1e-8 * (p.lam + 50.0), p.lam + 50.0, SIGN_SCAN_POINTS)
    worst = max(dlogpdf_dx(p, x) for x in xs)
    if worst > 0.0:
        raise CertificationFailed(
            f"density increases somewhere on (0, {p.lam + 50.0}] for k=2, lam={p.lam}; "
            f"max slope {worst!r}"
        )


def exact_mode(
    p: Params,
    strategy: Strategy = Strategy.AUTO,
    xtol: float = DEFAULT_XTOL,
    rtol: float = DEFAULT_RTOL,
    max_doublings: int = DEFAULT_MAX_DOUBLINGS,
) -> ModeResult:
    """Locate the mode of the density.

    k < 2 has no mode (the density is unbounded at 0).  k = 2 with lam <= 2
    has its maximum at x = 0, backed by a slope sign scan.  Otherwise the
    search brackets from the strategy's guess, maximises with golden section
    and certifies the result against the stationarity residual.

    For k = 2 the density at 0 is finite, so a guess whose density does not
    exceed it can never be bracketed from below.  In that case the mode lies
    in (0, x0) and the search runs on that interval directly.
    """
    cls = classify_mode(p)
    if cls.tag is ModeTag.UNBOUNDED_AT_ZERO:
        return ModeResult(ResultTag.UNBOUNDED_AT_ZERO)
    if cls.tag is ModeTag.BOUNDARY_CANDIDATE and p.lam <= cls.boundary_lambda:
        _certify_boundary(p)
        return ModeResult(ResultTag.AT_ZERO)

    if p.lam == 0.0:
        loc = p.k - 2.0
        trace = BracketTrace(loc, 0, 0, (loc, loc))
        return ModeResult(ResultTag.INTERIOR, loc, master_residual(p, loc), trace)

    x0 = initial_guess(p, strategy)
    if cls.tag is ModeTag.BOUNDARY_CANDIDATE and log_pdf(p, x0) <= log_pdf(p, 0.0):
        trace = BracketTrace(x0, 0, 2, (0.0, x0), anchored_at_zero=True)
    else:
        trace = bracket_expand(p, x0, max_doublings)

    loc = maximize_unimodal(p, *trace.final_bracket, xtol=xtol)
    residual = master_residual(p, loc)
    if not abs(residual) <= rtol:
        raise CertificationFailed(
            f"residual {residual!r} at x={loc!r} exceeds {rtol} (k={p.k}, lam={p.lam})",
            trace=trace,
        )
    return ModeResult(ResultTag.INTERIOR, loc, residual, trace)

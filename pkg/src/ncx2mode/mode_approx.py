"""Closed-form mode approximation and the initial-guess policy built on it.

For large non-centrality the mode grows linearly,

    x_mode ~ lam + k - 3 + (k - 3) / (2 lam) + O(k^2 / lam^2),

which is accurate once the asymptotic scale ``t = k / lam`` is small.  The
same scale decides when the corrected guess replaces the historical
``x0 = k + 1`` in a bracketing search.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .density import DomainError, Params

__all__ = [
    "DEFAULT_SCALE_THRESHOLD",
    "GUESS_FLOOR",
    "ApproxMode",
    "ModeTag",
    "ModeClass",
    "approx_mode",
    "asymptotic_scale",
    "classify_mode",
    "undershoot_lambda_threshold",
    "alpha_threshold",
    "naive_guess",
    "choose_initial_guess",
]

DEFAULT_SCALE_THRESHOLD = 0.25
GUESS_FLOOR = 1e-8


@dataclass(frozen=True)
class ApproxMode:
    value: float
    scale_t: float
    applicable: bool
    error_order: float


class ModeTag(enum.Enum):
    UNBOUNDED_AT_ZERO = "UNBOUNDED_AT_ZERO"
    BOUNDARY_CANDIDATE = "BOUNDARY_CANDIDATE"
    INTERIOR = "INTERIOR"


@dataclass(frozen=True)
class ModeClass:
    tag: ModeTag
    boundary_lambda: Optional[float] = None


def asymptotic_scale(p: Params) -> float:
    """t = k / lam."""
    if p.lam <= 0.0:
        raise DomainError("asymptotic scale needs lam > 0")
    return p.k / p.lam


def approx_mode(p: Params, scale_threshold: float = DEFAULT_SCALE_THRESHOLD) -> ApproxMode:
    if p.lam <= 0.0:
        raise DomainError("mode approximation is singular at lam = 0")
    k, lam = p.k, p.lam
    t = k / lam
    shift = k - 3.0
    value = lam + shift + shift / (2.0 * lam)
    return ApproxMode(
        value=value,
        scale_t=t,
        applicable=k > 2.0 and t <= scale_threshold,
        error_order=t * t,
    )


def classify_mode(p: Params) -> ModeClass:
    if p.k < 2.0:
        return ModeClass(ModeTag.UNBOUNDED_AT_ZERO)
    if p.k == 2.0:
        return ModeClass(ModeTag.BOUNDARY_CANDIDATE, boundary_lambda=2.0)
    return ModeClass(ModeTag.INTERIOR)


def _check_k(k):
    k = float(k)
    if not k > 0.0:
        raise DomainError(f"degrees of freedom must be > 0, got {k!r}")
    return k


def undershoot_lambda_threshold(k: float) -> float:
    """Non-centrality above which ``x0 = k + 1`` needs a second doubling.

    Solves ``lam + k - 3 > 2 (k + 1)`` for lam.
    """
    return _check_k(k) + 5.0


def alpha_threshold(k: float) -> float:
    """Same threshold expressed as ``lam / k``."""
    return 5.0 / _check_k(k) + 1.0


def naive_guess(p: Params) -> float:
    return p.k + 1.0


def choose_initial_guess(p: Params, scale_threshold: float = DEFAULT_SCALE_THRESHOLD) -> float:
    """Starting point for the bracketing search.

    Uses the closed-form approximation once ``k / lam <= scale_threshold``,
    otherwise falls back to ``k + 1``.
    """
    cls = classify_mode(p)
    if cls.tag is ModeTag.UNBOUNDED_AT_ZERO:
        raise DomainError(f"no mode to search for: density unbounded at 0 for k={p.k}")
    if cls.tag is ModeTag.BOUNDARY_CANDIDATE and p.lam <= cls.boundary_lambda:
        raise DomainError(f"no interior mode for k=2, lam={p.lam} <= 2")
    if p.lam > 0.0 and p.k / p.lam <= scale_threshold:
        return max(approx_mode(p, scale_threshold).value, GUESS_FLOOR)
    return naive_guess(p)

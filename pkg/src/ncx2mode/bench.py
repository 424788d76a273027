"""Strategy comparison sweeps.

Bracket doublings and density evaluations are the primary, hardware
independent metrics.  Optional wall-clock timing repeats each full
``exact_mode`` call ``reps`` times at parameters jittered by Gaussian noise
drawn from numpy's PCG64 generator seeded with ``SweepSpec.seed``.
"""

from __future__ import annotations

import enum
import statistics
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .density import Params
from .mode_approx import ModeTag, classify_mode
from .mode_exact import ModeSearchError, Strategy, exact_mode

__all__ = [
    "SweepMode",
    "SweepSpec",
    "BenchRecord",
    "DEFAULT_LAMBDA_SUITES",
    "DEFAULT_SCALE_SUITES",
    "doubling_gap",
    "grid",
    "run_sweep",
    "summarize",
]

Range = Tuple[float, float]


class SweepMode(enum.Enum):
    LAMBDA_SWEEP = "lambda"
    K_SWEEP = "k"


@dataclass(frozen=True)
class SweepSpec:
    mode: SweepMode
    k: Union[float, Range]
    lam: Optional[Range] = None
    points: int = 25
    scale_t: Optional[float] = None
    strategies: Tuple[Strategy, ...] = (Strategy.NAIVE, Strategy.CORRECTED)
    reps: int = 100
    jitter_sigma: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", SweepMode(self.mode))
        object.__setattr__(self, "strategies", tuple(Strategy(s) for s in self.strategies))
        if self.mode is SweepMode.LAMBDA_SWEEP:
            if isinstance(self.k, tuple) or self.lam is None:
                raise ValueError("lambda sweep needs a fixed k and a lambda range")
        else:
            if not isinstance(self.k, tuple) or self.scale_t is None:
                raise ValueError("k sweep needs a k range and scale_t")
            if not self.scale_t > 0.0:
                raise ValueError("scale_t must be > 0")
        if self.points < 2:
            raise ValueError("points must be >= 2")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not self.jitter_sigma >= 0.0:
            raise ValueError("jitter_sigma must be >= 0")
        if not self.strategies:
            raise ValueError("at least one strategy is required")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class BenchRecord:
    k: float
    lam: float
    strategy: Strategy
    doublings: int
    density_evaluations: int
    wall_ns_mean: Optional[float] = None
    wall_ns_std: Optional[float] = None
    failed: bool = False


# Sweeps mirroring the run-time-vs-lambda and run-time-vs-k comparisons.
DEFAULT_LAMBDA_SUITES = {
    2: (4.0, 100.0),
    15: (15.0, 600.0),
    50: (50.0, 2000.0),
}
DEFAULT_SCALE_SUITES = {
    0.25: (3.0, 50.0),
    0.15: (3.0, 50.0),
    0.05: (3.0, 50.0),
}


def grid(spec: SweepSpec) -> List[Tuple[float, float]]:
    """(k, lam) points of a sweep, evenly spaced, in sweep order."""
    if spec.mode is SweepMode.LAMBDA_SWEEP:
        lams = np.linspace(spec.lam[0], spec.lam[1], spec.points)
        return [(float(spec.k), float(lam)) for lam in lams]
    ks = np.linspace(spec.k[0], spec.k[1], spec.points)
    return [(float(k), float(k) / spec.scale_t) for k in ks]


def summarize(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and population standard deviation."""
    if len(values) == 0:
        raise ValueError("summarize needs at least one value")
    return statistics.fmean(values), statistics.pstdev(values)


def _searchable(k, lam):
    tag = classify_mode(Params(k, lam)).tag
    return tag is ModeTag.INTERIOR or (tag is ModeTag.BOUNDARY_CANDIDATE and lam > 2.0)


def _jittered(rng, k, lam, sigma):
    dk, dlam = rng.normal(0.0, sigma, size=2)
    # Keep k = 2 on the searchable side; a draw below 2 has no mode at all.
    if k == 2.0:
        dk = abs(dk)
    return Params(k + dk, max(lam + dlam, 0.0))


def _time_reps(rng, k, lam, strategy, spec):
    samples = []
    failed = False
    for _ in range(spec.reps):
        p = _jittered(rng, k, lam, spec.jitter_sigma)
        start = time.perf_counter_ns()
        try:
            exact_mode(p, strategy)
        except ModeSearchError:
            failed = True
        samples.append(time.perf_counter_ns() - start)
    return summarize(samples), failed


def run_sweep(spec: SweepSpec, timing: bool = False) -> List[BenchRecord]:
    """One record per grid point and strategy, in grid order.

    Counts come from the unjittered point.  A search failure marks the record
    ``failed`` with the counts reached before the failure; the sweep carries on.
    """
    points = grid(spec)
    for k, lam in points:
        if not _searchable(k, lam):
            raise ValueError(f"no interior mode to search for at k={k}, lam={lam}")

    rng = np.random.Generator(np.random.PCG64(spec.seed)) if timing else None
    records = []
    for k, lam in points:
        p = Params(k, lam)
        for strategy in spec.strategies:
            failed = False
            try:
                trace = exact_mode(p, strategy).trace
            except ModeSearchError as exc:
                failed = True
                trace = exc.trace
            doublings = trace.doublings if trace else 0
            evals = trace.density_evaluations if trace else 0
            mean = std = None
            if timing:
                (mean, std), timing_failed = _time_reps(rng, k, lam, strategy, spec)
                failed = failed or timing_failed
            records.append(BenchRecord(k, lam, strategy, doublings, evals, mean, std, failed))
    return records


def doubling_gap(records: Sequence[BenchRecord]) -> List[Tuple[float, float, int]]:
    """``(k, lam, naive - corrected doublings)`` per point that has both."""
    by_point = {}
    for r in records:
        by_point.setdefault((r.k, r.lam), {})[r.strategy] = r
    gaps = []
    for (k, lam), rs in by_point.items():
        if Strategy.NAIVE in rs and Strategy.CORRECTED in rs:
            gaps.append((k, lam, rs[Strategy.NAIVE].doublings - rs[Strategy.CORRECTED].doublings))
    return gaps


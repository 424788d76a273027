"""Mode of the non-central chi-squared distribution: overflow-safe density,
closed-form approximation, certified exact search and strategy benchmarks."""

from .density import (
    DivergentDensityError,
    DomainError,
    Params,
    dlogpdf_dx,
    log_pdf,
    log_pdf_mixture_oracle,
    log_pdf_ratio,
    pdf,
)
from .mode_approx import (
    ApproxMode,
    ModeClass,
    ModeTag,
    alpha_threshold,
    approx_mode,
    asymptotic_scale,
    choose_initial_guess,
    classify_mode,
    undershoot_lambda_threshold,
)
from .mode_exact import (
    BracketTrace,
    CertificationFailed,
    FailedToBracket,
    ModeResult,
    ModeSearchError,
    ResultTag,
    Strategy,
    bracket_expand,
    exact_mode,
    master_residual,
    maximize_unimodal,
    ode_residual,
)
from .bench import BenchRecord, SweepMode, SweepSpec, run_sweep, summarize

__version__ = "0.1.0"

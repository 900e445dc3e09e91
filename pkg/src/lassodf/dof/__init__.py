"""Degrees-of-freedom estimators and df-versus-gamma diagnostics."""
from ..weights import weight_and_derivative
from .blocks import (BlockDiagonal, build_phi, build_phi_inverse_norm,
                     build_pi)
from .diagnostics import (INDEFINITE, PSD, DiagnosticsReport, GroupSpectrum,
                          classify_definiteness, df_slope, diag_dbeta_dgamma,
                          diag_dpi_dgamma, diagnostics, monotonicity_sufficient,
                          rank_two_coefficients, spectrum_rank_two)
from .estimators import (GENERAL, ORTHONORMAL, adaptive_lower_bound_premise,
                         agl_closed_form_ortho,
                         agl_closed_form_shared_denominator, check_bounds,
                         df_adaptive_group_lasso, df_adaptive_lasso,
                         df_for_fit, df_group_lasso,
                         df_group_lasso_closed_ortho, df_lasso)
from .slopes import IntervalSlope, slopes_along_path, slopes_diminishing

__all__ = [
    "weight_and_derivative", "BlockDiagonal", "build_phi",
    "build_phi_inverse_norm", "build_pi", "INDEFINITE", "PSD",
    "DiagnosticsReport", "GroupSpectrum", "classify_definiteness", "df_slope",
    "diag_dbeta_dgamma", "diag_dpi_dgamma", "diagnostics",
    "monotonicity_sufficient", "rank_two_coefficients", "spectrum_rank_two",
    "GENERAL", "ORTHONORMAL", "adaptive_lower_bound_premise",
    "agl_closed_form_ortho", "agl_closed_form_shared_denominator",
    "check_bounds", "df_adaptive_group_lasso", "df_adaptive_lasso",
    "df_for_fit", "df_group_lasso", "df_group_lasso_closed_ortho", "df_lasso",
    "IntervalSlope", "slopes_along_path", "slopes_diminishing",
]

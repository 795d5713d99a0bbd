"""Numerics for generalized Toeplitz and little Hankel operators on the
Bergman space of the unit disc: dyadic box decompositions, averaging
functionals, oscillation-aware quadrature, operator truncations with
convergence diagnostics, and a radial spectral oracle."""

from .geometry import (DyadicBox, NeighborSet, TailRegion, Decomposition,
                       ResourceError, box_from_index, box_area, family_box,
                       box_id, index_of_id, enumerate_decomposition,
                       neighbors, inscribed_disc, tail_region,
                       decomposition_to_csv)
from .symbols import (Symbol, SymbolParseError, const_symbol, make_ab,
                      power_symbol, transform, eval_grid, tabulated_symbol,
                      parse_symbol)
from .quadrature import (QuadratureResult, integrate_box, integrate_disc,
                         integrate_radial_oscillatory, integrate_interval)
from .averaging import (AveragingReport, avg_hat, sup_avg, carleson_mean,
                        scaling_fit, reports_to_csv)
from .operators import (TestFunction, FieldSample, kernel_eval,
                        toeplitz_truncated, hankel_truncated,
                        box_partial_apply, series_apply, limit_apply,
                        transpose_apply, dual_pairing, duality_defect,
                        majorant_GD, subharmonic_bound_check, default_grid)
from .spectral import (SpectralSequence, NormEstimate, radial_eigenvalue,
                       spectral_sequence, matrix_element, finite_section_norm,
                       growth_fit, log_spaced_degrees)

__version__ = "0.1.0"

__all__ = [
    "DyadicBox", "NeighborSet", "TailRegion", "Decomposition", "ResourceError",
    "box_from_index", "box_area", "family_box", "box_id", "index_of_id",
    "enumerate_decomposition", "neighbors", "inscribed_disc", "tail_region",
    "decomposition_to_csv",
    "Symbol", "SymbolParseError", "const_symbol", "make_ab", "power_symbol",
    "transform", "eval_grid", "tabulated_symbol", "parse_symbol",
    "QuadratureResult", "integrate_box", "integrate_disc",
    "integrate_radial_oscillatory", "integrate_interval",
    "AveragingReport", "avg_hat", "sup_avg", "carleson_mean", "scaling_fit",
    "reports_to_csv",
    "TestFunction", "FieldSample", "kernel_eval", "toeplitz_truncated",
    "hankel_truncated", "box_partial_apply", "series_apply", "limit_apply",
    "transpose_apply", "dual_pairing", "duality_defect", "majorant_GD",
    "subharmonic_bound_check", "default_grid",
    "SpectralSequence", "NormEstimate", "radial_eigenvalue",
    "spectral_sequence", "matrix_element", "finite_section_norm",
    "growth_fit", "log_spaced_degrees",
    "__version__",
]

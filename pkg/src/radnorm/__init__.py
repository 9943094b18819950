from .config import QuadratureConfig, TGrid, default_config, load_config
from .geometry import (CapSpec, OmegaQuery, cap_measure, cap_measure_exact, cap_measure_mc, coarea_integral,
                       omega_contains, sandwich_bounds, split_regions)
from .profiles import (AmbientField, DifferenceSpec, RadialProfile, extend, mean_ball, mean_omega, mean_sup,
                       nonidentity_witness, nth_difference, trace)
from .corpus import corpus, corpus_suite, parse_profile
from .numerics import integrate_adaptive, integrate_log_measure, outer_weighted_power
from .params import HypothesisVerdict, NormKind, SmoothnessParams, validate, validate_coincidence
from .reports import NormReport, NormTerm
from .norms import (compute_norm, embedding_gap, norm_rho_smooth_b, norm_rho_smooth_f, norm_sharp_b, norm_sharp_f,
                    norm_sobolev_radial, norm_triangle3d_b, norm_triangle3d_f, norm_triangle_b, norm_triangle_f,
                    weighted_lp)
from .fourier import GridField1D, coincidence_ratio, dyadic_bands, weighted_fourier_norm
from .weights import Weight, ap_classify, ap_constant_estimate
from .studies import equivalence_study, strauss_study

from .contfrac import CFReal, ConvergentInterval, RationalApprox
from .contfrac import best_rational_approx, cf_expand_rational, convergents, interval_of_convergent, parse_cf
from .contfrac import refine_interval, sample_points
from .gauss import A_BOUND, a_constant_scan, gauss_sum, normalized_modulus
from .series import cesaro_form_sum, convergence_verdict, oscillatory_integral_check, prop2_residual
from .series import rational_divergence_test, riemann_partial_sum, surrogate_sum, weyl_partial_sum
from .weyl import WeylCase, classify_point, empirical_vs_bound
from .bmo import bmo_norm_estimate, ceil_gap_check, fefferman_blocks, fefferman_S
from .bmo import interval_oscillation, jn_tail_experiment
from .core import Experiment
from .core import supported_commands
from .utils import DirectLimitError, PrecisionExhaustedError, PreconditionError, QuadratureError
from . import cli

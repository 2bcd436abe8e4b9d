"""Calderon-Zygmund decomposition on the half-line, Volterra singular
kernels, and empirical maximal L^p regularity measurement for discrete
parabolic problems."""

from ._backend import BACKEND
from .czd import (BadPart, CZDecomposition, PropertyReport, cube_average,
                  decompose, verify)
from .dyadic import DyadicCube, Interval
from .experiments import (RegularityReport, ScalingFit, StressSummary,
                          TrialFamily, czd_stress, emit_plot_data,
                          estimate_strong_constant, estimate_weak_constant,
                          kernel_norm_scaling, maxreg_sweep,
                          weak_width_stability)
from .kernels import (CallableKernel, CausalityError, GeneratorSpec,
                      GreensKernel, ModelScalarKernel, Semigroup,
                      SemigroupAccuracyError, VolterraKernel,
                      greens_kernel_from_generator, heat_kernel_pointwise,
                      load_generator_spec, model_scalar_kernel)
from .operator import (OffSupportError, ParabolicSolution, QuadratureError,
                       adjoint_check, adjoint_pair, apply_bad_part,
                       apply_off_support, solve_parabolic, transpose_apply)
from .spaces import (NormInterval, SpatialSpace, StepFunction, TimeGrid,
                     bochner_norm, distribution_function,
                     induced_operator_norm, read_step_function, weak_l1_norm,
                     write_step_function)
from .validate import (HormanderResult, ParabolicEstimateReport, SamplingPlan,
                       ValidatorResult, hormander_integral_s,
                       hormander_integral_t, parabolic_estimate_check,
                       validate_holder_s, validate_holder_t, validate_size)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "__version__",
    # spaces
    "SpatialSpace", "TimeGrid", "StepFunction", "NormInterval",
    "bochner_norm", "weak_l1_norm", "distribution_function",
    "induced_operator_norm", "write_step_function", "read_step_function",
    # dyadic
    "DyadicCube", "Interval",
    # decomposition
    "BadPart", "CZDecomposition", "PropertyReport", "cube_average",
    "decompose", "verify",
    # kernels
    "VolterraKernel", "ModelScalarKernel", "model_scalar_kernel",
    "CallableKernel", "GeneratorSpec", "GreensKernel", "Semigroup",
    "greens_kernel_from_generator", "heat_kernel_pointwise",
    "load_generator_spec", "CausalityError", "SemigroupAccuracyError",
    # validators
    "SamplingPlan", "ValidatorResult", "HormanderResult",
    "validate_size", "validate_holder_s", "validate_holder_t",
    "hormander_integral_s", "hormander_integral_t",
    "parabolic_estimate_check", "ParabolicEstimateReport",
    # operator
    "apply_off_support", "apply_bad_part", "transpose_apply", "adjoint_check",
    "adjoint_pair", "solve_parabolic", "ParabolicSolution", "OffSupportError",
    "QuadratureError",
    # experiments
    "TrialFamily", "RegularityReport", "StressSummary", "ScalingFit",
    "estimate_strong_constant", "estimate_weak_constant",
    "weak_width_stability", "maxreg_sweep", "czd_stress",
    "kernel_norm_scaling", "emit_plot_data",
]

"""Metric-entropy toolkit: covering/packing numbers of finite metric spaces,
generalized-variation analysis of step functions, rate-certified compression,
packing witness families, empirical entropy scans, and scalar conservation
laws with flux-derived gauges."""

__version__ = "0.1.0"

from .bv_codec import (
    Net,
    RealInterval,
    bv_budget_bits,
    decode,
    encode_bv,
    encode_bvpsi,
    euclidean_budget_bits,
    net_from_token,
    power_budget_bits,
    read_codeword,
    upper_bound_bits,
    write_codeword,
)
from .claw import (
    Flux,
    affine_gap,
    calibrate_gamma,
    degeneracy,
    evolve,
    flux_gauge,
    godunov_flux,
    make_grid,
    solution_entropy_bound,
    solution_entropy_bound_pf,
    support_check,
    to_step_function,
)
from .entropy_estimator import (
    ClassParams,
    FunctionEnsemble,
    block_grid_ensemble,
    empirical_counts,
    entropy_scan,
    fit_exponent,
    from_witness_family,
    random_bv_ensemble,
    random_bvpsi_ensemble,
)
from .errors import BVEntropyError
from .gauge_variation import (
    Gauge,
    StepFunction,
    gauge_check,
    l1_distance,
    read_step,
    right_continuous,
    tv,
    tv_psi,
    tv_psi_chain,
    write_step,
)
from .metric_core import (
    FiniteMetricSpace,
    ball_count_bounds,
    covering_number,
    dimension_report,
    from_points,
    lattice,
    line_points,
    packing_number,
    probe_scales,
    read_matrix_csv,
    uniform_random,
    validate_metric,
)
from .witness_lab import (
    WitnessFamily,
    build_family,
    family_floor,
    global_family,
    lower_bound_bits,
    verify_packing,
)

__all__ = [
    "BVEntropyError",
    "ClassParams",
    "FiniteMetricSpace",
    "Flux",
    "FunctionEnsemble",
    "Gauge",
    "Net",
    "RealInterval",
    "StepFunction",
    "WitnessFamily",
    "affine_gap",
    "ball_count_bounds",
    "block_grid_ensemble",
    "build_family",
    "bv_budget_bits",
    "calibrate_gamma",
    "covering_number",
    "decode",
    "degeneracy",
    "dimension_report",
    "empirical_counts",
    "encode_bv",
    "encode_bvpsi",
    "entropy_scan",
    "euclidean_budget_bits",
    "evolve",
    "family_floor",
    "fit_exponent",
    "flux_gauge",
    "from_points",
    "from_witness_family",
    "gauge_check",
    "global_family",
    "godunov_flux",
    "l1_distance",
    "lattice",
    "line_points",
    "lower_bound_bits",
    "make_grid",
    "net_from_token",
    "packing_number",
    "power_budget_bits",
    "probe_scales",
    "random_bv_ensemble",
    "random_bvpsi_ensemble",
    "read_codeword",
    "read_matrix_csv",
    "read_step",
    "right_continuous",
    "solution_entropy_bound",
    "solution_entropy_bound_pf",
    "support_check",
    "to_step_function",
    "tv",
    "tv_psi",
    "tv_psi_chain",
    "uniform_random",
    "upper_bound_bits",
    "validate_metric",
    "verify_packing",
    "write_codeword",
    "write_step",
    "__version__",
]

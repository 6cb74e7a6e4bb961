from analysis.field import (
    ExcitationCheck,
    FieldValue,
    SpectrumReport,
    Stability,
    classify,
    divergence,
    excitation_bound,
    excitation_bound_check,
    expected_positive_part,
    field,
    field_array,
    h_coefficient,
    jacobian,
    numeric_divergence,
    numeric_jacobian,
    planar_field,
    planar_jacobian,
    spectrum,
    spectrum_at_asymmetric,
    spectrum_at_center,
)
from analysis.equilibria import (
    Equilibrium,
    EquilibriumReport,
    asymmetric_w,
    critical_w,
    fixed_point_gap,
    g,
    grid_scan_root,
    solve_equilibria,
)
from analysis.flow import (
    FlowTrajectory,
    attraction_rate,
    boundary_inward_check,
    flow_paths,
    integrate,
    rk4_step,
    stays_in_domain,
    variational_area,
)
from analysis.coupling import (
    CouplingPath,
    CouplingSpec,
    Direction,
    EnsembleSummary,
    clt_diagnostic,
    ks_distance,
    domination_check,
    drift_limit,
    drift_ratio,
    envelope_fraction,
    excursion_fraction,
    expected_position,
    p_schedule,
    sample_ensemble,
    sample_path,
    schedule,
    sigma,
    sigma_series,
    synthetic_trace,
)

__all__ = [
    "ExcitationCheck",
    "FieldValue",
    "SpectrumReport",
    "Stability",
    "classify",
    "divergence",
    "excitation_bound",
    "excitation_bound_check",
    "expected_positive_part",
    "field",
    "field_array",
    "h_coefficient",
    "jacobian",
    "numeric_divergence",
    "numeric_jacobian",
    "planar_field",
    "planar_jacobian",
    "spectrum",
    "spectrum_at_asymmetric",
    "spectrum_at_center",
    "Equilibrium",
    "EquilibriumReport",
    "asymmetric_w",
    "critical_w",
    "fixed_point_gap",
    "g",
    "grid_scan_root",
    "solve_equilibria",
    "FlowTrajectory",
    "attraction_rate",
    "boundary_inward_check",
    "flow_paths",
    "integrate",
    "rk4_step",
    "stays_in_domain",
    "variational_area",
    "CouplingPath",
    "CouplingSpec",
    "Direction",
    "EnsembleSummary",
    "clt_diagnostic",
    "ks_distance",
    "domination_check",
    "drift_limit",
    "drift_ratio",
    "envelope_fraction",
    "excursion_fraction",
    "expected_position",
    "p_schedule",
    "sample_ensemble",
    "sample_path",
    "schedule",
    "sigma",
    "sigma_series",
    "synthetic_trace",
]

//! Energy identities and the slice-wise lower-bound machinery.
//!
//! All constants that the analysis only proves to exist (`k′_x`, `k″`, `c`,
//! `c′`, `c″`) are measured or calibrated here, never asserted.

mod energy;
mod forms;
mod slices;

pub use energy::{chern_weil_report, energy_e, lattice_chern_weil, EnergyReport, EnergySeries};
pub use forms::{
    chern_weil_density, hodge_riemann, random_kahler_curvature, wedge_scalar, ChernWeilDensity, HodgeRiemann,
    MatTwoForm, MAX_KAHLER_DIM,
};
pub use slices::{
    beta_from_samples, beta_from_trace, bump_bank, calibrate_k_prime, claim_lower_bound, delta_plus, furthest_max, lp_interpolation_check,
    moser_slab_check, parabola, parabola_check, slice_fhat_l2, slice_positions, unit_cylinder,
    weak_laplacian_beta, weak_max_principle_check, Bump, BumpResult, ClaimReport, LpReport, MoserReport,
    ParabolaReport, UnitCylinder, WeakBoundReport, WeakMaxReport,
};

#[cfg(test)]
mod tests;

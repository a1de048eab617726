//! Relative energy, its coercivity, the relative energy inequality and Gronwall-type
//! stability checks of a measure field against a smooth solution.

mod cutoff;
mod functional;
mod gronwall;
mod identities;
mod rei;

pub use cutoff::{coercivity_bound, coercivity_check, CoercivityReport, CoercivitySample, Cutoff};
pub use functional::{relative_energy, relative_energy_at, relative_energy_h_form, Reference, ReferenceState};
pub use gronwall::{
    check_hypotheses, dirac_initial_data, gronwall_fit, gronwall_suite, GronwallOptions, GronwallReport,
    HypothesisCheck, Theorem, Witness,
};
pub use identities::{
    affine_viscosity_identity, bulk_recombination, shear_recombination, thermal_recombination, viscous_square,
    IdentityPair,
};
pub use rei::{
    defect_series, h_total, rei_residual, relative_energy_integral, DissipationTerms, ReiReport, StrongTriple,
};

use crate::dmv::DmvError;
use crate::field::FieldError;
use crate::thermo::ThermoError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RelEnergyError {
    #[error("reference state must be positive: rho = {rho}, theta = {theta}")]
    Reference { rho: f64, theta: f64 },
    #[error("state outside the domain: rho = {rho}, theta = {theta}")]
    Domain { rho: f64, theta: f64 },
    #[error("cutoff parameter must lie in (0, 1/2): {delta}")]
    Cutoff { delta: f64 },
    #[error("no samples")]
    Empty,
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error(transparent)]
    Dmv(#[from] DmvError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

//! Equations of state, transport coefficients and pointwise constitutive laws.

mod constitutive;
mod eos;
mod monoatomic;
mod transport;

pub use constitutive::{
    ballistic_free_energy, entropy_production_density, fourier_flux, gibbs_residual,
    newton_stress, stability_check, stress_from_parts, GibbsResidual, Stability, DEFAULT_THETA_MIN,
};
pub use eos::{CustomEos, EquationOfState, ThermoPoint};
pub use monoatomic::{
    DegeneratePressure, EntropyNormalization, IdealPressure, Monoatomic, PressureFunction,
};
pub use transport::{CustomTransport, TransportCoefficients, TransportPoint};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThermoError {
    #[error("state outside the domain of the equation of state: rho = {rho}, theta = {theta}")]
    Domain { rho: f64, theta: f64 },
    #[error("invalid parameter {name} = {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error("pressure function violates {condition} at q = {q}")]
    Structure { condition: &'static str, q: f64 },
    #[error("tensor does not fit dimension {dim}")]
    Dimension { dim: usize },
}

use super::RelEnergyError;
use crate::linalg::Vector;
use crate::thermo::{ballistic_free_energy, EquationOfState, ThermoPoint};

/// Reference triple `(ρ̃, θ̃, ũ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReferenceState {
    pub rho: f64,
    pub theta: f64,
    pub u: Vector,
}

/// Reference triple with its thermodynamics evaluated once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub state: ReferenceState,
    pub thermo: ThermoPoint,
    /// `ẽ - θ̃s̃ + p̃/ρ̃`
    pub chemical: f64,
}

impl Reference {
    pub fn new(eos: &EquationOfState, state: ReferenceState) -> Result<Self, RelEnergyError> {
        let (r, t) = (state.rho, state.theta);
        if !(r > 0.0 && t > 0.0 && r.is_finite() && t.is_finite()) {
            return Err(RelEnergyError::Reference { rho: r, theta: t });
        }
        let tp = eos.eval(r, t)?;
        Ok(Reference { state, thermo: tp, chemical: tp.e - t * tp.s + tp.p / r })
    }

    /// `∂_ρ H_θ̃(ρ̃, θ̃) = ẽ + ρ̃ẽ_ρ - θ̃(s̃ + ρ̃s̃_ρ)`, from the partials.
    pub fn free_energy_slope(&self) -> f64 {
        let tp = &self.thermo;
        let (r, t) = (self.state.rho, self.state.theta);
        tp.e + r * tp.de_drho - t * (tp.s + r * tp.ds_drho)
    }
}

fn check_state(rho: f64, theta: f64) -> Result<(), RelEnergyError> {
    if rho >= 0.0 && theta > 0.0 && rho.is_finite() && theta.is_finite() {
        Ok(())
    } else {
        Err(RelEnergyError::Domain { rho, theta })
    }
}

/// `E(ρ, θ, u | ρ̃, θ̃, ũ)` in expanded form:
/// `½ρ|u - ũ|² + ρe - ρ̃ẽ - θ̃(ρs - ρ̃s̃) - (ẽ - θ̃s̃ + p̃/ρ̃)(ρ - ρ̃)`.
/// Vacuum `ρ = 0` uses the limits of `ρe` and `ρs`.
pub fn relative_energy(
    eos: &EquationOfState,
    rho: f64,
    theta: f64,
    u: Vector,
    reference: &Reference,
) -> Result<f64, RelEnergyError> {
    check_state(rho, theta)?;
    let ReferenceState { rho: rr, theta: tr, u: ur } = reference.state;
    let tp = &reference.thermo;
    let re = eos.energy_density(rho, theta)?;
    let rs = eos.entropy_density(rho, theta)?;
    let kinetic = 0.5 * rho * (u - ur).norm_sq();
    Ok(kinetic + (re - rr * tp.e) - tr * (rs - rr * tp.s) - reference.chemical * (rho - rr))
}

/// Same functional through the ballistic free energy:
/// `½ρ|u - ũ|² + H_θ̃(ρ, θ) - ∂_ρH_θ̃(ρ̃, θ̃)(ρ - ρ̃) - H_θ̃(ρ̃, θ̃)`.
pub fn relative_energy_h_form(
    eos: &EquationOfState,
    rho: f64,
    theta: f64,
    u: Vector,
    reference: &Reference,
) -> Result<f64, RelEnergyError> {
    check_state(rho, theta)?;
    let ReferenceState { rho: rr, theta: tr, u: ur } = reference.state;
    let h = ballistic_free_energy(eos, rho, theta, tr)?;
    let h_ref = ballistic_free_energy(eos, rr, tr, tr)?;
    Ok(0.5 * rho * (u - ur).norm_sq() + h - reference.free_energy_slope() * (rho - rr) - h_ref)
}

/// Convenience wrapper evaluating the reference on the fly.
pub fn relative_energy_at(
    eos: &EquationOfState,
    state: (f64, f64, Vector),
    reference: ReferenceState,
) -> Result<f64, RelEnergyError> {
    let r = Reference::new(eos, reference)?;
    relative_energy(eos, state.0, state.1, state.2, &r)
}

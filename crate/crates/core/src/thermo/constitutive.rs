use super::{EquationOfState, ThermoError, TransportCoefficients};
use crate::linalg::{Tensor, Vector};

/// Default floor applied to θ in `1/θ` factors.
pub const DEFAULT_THETA_MIN: f64 = 1e-10;

/// Residuals of Gibbs' relation `θ Ds = De + p D(1/ρ)` in each partial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsResidual {
    /// `θ s_ρ - (e_ρ - p/ρ²)`
    pub r_rho: f64,
    /// `θ s_θ - e_θ`
    pub r_theta: f64,
    pub scale_rho: f64,
    pub scale_theta: f64,
}

impl GibbsResidual {
    /// Largest residual relative to the magnitude of the terms it balances.
    pub fn relative(&self) -> f64 {
        let r = self.r_rho.abs() / self.scale_rho.max(f64::MIN_POSITIVE);
        let t = self.r_theta.abs() / self.scale_theta.max(f64::MIN_POSITIVE);
        r.max(t)
    }
}

pub fn gibbs_residual(eos: &EquationOfState, rho: f64, theta: f64) -> Result<GibbsResidual, ThermoError> {
    let tp = eos.eval(rho, theta)?;
    let p_term = tp.p / (rho * rho);
    Ok(GibbsResidual {
        r_rho: theta * tp.ds_drho - (tp.de_drho - p_term),
        r_theta: theta * tp.ds_dtheta - tp.de_dtheta,
        scale_rho: (theta * tp.ds_drho).abs() + tp.de_drho.abs() + p_term.abs(),
        scale_theta: (theta * tp.ds_dtheta).abs() + tp.de_dtheta.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub dp_drho: f64,
    pub de_dtheta: f64,
    pub stable: bool,
}

pub fn stability_check(eos: &EquationOfState, rho: f64, theta: f64) -> Result<Stability, ThermoError> {
    let tp = eos.eval(rho, theta)?;
    Ok(Stability {
        dp_drho: tp.dp_drho,
        de_dtheta: tp.de_dtheta,
        stable: tp.dp_drho > 0.0 && tp.de_dtheta > 0.0,
    })
}

/// `H_θ̃(ρ, θ) = ρ(e - θ̃ s)`; `ρ = 0` is admitted through the vacuum limits.
pub fn ballistic_free_energy(
    eos: &EquationOfState,
    rho: f64,
    theta: f64,
    theta_ref: f64,
) -> Result<f64, ThermoError> {
    if !(theta_ref > 0.0) || rho < 0.0 {
        return Err(ThermoError::Domain { rho, theta: theta_ref });
    }
    Ok(eos.energy_density(rho, theta)? - theta_ref * eos.entropy_density(rho, theta)?)
}

fn check_dim(dim: usize, g: &Tensor) -> Result<(), ThermoError> {
    if (dim == 1 || dim == 2) && g.fits_dim(dim) {
        Ok(())
    } else {
        Err(ThermoError::Dimension { dim })
    }
}

/// `S = μ(G + Gᵗ - (2/N) tr G I) + λ tr G I`.
pub fn newton_stress(
    tc: &TransportCoefficients,
    rho: f64,
    theta: f64,
    grad_u: &Tensor,
    dim: usize,
) -> Result<Tensor, ThermoError> {
    check_dim(dim, grad_u)?;
    let t = tc.eval(rho, theta);
    Ok(stress_from_parts(t.mu, t.lambda, grad_u, dim))
}

/// Newtonian stress for given μ and λ.
pub fn stress_from_parts(mu: f64, lambda: f64, grad_u: &Tensor, dim: usize) -> Tensor {
    grad_u.traceless(dim) * mu + Tensor::identity(dim) * (lambda * grad_u.trace())
}

/// `q = -κ ∇θ`.
pub fn fourier_flux(tc: &TransportCoefficients, rho: f64, theta: f64, grad_theta: &Vector) -> Vector {
    *grad_theta * (-tc.eval(rho, theta).kappa)
}

/// `(1/θ)(S:D_u + κ|D_θ|²/θ)` with θ floored at `theta_min`; `+∞` at θ = 0 when the
/// numerator is positive.
pub fn entropy_production_density(
    tc: &TransportCoefficients,
    rho: f64,
    theta: f64,
    d_u: &Tensor,
    d_theta: &Vector,
    dim: usize,
    theta_min: f64,
) -> Result<f64, ThermoError> {
    if !(rho >= 0.0) || !(theta >= 0.0) {
        return Err(ThermoError::Domain { rho, theta });
    }
    check_dim(dim, d_u)?;
    let t = tc.eval(rho, theta);
    let sd = stress_from_parts(t.mu, t.lambda, d_u, dim).ddot(d_u).max(0.0);
    let heat = t.kappa * d_theta.norm_sq();
    if theta == 0.0 {
        return Ok(if sd + heat > 0.0 { f64::INFINITY } else { 0.0 });
    }
    let th = theta.max(theta_min);
    Ok((sd + heat / th) / th)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::sync::Arc;

    #[test]
    fn stress_examples() {
        let tc = TransportCoefficients::constant(1.0, 0.0, 1.0).unwrap();
        let s = newton_stress(&tc, 1.0, 1.0, &Tensor::identity(2), 2).unwrap();
        assert_eq!(s, Tensor::ZERO);
        let tc = TransportCoefficients::constant(1.0, 1.0, 1.0).unwrap();
        let g = Tensor([[1.0, 0.0], [0.0, 0.0]]);
        let s = newton_stress(&tc, 1.0, 1.0, &g, 2).unwrap();
        assert_eq!(s, Tensor([[2.0, 0.0], [0.0, 0.0]]));
        assert!(newton_stress(&tc, 1.0, 1.0, &Tensor::identity(2), 1).is_err());
    }

    #[test]
    fn production_examples() {
        let tc = TransportCoefficients::constant(1.0, 0.0, 1.0).unwrap();
        let d = Tensor([[1.0, 0.0], [0.0, -1.0]]);
        let s = entropy_production_density(&tc, 1.0, 1.0, &d, &Vector::ZERO, 2, DEFAULT_THETA_MIN).unwrap();
        assert!((s - 4.0).abs() < 1e-14);
        let inf = entropy_production_density(
            &tc,
            1.0,
            0.0,
            &Tensor::ZERO,
            &Vector::new(1.0, 0.0),
            2,
            DEFAULT_THETA_MIN,
        )
        .unwrap();
        assert!(inf.is_infinite());
    }

    #[test]
    fn flux_examples() {
        let tc = TransportCoefficients::constant(1.0, 0.0, 2.0).unwrap();
        assert_eq!(fourier_flux(&tc, 1.0, 1.0, &Vector::new(1.0, -1.0)), Vector::new(-2.0, 2.0));
        struct Linear;
        impl crate::thermo::CustomTransport for Linear {
            fn mu(&self, _: f64, _: f64) -> f64 {
                1.0
            }
            fn lambda(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn kappa(&self, _: f64, t: f64) -> f64 {
                t
            }
        }
        let tc = TransportCoefficients::custom(Arc::new(Linear));
        assert_eq!(fourier_flux(&tc, 1.0, 3.0, &Vector::new(1.0, 0.0)), Vector::new(-3.0, 0.0));
    }

    #[test]
    fn ballistic_examples() {
        let eos = EquationOfState::perfect_gas(1.5).unwrap();
        assert!((ballistic_free_energy(&eos, 1.0, 1.0, 1.0).unwrap() - 1.5).abs() < 1e-15);
        let h = ballistic_free_energy(&eos, 2.0, 1.0, 1.0).unwrap();
        assert!((h - 4.386_294_361_119_891).abs() < 1e-12);
    }
}

//! Algebraic recombinations of the dissipative terms, evaluated side by side.
//!
//! `t_d = T[D_u]`, `t_g = T[∇ũ]` with `T[A] = A + Aᵗ - (2/N) tr A I`.

use crate::linalg::{Tensor, Vector};
use crate::num::sqrt;

/// Two evaluations of the same quantity and the magnitude of the terms involved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityPair {
    pub lhs: f64,
    pub rhs: f64,
    pub scale: f64,
}

impl IdentityPair {
    /// `|lhs - rhs| / scale`
    pub fn mismatch(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Perfect square `(μ/2)|√(θ̃/θ) t_d - √(θ/θ̃) t_g|²` against its expansion.
pub fn viscous_square(mu: f64, theta: f64, theta_ref: f64, t_d: &Tensor, t_g: &Tensor) -> IdentityPair {
    let (a, b) = (sqrt(theta_ref / theta), sqrt(theta / theta_ref));
    let lhs = 0.5 * mu * (*t_d * a - *t_g * b).norm_sq();
    let terms = [
        theta_ref / theta * 0.5 * mu * t_d.norm_sq(),
        theta / theta_ref * 0.5 * mu * t_g.norm_sq(),
        -mu * t_d.ddot(t_g),
    ];
    pair(lhs, &terms)
}

/// Shear terms before and after completing the square, with `μ = μ(ρ, θ)`, `μ̃ = μ(ρ̃, θ̃)`:
/// `(θ̃μ/2θ)t_d:t_d + (θμ̃/2θ̃)t_g:t_g - (μ/2)t_d:t_g - (μ̃/2)t_g:t_d`
/// against `(μ/2)|√(θ̃/θ)t_d - √(θ/θ̃)t_g|² - ½ t_g:(μ - μ̃)((θ/θ̃)t_g - t_d)`.
pub fn shear_recombination(
    mu: f64,
    mu_ref: f64,
    theta: f64,
    theta_ref: f64,
    t_d: &Tensor,
    t_g: &Tensor,
) -> IdentityPair {
    let dg = t_d.ddot(t_g);
    let lhs_terms = [
        theta_ref * mu / (2.0 * theta) * t_d.norm_sq(),
        theta * mu_ref / (2.0 * theta_ref) * t_g.norm_sq(),
        -0.5 * mu * dg,
        -0.5 * mu_ref * dg,
    ];
    let sq = viscous_square(mu, theta, theta_ref, t_d, t_g).lhs;
    let cross = -0.5 * (mu - mu_ref) * t_g.ddot(&(*t_g * (theta / theta_ref) - *t_d));
    let lhs: f64 = lhs_terms.iter().sum();
    let scale = lhs_terms.iter().map(|v| v.abs()).sum::<f64>() + sq.abs() + cross.abs();
    IdentityPair { lhs, rhs: sq + cross, scale }
}

/// Bulk terms, the scalar analogue of [`shear_recombination`] with `tr D_u` and `div ũ`.
pub fn bulk_recombination(
    lambda: f64,
    lambda_ref: f64,
    theta: f64,
    theta_ref: f64,
    tr_d: f64,
    div_g: f64,
) -> IdentityPair {
    let lhs_terms = [
        theta_ref * lambda / theta * tr_d * tr_d,
        theta * lambda_ref / theta_ref * div_g * div_g,
        -lambda * tr_d * div_g,
        -lambda_ref * div_g * tr_d,
    ];
    let d = sqrt(theta_ref / theta) * tr_d - sqrt(theta / theta_ref) * div_g;
    let sq = lambda * d * d;
    let cross = -div_g * (lambda - lambda_ref) * (theta / theta_ref * div_g - tr_d);
    let lhs: f64 = lhs_terms.iter().sum();
    let scale = lhs_terms.iter().map(|v| v.abs()).sum::<f64>() + sq.abs() + cross.abs();
    IdentityPair { lhs, rhs: sq + cross, scale }
}

/// Heat-flux terms with `g = ∇ log θ̃`:
/// `θ̃κ (D_θ/θ)·(D_θ/θ - g) + κ̃ g·θ(g - D_θ/θ)` against
/// `θ̃κ|D_θ/θ - g|² + κ̃ g·(θ - θ̃)(g - D_θ/θ) - ∇θ̃·(κ - κ̃)(g - D_θ/θ)`.
pub fn thermal_recombination(
    kappa: f64,
    kappa_ref: f64,
    theta: f64,
    theta_ref: f64,
    d_theta: &Vector,
    grad_theta_ref: &Vector,
) -> IdentityPair {
    let g = *grad_theta_ref * (1.0 / theta_ref);
    let q = *d_theta * (1.0 / theta);
    let lhs_terms = [theta_ref * kappa * q.dot(&(q - g)), kappa_ref * theta * g.dot(&(g - q))];
    let rhs_terms = [
        theta_ref * kappa * (q - g).norm_sq(),
        kappa_ref * (theta - theta_ref) * g.dot(&(g - q)),
        -(kappa - kappa_ref) * grad_theta_ref.dot(&(g - q)),
    ];
    let lhs: f64 = lhs_terms.iter().sum();
    let rhs: f64 = rhs_terms.iter().sum();
    let scale = lhs_terms.iter().chain(&rhs_terms).map(|v| v.abs()).sum();
    IdentityPair { lhs, rhs, scale }
}

/// The `μ1` part of `μ = μ0 + μ1θ`:
/// `(μ1/2)θ|√(θ̃/θ)t_d - √(θ/θ̃)t_g|² - (μ1/2) t_g:(θ - θ̃)((θ/θ̃)t_g - t_d)`
/// against `(μ1/2)θ̃|t_d - t_g|² - (μ1/2)(θ - θ̃)(t_d - t_g):t_g`.
pub fn affine_viscosity_identity(mu1: f64, theta: f64, theta_ref: f64, t_d: &Tensor, t_g: &Tensor) -> IdentityPair {
    let sq = viscous_square(mu1 * theta, theta, theta_ref, t_d, t_g).lhs;
    let cross = -0.5 * mu1 * (theta - theta_ref) * t_g.ddot(&(*t_g * (theta / theta_ref) - *t_d));
    let first = 0.5 * mu1 * theta_ref * (*t_d - *t_g).norm_sq();
    let second = -0.5 * mu1 * (theta - theta_ref) * (*t_d - *t_g).ddot(t_g);
    let scale = sq.abs() + cross.abs() + first.abs() + second.abs();
    IdentityPair { lhs: sq + cross, rhs: first + second, scale }
}

fn pair(lhs: f64, terms: &[f64]) -> IdentityPair {
    let rhs: f64 = terms.iter().sum();
    let scale = lhs.abs() + terms.iter().map(|v| v.abs()).sum::<f64>();
    IdentityPair { lhs, rhs, scale }
}

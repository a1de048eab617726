use alloc::sync::Arc;
use core::fmt;

use super::ThermoError;

/// μ, λ, κ and their partials with respect to ρ and θ at one state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransportPoint {
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub dmu: [f64; 2],
    pub dlambda: [f64; 2],
    pub dkappa: [f64; 2],
}

pub trait CustomTransport: Send + Sync {
    fn mu(&self, rho: f64, theta: f64) -> f64;
    fn lambda(&self, rho: f64, theta: f64) -> f64;
    fn kappa(&self, rho: f64, theta: f64) -> f64;
}

#[derive(Clone)]
pub enum TransportCoefficients {
    Constant { mu: f64, lambda: f64, kappa: f64 },
    /// `μ = μ0 + μ1 θ`, `λ = 0`, constant κ.
    AffineTheta { mu0: f64, mu1: f64, kappa: f64 },
    Custom(Arc<dyn CustomTransport>),
}

impl fmt::Debug for TransportCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransportCoefficients::Constant { mu, lambda, kappa } => {
                write!(f, "Constant {{ mu: {mu}, lambda: {lambda}, kappa: {kappa} }}")
            }
            TransportCoefficients::AffineTheta { mu0, mu1, kappa } => {
                write!(f, "AffineTheta {{ mu0: {mu0}, mu1: {mu1}, kappa: {kappa} }}")
            }
            TransportCoefficients::Custom(_) => write!(f, "Custom"),
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), ThermoError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ThermoError::Parameter { name, value })
    }
}

fn nonnegative(name: &'static str, value: f64) -> Result<(), ThermoError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ThermoError::Parameter { name, value })
    }
}

impl TransportCoefficients {
    pub fn constant(mu: f64, lambda: f64, kappa: f64) -> Result<Self, ThermoError> {
        positive("mu", mu)?;
        nonnegative("lambda", lambda)?;
        positive("kappa", kappa)?;
        Ok(TransportCoefficients::Constant { mu, lambda, kappa })
    }

    pub fn affine_theta(mu0: f64, mu1: f64, kappa: f64) -> Result<Self, ThermoError> {
        positive("mu0", mu0)?;
        nonnegative("mu1", mu1)?;
        positive("kappa", kappa)?;
        Ok(TransportCoefficients::AffineTheta { mu0, mu1, kappa })
    }

    /// All coefficients zero: the Euler limit, for solver verification only.
    pub fn inviscid() -> Self {
        TransportCoefficients::Constant { mu: 0.0, lambda: 0.0, kappa: 0.0 }
    }

    pub fn custom(coefficients: Arc<dyn CustomTransport>) -> Self {
        TransportCoefficients::Custom(coefficients)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            TransportCoefficients::Constant { .. } => "constant",
            TransportCoefficients::AffineTheta { .. } => "affine_theta",
            TransportCoefficients::Custom(_) => "custom",
        }
    }

    pub fn eval(&self, rho: f64, theta: f64) -> TransportPoint {
        match self {
            TransportCoefficients::Constant { mu, lambda, kappa } => TransportPoint {
                mu: *mu,
                lambda: *lambda,
                kappa: *kappa,
                ..Default::default()
            },
            TransportCoefficients::AffineTheta { mu0, mu1, kappa } => TransportPoint {
                mu: mu0 + mu1 * theta,
                lambda: 0.0,
                kappa: *kappa,
                dmu: [0.0, *mu1],
                ..Default::default()
            },
            TransportCoefficients::Custom(c) => {
                let d = |f: &dyn Fn(f64, f64) -> f64| {
                    let hr = 1e-6 * rho.abs().max(1.0);
                    let ht = 1e-6 * theta.abs().max(1.0);
                    let hr = hr.min(0.5 * rho.abs().max(1e-300));
                    let ht = ht.min(0.5 * theta.abs().max(1e-300));
                    [
                        (f(rho + hr, theta) - f(rho - hr, theta)) / (2.0 * hr),
                        (f(rho, theta + ht) - f(rho, theta - ht)) / (2.0 * ht),
                    ]
                };
                TransportPoint {
                    mu: c.mu(rho, theta),
                    lambda: c.lambda(rho, theta),
                    kappa: c.kappa(rho, theta),
                    dmu: d(&|r, t| c.mu(r, t)),
                    dlambda: d(&|r, t| c.lambda(r, t)),
                    dkappa: d(&|r, t| c.kappa(r, t)),
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TransportCoefficients::Constant { .. })
    }

    pub fn lambda_vanishes(&self) -> bool {
        match self {
            TransportCoefficients::Constant { lambda, .. } => *lambda == 0.0,
            TransportCoefficients::AffineTheta { .. } => true,
            TransportCoefficients::Custom(_) => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_matches_formula() {
        let tc = TransportCoefficients::affine_theta(0.5, 0.25, 2.0).unwrap();
        let tp = tc.eval(1.0, 4.0);
        assert_eq!(tp.mu, 1.5);
        assert_eq!(tp.lambda, 0.0);
        assert_eq!(tp.kappa, 2.0);
        assert_eq!(tp.dmu, [0.0, 0.25]);
    }

    #[test]
    fn rejects_nonpositive_coefficients() {
        assert!(TransportCoefficients::constant(0.0, 0.0, 1.0).is_err());
        assert!(TransportCoefficients::constant(1.0, -1.0, 1.0).is_err());
        assert!(TransportCoefficients::affine_theta(1.0, -0.1, 1.0).is_err());
    }
}

use crate::linalg::Vector;
use crate::thermo::ThermoPoint;

/// Volume sources added to mass, momentum and internal energy balances.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Source {
    pub mass: f64,
    pub momentum: Vector,
    pub energy: f64,
}

impl Source {
    /// Source of total energy `½ρ|u|² + ρe` for a state with velocity `u`.
    pub fn total_energy(&self, u: &Vector) -> f64 {
        self.energy + u.dot(&self.momentum) - 0.5 * u.norm_sq() * self.mass
    }

    /// Source of entropy `ρs`: `(F_e - (e + p/ρ - θs) F_ρ)/θ`.
    pub fn entropy(&self, tp: &ThermoPoint) -> f64 {
        (self.energy - (tp.e + tp.p / tp.rho - tp.theta * tp.s) * self.mass) / tp.theta
    }

    pub fn is_zero(&self) -> bool {
        self.mass == 0.0 && self.momentum == Vector::ZERO && self.energy == 0.0
    }
}

/// Space-time source field.
pub trait Forcing: Send + Sync {
    fn source(&self, t: f64, x: [f64; 2]) -> Source;
}

/// No sources.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unforced;

impl Forcing for Unforced {
    fn source(&self, _t: f64, _x: [f64; 2]) -> Source {
        Source::default()
    }
}

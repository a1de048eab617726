use alloc::boxed::Box;
use alloc::sync::Arc;
use core::fmt;

use super::monoatomic::{Monoatomic, PressureFunction};
use super::ThermoError;
use crate::num;

/// Pressure, specific energy, specific entropy and their first partials at one state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThermoPoint {
    pub rho: f64,
    pub theta: f64,
    pub p: f64,
    pub e: f64,
    pub s: f64,
    pub dp_drho: f64,
    pub dp_dtheta: f64,
    pub de_drho: f64,
    pub de_dtheta: f64,
    pub ds_drho: f64,
    pub ds_dtheta: f64,
}

impl ThermoPoint {
    fn add(mut self, o: &ThermoPoint) -> Self {
        self.p += o.p;
        self.e += o.e;
        self.s += o.s;
        self.dp_drho += o.dp_drho;
        self.dp_dtheta += o.dp_dtheta;
        self.de_drho += o.de_drho;
        self.de_dtheta += o.de_dtheta;
        self.ds_drho += o.ds_drho;
        self.ds_dtheta += o.ds_dtheta;
        self
    }

    /// Squared adiabatic sound speed `p_ρ + p_θ² θ / (ρ² e_θ)`.
    pub fn sound_speed_sq(&self) -> f64 {
        self.dp_drho + self.dp_dtheta * self.dp_dtheta * self.theta / (self.rho * self.rho * self.de_dtheta)
    }
}

/// User supplied thermodynamic functions; partials are taken by central differences.
pub trait CustomEos: Send + Sync {
    fn pressure(&self, rho: f64, theta: f64) -> f64;
    fn energy(&self, rho: f64, theta: f64) -> f64;
    fn entropy(&self, rho: f64, theta: f64) -> f64;
}

#[derive(Clone)]
pub enum EquationOfState {
    PerfectGas { c_v: f64 },
    Monoatomic(Monoatomic),
    Radiative { base: Box<EquationOfState>, a: f64, exponent: u32 },
    Custom(Arc<dyn CustomEos>),
}

impl fmt::Debug for EquationOfState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquationOfState::PerfectGas { c_v } => write!(f, "PerfectGas {{ c_v: {c_v} }}"),
            EquationOfState::Monoatomic(m) => write!(f, "Monoatomic({})", m.pressure().name()),
            EquationOfState::Radiative { base, a, exponent } => {
                write!(f, "Radiative {{ base: {base:?}, a: {a}, exponent: {exponent} }}")
            }
            EquationOfState::Custom(_) => write!(f, "Custom"),
        }
    }
}

fn check_state(rho: f64, theta: f64) -> Result<(), ThermoError> {
    if rho > 0.0 && theta > 0.0 && rho.is_finite() && theta.is_finite() {
        Ok(())
    } else {
        Err(ThermoError::Domain { rho, theta })
    }
}

fn fd_step(x: f64) -> f64 {
    let h = 1e-6 * x.abs().max(1.0);
    // keep the stencil inside the positive half line
    h.min(0.5 * x)
}

fn central<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let h = fd_step(x);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

impl EquationOfState {
    /// `p = ρθ`, `e = c_v θ`, `s = log(θ^{c_v}/ρ)`.
    pub fn perfect_gas(c_v: f64) -> Result<Self, ThermoError> {
        if !(c_v > 1.0 && c_v.is_finite()) {
            return Err(ThermoError::Parameter { name: "c_v", value: c_v });
        }
        Ok(EquationOfState::PerfectGas { c_v })
    }

    pub fn monoatomic(pressure: Arc<dyn PressureFunction>) -> Result<Self, ThermoError> {
        Ok(EquationOfState::Monoatomic(Monoatomic::new(pressure)?))
    }

    /// Adds the radiation pressure `aθ²` (exponent 2) or `(a/3)θ⁴` (exponent 4) to `base`.
    pub fn radiative(base: EquationOfState, a: f64, exponent: u32) -> Result<Self, ThermoError> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(ThermoError::Parameter { name: "a", value: a });
        }
        if exponent != 2 && exponent != 4 {
            return Err(ThermoError::Parameter {
                name: "radiation_exponent",
                value: exponent as f64,
            });
        }
        Ok(EquationOfState::Radiative { base: Box::new(base), a, exponent })
    }

    pub fn custom(functions: Arc<dyn CustomEos>) -> Self {
        EquationOfState::Custom(functions)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            EquationOfState::PerfectGas { .. } => "perfect_gas",
            EquationOfState::Monoatomic(_) => "monoatomic",
            EquationOfState::Radiative { .. } => "radiative",
            EquationOfState::Custom(_) => "custom",
        }
    }

    /// Heat capacity when this is a plain perfect gas.
    pub fn perfect_gas_cv(&self) -> Option<f64> {
        match self {
            EquationOfState::PerfectGas { c_v } => Some(*c_v),
            _ => None,
        }
    }

    pub fn eval(&self, rho: f64, theta: f64) -> Result<ThermoPoint, ThermoError> {
        check_state(rho, theta)?;
        let mut tp = match self {
            EquationOfState::PerfectGas { c_v } => ThermoPoint {
                p: rho * theta,
                e: c_v * theta,
                s: c_v * num::ln(theta) - num::ln(rho),
                dp_drho: theta,
                dp_dtheta: rho,
                de_drho: 0.0,
                de_dtheta: *c_v,
                ds_drho: -1.0 / rho,
                ds_dtheta: c_v / theta,
                ..Default::default()
            },
            EquationOfState::Monoatomic(m) => m.eval(rho, theta),
            EquationOfState::Radiative { base, a, exponent } => {
                let b = base.eval(rho, theta)?;
                b.add(&radiation(*a, *exponent, rho, theta))
            }
            EquationOfState::Custom(c) => {
                let (p, e, s) = (c.pressure(rho, theta), c.energy(rho, theta), c.entropy(rho, theta));
                ThermoPoint {
                    p,
                    e,
                    s,
                    dp_drho: central(|r| c.pressure(r, theta), rho),
                    dp_dtheta: central(|t| c.pressure(rho, t), theta),
                    de_drho: central(|r| c.energy(r, theta), rho),
                    de_dtheta: central(|t| c.energy(rho, t), theta),
                    ds_drho: central(|r| c.entropy(r, theta), rho),
                    ds_dtheta: central(|t| c.entropy(rho, t), theta),
                    ..Default::default()
                }
            }
        };
        tp.rho = rho;
        tp.theta = theta;
        Ok(tp)
    }

    pub fn pressure(&self, rho: f64, theta: f64) -> Result<f64, ThermoError> {
        Ok(self.eval(rho, theta)?.p)
    }

    pub fn energy(&self, rho: f64, theta: f64) -> Result<f64, ThermoError> {
        Ok(self.eval(rho, theta)?.e)
    }

    pub fn entropy(&self, rho: f64, theta: f64) -> Result<f64, ThermoError> {
        Ok(self.eval(rho, theta)?.s)
    }

    /// `ρe`, extended to vacuum `ρ = 0` by its limit.
    pub fn energy_density(&self, rho: f64, theta: f64) -> Result<f64, ThermoError> {
        if rho == 0.0 && theta > 0.0 && theta.is_finite() {
            return Ok(self.vacuum_densities(theta).0);
        }
        Ok(rho * self.energy(rho, theta)?)
    }

    /// `ρs`, extended to vacuum `ρ = 0` by its limit.
    pub fn entropy_density(&self, rho: f64, theta: f64) -> Result<f64, ThermoError> {
        if rho == 0.0 && theta > 0.0 && theta.is_finite() {
            return Ok(self.vacuum_densities(theta).1);
        }
        Ok(rho * self.entropy(rho, theta)?)
    }

    /// `p`, extended to vacuum `ρ = 0` by its limit.
    pub fn pressure_extended(&self, rho: f64, theta: f64) -> Result<f64, ThermoError> {
        if rho == 0.0 && theta > 0.0 && theta.is_finite() {
            return Ok(self.vacuum_pressure(theta));
        }
        self.pressure(rho, theta)
    }

    fn vacuum_pressure(&self, theta: f64) -> f64 {
        match self {
            EquationOfState::Radiative { base, a, exponent } => {
                let r = match exponent {
                    2 => a * theta * theta,
                    _ => a / 3.0 * num::powi(theta, 4),
                };
                base.vacuum_pressure(theta) + r
            }
            EquationOfState::Custom(c) => c.pressure(1e-12, theta),
            _ => 0.0,
        }
    }

    /// Limits of `(ρe, ρs)` as `ρ → 0`; only radiation survives.
    fn vacuum_densities(&self, theta: f64) -> (f64, f64) {
        match self {
            EquationOfState::Radiative { base, a, exponent } => {
                let (be, bs) = base.vacuum_densities(theta);
                let (re, rs) = match exponent {
                    2 => (a * theta * theta, 2.0 * a * theta),
                    _ => (a * num::powi(theta, 4), 4.0 / 3.0 * a * num::powi(theta, 3)),
                };
                (be + re, bs + rs)
            }
            EquationOfState::Custom(c) => {
                let r = 1e-12;
                (r * c.energy(r, theta), r * c.entropy(r, theta))
            }
            _ => (0.0, 0.0),
        }
    }
}

fn radiation(a: f64, exponent: u32, rho: f64, theta: f64) -> ThermoPoint {
    if exponent == 2 {
        let t2 = theta * theta;
        ThermoPoint {
            p: a * t2,
            e: a * t2 / rho,
            s: 2.0 * a * theta / rho,
            dp_drho: 0.0,
            dp_dtheta: 2.0 * a * theta,
            de_drho: -a * t2 / (rho * rho),
            de_dtheta: 2.0 * a * theta / rho,
            ds_drho: -2.0 * a * theta / (rho * rho),
            ds_dtheta: 2.0 * a / rho,
            ..Default::default()
        }
    } else {
        let t3 = theta * theta * theta;
        let t4 = t3 * theta;
        ThermoPoint {
            p: a / 3.0 * t4,
            e: a * t4 / rho,
            s: 4.0 / 3.0 * a * t3 / rho,
            dp_drho: 0.0,
            dp_dtheta: 4.0 / 3.0 * a * t3,
            de_drho: -a * t4 / (rho * rho),
            de_dtheta: 4.0 * a * t3 / rho,
            ds_drho: -4.0 / 3.0 * a * t3 / (rho * rho),
            ds_dtheta: 4.0 * a * theta * theta / rho,
            ..Default::default()
        }
    }
}

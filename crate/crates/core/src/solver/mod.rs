//! Explicit finite-difference solver for the Navier–Stokes–Fourier system in primitive
//! variables `(ρ, θ, u)`, with manufactured solutions and conservation monitors.

mod forcing;
mod manufactured;
mod monitor;
mod rhs;

use alloc::vec::Vec;

pub use forcing::{Forcing, Source, Unforced};
pub use manufactured::{
    ManufacturedKind, ManufacturedParams, ManufacturedSolution, Perturbation, PerturbationMode,
    PerturbationTarget, StrongPoint,
};
pub use monitor::{monitors, MonitorRecord, MonitorReport};
pub use rhs::Derivative;

use crate::field::{FieldError, Grid, ScalarField, TimeSeries, VectorField};
use crate::linalg::Vector;
use crate::thermo::{EquationOfState, ThermoError, TransportCoefficients};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("{field} fell below its floor at cell {cell}: {value} (t = {t})")]
    Floor { field: &'static str, cell: usize, value: f64, t: f64 },
    #[error("non-finite value in {field} at cell {cell} (t = {t})")]
    NonFinite { field: &'static str, cell: usize, t: f64 },
    #[error("invalid run options: {0}")]
    Options(&'static str),
    #[error("invalid manufactured solution: {0}")]
    Manufactured(&'static str),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Primitive state at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub rho: ScalarField,
    pub theta: ScalarField,
    pub u: VectorField,
}

impl State {
    pub fn new(t: f64, rho: ScalarField, theta: ScalarField, u: VectorField) -> Result<Self, SolverError> {
        if !rho.grid().same_shape(theta.grid()) || !rho.grid().same_shape(u.grid()) {
            return Err(FieldError::GridMismatch.into());
        }
        Ok(State { t, rho, theta, u })
    }

    pub fn constant(grid: Grid, rho: f64, theta: f64, u: Vector) -> Self {
        State {
            t: 0.0,
            rho: ScalarField::constant(grid, rho),
            theta: ScalarField::constant(grid, theta),
            u: VectorField::constant(grid, u),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Floors {
    pub rho: f64,
    pub theta: f64,
}

impl Default for Floors {
    fn default() -> Self {
        Floors { rho: 1e-8, theta: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub final_time: f64,
    pub cfl: f64,
    /// Number of equal output intervals; snapshots are stored at `k T / outputs`.
    pub outputs: usize,
    pub max_steps: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { final_time: 0.1, cfl: 0.3, outputs: 10, max_steps: 10_000_000 }
    }
}

/// Snapshots at the output times plus a monitor record for every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: TimeSeries<State>,
    pub monitors: TimeSeries<MonitorRecord>,
    pub steps: usize,
}

pub struct Solver<'a> {
    pub eos: &'a EquationOfState,
    pub transport: &'a TransportCoefficients,
    pub forcing: Option<&'a dyn Forcing>,
    pub floors: Floors,
}

impl<'a> Solver<'a> {
    pub fn new(eos: &'a EquationOfState, transport: &'a TransportCoefficients) -> Self {
        Solver { eos, transport, forcing: None, floors: Floors::default() }
    }

    pub fn with_forcing(mut self, forcing: &'a dyn Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    /// Time derivatives `(dρ, dθ, du)` at `state`.
    pub fn rhs(&self, state: &State) -> Result<Derivative, SolverError> {
        rhs::evaluate(self, state.grid(), state.t, state.rho.values(), state.theta.values(), state.u.values())
    }

    /// One classical RK4 step.
    pub fn step(&self, state: &State, dt: f64) -> Result<State, SolverError> {
        let grid = *state.grid();
        let (r0, t0, u0) = (state.rho.values(), state.theta.values(), state.u.values());
        let eval = |t: f64, r: &[f64], th: &[f64], u: &[Vector]| rhs::evaluate(self, &grid, t, r, th, u);
        let k1 = eval(state.t, r0, t0, u0)?;
        let (r, th, u) = k1.axpy(r0, t0, u0, 0.5 * dt);
        let k2 = eval(state.t + 0.5 * dt, &r, &th, &u)?;
        let (r, th, u) = k2.axpy(r0, t0, u0, 0.5 * dt);
        let k3 = eval(state.t + 0.5 * dt, &r, &th, &u)?;
        let (r, th, u) = k3.axpy(r0, t0, u0, dt);
        let k4 = eval(state.t + dt, &r, &th, &u)?;
        let n = grid.len();
        let mut rho = Vec::with_capacity(n);
        let mut theta = Vec::with_capacity(n);
        let mut vel = Vec::with_capacity(n);
        let w = dt / 6.0;
        for c in 0..n {
            rho.push(r0[c] + w * (k1.rho[c] + 2.0 * k2.rho[c] + 2.0 * k3.rho[c] + k4.rho[c]));
            theta.push(t0[c] + w * (k1.theta[c] + 2.0 * k2.theta[c] + 2.0 * k3.theta[c] + k4.theta[c]));
            vel.push(u0[c] + (k1.u[c] + (k2.u[c] + k3.u[c]) * 2.0 + k4.u[c]) * w);
        }
        let next = State {
            t: state.t + dt,
            rho: ScalarField::new(grid, rho)?,
            theta: ScalarField::new(grid, theta)?,
            u: VectorField::new(grid, vel)?,
        };
        rhs::check_state(self, &grid, next.t, next.rho.values(), next.theta.values(), next.u.values())?;
        Ok(next)
    }

    /// `cfl · min(h/(|u| + c_s), h² ρ / max(μ, (2 - 2/N)μ + λ, κ/e_θ))`.
    pub fn stable_dt(&self, state: &State, cfl: f64) -> Result<f64, SolverError> {
        let grid = state.grid();
        let h = grid.min_h();
        let dim = grid.dim() as f64;
        let mut dt = f64::INFINITY;
        for c in 0..grid.len() {
            let (r, th) = (state.rho.values()[c], state.theta.values()[c]);
            let tp = self.eos.eval(r, th)?;
            let tr = self.transport.eval(r, th);
            let cs = crate::num::sqrt(tp.sound_speed_sq().max(0.0));
            dt = dt.min(h / (state.u.values()[c].norm() + cs));
            let visc = tr.mu.max((2.0 - 2.0 / dim) * tr.mu + tr.lambda).max(tr.kappa / tp.de_dtheta);
            if visc > 0.0 {
                dt = dt.min(h * h * r / visc);
            }
        }
        Ok(cfl * dt)
    }

    pub fn run(&self, init: State, opts: &RunOptions) -> Result<Trajectory, SolverError> {
        if !(opts.final_time > 0.0) || opts.outputs == 0 || !(opts.cfl > 0.0) {
            return Err(SolverError::Options("final_time, cfl and outputs must be positive"));
        }
        let grid = *init.grid();
        rhs::check_state(self, &grid, init.t, init.rho.values(), init.theta.values(), init.u.values())?;
        let mut state = init;
        state.t = 0.0;
        let mut states = TimeSeries::new();
        let mut mons = TimeSeries::new();
        let mut sigma_int = 0.0;
        let mut prev_sigma = monitor::entropy_production_rate(self, &state)?;
        mons.push(0.0, monitor::record(self, &state, 0.0)?)?;
        states.push(0.0, state.clone())?;
        let mut steps = 0;
        for k in 1..=opts.outputs {
            let target = opts.final_time * k as f64 / opts.outputs as f64;
            while state.t < target {
                if steps >= opts.max_steps {
                    return Err(SolverError::Options("max_steps exceeded"));
                }
                let mut dt = self.stable_dt(&state, opts.cfl)?;
                let remaining = target - state.t;
                if dt >= remaining || remaining - dt < 1e-12 * target {
                    dt = remaining;
                }
                let mut next = self.step(&state, dt)?;
                if dt == remaining {
                    next.t = target;
                }
                let sigma = monitor::entropy_production_rate(self, &next)?;
                sigma_int += 0.5 * dt * (sigma + prev_sigma);
                prev_sigma = sigma;
                state = next;
                steps += 1;
                mons.push(state.t, monitor::record(self, &state, sigma_int)?)?;
            }
            states.push(target, state.clone())?;
        }
        Ok(Trajectory { states, monitors: mons, steps })
    }
}

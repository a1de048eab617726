use super::rhs::Frame;
use super::{Solver, SolverError, State, Trajectory};
use crate::field::TimeSeries;
use crate::thermo::stress_from_parts;

/// Global balances of one state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MonitorRecord {
    pub t: f64,
    pub total_mass: f64,
    /// `∫ ½ρ|u|² + ρe`
    pub total_energy: f64,
    /// `∫ ρs`
    pub total_entropy: f64,
    /// `∫_0^t ∫ σ`, trapezoid in time.
    pub entropy_production_integral: f64,
    pub min_rho: f64,
    pub min_theta: f64,
}

pub(crate) fn record(solver: &Solver<'_>, state: &State, sigma_int: f64) -> Result<MonitorRecord, SolverError> {
    let grid = state.grid();
    let vol = grid.cell_volume();
    let mut rec = MonitorRecord {
        t: state.t,
        entropy_production_integral: sigma_int,
        min_rho: f64::INFINITY,
        min_theta: f64::INFINITY,
        ..Default::default()
    };
    for c in 0..grid.len() {
        let r = state.rho.values()[c];
        let th = state.theta.values()[c];
        let tp = solver.eos.eval(r, th)?;
        rec.total_mass += r * vol;
        rec.total_energy += (0.5 * r * state.u.values()[c].norm_sq() + r * tp.e) * vol;
        rec.total_entropy += r * tp.s * vol;
        rec.min_rho = rec.min_rho.min(r);
        rec.min_theta = rec.min_theta.min(th);
    }
    Ok(rec)
}

/// `∫ (1/θ)(S:∇u + κ|∇θ|²/θ)` with the solver's stencils; nonnegative cell by cell.
pub(crate) fn entropy_production_rate(solver: &Solver<'_>, state: &State) -> Result<f64, SolverError> {
    let grid = state.grid();
    let dim = grid.dim();
    let fr = Frame::build(solver, grid, state.rho.values(), state.theta.values(), state.u.values())?;
    let mut total = 0.0;
    for c in 0..grid.len() {
        let (i, j) = grid.coords(c);
        let th = state.theta.values()[c];
        let d = fr.grad_u(i, j).sym();
        let s = stress_from_parts(fr.mu.at(i, j, 0, 0), fr.lambda.at(i, j, 0, 0), &d, dim);
        let gt = fr.stencil.grad(&fr.theta, i, j);
        let sigma = (s.ddot(&d).max(0.0) + fr.kappa.at(i, j, 0, 0) * gt.norm_sq() / th) / th;
        total += sigma;
    }
    Ok(total * grid.cell_volume())
}

/// Conservation and entropy diagnostics of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorReport {
    /// `max_t |E(t) - E(0)| / |E(0)|`
    pub energy_drift: f64,
    /// `max_t |M(t) - M(0)| / M(0)`
    pub mass_drift: f64,
    /// Largest step-to-step decrease of total entropy (0 when nondecreasing).
    pub entropy_decrease: f64,
    /// `∫σ` is nonnegative and nondecreasing at every step.
    pub sigma_nonnegative: bool,
    pub min_rho: f64,
    pub min_theta: f64,
}

pub fn monitors(trajectory: &Trajectory) -> MonitorReport {
    report(&trajectory.monitors)
}

fn report(series: &TimeSeries<MonitorRecord>) -> MonitorReport {
    let recs = series.values();
    let first = recs[0];
    let mut out = MonitorReport {
        energy_drift: 0.0,
        mass_drift: 0.0,
        entropy_decrease: 0.0,
        sigma_nonnegative: true,
        min_rho: f64::INFINITY,
        min_theta: f64::INFINITY,
    };
    let mut prev: Option<MonitorRecord> = None;
    for r in recs {
        out.energy_drift = out.energy_drift.max((r.total_energy - first.total_energy).abs() / first.total_energy.abs());
        out.mass_drift = out.mass_drift.max((r.total_mass - first.total_mass).abs() / first.total_mass.abs());
        out.min_rho = out.min_rho.min(r.min_rho);
        out.min_theta = out.min_theta.min(r.min_theta);
        if !(r.entropy_production_integral >= 0.0) {
            out.sigma_nonnegative = false;
        }
        if let Some(p) = prev {
            out.entropy_decrease = out.entropy_decrease.max(p.total_entropy - r.total_entropy);
            if r.entropy_production_integral < p.entropy_production_integral {
                out.sigma_nonnegative = false;
            }
        }
        prev = Some(*r);
    }
    out
}

use alloc::vec::Vec;

use super::{DefectData, DmvError, MeasureField};
use crate::field::{
    cumulative_trapezoid, gradient, gradient_vector, korn_poincare_field_check, BoundaryKind, FieldError, KornRatio,
    TimeSeries, VectorField,
};
use crate::solver::State;
use crate::thermo::{EquationOfState, TransportCoefficients};

/// Smallest `C` with `TV(ν_C)(t) ≤ C D(t)` at the stored times.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationBound {
    pub tv: Vec<f64>,
    pub d: Vec<f64>,
    /// `None` when no finite constant works.
    pub c: Option<f64>,
    pub pass: bool,
    /// First stored time index with `TV > 0` but `D ≤ zero_tol`.
    pub violation: Option<usize>,
}

/// `D(t) ≤ zero_tol` counts as a vanishing defect.
pub fn concentration_bound_check(defect: &DefectData, zero_tol: f64) -> Result<ConcentrationBound, DmvError> {
    let ds = defect.d_series.as_ref().ok_or(DmvError::Ensemble("concentration defect series missing"))?;
    let d = ds.values().to_vec();
    let tv = defect.total_variation(d.len());
    let mut c: f64 = 0.0;
    let mut violation = None;
    for (k, (&t, &dk)) in tv.iter().zip(&d).enumerate() {
        if t == 0.0 {
            continue;
        }
        if dk <= zero_tol {
            violation.get_or_insert(k);
        } else {
            c = c.max(t / dk);
        }
    }
    let pass = violation.is_none();
    Ok(ConcentrationBound { tv, d, c: if pass { Some(c) } else { None }, pass, violation })
}

/// Measure-level Korn–Poincaré quotients over `[0, τ_last]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KornMeasureReport {
    /// `∫∫⟨|u - ũ|²⟩` against `∫∫⟨|T[D_u] - T[∇ũ]|²⟩`.
    pub g12: KornRatio,
    /// `∫∫⟨|u - ⟨u⟩|²⟩` against `∫∫⟨|T[D_u] - ⟨T[D_u]⟩|²⟩`.
    pub g12a: KornRatio,
    /// `∫∫|⟨u⟩ - ũ|²` against `∫∫|⟨T[D_u]⟩ - T[∇ũ]|²`.
    pub mean: KornRatio,
    /// Largest relative mismatch of `g12 = g12a + mean`, side by side.
    pub decomposition_error: f64,
}

pub fn korn_poincare_measure_check(
    field: &MeasureField,
    reference: &TimeSeries<VectorField>,
) -> Result<KornMeasureReport, DmvError> {
    let grid = *field.grid();
    let dim = grid.dim();
    if reference.len() != field.len() {
        return Err(DmvError::Slice { expected: field.len(), got: reference.len() });
    }
    if grid.boundary() != BoundaryKind::NoSlipNoFlux {
        return Err(FieldError::NeedsWalls.into());
    }
    let mut series = [(); 6].map(|_| Vec::with_capacity(field.len()));
    for (k, ut) in reference.values().iter().enumerate() {
        if !ut.grid().same_shape(&grid) {
            return Err(FieldError::GridMismatch.into());
        }
        korn_poincare_field_check(ut)?;
        let gt = gradient_vector(ut);
        let mut sums = [0.0; 6];
        for c in 0..grid.len() {
            let m = field.measure(k, c);
            let uref = ut.values()[c];
            let tref = gt.values()[c].traceless(dim);
            let mean_u = m.expectation_vector(|a| a.u);
            let mean_t = m.expectation_tensor(|a| a.d_u.traceless(dim));
            sums[0] += m.expectation(|a| (a.u - uref).norm_sq());
            sums[1] += m.expectation(|a| (a.d_u.traceless(dim) - tref).norm_sq());
            sums[2] += m.expectation(|a| (a.u - mean_u).norm_sq());
            sums[3] += m.expectation(|a| (a.d_u.traceless(dim) - mean_t).norm_sq());
            sums[4] += (mean_u - uref).norm_sq();
            sums[5] += (mean_t - tref).norm_sq();
        }
        for (s, v) in series.iter_mut().zip(sums) {
            s.push(v * grid.cell_volume());
        }
    }
    let total = |v: &[f64]| cumulative_trapezoid(field.times(), v).last().copied().unwrap_or(0.0);
    let t: Vec<f64> = series.iter().map(|s| total(s)).collect();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    Ok(KornMeasureReport {
        g12: KornRatio::from_parts(t[0], t[1]),
        g12a: KornRatio::from_parts(t[2], t[3]),
        mean: KornRatio::from_parts(t[4], t[5]),
        decomposition_error: rel(t[0], t[2] + t[4]).max(rel(t[1], t[3] + t[5])),
    })
}

/// Terms of the uniform bound for one ensemble (maximum over members).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBoundReport {
    /// `sup_t ∫ (ρ + ρ|u|² + ρe + ρ|s|)`
    pub sup_integral: f64,
    /// `∫∫ (μ/(2θ)) |T[∇u]|² + (λ/θ) |div u|²`
    pub viscous: f64,
    /// `∫∫ κ |∇ log θ|²`
    pub thermal: f64,
}

impl UniformBoundReport {
    pub fn terms(&self) -> [f64; 3] {
        [self.sup_integral, self.viscous, self.thermal]
    }

    /// Largest relative deviation of any term from its value in the first report.
    pub fn family_spread(reports: &[UniformBoundReport]) -> f64 {
        let Some(first) = reports.first() else { return 0.0 };
        let mut spread: f64 = 0.0;
        for r in reports {
            for (a, b) in r.terms().iter().zip(first.terms()) {
                let scale = b.abs().max(1e-300);
                spread = spread.max((a - b).abs() / scale);
            }
        }
        spread
    }
}

pub fn uniform_bound_report(
    runs: &[TimeSeries<State>],
    eos: &EquationOfState,
    tc: &TransportCoefficients,
) -> Result<UniformBoundReport, DmvError> {
    if runs.is_empty() {
        return Err(DmvError::Empty);
    }
    let mut out = UniformBoundReport { sup_integral: 0.0, viscous: 0.0, thermal: 0.0 };
    for run in runs {
        let mut visc = Vec::with_capacity(run.len());
        let mut heat = Vec::with_capacity(run.len());
        for s in run.values() {
            let grid = s.grid();
            let dim = grid.dim();
            let vol = grid.cell_volume();
            let gu = gradient_vector(&s.u);
            let gt = gradient(&s.theta);
            let (mut mass, mut v, mut h) = (0.0, 0.0, 0.0);
            for c in 0..grid.len() {
                let (r, th, u) = (s.rho.values()[c], s.theta.values()[c], s.u.values()[c]);
                let tp = eos.eval(r, th)?;
                let tr = tc.eval(r, th);
                mass += r + r * u.norm_sq() + r * tp.e + r * tp.s.abs();
                let g = gu.values()[c];
                v += tr.mu / (2.0 * th) * g.traceless(dim).norm_sq() + tr.lambda / th * g.trace() * g.trace();
                h += tr.kappa * gt.values()[c].norm_sq() / (th * th);
            }
            out.sup_integral = out.sup_integral.max(mass * vol);
            visc.push(v * vol);
            heat.push(h * vol);
        }
        let last = |v: &[f64]| cumulative_trapezoid(run.times(), v).last().copied().unwrap_or(0.0);
        out.viscous = out.viscous.max(last(&visc));
        out.thermal = out.thermal.max(last(&heat));
    }
    Ok(out)
}

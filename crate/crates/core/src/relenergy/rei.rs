use alloc::vec::Vec;

use super::functional::{relative_energy, Reference, ReferenceState};
use super::RelEnergyError;
use crate::dmv::{energy_check, slice_brackets, DefectData, MeasureField, Model};
use crate::field::{cumulative_trapezoid, TimeSeries};
use crate::linalg::Tensor;
use crate::solver::{ManufacturedSolution, StrongPoint};

/// Smooth reference solution sampled pointwise with its first derivatives.
pub trait StrongTriple: Sync {
    fn at(&self, t: f64, x: [f64; 2]) -> StrongPoint;
}

impl StrongTriple for ManufacturedSolution {
    fn at(&self, t: f64, x: [f64; 2]) -> StrongPoint {
        self.point(t, x)
    }
}

impl<F: Fn(f64, [f64; 2]) -> StrongPoint + Sync> StrongTriple for F {
    fn at(&self, t: f64, x: [f64; 2]) -> StrongPoint {
        self(t, x)
    }
}

fn reference_of(model: &Model<'_>, p: &StrongPoint) -> Result<Reference, RelEnergyError> {
    Reference::new(model.eos, ReferenceState { rho: p.rho, theta: p.theta, u: p.u })
}

/// `∫⟨V_τ; E(· | ρ̃, θ̃, ũ)⟩` at every stored time, strong values taken at cell centers.
pub fn relative_energy_integral(
    field: &MeasureField,
    model: &Model<'_>,
    strong: &dyn StrongTriple,
) -> Result<Vec<f64>, RelEnergyError> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(field.len());
    for (k, &t) in field.times().iter().enumerate() {
        let mut sum = 0.0;
        for c in 0..grid.len() {
            let r = reference_of(model, &strong.at(t, grid.center(c)))?;
            let m = field.measure(k, c);
            for (a, &w) in m.atoms.iter().zip(m.weights) {
                if w != 0.0 {
                    sum += w * relative_energy(model.eos, a.rho, a.theta, a.u, &r)?;
                }
            }
        }
        out.push(sum * grid.cell_volume());
    }
    Ok(out)
}

/// Concentration defect from `defect.d_series`, or from the energy balance of the field.
pub fn defect_series(field: &MeasureField, defect: &DefectData, model: &Model<'_>) -> Result<Vec<f64>, RelEnergyError> {
    match &defect.d_series {
        Some(d) if d.len() != field.len() => {
            Err(crate::dmv::DmvError::Slice { expected: field.len(), got: d.len() }.into())
        }
        Some(d) => Ok(d.values().to_vec()),
        None => Ok(energy_check(field, model, f64::INFINITY).d_series.values().to_vec()),
    }
}

/// `H(τ) = ∫⟨V_τ; E⟩ + D(τ)`
pub fn h_total(
    field: &MeasureField,
    defect: &DefectData,
    model: &Model<'_>,
    strong: &dyn StrongTriple,
) -> Result<TimeSeries<f64>, RelEnergyError> {
    let e = relative_energy_integral(field, model, strong)?;
    let d = defect_series(field, defect, model)?;
    let h = e.iter().zip(&d).map(|(a, b)| a + b).collect();
    Ok(TimeSeries::from_parts(field.times().to_vec(), h)?)
}

/// Time integrals `∫_0^τ ∫ ...` of the dissipative terms, one entry per stored time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DissipationTerms {
    /// `⟨(μ/2)|√(θ̃/θ)T[D_u] - √(θ/θ̃)T[∇ũ]|²⟩`
    pub shear_square: Vec<f64>,
    /// `⟨λ|√(θ̃/θ) tr D_u - √(θ/θ̃) div ũ|²⟩`
    pub bulk_square: Vec<f64>,
    /// `θ̃⟨κ|D_θ/θ - ∇ log θ̃|²⟩`
    pub thermal_square: Vec<f64>,
    /// `θ̃⟨S:D_u/θ⟩`
    pub viscous: Vec<f64>,
    /// `θ̃⟨κ|D_θ|²/θ²⟩`
    pub thermal: Vec<f64>,
    /// `⟨S⟩:∇ũ`
    pub mixed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReiReport {
    pub h_series: TimeSeries<f64>,
    pub energy_integral: Vec<f64>,
    pub d_series: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `rhs - lhs`
    pub slack: Vec<f64>,
    pub slack_min: f64,
    /// `-∫_0^τ ∫ ∇ũ : dν_C`, already contained in `rhs`.
    pub concentration_pairing: Vec<f64>,
    pub dissipation: DissipationTerms,
}

impl ReiReport {
    pub fn times(&self) -> &[f64] {
        self.h_series.times()
    }

    pub fn pass(&self, tolerance: f64) -> bool {
        self.slack_min >= -tolerance
    }
}

/// Relative energy inequality for a measure field against a smooth triple.
///
/// Left side: `[∫⟨E⟩]_0^τ + D(τ) + ∫∫ θ̃⟨(S:D_u + κ|D_θ|²/θ)/θ⟩ - ∫∫ ⟨S⟩:∇ũ`.
/// Right side: the remaining terms of the inequality, including the source terms when
/// `model` carries a forcing, and `-∫∫ ∇ũ : dν_C`.
pub fn rei_residual(
    field: &MeasureField,
    defect: &DefectData,
    model: &Model<'_>,
    strong: &dyn StrongTriple,
) -> Result<ReiReport, RelEnergyError> {
    defect.validate(field)?;
    let grid = *field.grid();
    let dim = grid.dim();
    let vol = grid.cell_volume();
    let n = field.len();
    let times = field.times().to_vec();
    let e_int = relative_energy_integral(field, model, strong)?;
    let d = defect_series(field, defect, model)?;
    let mut by_slice: Vec<Vec<(usize, Tensor)>> = alloc::vec![Vec::new(); n];
    for a in &defect.nu_c {
        by_slice[a.t_index].push((a.cell, a.mass));
    }
    let mut lhs_rate = Vec::with_capacity(n);
    let mut rhs_rate = Vec::with_capacity(n);
    let mut pair_rate = Vec::with_capacity(n);
    let mut rates = [(); 6].map(|_| Vec::with_capacity(n));
    for (k, &t) in times.iter().enumerate() {
        let br = slice_brackets(model, field, k);
        let mut grads = Vec::with_capacity(grid.len());
        let (mut l, mut r) = (0.0, 0.0);
        let mut sq = [0.0; 6];
        for (c, b) in br.iter().enumerate() {
            let p = strong.at(t, grid.center(c));
            let rf = reference_of(model, &p)?;
            let tp = &rf.thermo;
            let (rr, tr, ur) = (p.rho, p.theta, p.u);
            let g = p.grad_u;
            let div = g.trace();
            let s_ref = tp.s;
            let p_t = tp.dp_drho * p.rho_t + tp.dp_dtheta * p.theta_t;
            let grad_p = p.grad_rho * tp.dp_drho + p.grad_theta * tp.dp_dtheta;

            l += tr * b.diss - b.stress.ddot(&g);

            let mut convect = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    convect += (ur.0[i] * b.m.0[j] - b.mm.0[i][j]) * g.0[i][j];
                }
            }
            let f = &b.source;
            r += -(b.rho_s * p.theta_t + b.s_flux.dot(&p.grad_theta))
                + (ur * b.rho - b.m).dot(&p.u_t)
                + convect
                - b.p * div
                + (b.rho * p.theta_t + b.m.dot(&p.grad_theta)) * s_ref
                + (rr - b.rho) * p_t / rr
                - b.m.dot(&grad_p) / rr
                + b.s_energy
                - f.momentum.dot(&ur)
                + f.mass * (0.5 * ur.norm_sq() - rf.chemical)
                - tr * b.s_entropy;

            let tg = g.traceless(dim);
            let lnt = p.grad_theta * (1.0 / tr);
            let m = field.measure(k, c);
            for (a, &w) in m.atoms.iter().zip(m.weights) {
                if w == 0.0 {
                    continue;
                }
                let tc = model.transport.eval(a.rho, a.theta);
                let th = a.theta.max(model.theta_min);
                let td = a.d_u.traceless(dim);
                let ra = crate::num::sqrt(tr / th);
                let rb = crate::num::sqrt(th / tr);
                let bulk = ra * a.d_u.trace() - rb * div;
                let q = a.d_theta * (1.0 / th) - lnt;
                let stress = crate::thermo::stress_from_parts(tc.mu, tc.lambda, &a.d_u, dim);
                sq[0] += w * 0.5 * tc.mu * (td * ra - tg * rb).norm_sq();
                sq[1] += w * tc.lambda * bulk * bulk;
                sq[2] += w * tr * tc.kappa * q.norm_sq();
                sq[3] += w * tr * stress.ddot(&a.d_u) / th;
                sq[4] += w * tr * tc.kappa * a.d_theta.norm_sq() / (th * th);
                sq[5] += w * stress.ddot(&g);
            }
            grads.push(g);
        }
        let pairing: f64 = by_slice[k].iter().map(|(cell, mass)| -mass.ddot(&grads[*cell])).sum();
        lhs_rate.push(l * vol);
        rhs_rate.push(r * vol + pairing);
        pair_rate.push(pairing);
        for (s, v) in rates.iter_mut().zip(sq) {
            s.push(v * vol);
        }
    }
    let lhs_int = cumulative_trapezoid(&times, &lhs_rate);
    let rhs = cumulative_trapezoid(&times, &rhs_rate);
    let concentration_pairing = cumulative_trapezoid(&times, &pair_rate);
    let lhs: Vec<f64> = (0..n).map(|k| e_int[k] - e_int[0] + d[k] + lhs_int[k]).collect();
    let slack: Vec<f64> = rhs.iter().zip(&lhs).map(|(r, l)| r - l).collect();
    let slack_min = slack.iter().skip(1).copied().fold(f64::INFINITY, f64::min);
    let [shear_square, bulk_square, thermal_square, viscous, thermal, mixed] =
        rates.map(|r| cumulative_trapezoid(&times, &r));
    let h = e_int.iter().zip(&d).map(|(a, b)| a + b).collect();
    Ok(ReiReport {
        h_series: TimeSeries::from_parts(times.clone(), h)?,
        energy_integral: e_int,
        d_series: d,
        lhs,
        rhs,
        slack,
        slack_min,
        concentration_pairing,
        dissipation: DissipationTerms { shear_square, bulk_square, thermal_square, viscous, thermal, mixed },
    })
}

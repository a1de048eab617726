//! Weak identities and inequalities paired with a test dictionary.
//!
//! Every residual has the form `[∫ A ψ T]_0^τ - ∫_0^τ (B T + C T')` where `A`, `B`, `C`
//! are spatial integrals of cell expectations against the cell averages of `ψ`, `∇ψ`.

use alloc::string::String;
use alloc::vec::Vec;

use super::dictionary::{Spatial, SpatialTable, TestFunction, TestShape};
use super::{DefectData, DmvError, MeasureField};
use crate::field::{cumulative_trapezoid, TimeSeries};
use crate::linalg::{Tensor, Vector};
use crate::solver::{Forcing, Source};
use crate::thermo::{
    entropy_production_density, stress_from_parts, EquationOfState, TransportCoefficients, DEFAULT_THETA_MIN,
};

/// Constitutive model and optional volume sources the measure is checked against.
#[derive(Clone, Copy)]
pub struct Model<'a> {
    pub eos: &'a EquationOfState,
    pub transport: &'a TransportCoefficients,
    pub forcing: Option<&'a dyn Forcing>,
    /// Floor for `θ` in `1/θ` factors of the dissipation.
    pub theta_min: f64,
}

impl<'a> Model<'a> {
    pub fn new(eos: &'a EquationOfState, transport: &'a TransportCoefficients) -> Self {
        Model { eos, transport, forcing: None, theta_min: DEFAULT_THETA_MIN }
    }

    pub fn with_forcing(mut self, forcing: &'a dyn Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub test_id: String,
    pub tau: f64,
    pub value: f64,
}

/// Residuals of one condition over all tests and stored `τ > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub residuals: Vec<Residual>,
    pub tolerance: f64,
    pub pass: bool,
    /// `∫_0^τ ∫ σ_extra φ` aligned with `residuals`; empty when no surplus was declared.
    pub surplus_pairing: Vec<f64>,
}

impl CheckOutcome {
    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().map(|r| r.value.abs()).fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
    }

    pub fn min(&self) -> f64 {
        self.residuals.iter().map(|r| r.value).fold(f64::INFINITY, f64::min)
    }

    fn identity(name: &'static str, residuals: Vec<Residual>, tolerance: f64) -> Self {
        let pass = residuals.iter().all(|r| r.value.abs() <= tolerance);
        CheckOutcome { name, residuals, tolerance, pass, surplus_pairing: Vec::new() }
    }
}

/// Cell expectations of the observables entering the weak formulation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Brackets {
    pub rho: f64,
    /// `⟨ρu⟩`
    pub m: Vector,
    /// `⟨ρu ⊗ u⟩`
    pub mm: Tensor,
    pub p: f64,
    /// `⟨S(ρ, θ, D_u)⟩`
    pub stress: Tensor,
    pub rho_s: f64,
    /// `⟨ρsu - (κ/θ) D_θ⟩`
    pub s_flux: Vector,
    /// `⟨(1/θ)(S:D_u + κ|D_θ|²/θ)⟩`
    pub diss: f64,
    /// `⟨½ρ|u|² + ρe⟩`
    pub energy: f64,
    pub u: Vector,
    pub d_u: Tensor,
    pub theta: f64,
    pub d_theta: Vector,
    pub source: Source,
    /// `⟨F_e + u·F_m - ½|u|² F_ρ⟩`
    pub s_energy: f64,
    /// `⟨(F_e - (e + p/ρ - θs) F_ρ)/θ⟩`
    pub s_entropy: f64,
}

pub(crate) fn slice_brackets(model: &Model<'_>, field: &MeasureField, k: usize) -> Vec<Brackets> {
    let grid = field.grid();
    let dim = grid.dim();
    let t = field.times()[k];
    (0..grid.len())
        .map(|c| {
            let src = model.forcing.map(|f| f.source(t, grid.center(c))).unwrap_or_default();
            let m = field.measure(k, c);
            let mut b = Brackets { source: src, ..Default::default() };
            for (a, &w) in m.atoms.iter().zip(m.weights) {
                if w == 0.0 {
                    continue;
                }
                let (r, th) = (a.rho, a.theta);
                let tr = model.transport.eval(r, th);
                let stress = stress_from_parts(tr.mu, tr.lambda, &a.d_u, dim);
                let (p, re, rs, s_ent) = match model.eos.eval(r, th) {
                    Ok(tp) => (tp.p, r * tp.e, r * tp.s, src.entropy(&tp)),
                    Err(_) => (
                        model.eos.pressure_extended(r, th).unwrap_or(f64::NAN),
                        model.eos.energy_density(r, th).unwrap_or(f64::NAN),
                        model.eos.entropy_density(r, th).unwrap_or(f64::NAN),
                        if src.is_zero() { 0.0 } else { f64::NAN },
                    ),
                };
                let heat_flux = if th > 0.0 {
                    a.d_theta * (tr.kappa / th)
                } else if a.d_theta.norm_sq() == 0.0 || tr.kappa == 0.0 {
                    Vector::ZERO
                } else {
                    Vector([f64::INFINITY, f64::INFINITY])
                };
                let diss = entropy_production_density(model.transport, r, th, &a.d_u, &a.d_theta, dim, model.theta_min)
                    .unwrap_or(f64::NAN);
                let mu = a.u * r;
                b.rho += w * r;
                b.m += mu * w;
                b.mm += mu.outer(&a.u) * w;
                b.p += w * p;
                b.stress += stress * w;
                b.rho_s += w * rs;
                b.s_flux += (a.u * rs - heat_flux) * w;
                b.diss += w * diss;
                b.energy += w * (0.5 * r * a.u.norm_sq() + re);
                b.u += a.u * w;
                b.d_u += a.d_u * w;
                b.theta += w * th;
                b.d_theta += a.d_theta * w;
                b.s_energy += w * src.total_energy(&a.u);
                b.s_entropy += w * s_ent;
            }
            b
        })
        .collect()
}

/// Per-slice `(A, B, C)` for one spatial factor and direction.
type Integrand<'f> = dyn Fn(&Brackets, f64, &Vector, TestShape) -> (f64, f64, f64) + 'f;

struct Key {
    space: Spatial,
    shape: TestShape,
    table: SpatialTable,
}

fn keys(field: &MeasureField, tests: &[TestFunction]) -> (Vec<Key>, Vec<usize>) {
    let mut keys: Vec<Key> = Vec::new();
    let mut index = Vec::with_capacity(tests.len());
    for t in tests {
        let pos = keys.iter().position(|k| k.space == t.space && k.shape == t.shape);
        let i = match pos {
            Some(i) => i,
            None => {
                keys.push(Key { space: t.space, shape: t.shape, table: t.space.table(field.grid()) });
                keys.len() - 1
            }
        };
        index.push(i);
    }
    (keys, index)
}

/// `data[key][slice] = (A, B, C)`.
fn integrate_keys(
    model: &Model<'_>,
    field: &MeasureField,
    keys: &[Key],
    integrand: &Integrand<'_>,
    extra: Option<&dyn Fn(usize, &Key) -> f64>,
) -> Vec<Vec<(f64, f64, f64)>> {
    let vol = field.grid().cell_volume();
    let mut data = alloc::vec![Vec::with_capacity(field.len()); keys.len()];
    for k in 0..field.len() {
        let br = slice_brackets(model, field, k);
        for (q, key) in keys.iter().enumerate() {
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for (cell, bc) in br.iter().enumerate() {
                let (x, y, z) = integrand(bc, key.table.value[cell], &key.table.grad[cell], key.shape);
                a += x;
                b += y;
                c += z;
            }
            let add = extra.map(|f| f(k, key)).unwrap_or(0.0);
            data[q].push((a * vol, b * vol + add, c * vol));
        }
    }
    data
}

/// `[A T]_0^τ - ∫_0^τ (B T + C T')` at every stored `τ > 0`.
fn combine(times: &[f64], data: &[(f64, f64, f64)], test: &TestFunction, t_ref: f64) -> Vec<f64> {
    let tf: Vec<(f64, f64)> = times.iter().map(|&t| test.time_factor(t, t_ref)).collect();
    let g: Vec<f64> = data.iter().zip(&tf).map(|(d, f)| d.1 * f.0 + d.2 * f.1).collect();
    let cum = cumulative_trapezoid(times, &g);
    (1..times.len()).map(|m| data[m].0 * tf[m].0 - data[0].0 * tf[0].0 - cum[m]).collect()
}

fn collect(
    field: &MeasureField,
    tests: &[TestFunction],
    index: &[usize],
    data: &[Vec<(f64, f64, f64)>],
    t_ref: f64,
) -> Vec<Residual> {
    let times = field.times();
    let mut out = Vec::with_capacity(tests.len() * times.len().saturating_sub(1));
    for (t, &q) in tests.iter().zip(index) {
        for (m, v) in combine(times, &data[q], t, t_ref).into_iter().enumerate() {
            out.push(Residual { test_id: t.id.clone(), tau: times[m + 1], value: v });
        }
    }
    out
}

/// Velocity and temperature compatibility:
/// `r_T = ∫∫ ⟨u⟩·div T + ⟨D_u⟩:T` for symmetric tensors and
/// `r_φ = ∫∫ ⟨θ⟩ div φ + ⟨D_θ⟩·φ` for vectors with `φ·n = 0`.
pub fn compatibility_residual(
    field: &MeasureField,
    model: &Model<'_>,
    tensors: &[TestFunction],
    vectors: &[TestFunction],
    t_ref: f64,
    tolerance: f64,
) -> CheckOutcome {
    let integrand = |b: &Brackets, v: f64, g: &Vector, shape: TestShape| match shape {
        TestShape::SymTensor(..) => {
            let e = shape.tensor();
            (0.0, -(b.u.dot(&e.apply(g)) + v * b.d_u.ddot(&e)), 0.0)
        }
        TestShape::Vector(c) => (0.0, -(b.theta * g.0[c] + b.d_theta.0[c] * v), 0.0),
        TestShape::Scalar => (0.0, 0.0, 0.0),
    };
    let all: Vec<TestFunction> = tensors.iter().chain(vectors).cloned().collect();
    let (ks, idx) = keys(field, &all);
    let data = integrate_keys(model, field, &ks, &integrand, None);
    CheckOutcome::identity("compatibility", collect(field, &all, &idx, &data, t_ref), tolerance)
}

/// `[∫⟨ρ⟩φ]_0^τ - ∫∫ (⟨ρ⟩∂_tφ + ⟨ρu⟩·∇φ + F_ρ φ)`.
pub fn continuity_residual(
    field: &MeasureField,
    model: &Model<'_>,
    tests: &[TestFunction],
    t_ref: f64,
    tolerance: f64,
) -> CheckOutcome {
    let integrand = |b: &Brackets, v: f64, g: &Vector, _: TestShape| {
        (b.rho * v, b.m.dot(g) + b.source.mass * v, b.rho * v)
    };
    let (ks, idx) = keys(field, tests);
    let data = integrate_keys(model, field, &ks, &integrand, None);
    CheckOutcome::identity("continuity", collect(field, tests, &idx, &data, t_ref), tolerance)
}

/// `[∫⟨ρu⟩·φ]_0^τ - ∫∫ (⟨ρu⟩·∂_tφ + ⟨ρu⊗u⟩:∇φ + ⟨p⟩ div φ - ⟨S⟩:∇φ + F_m·φ) - ∫∫ ∇φ : dν_C`.
pub fn momentum_residual(
    field: &MeasureField,
    defect: &DefectData,
    model: &Model<'_>,
    tests: &[TestFunction],
    t_ref: f64,
    tolerance: f64,
) -> Result<CheckOutcome, DmvError> {
    defect.validate(field)?;
    let integrand = |b: &Brackets, v: f64, g: &Vector, shape: TestShape| {
        let c = match shape {
            TestShape::Vector(c) => c,
            _ => return (0.0, 0.0, 0.0),
        };
        let flux = b.mm.0[c][0] * g.0[0] + b.mm.0[c][1] * g.0[1];
        let visc = b.stress.0[c][0] * g.0[0] + b.stress.0[c][1] * g.0[1];
        (b.m.0[c] * v, flux + b.p * g.0[c] - visc + b.source.momentum.0[c] * v, b.m.0[c] * v)
    };
    let mut by_slice: Vec<Vec<(usize, Tensor)>> = alloc::vec![Vec::new(); field.len()];
    for a in &defect.nu_c {
        by_slice[a.t_index].push((a.cell, a.mass));
    }
    let pairing = |k: usize, key: &Key| -> f64 {
        let c = match key.shape {
            TestShape::Vector(c) => c,
            _ => return 0.0,
        };
        by_slice[k]
            .iter()
            .map(|(cell, m)| {
                let g = key.table.grad[*cell];
                m.0[c][0] * g.0[0] + m.0[c][1] * g.0[1]
            })
            .sum()
    };
    let (ks, idx) = keys(field, tests);
    let data = integrate_keys(model, field, &ks, &integrand, Some(&pairing));
    Ok(CheckOutcome::identity("momentum", collect(field, tests, &idx, &data, t_ref), tolerance))
}

/// Total energy and concentration defect.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    /// `∫⟨½ρ|u|² + ρe⟩`
    pub e_tot: TimeSeries<f64>,
    /// `∫_0^τ ∫⟨S_E⟩`, zero without forcing.
    pub source_integral: Vec<f64>,
    /// `D(τ) = E_tot(0) + ∫_0^τ∫⟨S_E⟩ - E_tot(τ)`
    pub d_series: TimeSeries<f64>,
    pub tolerance: f64,
    /// `D(τ) ≥ -tolerance` at every stored time.
    pub pass: bool,
}

pub fn energy_check(field: &MeasureField, model: &Model<'_>, tolerance: f64) -> EnergyReport {
    let vol = field.grid().cell_volume();
    let mut e = Vec::with_capacity(field.len());
    let mut src = Vec::with_capacity(field.len());
    for k in 0..field.len() {
        let br = slice_brackets(model, field, k);
        e.push(br.iter().map(|b| b.energy).sum::<f64>() * vol);
        src.push(br.iter().map(|b| b.s_energy).sum::<f64>() * vol);
    }
    let times = field.times().to_vec();
    let cum = cumulative_trapezoid(&times, &src);
    let d: Vec<f64> = e.iter().zip(&cum).map(|(ek, sk)| e[0] + sk - ek).collect();
    let pass = d.iter().all(|v| *v >= -tolerance);
    EnergyReport {
        e_tot: TimeSeries::from_parts(times.clone(), e).expect("field times"),
        source_integral: cum,
        d_series: TimeSeries::from_parts(times, d).expect("field times"),
        tolerance,
        pass,
    }
}

/// Entropy slack `[∫⟨ρs⟩φ]_0^τ - ∫∫ (⟨ρs⟩∂_tφ + ⟨ρsu - (κ/θ)D_θ⟩·∇φ) - ∫∫ ⟨σ_V⟩φ - ∫∫ ⟨S_s⟩φ`
/// for nonnegative tests, `σ_V` being the dissipation expectation. Passes when every
/// slack is `≥ -tolerance`.
pub fn entropy_inequality_residual(
    field: &MeasureField,
    defect: &DefectData,
    model: &Model<'_>,
    tests: &[TestFunction],
    t_ref: f64,
    tolerance: f64,
) -> Result<CheckOutcome, DmvError> {
    defect.validate(field)?;
    let integrand = |b: &Brackets, v: f64, g: &Vector, _: TestShape| {
        (b.rho_s * v, b.s_flux.dot(g) + b.diss * v + b.s_entropy * v, b.rho_s * v)
    };
    let (ks, idx) = keys(field, tests);
    let data = integrate_keys(model, field, &ks, &integrand, None);
    let residuals = collect(field, tests, &idx, &data, t_ref);
    let mut surplus_pairing = Vec::new();
    if let Some(sigma) = &defect.sigma_extra {
        let vol = field.grid().cell_volume();
        for (t, &q) in tests.iter().zip(&idx) {
            let per_slice: Vec<(f64, f64, f64)> = sigma
                .iter()
                .map(|s| {
                    let v: f64 = s.values().iter().zip(&ks[q].table.value).map(|(a, b)| a * b).sum();
                    (0.0, -v * vol, 0.0)
                })
                .collect();
            surplus_pairing.extend(combine(field.times(), &per_slice, t, t_ref));
        }
    }
    let pass = residuals.iter().all(|r| r.value >= -tolerance);
    Ok(CheckOutcome { name: "entropy", residuals, tolerance, pass, surplus_pairing })
}

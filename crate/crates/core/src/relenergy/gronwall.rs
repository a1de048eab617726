use alloc::vec::Vec;

use super::rei::{h_total, StrongTriple};
use super::RelEnergyError;
use crate::dmv::{concentration_bound_check, DefectData, MeasureField, Model, PhasePoint};
use crate::field::TimeSeries;
use crate::num;
use crate::thermo::{EquationOfState, TransportCoefficients};

/// Hypothesis set of one uniqueness theorem, with the constants of its support conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theorem {
    /// `δ < ρ, θ < 1/δ` on every atom.
    Tg1 { delta: f64 },
    /// Constant `μ, κ`; `θ ≤ θ̄`, `|u| ≤ ū` on every atom.
    T1 { theta_max: f64, u_max: f64 },
    /// Perfect gas, `μ = μ0 + μ1θ`; `|s| ≤ s̄` on every atom.
    T2 { s_max: f64 },
    /// Monoatomic gas with `aθ²` radiation, `μ = μ0 + μ1θ`.
    T3,
}

impl Theorem {
    pub fn name(&self) -> &'static str {
        match self {
            Theorem::Tg1 { .. } => "TG1",
            Theorem::T1 { .. } => "T1",
            Theorem::T2 { .. } => "T2",
            Theorem::T3 => "T3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallOptions {
    /// Floor under which `H` is indistinguishable from zero.
    pub tolerance: f64,
    /// Allowed distance of initial atoms from the strong data for a Dirac initial slice.
    pub initial_tolerance: f64,
    /// Constant for the `≲` growth conditions checked on atoms.
    pub structure_constant: f64,
    /// Relative margin in `H(τ) ≤ H(0) e^{Cτ}(1 + margin) + tolerance`.
    pub margin: f64,
    /// `D(τ) ≤ zero_defect` counts as a vanishing concentration defect.
    pub zero_defect: f64,
}

impl Default for GronwallOptions {
    fn default() -> Self {
        GronwallOptions {
            tolerance: 1e-12,
            initial_tolerance: 1e-12,
            structure_constant: 100.0,
            margin: 0.2,
            zero_defect: 1e-14,
        }
    }
}

/// Location and offending value of a failed atom condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub t_index: usize,
    pub cell: usize,
    pub atom: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub pass: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    pub theorem: Theorem,
    pub hypotheses: Vec<HypothesisCheck>,
    /// All support and structural hypotheses hold.
    pub hypotheses_pass: bool,
    /// The first slice is a Dirac measure at the strong data.
    pub dirac_initial: bool,
    pub h_series: TimeSeries<f64>,
    pub c_fit: f64,
    pub bound_pass: bool,
    /// First stored time violating the exponential bound.
    pub bound_violation: Option<usize>,
    pub pass: bool,
}

/// Least-squares slope through the origin of `log max(H(τ), tol) - log max(H(0), tol)`.
pub fn gronwall_fit(times: &[f64], h: &[f64], tol: f64) -> f64 {
    let (Some(&t0), Some(&h0)) = (times.first(), h.first()) else { return 0.0 };
    let base = num::ln(h0.max(tol));
    let (mut num_, mut den) = (0.0, 0.0);
    for (&t, &v) in times.iter().zip(h).skip(1) {
        let dt = t - t0;
        num_ += dt * (num::ln(v.max(tol)) - base);
        den += dt * dt;
    }
    if den > 0.0 { num_ / den } else { 0.0 }
}

fn atom_check<F>(field: &MeasureField, name: &'static str, mut bad: F) -> HypothesisCheck
where
    F: FnMut(&PhasePoint) -> Option<f64>,
{
    for k in 0..field.len() {
        let (offsets, atoms, weights) = field.slice_parts(k);
        for c in 0..offsets.len() - 1 {
            for i in offsets[c]..offsets[c + 1] {
                if weights[i] == 0.0 {
                    continue;
                }
                if let Some(value) = bad(&atoms[i]) {
                    let witness = Witness { t_index: k, cell: c, atom: i - offsets[c], value };
                    return HypothesisCheck { name, pass: false, witness: Some(witness) };
                }
            }
        }
    }
    HypothesisCheck { name, pass: true, witness: None }
}

fn structural(name: &'static str, pass: bool) -> HypothesisCheck {
    HypothesisCheck { name, pass, witness: None }
}

fn affine_transport(tc: &TransportCoefficients) -> bool {
    matches!(tc, TransportCoefficients::AffineTheta { mu0, mu1, kappa } if *mu0 > 0.0 && *mu1 > 0.0 && *kappa > 0.0)
}

fn stability(field: &MeasureField, eos: &EquationOfState) -> HypothesisCheck {
    atom_check(field, "thermodynamic_stability", |a| {
        if a.rho == 0.0 {
            return None;
        }
        match eos.eval(a.rho, a.theta) {
            Ok(tp) if tp.dp_drho > 0.0 && tp.de_dtheta > 0.0 => None,
            Ok(tp) => Some(tp.dp_drho.min(tp.de_dtheta)),
            Err(_) => Some(a.theta),
        }
    })
}

/// Support and structural hypotheses of `theorem` on the atoms of `field`.
pub fn check_hypotheses(
    field: &MeasureField,
    defect: &DefectData,
    model: &Model<'_>,
    theorem: Theorem,
    opts: &GronwallOptions,
) -> Vec<HypothesisCheck> {
    let eos = model.eos;
    let tc = model.transport;
    let k_c = opts.structure_constant;
    let mut out = Vec::new();
    match theorem {
        Theorem::Tg1 { delta } => {
            out.push(atom_check(field, "delta_box", |a| {
                let inside = |v: f64| v > delta && v < 1.0 / delta;
                if !inside(a.rho) {
                    Some(a.rho)
                } else if !inside(a.theta) {
                    Some(a.theta)
                } else {
                    None
                }
            }));
            out.push(atom_check(field, "transport_positive", |a| {
                let t = tc.eval(a.rho, a.theta);
                (!(t.mu > 0.0 && t.kappa > 0.0 && t.lambda >= 0.0)).then_some(t.mu.min(t.kappa).min(t.lambda))
            }));
            out.push(stability(field, eos));
        }
        Theorem::T1 { theta_max, u_max } => {
            let constant = matches!(tc, TransportCoefficients::Constant { mu, kappa, .. } if *mu > 0.0 && *kappa > 0.0);
            out.push(structural("constant_transport", constant));
            out.push(structural("bulk_viscosity_vanishes", tc.lambda_vanishes()));
            out.push(atom_check(field, "theta_bound", |a| (a.theta > theta_max).then_some(a.theta)));
            out.push(atom_check(field, "velocity_bound", |a| (a.u.norm() > u_max).then_some(a.u.norm())));
            out.push(atom_check(field, "pressure_growth", |a| {
                let p = eos.pressure_extended(a.rho, a.theta).ok()?;
                let re = eos.energy_density(a.rho, a.theta).ok()?;
                let rs = eos.entropy_density(a.rho, a.theta).ok()?;
                (p.abs() > k_c * (1.0 + re + rs.abs())).then_some(p)
            }));
            out.push(stability(field, eos));
        }
        Theorem::T2 { s_max } => {
            out.push(structural("affine_viscosity", affine_transport(tc)));
            let c_v = eos.perfect_gas_cv();
            out.push(structural("perfect_gas", c_v.is_some()));
            out.push(atom_check(field, "entropy_bound", |a| match eos.entropy(a.rho, a.theta) {
                Ok(s) if s.abs() <= s_max => None,
                Ok(s) => Some(s),
                Err(_) => Some(f64::INFINITY),
            }));
            if let Some(c_v) = c_v {
                let bound = num::exp(s_max);
                out.push(atom_check(field, "theta_cv_bound", |a| {
                    let lhs = num::powf(a.theta, c_v);
                    (!(lhs <= bound * a.rho * (1.0 + 1e-12))).then_some(lhs)
                }));
            }
        }
        Theorem::T3 => {
            out.push(structural("affine_viscosity", affine_transport(tc)));
            let molecular = match eos {
                EquationOfState::Radiative { base, exponent: 2, .. } if matches!(**base, EquationOfState::Monoatomic(_)) => {
                    Some(base.as_ref())
                }
                _ => None,
            };
            out.push(structural("monoatomic_with_radiation", molecular.is_some()));
            if let Some(m) = molecular {
                out.push(atom_check(field, "molecular_entropy_growth", |a| {
                    if a.rho == 0.0 {
                        return None;
                    }
                    match m.eval(a.rho, a.theta) {
                        Ok(tp) => {
                            let lhs = a.rho * tp.s * tp.s;
                            (lhs > k_c * (1.0 + a.rho + a.rho * tp.e)).then_some(lhs)
                        }
                        Err(_) => Some(f64::INFINITY),
                    }
                }));
            }
        }
    }
    if defect.d_series.is_some() && !defect.nu_c.is_empty() {
        let check = match concentration_bound_check(defect, opts.zero_defect) {
            Ok(b) if b.pass => structural("concentration_bound", true),
            Ok(b) => {
                let k = b.violation.unwrap_or(0);
                let atom = defect.nu_c.iter().find(|a| a.t_index == k);
                HypothesisCheck {
                    name: "concentration_bound",
                    pass: false,
                    witness: atom.map(|a| Witness { t_index: k, cell: a.cell, atom: 0, value: b.tv[k] }),
                }
            }
            Err(_) => structural("concentration_bound", false),
        };
        out.push(check);
    }
    out
}

/// Whether the first slice carries only atoms at the strong data.
pub fn dirac_initial_data(field: &MeasureField, strong: &dyn StrongTriple, tolerance: f64) -> HypothesisCheck {
    let grid = field.grid();
    let t0 = field.times()[0];
    let (offsets, atoms, weights) = field.slice_parts(0);
    for c in 0..grid.len() {
        let p = strong.at(t0, grid.center(c));
        for i in offsets[c]..offsets[c + 1] {
            if weights[i] == 0.0 {
                continue;
            }
            let a = &atoms[i];
            let dev = (a.rho - p.rho).abs().max((a.theta - p.theta).abs()).max((a.u - p.u).norm());
            if !(dev <= tolerance) {
                let witness = Witness { t_index: 0, cell: c, atom: i - offsets[c], value: dev };
                return HypothesisCheck { name: "dirac_initial_data", pass: false, witness: Some(witness) };
            }
        }
    }
    HypothesisCheck { name: "dirac_initial_data", pass: true, witness: None }
}

/// Hypotheses of `theorem`, then the exponential bound on `H` with a fitted rate.
pub fn gronwall_suite(
    field: &MeasureField,
    defect: &DefectData,
    model: &Model<'_>,
    strong: &dyn StrongTriple,
    theorem: Theorem,
    opts: &GronwallOptions,
) -> Result<GronwallReport, RelEnergyError> {
    defect.validate(field)?;
    let mut hypotheses = check_hypotheses(field, defect, model, theorem, opts);
    let hypotheses_pass = hypotheses.iter().all(|h| h.pass);
    let initial = dirac_initial_data(field, strong, opts.initial_tolerance);
    let dirac_initial = initial.pass;
    hypotheses.push(initial);
    let h = h_total(field, defect, model, strong)?;
    let times = h.times();
    let values = h.values();
    let c_fit = gronwall_fit(times, values, opts.tolerance);
    let h0 = values[0].max(0.0);
    let bound_violation = times.iter().zip(values).position(|(&t, &v)| {
        let bound = h0 * num::exp(c_fit * (t - times[0])) * (1.0 + opts.margin) + opts.tolerance;
        !(v <= bound)
    });
    let bound_pass = bound_violation.is_none();
    Ok(GronwallReport {
        theorem,
        hypotheses,
        hypotheses_pass,
        dirac_initial,
        h_series: h,
        c_fit,
        bound_pass,
        bound_violation,
        pass: hypotheses_pass && bound_pass,
    })
}

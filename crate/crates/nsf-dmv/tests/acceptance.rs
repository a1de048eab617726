//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line with its measured values
//! and wall time, then asserts. The tests share a lock so timings are not distorted by
//! each other.

use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use nsf_dmv::harness::{convergence_order, member_perturbation};
use nsf_dmv_core::dmv::*;
use nsf_dmv_core::field::{korn_poincare_field_check, BoundaryKind, Grid, TimeSeries};
use nsf_dmv_core::relenergy::*;
use nsf_dmv_core::solver::{
    monitors, ManufacturedKind, ManufacturedParams, ManufacturedSolution, RunOptions, Solver, State, Trajectory,
};
use nsf_dmv_core::thermo::{gibbs_residual, stability_check, EquationOfState, IdealPressure, TransportCoefficients};
use nsf_dmv_core::{Tensor, Vector};

static LOCK: Mutex<()> = Mutex::new(());

fn verdict(id: u32, what: &str, pass: bool, detail: String, start: Instant, budget: Duration) {
    let t = start.elapsed();
    let ok = pass && t <= budget;
    println!(
        "{} criterion {id}: {what}: {detail} [{:.2}s of {}s]",
        if ok { "PASS" } else { "FAIL" },
        t.as_secs_f64(),
        budget.as_secs()
    );
    assert!(pass, "criterion {id}: {detail}");
    assert!(t <= budget, "criterion {id}: took {t:?}");
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn pg() -> EquationOfState {
    EquationOfState::perfect_gas(1.5).unwrap()
}

/// Perfect gas with `c_v` 1.5 and 2.5, monoatomic with `P(q) = q`, and the two radiative
/// variants: monoatomic with `aθ²`, perfect gas with `aθ⁴`.
fn eos_family() -> Vec<(&'static str, EquationOfState)> {
    let mono = || EquationOfState::monoatomic(Arc::new(IdealPressure)).unwrap();
    vec![
        ("perfect_gas(1.5)", pg()),
        ("perfect_gas(2.5)", EquationOfState::perfect_gas(2.5).unwrap()),
        ("monoatomic", mono()),
        ("monoatomic+a*theta^2", EquationOfState::radiative(mono(), 0.3, 2).unwrap()),
        ("perfect_gas+a*theta^4", EquationOfState::radiative(pg(), 0.1, 4).unwrap()),
    ]
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn criterion_1_eos_consistency() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut unstable = Vec::new();
    for (name, eos) in eos_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let (rho, th) = (log_uniform(&mut rng, 1e-3, 1e3), log_uniform(&mut rng, 1e-3, 1e3));
            worst = worst.max(gibbs_residual(&eos, rho, th).unwrap().relative());
            if !stability_check(&eos, rho, th).unwrap().stable {
                unstable.push((name, rho, th));
            }
        }
    }
    let pass = worst < 1e-8 && unstable.is_empty();
    let detail = format!("max Gibbs residual {worst:.2e} (< 1e-8), unstable samples {}", unstable.len());
    verdict(1, "EOS consistency", pass, detail, start, secs(1));
}

#[test]
fn criterion_2_relative_energy_algebra() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let rs = |rho, theta, u| ReferenceState { rho, theta, u };
    let family = eos_family();
    let per_eos = 100_000 / family.len();
    let mut worst: f64 = 0.0;
    let mut zero_fail = 0usize;
    for (k, (_, eos)) in family.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(20 + k as u64);
        for _ in 0..per_eos {
            let state = rs(log_uniform(&mut rng, 0.2, 5.0), log_uniform(&mut rng, 0.2, 5.0), Vector::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let r = Reference::new(eos, state).unwrap();
            let (rho, th) = (log_uniform(&mut rng, 1e-2, 1e2), log_uniform(&mut rng, 1e-2, 1e2));
            let u = Vector::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let a = relative_energy(eos, rho, th, u, &r).unwrap();
            let b = relative_energy_h_form(eos, rho, th, u, &r).unwrap();
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
            // Zero exactly at the reference, positive away from it.
            let at_ref = relative_energy(eos, state.rho, state.theta, state.u, &r).unwrap();
            if at_ref != 0.0 || !(a > 0.0) {
                zero_fail += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut identity: f64 = 0.0;
    for n in 0..10_000 {
        let dim = 1 + n % 2;
        let mut m = |lo: f64, hi: f64| rng.gen_range(lo..hi);
        let (mu, mu_ref, th, tr) = (m(0.01, 5.0), m(0.01, 5.0), m(0.05, 20.0), m(0.05, 20.0));
        let (d01, g01, g10) = (m(-3.0, 3.0), m(-3.0, 3.0), m(-3.0, 3.0));
        let mut dt = Tensor([[m(-3.0, 3.0), d01], [d01, m(-3.0, 3.0)]]);
        let mut gt = Tensor([[m(-3.0, 3.0), g01], [g10, m(-3.0, 3.0)]]);
        let (q, gq) = (Vector::new(m(-3.0, 3.0), m(-3.0, 3.0)), Vector::new(m(-3.0, 3.0), m(-3.0, 3.0)));
        if dim == 1 {
            dt = Tensor([[dt.0[0][0], 0.0], [0.0, 0.0]]);
            gt = Tensor([[gt.0[0][0], 0.0], [0.0, 0.0]]);
        }
        let (td, tg) = (dt.traceless(dim), gt.traceless(dim));
        for pair in [
            viscous_square(mu, th, tr, &td, &tg),
            shear_recombination(mu, mu_ref, th, tr, &td, &tg),
            bulk_recombination(mu, mu_ref, th, tr, dt.trace(), gt.trace()),
            thermal_recombination(mu, mu_ref, th, tr, &q, &gq),
            affine_viscosity_identity(mu, th, tr, &td, &tg),
        ] {
            identity = identity.max(pair.mismatch());
        }
    }
    let pass = worst <= 1e-12 && zero_fail == 0 && identity <= 1e-12;
    let detail = format!(
        "form mismatch {worst:.2e} (<= 1e-12) on {} samples, zero-iff-coincident failures {zero_fail}, identity mismatch {identity:.2e} on 1e4 atoms",
        per_eos * family.len()
    );
    verdict(2, "relative energy algebra", pass, detail, start, secs(10));
}

#[test]
fn criterion_3_coercivity() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let eos = pg();
    let cut = Cutoff::new(0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples: Vec<CoercivitySample> = (0..100_000)
        .map(|_| CoercivitySample {
            rho: log_uniform(&mut rng, 1e-3, 1e3),
            theta: log_uniform(&mut rng, 1e-3, 1e3),
            u: Vector::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)),
            reference: ReferenceState {
                rho: rng.gen_range(0.25..9.5),
                theta: rng.gen_range(0.25..9.5),
                u: Vector::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            },
        })
        .collect();
    let rep = coercivity_check(&eos, &cut, &samples).unwrap();
    let pass = rep.pass && rep.c_delta > 0.0;
    let detail = format!("c(0.1) = {:.4e} over {} samples, violation {:?}", rep.c_delta, rep.samples, rep.violation);
    verdict(3, "coercivity", pass, detail, start, secs(10));
}

fn analytic(m: &ManufacturedSolution, grid: &Grid, t_end: f64, slices: usize) -> TimeSeries<State> {
    let mut ts = TimeSeries::new();
    for k in 0..=slices {
        let t = t_end * k as f64 / slices as f64;
        ts.push(t, m.state_at(grid, t)).unwrap();
    }
    ts
}

/// `[compatibility, continuity, momentum, entropy slack, D]`, largest magnitudes.
fn residuals(field: &MeasureField, model: &Model<'_>, t_ref: f64) -> [f64; 5] {
    let dict = TestFunctionDictionary::standard(field.grid(), t_ref);
    let defect = DefectData::default();
    let (a, b) = rayon::join(
        || {
            let c = compatibility_residual(field, model, &dict.tensor, &dict.vector_normal, t_ref, 0.0).max_abs();
            let r = continuity_residual(field, model, &dict.scalar, t_ref, 0.0).max_abs();
            (c, r)
        },
        || {
            let m = momentum_residual(field, &defect, model, &dict.vector_compact, t_ref, 0.0).unwrap().max_abs();
            let e = entropy_inequality_residual(field, &defect, model, &dict.nonneg, t_ref, 0.0).unwrap().max_abs();
            (m, e)
        },
    );
    let d = energy_check(field, model, 0.0).d_series.values().iter().fold(0.0_f64, |x, y| x.max(y.abs()));
    [a.0, a.1, b.0, b.1, d]
}

const NAMES: [&str; 5] = ["compatibility", "continuity", "momentum", "entropy", "D"];

#[test]
fn criterion_4_dirac_classical_consistency() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let eos = pg();
    let tc = TransportCoefficients::affine_theta(0.05, 0.02, 0.05).unwrap();

    let mut constant_worst: f64 = 0.0;
    for grid in [
        Grid::rect([1.0, 1.0], [16, 16], BoundaryKind::NoSlipNoFlux).unwrap(),
        Grid::line(1.0, 64, BoundaryKind::Periodic).unwrap(),
    ] {
        let m = ManufacturedSolution::new(
            ManufacturedKind::Constant,
            ManufacturedParams { rho_ref: 1.3, theta_ref: 0.7, ..Default::default() },
            &grid,
            eos.clone(),
            tc.clone(),
        )
        .unwrap();
        let traj = Solver::new(&eos, &tc).run(m.initial_state(&grid), &RunOptions { final_time: 0.1, outputs: 4, ..Default::default() }).unwrap();
        let field = MeasureField::dirac(&traj.states).unwrap();
        let model = Model::new(&eos, &tc);
        for v in residuals(&field, &model, 0.1) {
            constant_worst = constant_worst.max(v);
        }
    }

    let levels = [32usize, 64, 128];
    let rows: Vec<[f64; 5]> = levels
        .iter()
        .map(|&n| {
            let grid = Grid::rect([1.0, 1.0], [n, n], BoundaryKind::NoSlipNoFlux).unwrap();
            let m = ManufacturedSolution::new(ManufacturedKind::Smooth2d, ManufacturedParams::default(), &grid, eos.clone(), tc.clone()).unwrap();
            let field = MeasureField::dirac(&analytic(&m, &grid, 0.2, n / 4)).unwrap();
            residuals(&field, &Model::new(&eos, &tc).with_forcing(&m), 0.2)
        })
        .collect();
    let h: Vec<f64> = levels.iter().map(|&n| 1.0 / n as f64).collect();
    let orders: Vec<f64> = (0..5).map(|q| convergence_order(&h, &rows.iter().map(|r| r[q]).collect::<Vec<_>>())).collect();
    let pass = constant_worst <= 1e-10 && orders.iter().all(|p| (p - 2.0).abs() <= 0.3);
    let detail = format!(
        "constant state max residual {constant_worst:.2e} (<= 1e-10); orders over 32/64/128: {}",
        NAMES.iter().zip(&orders).map(|(n, p)| format!("{n} {p:.2}")).collect::<Vec<_>>().join(", ")
    );
    verdict(4, "Dirac-classical consistency", pass, detail, start, secs(300));
}

fn smooth_run(n: usize) -> (f64, f64, bool) {
    let eos = pg();
    let tc = TransportCoefficients::constant(0.05, 0.0, 0.05).unwrap();
    let grid = Grid::rect([1.0, 1.0], [n, n], BoundaryKind::NoSlipNoFlux).unwrap();
    let m = ManufacturedSolution::new(ManufacturedKind::Smooth2d, ManufacturedParams::default(), &grid, eos.clone(), tc.clone()).unwrap();
    let traj = Solver::new(&eos, &tc)
        .with_forcing(&m)
        .run(m.initial_state(&grid), &RunOptions { final_time: 0.1, outputs: n / 8, ..Default::default() })
        .unwrap();
    let field = MeasureField::dirac(&traj.states).unwrap();
    let model = Model::new(&eos, &tc).with_forcing(&m);
    let h = h_total(&field, &DefectData::default(), &model, &m).unwrap();
    let hyp = check_hypotheses(&field, &DefectData::default(), &model, Theorem::T1 { theta_max: 2.0, u_max: 1.0 }, &GronwallOptions::default());
    (h.values()[0], h.values().iter().copied().fold(0.0, f64::max), hyp.iter().all(|x| x.pass))
}

/// `K` members perturbing the constant state with amplitude `eps`; the same seeds for
/// every `eps`.
fn perturbed_field(eps: f64, k: usize, grid: &Grid, tc: &TransportCoefficients) -> MeasureField {
    let eos = pg();
    let base = State::constant(*grid, 1.0, 1.0, Vector::ZERO);
    let runs: Vec<TimeSeries<State>> = (0..k)
        .into_par_iter()
        .map(|j| {
            let init = member_perturbation(500, j, 4, eps).apply(&base);
            Solver::new(&eos, tc).run(init, &RunOptions { final_time: 0.2, outputs: 8, ..Default::default() }).unwrap().states
        })
        .collect();
    MeasureField::from_ensemble(&runs).unwrap()
}

#[test]
fn criterion_5_weak_strong_shadow() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    // Dirac field of the solver run started from the strong data.
    let levels = [32usize, 64, 128];
    let runs: Vec<(f64, f64, bool)> = levels.par_iter().map(|&n| smooth_run(n)).collect();
    let h: Vec<f64> = levels.iter().map(|&n| 1.0 / n as f64).collect();
    let hmax: Vec<f64> = runs.iter().map(|r| r.1).collect();
    // tol(h) = a h², with a calibrated on the coarsest level (factor 2 headroom).
    let a = 2.0 * hmax[0] / (h[0] * h[0]);
    let within = hmax.iter().zip(&h).all(|(v, h)| *v <= a * h * h);
    let order = convergence_order(&h, &hmax);
    let dirac_ok = runs.iter().all(|r| r.0 == 0.0 && r.2) && within && order >= 1.5;

    // Perturbed ensembles around the constant state.
    let grid = Grid::rect([1.0, 1.0], [16, 16], BoundaryKind::NoSlipNoFlux).unwrap();
    let eos = pg();
    let tc = TransportCoefficients::constant(0.05, 0.0, 0.05).unwrap();
    let strong = ManufacturedSolution::new(ManufacturedKind::Constant, ManufacturedParams::default(), &grid, eos.clone(), tc.clone()).unwrap();
    let model = Model::new(&eos, &tc);
    let opts = GronwallOptions { tolerance: 1e-14, margin: 0.2, ..Default::default() };
    let mut rates = Vec::new();
    let mut bounds = true;
    for eps in [1e-2, 1e-3, 1e-4] {
        let field = perturbed_field(eps, 8, &grid, &tc);
        let rep = gronwall_suite(&field, &DefectData::default(), &model, &strong, Theorem::T1 { theta_max: 1.1, u_max: 0.1 }, &opts).unwrap();
        bounds &= rep.hypotheses_pass && rep.bound_pass && rep.h_series.values()[0] > 1e3 * opts.tolerance;
        rates.push(rep.c_fit);
    }
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    let spread = rates.iter().map(|c| (c - mean).abs() / mean.abs()).fold(0.0, f64::max);
    let pass = dirac_ok && bounds && spread <= 0.25;
    let detail = format!(
        "max H {:?} with tol(h) = {a:.3e} h^2, order {order:.2} (>= 1.5); C over eps 1e-2/1e-3/1e-4 = {:?}, spread {:.1}% (<= 25%), bounds {}",
        hmax.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>(),
        rates.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
        100.0 * spread,
        if bounds { "hold" } else { "violated" }
    );
    verdict(5, "weak-strong uniqueness shadow", pass, detail, start, secs(900));
}

fn constant_field() -> (MeasureField, EquationOfState, TransportCoefficients, ManufacturedSolution) {
    let grid = Grid::rect([1.0, 1.0], [8, 8], BoundaryKind::NoSlipNoFlux).unwrap();
    let eos = pg();
    let tc = TransportCoefficients::constant(0.05, 0.0, 0.05).unwrap();
    let m = ManufacturedSolution::new(ManufacturedKind::Constant, ManufacturedParams::default(), &grid, eos.clone(), tc.clone()).unwrap();
    let field = MeasureField::dirac(&analytic(&m, &grid, 0.1, 4)).unwrap();
    (field, eos, tc, m)
}

#[test]
fn criterion_6_hypothesis_gating() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let (field, eos, tc, strong) = constant_field();
    let affine = TransportCoefficients::affine_theta(0.05, 0.02, 0.05).unwrap();
    let opts = GronwallOptions::default();
    let (slice, cell) = (3usize, 27usize);
    let spoil = |f: fn(&mut PhasePoint)| {
        let mut g = field.clone();
        g.map_atoms(|k, c, a| {
            if k == slice && c == cell {
                f(a)
            }
        });
        g
    };
    let flagged = |f: &MeasureField, d: &DefectData, tc: &TransportCoefficients, th: Theorem, name: &str| {
        let model = Model::new(&eos, tc);
        let clean = gronwall_suite(&field, &DefectData::default(), &model, &strong, th, &opts).unwrap();
        let rep = gronwall_suite(f, d, &model, &strong, th, &opts).unwrap();
        let w = rep.hypotheses.iter().find(|h| h.name == name).and_then(|h| (!h.pass).then_some(h.witness).flatten());
        let hit = clean.hypotheses_pass && !rep.hypotheses_pass && !rep.pass && w.is_some_and(|w| (w.t_index, w.cell) == (slice, cell));
        (hit, w)
    };
    let cases = [
        ("T1 velocity bound", flagged(&spoil(|a| a.u = Vector::new(0.5, 0.0)), &DefectData::default(), &tc, Theorem::T1 { theta_max: 2.0, u_max: 0.2 }, "velocity_bound")),
        ("T2 entropy bound", flagged(&spoil(|a| a.rho = 1e-4), &DefectData::default(), &affine, Theorem::T2 { s_max: 2.0 }, "entropy_bound")),
        ("TG1 delta box", flagged(&spoil(|a| a.theta = 11.0), &DefectData::default(), &tc, Theorem::Tg1 { delta: 0.1 }, "delta_box")),
        ("concentration bound", {
            let mut d = DefectData::default();
            d.nu_c.push(ConcentrationAtom { t_index: slice, cell, mass: Tensor([[0.1, 0.0], [0.0, 0.1]]) });
            d.d_series = Some(energy_check(&field, &Model::new(&eos, &tc), 0.0).d_series);
            flagged(&field, &d, &tc, Theorem::Tg1 { delta: 0.1 }, "concentration_bound")
        }),
    ];
    let pass = cases.iter().all(|(_, (hit, _))| *hit);
    let detail = cases
        .iter()
        .map(|(n, (hit, w))| match w {
            Some(w) if *hit => format!("{n} at slice {} cell {} atom {} ({:.3e})", w.t_index, w.cell, w.atom, w.value),
            _ => format!("{n} NOT flagged"),
        })
        .collect::<Vec<_>>()
        .join("; ");
    verdict(6, "hypothesis gating", pass, detail, start, secs(60));
}

#[test]
fn criterion_7_entropy_energy_monitors() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let eos = pg();
    let tc = TransportCoefficients::affine_theta(0.05, 0.02, 0.05).unwrap();
    let line = Grid::line(1.0, 128, BoundaryKind::Periodic).unwrap();
    let m = ManufacturedSolution::new(ManufacturedKind::SmoothVortex1d, ManufacturedParams::default(), &line, eos.clone(), tc.clone()).unwrap();
    let base = Solver::new(&eos, &tc).run(m.initial_state(&line), &RunOptions { final_time: 0.1, outputs: 4, ..Default::default() }).unwrap();
    let rb = monitors(&base);
    // Further runs: forced 2D walls and a perturbed constant state.
    let square = Grid::rect([1.0, 1.0], [32, 32], BoundaryKind::NoSlipNoFlux).unwrap();
    let m2 = ManufacturedSolution::new(ManufacturedKind::Smooth2d, ManufacturedParams::default(), &square, eos.clone(), tc.clone()).unwrap();
    let forced = Solver::new(&eos, &tc).with_forcing(&m2).run(m2.initial_state(&square), &RunOptions { final_time: 0.1, outputs: 2, ..Default::default() }).unwrap();
    let init = member_perturbation(7, 0, 4, 1e-2).apply(&State::constant(square, 1.0, 1.0, Vector::ZERO));
    let perturbed = Solver::new(&eos, &tc).run(init, &RunOptions { final_time: 0.1, outputs: 2, ..Default::default() }).unwrap();
    let all: [&Trajectory; 3] = [&base, &forced, &perturbed];
    let sigma_ok = all.iter().all(|t| monitors(t).sigma_nonnegative);
    let steps: usize = all.iter().map(|t| t.steps).sum();
    let pass = sigma_ok && rb.sigma_nonnegative && rb.energy_drift <= 1e-6;
    let detail = format!(
        "baseline energy drift {:.2e} (<= 1e-6), entropy production nonnegative at every step of {steps} steps over 3 runs: {sigma_ok}",
        rb.energy_drift
    );
    verdict(7, "entropy/energy monitors", pass, detail, start, secs(120));
}

#[test]
fn criterion_8_korn_poincare() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let eos = pg();
    let tc = TransportCoefficients::constant(0.05, 0.0, 0.05).unwrap();
    let levels = [16usize, 32, 64];
    let rows: Vec<[f64; 3]> = levels
        .iter()
        .map(|&n| {
            let grid = Grid::rect([1.0, 1.0], [n, n], BoundaryKind::NoSlipNoFlux).unwrap();
            let base = State::constant(grid, 1.0, 1.0, Vector::ZERO);
            let runs: Vec<TimeSeries<State>> = (0..4)
                .into_par_iter()
                .map(|j| {
                    let init = member_perturbation(800, j, 4, 1e-2).apply(&base);
                    Solver::new(&eos, &tc).run(init, &RunOptions { final_time: 0.05, outputs: 2, ..Default::default() }).unwrap().states
                })
                .collect();
            let field_level = korn_poincare_field_check(&runs[0].values().last().unwrap().u).unwrap().ratio.unwrap();
            let field = MeasureField::from_ensemble(&runs).unwrap();
            let reference = runs[0].map(|s| nsf_dmv_core::field::VectorField::constant(*s.grid(), Vector::ZERO));
            let k = korn_poincare_measure_check(&field, &reference).unwrap();
            [field_level, k.g12.ratio.unwrap(), k.g12a.ratio.unwrap()]
        })
        .collect();
    let mut spread: f64 = 0.0;
    for q in 0..3 {
        let v: Vec<f64> = rows.iter().map(|r| r[q]).collect();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(0.0, f64::max);
        assert!(lo.is_finite() && lo > 0.0);
        spread = spread.max(hi / lo - 1.0);
    }
    let finite = rows.iter().flatten().all(|v| v.is_finite());
    let pass = finite && spread <= 0.1;
    let detail = format!(
        "ratios (field, measure, centred) at 16/32/64: {}; max spread {:.2}% (<= 10%)",
        rows.iter().map(|r| format!("[{:.4e}, {:.4e}, {:.4e}]", r[0], r[1], r[2])).collect::<Vec<_>>().join(" "),
        100.0 * spread
    );
    verdict(8, "Korn-Poincare", pass, detail, start, secs(120));
}

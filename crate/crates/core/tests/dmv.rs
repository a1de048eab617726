use nsf_dmv_core::dmv::*;
use nsf_dmv_core::field::{BoundaryKind, Grid, TimeSeries};
use nsf_dmv_core::solver::{ManufacturedKind, ManufacturedParams, ManufacturedSolution, State};
use nsf_dmv_core::thermo::{EquationOfState, TransportCoefficients};
use nsf_dmv_core::{Tensor, Vector};


fn pg() -> EquationOfState {
    EquationOfState::perfect_gas(1.5).unwrap()
}

fn tc() -> TransportCoefficients {
    TransportCoefficients::affine_theta(0.05, 0.02, 0.05).unwrap()
}

fn analytic(m: &ManufacturedSolution, grid: &Grid, t_end: f64, slices: usize) -> TimeSeries<State> {
    let mut ts = TimeSeries::new();
    for k in 0..=slices {
        let t = t_end * k as f64 / slices as f64;
        ts.push(t, m.state_at(grid, t)).unwrap();
    }
    ts
}

struct All {
    compat: f64,
    cont: f64,
    mom: f64,
    ent: f64,
    d: f64,
}

fn all_residuals(field: &MeasureField, model: &Model<'_>, t_ref: f64) -> All {
    let dict = TestFunctionDictionary::standard(field.grid(), t_ref);
    let defect = DefectData::default();
    let c = compatibility_residual(field, model, &dict.tensor, &dict.vector_normal, t_ref, 1.0);
    let r = continuity_residual(field, model, &dict.scalar, t_ref, 1.0);
    let m = momentum_residual(field, &defect, model, &dict.vector_compact, t_ref, 1.0).unwrap();
    let e = entropy_inequality_residual(field, &defect, model, &dict.nonneg, t_ref, 1.0).unwrap();
    let en = energy_check(field, model, 1.0);
    All {
        compat: c.max_abs(),
        cont: r.max_abs(),
        mom: m.max_abs(),
        ent: e.max_abs(),
        d: en.d_series.values().iter().fold(0.0_f64, |a, b| a.max(b.abs())),
    }
}

#[test]
fn constant_state_residuals_vanish() {
    let eos = pg();
    let tc = tc();
    for grid in [
        Grid::rect([1.0, 1.0], [16, 16], BoundaryKind::NoSlipNoFlux).unwrap(),
        Grid::line(2.0, 32, BoundaryKind::NoSlipNoFlux).unwrap(),
        Grid::rect([1.0, 1.0], [12, 12], BoundaryKind::Periodic).unwrap(),
    ] {
        let mut ts = TimeSeries::new();
        for k in 0..=4 {
            let mut s = State::constant(grid, 1.2, 0.8, Vector::ZERO);
            s.t = 0.025 * k as f64;
            ts.push(s.t, s).unwrap();
        }
        let field = MeasureField::dirac(&ts).unwrap();
        let model = Model::new(&eos, &tc);
        let a = all_residuals(&field, &model, 0.1);
        for v in [a.compat, a.cont, a.mom, a.ent, a.d] {
            assert!(v <= 1e-10, "{v}");
        }
    }
}

fn slope(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let num: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

#[test]
fn manufactured_dirac_converges_at_second_order() {
    let eos = pg();
    let tc = tc();
    let levels = [16usize, 32, 64];
    let mut rows = Vec::new();
    for &n in &levels {
        let grid = Grid::rect([1.0, 1.0], [n, n], BoundaryKind::NoSlipNoFlux).unwrap();
        let m = ManufacturedSolution::new(ManufacturedKind::Smooth2d, ManufacturedParams::default(), &grid, eos.clone(), tc.clone())
            .unwrap();
        let field = MeasureField::dirac(&analytic(&m, &grid, 0.2, n / 4)).unwrap();
        let model = Model::new(&eos, &tc).with_forcing(&m);
        let a = all_residuals(&field, &model, 0.2);
        rows.push([a.compat, a.cont, a.mom, a.ent, a.d]);
    }
    let h: Vec<f64> = levels.iter().map(|&n| 1.0 / n as f64).collect();
    for q in 0..5 {
        let e: Vec<f64> = rows.iter().map(|r| r[q]).collect();
        let p = slope(&h, &e);
        assert!((p - 2.0).abs() <= 0.3, "residual {q}: {e:?} order {p}");
    }
}

fn small_field() -> (MeasureField, Grid) {
    let grid = Grid::rect([1.0, 1.0], [8, 8], BoundaryKind::NoSlipNoFlux).unwrap();
    let m = ManufacturedSolution::new(ManufacturedKind::Smooth2d, ManufacturedParams::default(), &grid, pg(), tc()).unwrap();
    (MeasureField::dirac(&analytic(&m, &grid, 0.1, 4)).unwrap(), grid)
}

#[test]
fn duplicate_members_do_not_change_expectations() {
    let grid = Grid::rect([1.0, 1.0], [8, 8], BoundaryKind::NoSlipNoFlux).unwrap();
    let m = ManufacturedSolution::new(ManufacturedKind::Smooth2d, ManufacturedParams::default(), &grid, pg(), tc()).unwrap();
    let run = analytic(&m, &grid, 0.1, 4);
    let one = MeasureField::dirac(&run).unwrap();
    let two = MeasureField::from_ensemble(&[run.clone(), run]).unwrap();
    assert_eq!(two.atom_count(), 2 * one.atom_count());
    for k in 0..one.len() {
        for c in 0..grid.len() {
            let (a, b) = (one.measure(k, c), two.measure(k, c));
            assert!((a.expectation(|p| p.rho * p.theta) - b.expectation(|p| p.rho * p.theta)).abs() < 1e-15);
        }
    }
}

#[test]
fn ensemble_mean_matches_direct_average() {
    let grid = Grid::line(1.0, 16, BoundaryKind::NoSlipNoFlux).unwrap();
    let runs: Vec<TimeSeries<State>> = (0..8)
        .map(|j| {
            let params = ManufacturedParams { amplitude: 0.02 * (j as f64 + 1.0), ..Default::default() };
            let m = ManufacturedSolution::new(ManufacturedKind::SmoothVortex1d, params, &grid, pg(), tc()).unwrap();
            analytic(&m, &grid, 0.1, 2)
        })
        .collect();
    let field = MeasureField::from_ensemble(&runs).unwrap();
    for k in 0..field.len() {
        let mean = field.mean_field(k, |p| p.rho);
        for c in 0..grid.len() {
            let direct: f64 = runs.iter().map(|r| r.values()[k].rho.values()[c]).sum::<f64>() / 8.0;
            assert!((mean.values()[c] - direct).abs() < 1e-14);
            let m = field.measure(k, c);
            assert!(m.expectation(|p| p.rho * p.rho) >= m.expectation(|p| p.rho).powi(2) - 1e-15);
        }
    }
}

#[test]
fn mismatched_ensembles_are_rejected() {
    let g1 = Grid::line(1.0, 16, BoundaryKind::NoSlipNoFlux).unwrap();
    let g2 = Grid::line(1.0, 8, BoundaryKind::NoSlipNoFlux).unwrap();
    let mk = |g: Grid| {
        let mut ts = TimeSeries::new();
        ts.push(0.0, State::constant(g, 1.0, 1.0, Vector::ZERO)).unwrap();
        ts
    };
    assert!(MeasureField::from_ensemble(&[mk(g1), mk(g2)]).is_err());
    assert!(MeasureField::from_ensemble(&[]).is_err());
}

#[test]
fn zeroed_gradients_break_compatibility() {
    let eos = pg();
    let tc = tc();
    let grid = Grid::rect([1.0, 1.0], [16, 16], BoundaryKind::NoSlipNoFlux).unwrap();
    let m = ManufacturedSolution::new(ManufacturedKind::Smooth2d, ManufacturedParams::default(), &grid, pg(), tc.clone()).unwrap();
    let mut field = MeasureField::dirac(&analytic(&m, &grid, 0.1, 4)).unwrap();
    let dict = TestFunctionDictionary::standard(&grid, 0.1);
    let model = Model::new(&eos, &tc);
    let before = compatibility_residual(&field, &model, &dict.tensor, &dict.vector_normal, 0.1, 1e-2).max_abs();
    field.map_atoms(|_, _, a| a.d_u = Tensor::ZERO);
    let after = compatibility_residual(&field, &model, &dict.tensor, &dict.vector_normal, 0.1, 1e-2).max_abs();
    assert!(after > 10.0 * before, "{before} {after}");
    assert!(after > 1e-3);
}

#[test]
fn concentration_shifts_momentum_linearly() {
    let eos = pg();
    let tc = tc();
    let (field, grid) = small_field();
    let dict = TestFunctionDictionary::standard(&grid, 0.1);
    let model = Model::new(&eos, &tc);
    let base = momentum_residual(&field, &DefectData::default(), &model, &dict.vector_compact, 0.1, 1.0).unwrap();
    let mass = Tensor([[0.3, -0.1], [-0.1, 0.2]]);
    let defect = DefectData {
        nu_c: vec![ConcentrationAtom { t_index: 2, cell: 27, mass }],
        ..Default::default()
    };
    let shifted = momentum_residual(&field, &defect, &model, &dict.vector_compact, 0.1, 1.0).unwrap();
    let times = field.times();
    // trapezoid weight of slice 2 inside [0, τ_m]
    let weight = |m: usize| {
        if m < 2 {
            0.0
        } else if m == 2 {
            0.5 * (times[2] - times[1])
        } else {
            0.5 * (times[3] - times[1])
        }
    };
    for (f, (b, s)) in dict.vector_compact.iter().flat_map(|f| std::iter::repeat(f).take(times.len() - 1)).zip(base.residuals.iter().zip(&shifted.residuals)) {
        let m = times.iter().position(|t| *t == b.tau).unwrap();
        let (tf, _) = f.time_factor(times[2], 0.1);
        let (_, grad) = {
            let table = f.space.table(&grid);
            (table.value[27], table.grad[27])
        };
        let c = match f.shape {
            TestShape::Vector(c) => c,
            _ => unreachable!(),
        };
        let pairing = mass.0[c][0] * grad.0[0] + mass.0[c][1] * grad.0[1];
        let expected = -weight(m) * tf * pairing;
        assert!((s.value - b.value - expected).abs() < 1e-13, "{} {}", s.value - b.value, expected);
    }
}

#[test]
fn raised_temperature_increases_entropy_slack() {
    let eos = pg();
    let tc = TransportCoefficients::inviscid();
    let grid = Grid::line(1.0, 16, BoundaryKind::NoSlipNoFlux).unwrap();
    let mut ts = TimeSeries::new();
    for k in 0..=4 {
        let mut s = State::constant(grid, 1.0, 1.0, Vector::ZERO);
        s.t = 0.025 * k as f64;
        ts.push(s.t, s).unwrap();
    }
    let mut field = MeasureField::dirac(&ts).unwrap();
    field.map_atoms(|k, _, a| {
        if k > 0 {
            a.theta *= 2.0
        }
    });
    let dict = TestFunctionDictionary::standard(&grid, 0.1);
    let model = Model::new(&eos, &tc);
    let out = entropy_inequality_residual(&field, &DefectData::default(), &model, &dict.nonneg, 0.1, 1e-12).unwrap();
    assert!(out.pass);
    assert!(out.residuals.iter().any(|r| r.value > 1e-3));
}

#[test]
fn damping_shows_up_in_the_defect() {
    let eos = pg();
    let tc = tc();
    let grid = Grid::line(1.0, 16, BoundaryKind::Periodic).unwrap();
    let mut ts = TimeSeries::new();
    for k in 0..=4 {
        let mut s = State::constant(grid, 1.0, 1.0, Vector::new(0.5, 0.0));
        s.t = 0.025 * k as f64;
        if k >= 2 {
            for u in s.u.values_mut() {
                *u = *u * 0.9;
            }
        }
        ts.push(s.t, s).unwrap();
    }
    let field = MeasureField::dirac(&ts).unwrap();
    let rep = energy_check(&field, &Model::new(&eos, &tc), 1e-12);
    let lost = 0.5 * (0.25 - 0.25 * 0.81);
    assert!(rep.pass);
    assert!(rep.d_series.values()[1].abs() < 1e-15);
    assert!((rep.d_series.values()[3] - lost).abs() < 1e-14);
}

#[test]
fn concentration_bound_examples() {
    let d = |v: Vec<f64>| Some(TimeSeries::from_parts((0..v.len()).map(|k| k as f64).collect(), v).unwrap());
    let empty = DefectData { d_series: d(vec![0.0, 0.2, 0.2]), ..Default::default() };
    let r = concentration_bound_check(&empty, 0.0).unwrap();
    assert!(r.pass && r.c == Some(0.0));
    let atom = |t| ConcentrationAtom { t_index: t, cell: 0, mass: Tensor([[0.1, 0.0], [0.0, 0.0]]) };
    let ok = DefectData { nu_c: vec![atom(1)], d_series: d(vec![0.0, 0.2, 0.2]), ..Default::default() };
    let r = concentration_bound_check(&ok, 0.0).unwrap();
    assert!(r.pass && (r.c.unwrap() - 0.5).abs() < 1e-15);
    let bad = DefectData { nu_c: vec![atom(0)], d_series: d(vec![0.0, 0.2, 0.2]), ..Default::default() };
    let r = concentration_bound_check(&bad, 0.0).unwrap();
    assert!(!r.pass && r.violation == Some(0));
}

#[test]
fn korn_measure_decomposes() {
    let grid = Grid::rect([1.0, 1.0], [16, 16], BoundaryKind::NoSlipNoFlux).unwrap();
    let runs: Vec<TimeSeries<State>> = (0..4)
        .map(|j| {
            let params = ManufacturedParams { velocity: 0.05 * (j as f64 + 1.0), ..Default::default() };
            let m = ManufacturedSolution::new(ManufacturedKind::Smooth2d, params, &grid, pg(), tc()).unwrap();
            analytic(&m, &grid, 0.1, 2)
        })
        .collect();
    let field = MeasureField::from_ensemble(&runs).unwrap();
    let reference = runs[0].map(|s| s.u.clone());
    let rep = korn_poincare_measure_check(&field, &reference).unwrap();
    assert!(rep.decomposition_error < 1e-12);
    let (r, ra, rm) = (rep.g12.ratio.unwrap(), rep.g12a.ratio.unwrap(), rep.mean.ratio.unwrap());
    assert!(r <= ra.max(rm) * (1.0 + 1e-12));
    let dirac = MeasureField::dirac(&runs[0]).unwrap();
    assert_eq!(korn_poincare_measure_check(&dirac, &reference).unwrap().g12.lhs, 0.0);
}

#[test]
fn uniform_bound_is_stable_under_refinement() {
    let eos = pg();
    let tc = tc();
    let mut reps = Vec::new();
    for n in [32, 64, 128] {
        let grid = Grid::line(1.0, n, BoundaryKind::NoSlipNoFlux).unwrap();
        let m = ManufacturedSolution::new(ManufacturedKind::SmoothVortex1d, ManufacturedParams::default(), &grid, eos.clone(), tc.clone())
            .unwrap();
        reps.push(uniform_bound_report(&[analytic(&m, &grid, 0.1, 8)], &eos, &tc).unwrap());
    }
    assert!(UniformBoundReport::family_spread(&reps) < 0.05);
    let grid = Grid::line(1.0, 64, BoundaryKind::NoSlipNoFlux).unwrap();
    let m = ManufacturedSolution::new(ManufacturedKind::SmoothVortex1d, ManufacturedParams::default(), &grid, eos.clone(), tc.clone()).unwrap();
    let blown = analytic(&m, &grid, 0.1, 8).map(|s| {
        let mut s = s.clone();
        for u in s.u.values_mut() {
            *u = *u * 64.0;
        }
        s
    });
    reps.push(uniform_bound_report(&[blown], &eos, &tc).unwrap());
    assert!(UniformBoundReport::family_spread(&reps) > 5.0);
}

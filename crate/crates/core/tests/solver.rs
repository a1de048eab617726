use nsf_dmv_core::field::{BoundaryKind, Grid};
use nsf_dmv_core::solver::{
    monitors, ManufacturedKind, ManufacturedParams, ManufacturedSolution, RunOptions, Solver, State,
};
use nsf_dmv_core::thermo::{EquationOfState, TransportCoefficients};
use nsf_dmv_core::Vector;

fn pg() -> EquationOfState {
    EquationOfState::perfect_gas(1.5).unwrap()
}

fn max_error(a: &State, b: &State) -> f64 {
    let mut e: f64 = 0.0;
    for c in 0..a.grid().len() {
        e = e.max((a.rho.values()[c] - b.rho.values()[c]).abs());
        e = e.max((a.theta.values()[c] - b.theta.values()[c]).abs());
        e = e.max((a.u.values()[c] - b.u.values()[c]).norm());
    }
    e
}

#[test]
fn constant_state_is_stationary() {
    let eos = pg();
    let tc = TransportCoefficients::constant(0.1, 0.05, 0.2).unwrap();
    let solver = Solver::new(&eos, &tc);
    for grid in [
        Grid::line(1.0, 32, BoundaryKind::NoSlipNoFlux).unwrap(),
        Grid::rect([1.0, 2.0], [12, 20], BoundaryKind::NoSlipNoFlux).unwrap(),
        Grid::rect([1.0, 1.0], [16, 16], BoundaryKind::Periodic).unwrap(),
    ] {
        let init = State::constant(grid, 1.3, 0.7, Vector::ZERO);
        let mut s = init.clone();
        for _ in 0..1000 {
            s = solver.step(&s, 1e-4).unwrap();
        }
        assert!(max_error(&s, &init) < 1e-12);
    }
}

#[test]
fn uniform_translation_on_periodic_grid() {
    let eos = pg();
    let tc = TransportCoefficients::constant(0.1, 0.0, 0.2).unwrap();
    let solver = Solver::new(&eos, &tc);
    let grid = Grid::rect([1.0, 1.0], [8, 8], BoundaryKind::Periodic).unwrap();
    let init = State::constant(grid, 1.0, 1.0, Vector::new(0.3, -0.2));
    let mut s = init.clone();
    for _ in 0..200 {
        s = solver.step(&s, 1e-3).unwrap();
    }
    assert!(max_error(&s, &init) < 1e-12);
}

#[test]
fn periodic_run_conserves_mass_and_energy() {
    let eos = pg();
    let tc = TransportCoefficients::constant(0.01, 0.0, 0.01).unwrap();
    let grid = Grid::line(1.0, 64, BoundaryKind::Periodic).unwrap();
    let m = ManufacturedSolution::new(
        ManufacturedKind::SmoothVortex1d,
        ManufacturedParams { amplitude: 0.05, ..Default::default() },
        &grid,
        eos.clone(),
        tc.clone(),
    )
    .unwrap();
    let solver = Solver::new(&eos, &tc);
    let traj = solver.run(m.initial_state(&grid), &RunOptions { final_time: 0.05, ..Default::default() }).unwrap();
    let rep = monitors(&traj);
    assert!(rep.mass_drift < 1e-12, "{}", rep.mass_drift);
    assert!(rep.energy_drift < 1e-6, "{}", rep.energy_drift);
    assert!(rep.sigma_nonnegative);
}

#[test]
fn wall_run_conserves_mass() {
    let eos = pg();
    let tc = TransportCoefficients::constant(0.05, 0.0, 0.05).unwrap();
    let grid = Grid::rect([1.0, 1.0], [16, 16], BoundaryKind::NoSlipNoFlux).unwrap();
    let m = ManufacturedSolution::new(ManufacturedKind::Smooth2d, ManufacturedParams::default(), &grid, eos.clone(), tc.clone())
        .unwrap();
    let solver = Solver::new(&eos, &tc);
    let traj = solver.run(m.initial_state(&grid), &RunOptions { final_time: 0.02, outputs: 2, ..Default::default() }).unwrap();
    let rep = monitors(&traj);
    assert!(rep.mass_drift < 1e-12, "{}", rep.mass_drift);
    assert!(rep.sigma_nonnegative);
}

fn manufactured_errors(dim: usize, boundary: BoundaryKind, levels: &[usize]) -> Vec<f64> {
    let eos = pg();
    let tc = TransportCoefficients::affine_theta(0.05, 0.02, 0.05).unwrap();
    levels
        .iter()
        .map(|&n| {
            let (grid, kind) = if dim == 1 {
                (Grid::line(1.0, n, boundary).unwrap(), ManufacturedKind::SmoothVortex1d)
            } else {
                (Grid::rect([1.0, 1.0], [n, n], boundary).unwrap(), ManufacturedKind::Smooth2d)
            };
            let m = ManufacturedSolution::new(kind, ManufacturedParams::default(), &grid, eos.clone(), tc.clone()).unwrap();
            let solver = Solver::new(&eos, &tc).with_forcing(&m);
            let opts = RunOptions { final_time: 0.05, outputs: 1, ..Default::default() };
            let traj = solver.run(m.initial_state(&grid), &opts).unwrap();
            let (t, last) = traj.states.last().unwrap();
            max_error(last, &m.state_at(&grid, t))
        })
        .collect()
}

fn orders(e: &[f64]) -> Vec<f64> {
    e.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn forced_solution_converges_at_second_order() {
    for (dim, b, levels) in [
        (1, BoundaryKind::Periodic, vec![16, 32, 64]),
        (1, BoundaryKind::NoSlipNoFlux, vec![16, 32, 64]),
        (2, BoundaryKind::NoSlipNoFlux, vec![8, 16, 32]),
    ] {
        let e = manufactured_errors(dim, b, &levels);
        let o = orders(&e);
        assert!(*o.last().unwrap() > 1.8, "dim {dim} {b:?}: errors {e:?} orders {o:?}");
    }
}

#[test]
fn shear_decays() {
    let eos = pg();
    let tc = TransportCoefficients::constant(0.1, 0.0, 0.1).unwrap();
    let grid = Grid::rect([1.0, 1.0], [16, 16], BoundaryKind::Periodic).unwrap();
    let init = State::new(
        0.0,
        nsf_dmv_core::field::ScalarField::constant(grid, 1.0),
        nsf_dmv_core::field::ScalarField::constant(grid, 1.0),
        nsf_dmv_core::field::VectorField::from_fn(grid, |x| Vector::new((2.0 * std::f64::consts::PI * x[1]).sin() * 0.05, 0.0)),
    )
    .unwrap();
    let solver = Solver::new(&eos, &tc);
    let traj = solver.run(init, &RunOptions { final_time: 0.2, outputs: 4, ..Default::default() }).unwrap();
    let ke: Vec<f64> = traj.states.values().iter().map(|s| s.u.values().iter().map(|u| u.norm_sq()).sum()).collect();
    assert!(ke.windows(2).all(|w| w[1] < w[0]));
    let rep = monitors(&traj);
    assert!(rep.entropy_decrease <= 1e-12);
    assert!(rep.energy_drift < 1e-4, "{}", rep.energy_drift);
}

use nsf_dmv_core::field::{
    cumulative_trapezoid, divergence, gradient, integrate, korn_poincare_field_check, traceless_part, BoundaryKind,
    FieldError, Grid, ScalarField, TimeSeries, VectorField,
};
use nsf_dmv_core::{Tensor, Vector};
use proptest::prelude::*;

const PI: f64 = std::f64::consts::PI;

proptest! {
    // Central and one-sided second-order stencils are exact on quadratics.
    #[test]
    fn gradient_exact_on_quadratics(
        a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0,
        nx in 4usize..12, ny in 4usize..12,
    ) {
        let g = Grid::rect([1.5, 0.7], [nx, ny], BoundaryKind::NoSlipNoFlux).unwrap();
        let f = ScalarField::from_fn(g, |x| a * x[0] + b * x[1] + c * x[0] * x[0] + d * x[0] * x[1]);
        let df = gradient(&f);
        for (k, v) in df.values().iter().enumerate() {
            let x = g.center(k);
            prop_assert!((v.0[0] - (a + 2.0 * c * x[0] + d * x[1])).abs() < 1e-10);
            prop_assert!((v.0[1] - (b + d * x[0])).abs() < 1e-10);
        }
    }

    #[test]
    fn periodic_divergence_integrates_to_zero(
        vals in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 48),
    ) {
        let g = Grid::rect([2.0, 1.0], [8, 6], BoundaryKind::Periodic).unwrap();
        let u = VectorField::new(g, vals.iter().map(|&(x, y)| Vector::new(x, y)).collect()).unwrap();
        prop_assert!(integrate(&divergence(&u)).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_exact_on_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, steps in prop::collection::vec(0.01f64..1.0, 1..20)) {
        let mut times = vec![0.0];
        for s in &steps {
            times.push(times.last().unwrap() + s);
        }
        let vals: Vec<f64> = times.iter().map(|t| a + b * t).collect();
        let cum = cumulative_trapezoid(&times, &vals);
        for (t, i) in times.iter().zip(&cum) {
            prop_assert!((i - (a * t + 0.5 * b * t * t)).abs() < 1e-10);
        }
    }

    #[test]
    fn traceless_part_is_symmetric_and_trace_free(m in prop::array::uniform4(-4.0f64..4.0)) {
        let t = traceless_part(&Tensor([[m[0], m[1]], [m[2], m[3]]]), 2).unwrap();
        prop_assert!(t.trace().abs() < 1e-12);
        prop_assert!((t.0[0][1] - t.0[1][0]).abs() < 1e-12);
    }
}

#[test]
fn time_series_needs_increasing_times_from_zero() {
    let mut ts = TimeSeries::new();
    assert_eq!(ts.push(0.5, 1.0), Err(FieldError::FirstTime(0.5)));
    ts.push(0.0, 1.0).unwrap();
    ts.push(0.1, 2.0).unwrap();
    assert!(matches!(ts.push(0.1, 3.0), Err(FieldError::TimeOrder { .. })));
    assert!(matches!(ts.push(0.05, 3.0), Err(FieldError::TimeOrder { .. })));
    assert!(TimeSeries::from_parts(vec![0.0, 1.0], vec![1.0]).is_err());
}

#[test]
fn korn_quotient_of_wall_mode() {
    let mut prev: Option<f64> = None;
    for n in [16, 32, 64] {
        let g = Grid::rect([1.0, 1.0], [n, n], BoundaryKind::NoSlipNoFlux).unwrap();
        let u = VectorField::from_fn(g, |x| {
            let s = (PI * x[0]).sin() * (PI * x[1]).sin();
            Vector::new(s, -0.5 * s)
        });
        let r = korn_poincare_field_check(&u).unwrap().ratio.unwrap();
        assert!(r.is_finite() && r > 0.0);
        if let Some(p) = prev {
            assert!(((r - p) / p).abs() < 0.05, "{p} -> {r}");
        }
        prev = Some(r);
    }
}

#[test]
fn korn_rejects_nonvanishing_and_periodic() {
    let g = Grid::rect([1.0, 1.0], [16, 16], BoundaryKind::NoSlipNoFlux).unwrap();
    let u = VectorField::constant(g, Vector::new(1.0, 0.0));
    assert!(matches!(korn_poincare_field_check(&u), Err(FieldError::BoundaryValue { .. })));
    let p = Grid::rect([1.0, 1.0], [16, 16], BoundaryKind::Periodic).unwrap();
    let u = VectorField::constant(p, Vector::ZERO);
    assert_eq!(korn_poincare_field_check(&u), Err(FieldError::NeedsWalls));
}

#[test]
fn zero_field_quotient_is_undefined() {
    let g = Grid::rect([1.0, 1.0], [8, 8], BoundaryKind::NoSlipNoFlux).unwrap();
    let r = korn_poincare_field_check(&VectorField::zeros(g)).unwrap();
    assert_eq!(r.ratio, None);
}

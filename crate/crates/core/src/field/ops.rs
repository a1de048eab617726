use alloc::vec::Vec;

use super::{BoundaryKind, FieldError, Grid, ScalarField, TensorField, TimeSeries, VectorField};
use crate::linalg::{Tensor, Vector};
use crate::num;

/// Derivative along `axis` at cell `(i, j)`: central in the interior, wrap-around on
/// periodic grids, second-order one-sided next to walls.
#[inline]
pub(crate) fn axis_derivative<F: Fn(usize) -> f64>(grid: &Grid, f: &F, i: usize, j: usize, axis: usize) -> f64 {
    if axis >= grid.dim() {
        return 0.0;
    }
    let n = grid.cells()[axis];
    let h = grid.h()[axis];
    let k = if axis == 0 { i } else { j };
    let at = |m: usize| if axis == 0 { f(grid.index(m, j)) } else { f(grid.index(i, m)) };
    match grid.boundary() {
        BoundaryKind::Periodic => {
            let p = if k + 1 == n { 0 } else { k + 1 };
            let m = if k == 0 { n - 1 } else { k - 1 };
            (at(p) - at(m)) / (2.0 * h)
        }
        BoundaryKind::NoSlipNoFlux => {
            if k == 0 {
                (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
            } else if k + 1 == n {
                (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
            } else {
                (at(k + 1) - at(k - 1)) / (2.0 * h)
            }
        }
    }
}

fn scalar_gradient_with<F: Fn(usize) -> f64>(grid: &Grid, f: F) -> Vec<Vector> {
    (0..grid.len())
        .map(|idx| {
            let (i, j) = grid.coords(idx);
            Vector([axis_derivative(grid, &f, i, j, 0), axis_derivative(grid, &f, i, j, 1)])
        })
        .collect()
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let v = f.values();
    let values = scalar_gradient_with(f.grid(), |k| v[k]);
    VectorField::new(*f.grid(), values).expect("same grid")
}

/// `(∇u)_{ij} = ∂_j u_i`.
pub fn gradient_vector(u: &VectorField) -> TensorField {
    let grid = u.grid();
    let v = u.values();
    let gx = scalar_gradient_with(grid, |k| v[k].0[0]);
    let gy = scalar_gradient_with(grid, |k| v[k].0[1]);
    let values = gx.iter().zip(gy.iter()).map(|(a, b)| Tensor([a.0, b.0])).collect();
    TensorField::new(*grid, values).expect("same grid")
}

pub fn divergence(u: &VectorField) -> ScalarField {
    gradient_vector(u).map(|g| g.trace())
}

/// `(div T)_i = Σ_j ∂_j T_ij`.
pub fn divergence_tensor(t: &TensorField) -> VectorField {
    let grid = t.grid();
    let v = t.values();
    let mut out = alloc::vec![Vector::ZERO; grid.len()];
    for r in 0..2 {
        for (idx, val) in out.iter_mut().enumerate() {
            let (i, j) = grid.coords(idx);
            let dx = axis_derivative(grid, &|k: usize| v[k].0[r][0], i, j, 0);
            let dy = axis_derivative(grid, &|k: usize| v[k].0[r][1], i, j, 1);
            val.0[r] = dx + dy;
        }
    }
    VectorField::new(*grid, out).expect("same grid")
}

/// `D[u] = (∇u + ∇ᵗu)/2`.
pub fn symmetric_gradient(u: &VectorField) -> TensorField {
    gradient_vector(u).map(|g| g.sym())
}

/// `T[A] = A + Aᵗ - (2/N) tr(A) I` for a single tensor.
pub fn traceless_part(a: &Tensor, dim: usize) -> Result<Tensor, FieldError> {
    if (dim != 1 && dim != 2) || !a.fits_dim(dim) {
        return Err(FieldError::Dimension(dim));
    }
    Ok(a.traceless(dim))
}

pub fn traceless_field(a: &TensorField) -> TensorField {
    let dim = a.grid().dim();
    a.map(|t| t.traceless(dim))
}

/// Midpoint rule: `Σ f_k |cell|`.
pub fn integrate(f: &ScalarField) -> f64 {
    f.values().iter().sum::<f64>() * f.grid().cell_volume()
}

/// Trapezoid rule over the stored times.
pub fn integrate_time(ts: &TimeSeries<f64>) -> f64 {
    cumulative_trapezoid(ts.times(), ts.values()).last().copied().unwrap_or(0.0)
}

/// Running trapezoid integrals, starting with 0 at the first time.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    for k in 0..times.len() {
        if k > 0 {
            acc += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
        }
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KornRatio {
    /// `∫|v|²`
    pub lhs: f64,
    /// `∫|T[∇v]|²`
    pub rhs: f64,
    /// `lhs/rhs`; `None` flags `0/0`.
    pub ratio: Option<f64>,
}

impl KornRatio {
    pub fn from_parts(lhs: f64, rhs: f64) -> Self {
        let ratio = if rhs > 0.0 {
            Some(lhs / rhs)
        } else if lhs == 0.0 {
            None
        } else {
            Some(f64::INFINITY)
        };
        KornRatio { lhs, rhs, ratio }
    }
}

/// Poincaré–Korn quotient `∫|v|² / ∫|T[∇v]|²` for a field vanishing on the walls.
///
/// Wall values are obtained by quadratic extrapolation from the three cells next to
/// each wall and must vanish up to `O(h²)`.
pub fn korn_poincare_field_check(v: &VectorField) -> Result<KornRatio, FieldError> {
    let grid = v.grid();
    if grid.boundary() != BoundaryKind::NoSlipNoFlux {
        return Err(FieldError::NeedsWalls);
    }
    let vals = v.values();
    let vmax = vals.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let cells = grid.cells();
    for axis in 0..grid.dim() {
        let n = cells[axis];
        let rel_h = grid.h()[axis] / grid.extents()[axis];
        // Solver output carries the O(h²) error of the scheme up to the wall.
        let tol = vmax * (1e-9 + 50.0 * rel_h * rel_h);
        let other = cells[1 - axis];
        for m in 0..other {
            let at = |k: usize| {
                if axis == 0 {
                    grid.index(k, m)
                } else {
                    grid.index(m, k)
                }
            };
            for (c0, c1, c2) in [(0, 1, 2), (n - 1, n - 2, n - 3)] {
                for comp in 0..2 {
                    let wall = (15.0 * vals[at(c0)].0[comp] - 10.0 * vals[at(c1)].0[comp]
                        + 3.0 * vals[at(c2)].0[comp])
                        / 8.0;
                    if num::abs(wall) > tol {
                        return Err(FieldError::BoundaryValue { cell: at(c0), value: wall });
                    }
                }
            }
        }
    }
    let dim = grid.dim();
    let g = gradient_vector(v);
    let lhs = vals.iter().map(|x| x.norm_sq()).sum::<f64>() * grid.cell_volume();
    let rhs = g.values().iter().map(|t| t.traceless(dim).norm_sq()).sum::<f64>() * grid.cell_volume();
    Ok(KornRatio::from_parts(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::PI;

    #[test]
    fn linear_gradient_exact_in_interior() {
        let g = Grid::line(1.0, 16, BoundaryKind::Periodic).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0]);
        let d = gradient(&f);
        for k in 1..15 {
            assert!((d.values()[k].0[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sine_gradient_converges_second_order() {
        let err = |n: usize| {
            let g = Grid::rect([1.0, 1.0], [n, n], BoundaryKind::Periodic).unwrap();
            let f = ScalarField::from_fn(g, |x| num::sin(2.0 * PI * x[0]));
            let d = gradient(&f);
            (0..g.len())
                .map(|k| (d.values()[k].0[0] - 2.0 * PI * num::cos(2.0 * PI * g.center(k)[0])).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(64) / err(128);
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn rigid_rotation_has_zero_symmetric_gradient() {
        let g = Grid::rect([1.0, 1.0], [8, 8], BoundaryKind::NoSlipNoFlux).unwrap();
        let u = VectorField::from_fn(g, |x| Vector::new(-x[1], x[0]));
        for t in symmetric_gradient(&u).values() {
            assert!(t.norm() < 1e-12);
        }
        let shear = VectorField::from_fn(g, |x| Vector::new(x[1], 0.0));
        let d = symmetric_gradient(&shear);
        assert!((d.values()[0].0[0][1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn midpoint_quadrature() {
        let g = Grid::line(1.0, 100, BoundaryKind::NoSlipNoFlux).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0] * x[0]);
        assert!((integrate(&f) - 1.0 / 3.0).abs() < 1e-4);
        let g = Grid::line(1.0, 64, BoundaryKind::Periodic).unwrap();
        assert!(integrate(&ScalarField::from_fn(g, |x| num::sin(2.0 * PI * x[0]))).abs() < 1e-12);
    }

    #[test]
    fn korn_field_examples() {
        let g = Grid::rect([1.0, 1.0], [16, 16], BoundaryKind::NoSlipNoFlux).unwrap();
        let zero = VectorField::zeros(g);
        assert_eq!(korn_poincare_field_check(&zero).unwrap().ratio, None);
        let c = VectorField::constant(g, Vector::new(1.0, 0.0));
        assert!(matches!(korn_poincare_field_check(&c), Err(FieldError::BoundaryValue { .. })));
    }
}

//! Semi-discrete right-hand side on a ghost-padded cell-centered grid.
//!
//! Ghost layers mirror ρ, θ, p and the transport coefficients evenly and the velocity
//! oddly at walls (no-slip, no-flux); periodic grids wrap.

use alloc::vec::Vec;

use super::{Solver, SolverError};
use crate::field::{BoundaryKind, Grid};
use crate::linalg::{Tensor, Vector};
use crate::thermo::ThermoPoint;

/// Time derivatives of the primitive variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    pub u: Vec<Vector>,
}

impl Derivative {
    pub(crate) fn axpy(&self, r: &[f64], t: &[f64], u: &[Vector], a: f64) -> (Vec<f64>, Vec<f64>, Vec<Vector>) {
        (
            r.iter().zip(&self.rho).map(|(x, d)| x + a * d).collect(),
            t.iter().zip(&self.theta).map(|(x, d)| x + a * d).collect(),
            u.iter().zip(&self.u).map(|(x, d)| *x + *d * a).collect(),
        )
    }
}

/// Scalar values with one ghost layer on every side.
pub(crate) struct Padded {
    nx: usize,
    data: Vec<f64>,
}

impl Padded {
    pub(crate) fn new<F: Fn(usize) -> f64>(grid: &Grid, f: F, parity: f64) -> Self {
        let [nx, ny] = grid.cells();
        let periodic = grid.boundary() == BoundaryKind::Periodic;
        let two_d = grid.dim() == 2;
        let px = nx + 2;
        let mut data = alloc::vec![0.0; px * (ny + 2)];
        let map = |k: isize, n: usize, active: bool| -> (usize, f64) {
            let n = n as isize;
            if !active {
                return (k.clamp(0, n - 1) as usize, 1.0);
            }
            if k < 0 {
                if periodic {
                    ((k + n) as usize, 1.0)
                } else {
                    ((-1 - k) as usize, parity)
                }
            } else if k >= n {
                if periodic {
                    ((k - n) as usize, 1.0)
                } else {
                    ((2 * n - 1 - k) as usize, parity)
                }
            } else {
                (k as usize, 1.0)
            }
        };
        for jj in 0..ny + 2 {
            let (j, sy) = map(jj as isize - 1, ny, two_d);
            for ii in 0..nx + 2 {
                let (i, sx) = map(ii as isize - 1, nx, true);
                data[jj * px + ii] = sx * sy * f(grid.index(i, j));
            }
        }
        Padded { nx: px, data }
    }

    /// Value at interior cell `(i, j)` shifted by `(di, dj)`.
    #[inline(always)]
    pub(crate) fn at(&self, i: usize, j: usize, di: isize, dj: isize) -> f64 {
        let ii = (i as isize + 1 + di) as usize;
        let jj = (j as isize + 1 + dj) as usize;
        self.data[jj * self.nx + ii]
    }
}

/// Central first and second differences on a padded array.
pub(crate) struct Stencil {
    pub hx: f64,
    pub hy: f64,
    pub two_d: bool,
}

impl Stencil {
    pub(crate) fn new(grid: &Grid) -> Self {
        let h = grid.h();
        Stencil { hx: h[0], hy: h[1], two_d: grid.dim() == 2 }
    }

    #[inline(always)]
    pub(crate) fn grad(&self, f: &Padded, i: usize, j: usize) -> Vector {
        let dx = (f.at(i, j, 1, 0) - f.at(i, j, -1, 0)) / (2.0 * self.hx);
        let dy = if self.two_d { (f.at(i, j, 0, 1) - f.at(i, j, 0, -1)) / (2.0 * self.hy) } else { 0.0 };
        Vector([dx, dy])
    }

    /// Hessian `[[f_xx, f_xy], [f_xy, f_yy]]`.
    #[inline(always)]
    pub(crate) fn hessian(&self, f: &Padded, i: usize, j: usize) -> Tensor {
        let c = f.at(i, j, 0, 0);
        let fxx = (f.at(i, j, 1, 0) - 2.0 * c + f.at(i, j, -1, 0)) / (self.hx * self.hx);
        if !self.two_d {
            return Tensor([[fxx, 0.0], [0.0, 0.0]]);
        }
        let fyy = (f.at(i, j, 0, 1) - 2.0 * c + f.at(i, j, 0, -1)) / (self.hy * self.hy);
        let fxy = (f.at(i, j, 1, 1) - f.at(i, j, 1, -1) - f.at(i, j, -1, 1) + f.at(i, j, -1, -1))
            / (4.0 * self.hx * self.hy);
        Tensor([[fxx, fxy], [fxy, fyy]])
    }
}

pub(crate) fn check_state(
    solver: &Solver<'_>,
    grid: &Grid,
    t: f64,
    rho: &[f64],
    theta: &[f64],
    u: &[Vector],
) -> Result<(), SolverError> {
    for c in 0..grid.len() {
        if !rho[c].is_finite() {
            return Err(SolverError::NonFinite { field: "rho", cell: c, t });
        }
        if !theta[c].is_finite() {
            return Err(SolverError::NonFinite { field: "theta", cell: c, t });
        }
        if !u[c].is_finite() {
            return Err(SolverError::NonFinite { field: "u", cell: c, t });
        }
        if rho[c] < solver.floors.rho {
            return Err(SolverError::Floor { field: "rho", cell: c, value: rho[c], t });
        }
        if theta[c] < solver.floors.theta {
            return Err(SolverError::Floor { field: "theta", cell: c, value: theta[c], t });
        }
    }
    Ok(())
}

/// Padded primitive fields and constitutive data shared by the right-hand side and the
/// entropy production monitor.
pub(crate) struct Frame {
    pub stencil: Stencil,
    pub tps: Vec<ThermoPoint>,
    pub theta: Padded,
    pub ux: Padded,
    pub uy: Padded,
    pub mu: Padded,
    pub lambda: Padded,
    pub kappa: Padded,
}

impl Frame {
    pub(crate) fn build(
        solver: &Solver<'_>,
        grid: &Grid,
        rho: &[f64],
        theta: &[f64],
        u: &[Vector],
    ) -> Result<Self, SolverError> {
        let n = grid.len();
        let mut tps = Vec::with_capacity(n);
        let mut mu = Vec::with_capacity(n);
        let mut lam = Vec::with_capacity(n);
        let mut kap = Vec::with_capacity(n);
        for c in 0..n {
            tps.push(solver.eos.eval(rho[c], theta[c])?);
            let tr = solver.transport.eval(rho[c], theta[c]);
            mu.push(tr.mu);
            lam.push(tr.lambda);
            kap.push(tr.kappa);
        }
        Ok(Frame {
            stencil: Stencil::new(grid),
            tps,
            theta: Padded::new(grid, |k| theta[k], 1.0),
            ux: Padded::new(grid, |k| u[k].0[0], -1.0),
            uy: Padded::new(grid, |k| u[k].0[1], -1.0),
            mu: Padded::new(grid, |k| mu[k], 1.0),
            lambda: Padded::new(grid, |k| lam[k], 1.0),
            kappa: Padded::new(grid, |k| kap[k], 1.0),
        })
    }

    #[inline(always)]
    pub(crate) fn grad_u(&self, i: usize, j: usize) -> Tensor {
        let gx = self.stencil.grad(&self.ux, i, j);
        let gy = self.stencil.grad(&self.uy, i, j);
        Tensor([gx.0, gy.0])
    }
}

pub(crate) fn evaluate(
    solver: &Solver<'_>,
    grid: &Grid,
    t: f64,
    rho: &[f64],
    theta: &[f64],
    u: &[Vector],
) -> Result<Derivative, SolverError> {
    check_state(solver, grid, t, rho, theta, u)?;
    let n = grid.len();
    let dim = grid.dim();
    let nd = dim as f64;
    let fr = Frame::build(solver, grid, rho, theta, u)?;
    let st = &fr.stencil;
    let p = Padded::new(grid, |k| fr.tps[k].p, 1.0);
    let mx = Padded::new(grid, |k| rho[k] * u[k].0[0], -1.0);
    let my = Padded::new(grid, |k| rho[k] * u[k].0[1], -1.0);

    let mut out = Derivative {
        rho: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
    };
    for c in 0..n {
        let (i, j) = grid.coords(c);
        let tp = &fr.tps[c];
        let r = rho[c];
        let uc = u[c];
        let src = match solver.forcing {
            Some(f) => f.source(t, grid.center(c)),
            None => Default::default(),
        };

        let div_m = st.grad(&mx, i, j).0[0] + st.grad(&my, i, j).0[1];
        out.rho.push(-div_m + src.mass);

        let g = fr.grad_u(i, j);
        let div_u = g.trace();
        let hx = st.hessian(&fr.ux, i, j);
        let hy = st.hessian(&fr.uy, i, j);
        let lap_u = Vector([hx.trace(), hy.trace()]);
        // ∂_i div u = Σ_k ∂_i ∂_k u_k
        let grad_div = Vector([hx.0[0][0] + hy.0[0][1], hx.0[0][1] + hy.0[1][1]]);
        let mu = fr.mu.at(i, j, 0, 0);
        let lam = fr.lambda.at(i, j, 0, 0);
        let kap = fr.kappa.at(i, j, 0, 0);
        let gmu = st.grad(&fr.mu, i, j);
        let glam = st.grad(&fr.lambda, i, j);
        let gkap = st.grad(&fr.kappa, i, j);
        let tl = g.traceless(dim);
        let div_s = lap_u * mu + grad_div * (mu * (1.0 - 2.0 / nd) + lam) + tl.apply(&gmu) + glam * div_u;
        let grad_p = st.grad(&p, i, j);
        let adv = g.apply(&uc);
        let du = (div_s - grad_p + src.momentum - uc * src.mass) * (1.0 / r) - adv;
        out.u.push(du);

        let gt = st.grad(&fr.theta, i, j);
        let lap_t = st.hessian(&fr.theta, i, j).trace();
        let stress = tl * mu + Tensor::identity(dim) * (lam * div_u);
        let heat = kap * lap_t + gkap.dot(&gt);
        let work = stress.ddot(&g) - (tp.p - r * r * tp.de_drho) * div_u;
        let dtheta = -uc.dot(&gt)
            + (heat + work + src.energy - (tp.e + r * tp.de_drho) * src.mass) / (r * tp.de_dtheta);
        out.theta.push(dtheta);
    }
    Ok(out)
}

//! Closed-form reference triples `(ρ̃, θ̃, ũ)` and the sources that make them exact
//! solutions of the forced system.
//!
//! Every component is a single separable trigonometric mode. Scalars use cosines (zero
//! normal derivative at walls), velocities use sines (vanishing at walls), so the fields
//! are compatible with the solver's ghost-cell parities.

use alloc::vec::Vec;

use super::{Forcing, SolverError, Source, State};
use crate::field::{BoundaryKind, Grid, ScalarField, VectorField};
use crate::linalg::{Tensor, Vector};
use crate::num;
use crate::thermo::{stress_from_parts, EquationOfState, TransportCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManufacturedKind {
    /// `(ρ̄, θ̄, 0)`, an exact unforced solution.
    Constant,
    SmoothVortex1d,
    Smooth2d,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedParams {
    pub rho_ref: f64,
    pub theta_ref: f64,
    /// Relative amplitude of the density and temperature modes.
    pub amplitude: f64,
    /// Velocity amplitude.
    pub velocity: f64,
    pub omega: f64,
    /// The fields must stay inside `[2δ, 1/δ - δ]`.
    pub delta: f64,
}

impl Default for ManufacturedParams {
    fn default() -> Self {
        ManufacturedParams {
            rho_ref: 1.0,
            theta_ref: 1.0,
            amplitude: 0.1,
            velocity: 0.1,
            omega: 2.0 * num::PI,
            delta: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile {
    One,
    Cos(f64),
    Sin(f64),
}

impl Profile {
    /// `(f, f', f'')`
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        match *self {
            Profile::One => (1.0, 0.0, 0.0),
            Profile::Cos(k) => {
                let (s, c) = (num::sin(k * x), num::cos(k * x));
                (c, -k * s, -k * k * c)
            }
            Profile::Sin(k) => {
                let (s, c) = (num::sin(k * x), num::cos(k * x));
                (s, k * c, -k * k * s)
            }
        }
    }
}

/// `c0 + cc cos ωt + cs sin ωt`
#[derive(Debug, Clone, Copy, PartialEq)]
struct TimeFactor {
    c0: f64,
    cc: f64,
    cs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Mode {
    scale: f64,
    x: Profile,
    y: Profile,
    time: TimeFactor,
}

#[derive(Debug, Clone, Copy, Default)]
struct ModeValue {
    v: f64,
    dt: f64,
    grad: Vector,
    hess: Tensor,
}

impl Mode {
    fn eval(&self, t: f64, x: [f64; 2], omega: f64) -> ModeValue {
        let (fx, dfx, ddfx) = self.x.eval(x[0]);
        let (fy, dfy, ddfy) = self.y.eval(x[1]);
        let (s, c) = (num::sin(omega * t), num::cos(omega * t));
        let tt = self.time.c0 + self.time.cc * c + self.time.cs * s;
        let dtt = omega * (-self.time.cc * s + self.time.cs * c);
        let a = self.scale;
        ModeValue {
            v: a * fx * fy * tt,
            dt: a * fx * fy * dtt,
            grad: Vector([a * dfx * fy * tt, a * fx * dfy * tt]),
            hess: Tensor([
                [a * ddfx * fy * tt, a * dfx * dfy * tt],
                [a * dfx * dfy * tt, a * fx * ddfy * tt],
            ]),
        }
    }
}

/// Value and derivatives of the reference triple at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StrongPoint {
    pub rho: f64,
    pub theta: f64,
    pub u: Vector,
    pub rho_t: f64,
    pub theta_t: f64,
    pub u_t: Vector,
    pub grad_rho: Vector,
    pub grad_theta: Vector,
    /// `(∇u)_{ij} = ∂_j u_i`
    pub grad_u: Tensor,
    pub hess_rho: Tensor,
    pub hess_theta: Tensor,
    pub hess_u: [Tensor; 2],
}

#[derive(Clone)]
pub struct ManufacturedSolution {
    kind: ManufacturedKind,
    params: ManufacturedParams,
    dim: usize,
    eos: EquationOfState,
    transport: TransportCoefficients,
    rho: Mode,
    theta: Mode,
    u: [Option<Mode>; 2],
}

impl ManufacturedSolution {
    pub fn new(
        kind: ManufacturedKind,
        params: ManufacturedParams,
        grid: &Grid,
        eos: EquationOfState,
        transport: TransportCoefficients,
    ) -> Result<Self, SolverError> {
        let p = params;
        if !(p.delta > 0.0 && p.delta < 0.5) {
            return Err(SolverError::Manufactured("delta must lie in (0, 1/2)"));
        }
        if kind == ManufacturedKind::SmoothVortex1d && grid.dim() != 1 {
            return Err(SolverError::Manufactured("smooth_vortex_1d needs a 1D grid"));
        }
        if kind == ManufacturedKind::Smooth2d && grid.dim() != 2 {
            return Err(SolverError::Manufactured("smooth_2d needs a 2D grid"));
        }
        let (amp, vel) = match kind {
            ManufacturedKind::Constant => (0.0, 0.0),
            _ => (p.amplitude, p.velocity),
        };
        let lo = 2.0 * p.delta;
        let hi = 1.0 / p.delta - p.delta;
        let in_box = |v: f64| v >= lo && v <= hi;
        if !(in_box(p.rho_ref * (1.0 - amp.abs()))
            && in_box(p.rho_ref * (1.0 + amp.abs()))
            && in_box(p.theta_ref * (1.0 - 1.5 * amp.abs()))
            && in_box(p.theta_ref * (1.0 + 1.5 * amp.abs())))
        {
            return Err(SolverError::Manufactured("fields leave the positivity box [2δ, 1/δ - δ]"));
        }
        let base = match grid.boundary() {
            BoundaryKind::NoSlipNoFlux => num::PI,
            BoundaryKind::Periodic => 2.0 * num::PI,
        };
        let [lx, ly] = grid.extents();
        let (kx, ky) = (base / lx, base / ly);
        let two_d = grid.dim() == 2;
        let yc = |m: f64| if two_d { Profile::Cos(m * ky) } else { Profile::One };
        let ys = |m: f64| if two_d { Profile::Sin(m * ky) } else { Profile::One };
        let osc = TimeFactor { c0: 0.0, cc: 1.0, cs: 0.0 };
        let drift = TimeFactor { c0: 1.0, cc: 0.0, cs: 0.5 };
        let rho = Mode { scale: p.rho_ref * amp, x: Profile::Cos(kx), y: yc(1.0), time: osc };
        let theta = Mode { scale: p.theta_ref * amp, x: Profile::Cos(2.0 * kx), y: yc(1.0), time: drift };
        let ux = Mode { scale: vel, x: Profile::Sin(kx), y: ys(2.0), time: osc };
        let uy = Mode { scale: -vel, x: Profile::Sin(2.0 * kx), y: ys(1.0), time: drift };
        Ok(ManufacturedSolution {
            kind,
            params: p,
            dim: grid.dim(),
            eos,
            transport,
            rho,
            theta,
            u: [Some(ux), if two_d { Some(uy) } else { None }],
        })
    }

    pub fn kind(&self) -> ManufacturedKind {
        self.kind
    }

    pub fn params(&self) -> &ManufacturedParams {
        &self.params
    }

    pub fn eos(&self) -> &EquationOfState {
        &self.eos
    }

    pub fn transport(&self) -> &TransportCoefficients {
        &self.transport
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, t: f64, x: [f64; 2]) -> StrongPoint {
        let w = self.params.omega;
        let r = self.rho.eval(t, x, w);
        let th = self.theta.eval(t, x, w);
        let mut sp = StrongPoint {
            rho: self.params.rho_ref + r.v,
            theta: self.params.theta_ref + th.v,
            rho_t: r.dt,
            theta_t: th.dt,
            grad_rho: r.grad,
            grad_theta: th.grad,
            hess_rho: r.hess,
            hess_theta: th.hess,
            ..Default::default()
        };
        if self.kind == ManufacturedKind::Constant {
            sp.rho = self.params.rho_ref;
            sp.theta = self.params.theta_ref;
            sp.rho_t = 0.0;
            sp.theta_t = 0.0;
            sp.grad_rho = Vector::ZERO;
            sp.grad_theta = Vector::ZERO;
            sp.hess_rho = Tensor::ZERO;
            sp.hess_theta = Tensor::ZERO;
            return sp;
        }
        for (c, mode) in self.u.iter().enumerate() {
            if let Some(m) = mode {
                let v = m.eval(t, x, w);
                sp.u.0[c] = v.v;
                sp.u_t.0[c] = v.dt;
                sp.grad_u.0[c] = v.grad.0;
                sp.hess_u[c] = v.hess;
            }
        }
        if self.dim == 1 {
            // y-profiles are constant; drop the y-derivatives
            sp.grad_rho.0[1] = 0.0;
            sp.grad_theta.0[1] = 0.0;
        }
        sp
    }

    pub fn state_at(&self, grid: &Grid, t: f64) -> State {
        let pts: Vec<StrongPoint> = (0..grid.len()).map(|k| self.point(t, grid.center(k))).collect();
        State {
            t,
            rho: ScalarField::new(*grid, pts.iter().map(|p| p.rho).collect()).expect("grid length"),
            theta: ScalarField::new(*grid, pts.iter().map(|p| p.theta).collect()).expect("grid length"),
            u: VectorField::new(*grid, pts.iter().map(|p| p.u).collect()).expect("grid length"),
        }
    }

    pub fn initial_state(&self, grid: &Grid) -> State {
        self.state_at(grid, 0.0)
    }

    pub fn velocity_field(&self, grid: &Grid, t: f64) -> VectorField {
        VectorField::from_fn(*grid, |x| self.point(t, x).u)
    }

    /// Residual of the unforced system at `(t, x)`.
    pub fn residual_source(&self, t: f64, x: [f64; 2]) -> Source {
        if self.kind == ManufacturedKind::Constant {
            return Source::default();
        }
        let sp = self.point(t, x);
        let tp = match self.eos.eval(sp.rho, sp.theta) {
            Ok(tp) => tp,
            Err(_) => return Source::default(),
        };
        let tr = self.transport.eval(sp.rho, sp.theta);
        let dim = self.dim;
        let nd = dim as f64;
        let (r, u, g) = (sp.rho, sp.u, sp.grad_u);
        let div_u = g.trace();
        let mass = sp.rho_t + sp.grad_rho.dot(&u) + r * div_u;
        let grad_p = sp.grad_rho * tp.dp_drho + sp.grad_theta * tp.dp_dtheta;
        let along = |d: [f64; 2]| sp.grad_rho * d[0] + sp.grad_theta * d[1];
        let (gmu, glam, gkap) = (along(tr.dmu), along(tr.dlambda), along(tr.dkappa));
        let [hx, hy] = sp.hess_u;
        let lap_u = Vector([hx.trace(), hy.trace()]);
        let grad_div = Vector([hx.0[0][0] + hy.0[0][1], hx.0[0][1] + hy.0[1][1]]);
        let tl = g.traceless(dim);
        let div_s = lap_u * tr.mu + grad_div * (tr.mu * (1.0 - 2.0 / nd) + tr.lambda) + tl.apply(&gmu) + glam * div_u;
        let momentum = (sp.u_t + g.apply(&u)) * r + u * mass + grad_p - div_s;
        let stress = stress_from_parts(tr.mu, tr.lambda, &g, dim);
        let div_q = -tr.kappa * sp.hess_theta.trace() - gkap.dot(&sp.grad_theta);
        let material_e = tp.de_dtheta * (sp.theta_t + u.dot(&sp.grad_theta)) + tp.de_drho * (sp.rho_t + u.dot(&sp.grad_rho));
        let energy = r * material_e + tp.e * mass + div_q - stress.ddot(&g) + tp.p * div_u;
        Source { mass, momentum, energy }
    }
}

impl Forcing for ManufacturedSolution {
    fn source(&self, t: f64, x: [f64; 2]) -> Source {
        self.residual_source(t, x)
    }
}

/// Which primitive field a perturbation mode acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationTarget {
    Rho,
    Theta,
    Ux,
    Uy,
}

/// One low-order mode `a · X_kx(x) Y_ky(y)`; cosines for scalars, sines for velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationMode {
    pub target: PerturbationTarget,
    pub kx: u32,
    pub ky: u32,
    pub amplitude: f64,
}

/// Smooth perturbation of initial data with overall size `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub epsilon: f64,
    pub modes: Vec<PerturbationMode>,
}

impl Perturbation {
    fn shape(&self, grid: &Grid, m: &PerturbationMode, x: [f64; 2]) -> f64 {
        let base = match grid.boundary() {
            BoundaryKind::NoSlipNoFlux => num::PI,
            BoundaryKind::Periodic => 2.0 * num::PI,
        };
        let [lx, ly] = grid.extents();
        let (ax, ay) = (base * m.kx as f64 * x[0] / lx, base * m.ky as f64 * x[1] / ly);
        let two_d = grid.dim() == 2;
        match m.target {
            PerturbationTarget::Rho | PerturbationTarget::Theta => {
                num::cos(ax) * if two_d { num::cos(ay) } else { 1.0 }
            }
            PerturbationTarget::Ux | PerturbationTarget::Uy => {
                num::sin(ax) * if two_d { num::sin(ay) } else { 1.0 }
            }
        }
    }

    /// `ρ(1 + εΣ)`, `θ(1 + εΣ)`, `u + εΣ`.
    pub fn apply(&self, state: &State) -> State {
        let grid = *state.grid();
        let mut out = state.clone();
        for k in 0..grid.len() {
            let x = grid.center(k);
            for m in &self.modes {
                let v = self.epsilon * m.amplitude * self.shape(&grid, m, x);
                match m.target {
                    PerturbationTarget::Rho => out.rho.values_mut()[k] *= 1.0 + v,
                    PerturbationTarget::Theta => out.theta.values_mut()[k] *= 1.0 + v,
                    PerturbationTarget::Ux => out.u.values_mut()[k].0[0] += v,
                    PerturbationTarget::Uy => {
                        if grid.dim() == 2 {
                            out.u.values_mut()[k].0[1] += v
                        }
                    }
                }
            }
        }
        out
    }
}

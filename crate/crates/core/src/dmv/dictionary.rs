//! Finite families of separable test functions `T(t) X(x) Y(y)` with exact cell data.
//!
//! Cell averages of `X` use 4-point Gauss–Legendre quadrature; cell averages of `X'` are
//! the exact difference quotients, so discrete integrals of derivatives telescope.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::field::{BoundaryKind, Grid};
use crate::linalg::{Tensor, Vector};
use crate::num;

/// One-dimensional factor as a function of `ξ = x/L ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis1d {
    One,
    /// `ξ^k`
    Monomial(u32),
    /// `ξ^a (1-ξ)^b`
    Bernstein(u32, u32),
    /// `cos(kπξ)`
    Cos(u32),
    /// `sin(kπξ)`
    Sin(u32),
    /// `(1 + cos(kπξ))/2`
    Bump(u32),
}

impl Basis1d {
    /// `(f(ξ), f'(ξ))`
    pub fn eval(&self, xi: f64) -> (f64, f64) {
        match *self {
            Basis1d::One => (1.0, 0.0),
            Basis1d::Monomial(0) => (1.0, 0.0),
            Basis1d::Monomial(k) => (num::powi(xi, k as i32), k as f64 * num::powi(xi, k as i32 - 1)),
            Basis1d::Bernstein(a, b) => {
                let (pa, pb) = (num::powi(xi, a as i32), num::powi(1.0 - xi, b as i32));
                let da = if a == 0 { 0.0 } else { a as f64 * num::powi(xi, a as i32 - 1) };
                let db = if b == 0 { 0.0 } else { -(b as f64) * num::powi(1.0 - xi, b as i32 - 1) };
                (pa * pb, da * pb + pa * db)
            }
            Basis1d::Cos(k) => {
                let w = k as f64 * num::PI;
                (num::cos(w * xi), -w * num::sin(w * xi))
            }
            Basis1d::Sin(k) => {
                let w = k as f64 * num::PI;
                (num::sin(w * xi), w * num::cos(w * xi))
            }
            Basis1d::Bump(k) => {
                let w = k as f64 * num::PI;
                (0.5 * (1.0 + num::cos(w * xi)), -0.5 * w * num::sin(w * xi))
            }
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Basis1d::One => String::from("1"),
            Basis1d::Monomial(k) => format!("m{k}"),
            Basis1d::Bernstein(a, b) => format!("b{a}.{b}"),
            Basis1d::Cos(k) => format!("c{k}"),
            Basis1d::Sin(k) => format!("s{k}"),
            Basis1d::Bump(k) => format!("p{k}"),
        }
    }

    fn nonnegative(&self) -> bool {
        matches!(self, Basis1d::One | Basis1d::Monomial(_) | Basis1d::Bernstein(..) | Basis1d::Bump(_))
    }

    fn vanishes_at_ends(&self) -> bool {
        match *self {
            Basis1d::Bernstein(a, b) => a > 0 && b > 0,
            Basis1d::Sin(_) => true,
            _ => false,
        }
    }
}

/// `X(x) Y(y)`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Spatial {
    pub x: Basis1d,
    pub y: Basis1d,
}

impl Spatial {
    pub fn new(x: Basis1d, y: Basis1d) -> Self {
        Spatial { x, y }
    }

    pub fn name(&self) -> String {
        format!("{}*{}", self.x.name(), self.y.name())
    }

    pub fn nonnegative(&self) -> bool {
        self.x.nonnegative() && self.y.nonnegative()
    }

    /// Point value and gradient.
    pub fn eval(&self, grid: &Grid, x: [f64; 2]) -> (f64, Vector) {
        let [lx, ly] = grid.extents();
        let (fx, dfx) = self.x.eval(x[0] / lx);
        let (fy, dfy) = if grid.dim() == 2 { self.y.eval(x[1] / ly) } else { (1.0, 0.0) };
        (fx * fy, Vector([dfx * fy / lx, fx * dfy / ly]))
    }

    /// Cell averages of the function and of its gradient.
    pub fn table(&self, grid: &Grid) -> SpatialTable {
        let [nx, ny] = grid.cells();
        let [hx, hy] = grid.h();
        let [lx, ly] = grid.extents();
        let (ax, dx) = axis_table(&self.x, nx, hx, lx);
        let (ay, dy) = if grid.dim() == 2 { axis_table(&self.y, ny, hy, ly) } else { (alloc::vec![1.0], alloc::vec![0.0]) };
        let mut value = Vec::with_capacity(grid.len());
        let mut grad = Vec::with_capacity(grid.len());
        for j in 0..ny {
            for i in 0..nx {
                value.push(ax[i] * ay[j]);
                grad.push(Vector([dx[i] * ay[j], ax[i] * dy[j]]));
            }
        }
        SpatialTable { value, grad }
    }
}

const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
];

fn axis_table(b: &Basis1d, n: usize, h: f64, l: f64) -> (Vec<f64>, Vec<f64>) {
    let mut avg = Vec::with_capacity(n);
    let mut davg = Vec::with_capacity(n);
    for i in 0..n {
        let (a, c) = (i as f64 * h, (i + 1) as f64 * h);
        let mid = 0.5 * (a + c);
        let s: f64 = GL4.iter().map(|(z, w)| w * b.eval((mid + 0.5 * h * z) / l).0).sum();
        avg.push(0.5 * s);
        davg.push((b.eval(c / l).0 - b.eval(a / l).0) / h);
    }
    (avg, davg)
}

/// Cell averages of `ψ` and `∇ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialTable {
    pub value: Vec<f64>,
    pub grad: Vec<Vector>,
}

/// Direction of a test function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestShape {
    Scalar,
    /// `ψ e_c`
    Vector(usize),
    /// `ψ (e_a ⊗ e_b + e_b ⊗ e_a)` for `a ≠ b`, `ψ e_a ⊗ e_a` for `a = b`.
    SymTensor(usize, usize),
}

impl TestShape {
    pub fn tensor(&self) -> Tensor {
        let mut t = Tensor::ZERO;
        match *self {
            TestShape::SymTensor(a, b) => {
                t.0[a][b] = 1.0;
                t.0[b][a] = 1.0;
            }
            TestShape::Vector(c) => t.0[c][c] = 1.0,
            TestShape::Scalar => {}
        }
        t
    }
}

/// `(t/t_ref)^p ψ(x)` times a fixed direction.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub id: String,
    pub time_power: u32,
    pub space: Spatial,
    pub shape: TestShape,
}

impl TestFunction {
    /// `(T(t), T'(t))`
    pub fn time_factor(&self, t: f64, t_ref: f64) -> (f64, f64) {
        let s = t / t_ref;
        let p = self.time_power as i32;
        let v = num::powi(s, p);
        let d = if p == 0 { 0.0 } else { p as f64 * num::powi(s, p - 1) / t_ref };
        (v, d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DictionaryOptions {
    /// Total polynomial degree in space.
    pub space_degree: u32,
    /// Largest power of `t`.
    pub time_degree: u32,
    /// Trigonometric bumps per category.
    pub bumps: u32,
}

impl Default for DictionaryOptions {
    fn default() -> Self {
        DictionaryOptions { space_degree: 3, time_degree: 2, bumps: 4 }
    }
}

/// Test families for the individual integral conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionDictionary {
    /// Time scale of the powers `(t/t_ref)^p`.
    pub t_ref: f64,
    /// Scalars without boundary condition (continuity).
    pub scalar: Vec<TestFunction>,
    /// Nonnegative scalars (entropy inequality).
    pub nonneg: Vec<TestFunction>,
    /// Vectors vanishing on the boundary (momentum).
    pub vector_compact: Vec<TestFunction>,
    /// Vectors with `φ·n = 0` on the boundary (temperature compatibility).
    pub vector_normal: Vec<TestFunction>,
    /// Symmetric tensors (velocity compatibility).
    pub tensor: Vec<TestFunction>,
}

const PAIRS: [(u32, u32); 8] = [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2), (3, 1), (1, 3)];
const POS_PAIRS: [(u32, u32); 8] = [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1), (1, 3), (3, 2), (2, 3)];

impl TestFunctionDictionary {
    pub fn standard(grid: &Grid, t_ref: f64) -> Self {
        Self::with_options(grid, t_ref, DictionaryOptions::default())
    }

    pub fn with_options(grid: &Grid, t_ref: f64, opts: DictionaryOptions) -> Self {
        let two_d = grid.dim() == 2;
        let d = opts.space_degree;
        let nb = opts.bumps as usize;
        let one = Basis1d::One;
        let mut free = Vec::new();
        let mut compact = Vec::new();
        let mut normal: [Vec<Spatial>; 2] = [Vec::new(), Vec::new()];
        let mut nonneg = Vec::new();
        match grid.boundary() {
            BoundaryKind::NoSlipNoFlux => {
                let cos = |k: u32| if k == 0 { one } else { Basis1d::Cos(k) };
                let bump = |k: u32| if k == 0 { one } else { Basis1d::Bump(k) };
                let vanishing: Vec<Basis1d> = (0..=d.saturating_sub(2))
                    .map(|a| Basis1d::Bernstein(1 + a, 1))
                    .chain((1..=2).map(Basis1d::Sin))
                    .collect();
                let side = [Basis1d::Monomial(0), Basis1d::Monomial(1), Basis1d::Cos(1)];
                if two_d {
                    for a in 0..=d {
                        for b in 0..=d - a {
                            free.push(Spatial::new(Basis1d::Monomial(a), Basis1d::Monomial(b)));
                        }
                    }
                    free.extend(PAIRS.iter().take(nb).map(|&(k, l)| Spatial::new(cos(k), cos(l))));
                    for a in 0..=d.saturating_sub(2) {
                        for b in 0..=d.saturating_sub(2) - a {
                            compact.push(Spatial::new(Basis1d::Bernstein(1 + a, 1), Basis1d::Bernstein(1 + b, 1)));
                        }
                    }
                    compact.extend(POS_PAIRS.iter().take(nb).map(|&(k, l)| Spatial::new(Basis1d::Sin(k), Basis1d::Sin(l))));
                    for v in &vanishing {
                        for s in &side {
                            normal[0].push(Spatial::new(*v, *s));
                            normal[1].push(Spatial::new(*s, *v));
                        }
                    }
                    let mut bern = Vec::new();
                    for a in 0..=d {
                        for b in 0..=d - a {
                            bern.push((a + b, Basis1d::Bernstein(a, b)));
                        }
                    }
                    for (dx, bx) in &bern {
                        for (dy, by) in &bern {
                            if dx + dy <= d {
                                nonneg.push(Spatial::new(*bx, *by));
                            }
                        }
                    }
                    nonneg.extend(PAIRS.iter().take(nb).map(|&(k, l)| Spatial::new(bump(k), bump(l))));
                } else {
                    free.extend((0..=d).map(|a| Spatial::new(Basis1d::Monomial(a), one)));
                    free.extend((1..=opts.bumps).map(|k| Spatial::new(Basis1d::Cos(k), one)));
                    compact.extend((0..=d.saturating_sub(2)).map(|a| Spatial::new(Basis1d::Bernstein(1 + a, 1), one)));
                    compact.extend((1..=opts.bumps).map(|k| Spatial::new(Basis1d::Sin(k), one)));
                    normal[0] = vanishing.iter().map(|v| Spatial::new(*v, one)).collect();
                    for a in 0..=d {
                        for b in 0..=d - a {
                            nonneg.push(Spatial::new(Basis1d::Bernstein(a, b), one));
                        }
                    }
                    nonneg.extend((1..=opts.bumps).map(|k| Spatial::new(Basis1d::Bump(k), one)));
                }
            }
            BoundaryKind::Periodic => {
                // frequencies are even multiples of π so every factor is 1-periodic in ξ
                let trig = |k: u32| -> Vec<Basis1d> {
                    if k == 0 {
                        alloc::vec![one]
                    } else {
                        alloc::vec![Basis1d::Cos(2 * k), Basis1d::Sin(2 * k)]
                    }
                };
                let bump = |k: u32| if k == 0 { one } else { Basis1d::Bump(2 * k) };
                let ky_max = if two_d { d } else { 0 };
                for kx in 0..=d {
                    for ky in 0..=ky_max.min(d - kx) {
                        for bx in trig(kx) {
                            for by in trig(ky) {
                                free.push(Spatial::new(bx, by));
                            }
                        }
                        nonneg.push(Spatial::new(bump(kx), bump(ky)));
                    }
                }
                compact = free.clone();
                normal[0] = free.clone();
                if two_d {
                    normal[1] = free.clone();
                }
            }
        }
        let powers = 0..=opts.time_degree;
        let mut dict = TestFunctionDictionary {
            t_ref,
            scalar: Vec::new(),
            nonneg: Vec::new(),
            vector_compact: Vec::new(),
            vector_normal: Vec::new(),
            tensor: Vec::new(),
        };
        let comps: &[usize] = if two_d { &[0, 1] } else { &[0] };
        let tensor_comps: &[(usize, usize)] = if two_d { &[(0, 0), (1, 1), (0, 1)] } else { &[(0, 0)] };
        for p in powers {
            for s in &free {
                dict.scalar.push(make("scalar", p, *s, TestShape::Scalar));
                for &(a, b) in tensor_comps {
                    dict.tensor.push(make("tensor", p, *s, TestShape::SymTensor(a, b)));
                }
            }
            for s in &nonneg {
                dict.nonneg.push(make("nonneg", p, *s, TestShape::Scalar));
            }
            for s in &compact {
                for &c in comps {
                    dict.vector_compact.push(make("momentum", p, *s, TestShape::Vector(c)));
                }
            }
            for &c in comps {
                for s in &normal[c] {
                    dict.vector_normal.push(make("normal", p, *s, TestShape::Vector(c)));
                }
            }
        }
        dict
    }

    pub fn len(&self) -> usize {
        self.scalar.len() + self.nonneg.len() + self.vector_compact.len() + self.vector_normal.len() + self.tensor.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Boundary and sign conditions of every member, checked on a fine sample of the
    /// closed domain. Returns the id of the first violation.
    pub fn validate(&self, grid: &Grid) -> Result<(), String> {
        let walls = grid.boundary() == BoundaryKind::NoSlipNoFlux;
        let two_d = grid.dim() == 2;
        for f in &self.nonneg {
            if !f.space.nonnegative() {
                return Err(f.id.clone());
            }
        }
        if walls {
            for f in &self.vector_compact {
                let ok = f.space.x.vanishes_at_ends() && (!two_d || f.space.y.vanishes_at_ends());
                if !ok {
                    return Err(f.id.clone());
                }
            }
            for f in &self.vector_normal {
                let b = if let TestShape::Vector(1) = f.shape { f.space.y } else { f.space.x };
                if !b.vanishes_at_ends() {
                    return Err(f.id.clone());
                }
            }
        }
        Ok(())
    }
}

fn make(prefix: &str, p: u32, s: Spatial, shape: TestShape) -> TestFunction {
    let dir = match shape {
        TestShape::Scalar => String::new(),
        TestShape::Vector(c) => format!("/e{c}"),
        TestShape::SymTensor(a, b) => format!("/e{a}{b}"),
    };
    TestFunction { id: format!("{prefix}/t{p}/{}{dir}", s.name()), time_power: p, space: s, shape }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sizes() {
        let g = Grid::rect([1.0, 1.0], [8, 8], BoundaryKind::NoSlipNoFlux).unwrap();
        let d = TestFunctionDictionary::standard(&g, 1.0);
        assert_eq!(d.scalar.len(), 3 * 14);
        assert_eq!(d.tensor.len(), 3 * 14 * 3);
        assert_eq!(d.vector_compact.len(), 3 * 7 * 2);
        assert!(d.validate(&g).is_ok());
        let g1 = Grid::line(1.0, 8, BoundaryKind::NoSlipNoFlux).unwrap();
        assert!(TestFunctionDictionary::standard(&g1, 1.0).validate(&g1).is_ok());
        let gp = Grid::rect([1.0, 1.0], [8, 8], BoundaryKind::Periodic).unwrap();
        assert!(!TestFunctionDictionary::standard(&gp, 1.0).scalar.is_empty());
    }

    #[test]
    fn averages_are_exact_for_polynomials() {
        let g = Grid::line(2.0, 5, BoundaryKind::NoSlipNoFlux).unwrap();
        let s = Spatial::new(Basis1d::Monomial(3), Basis1d::One);
        let t = s.table(&g);
        let h = 0.4;
        for (i, v) in t.value.iter().enumerate() {
            let (a, b) = (i as f64 * h / 2.0, (i + 1) as f64 * h / 2.0);
            let exact = (b.powi(4) - a.powi(4)) / 4.0 / (b - a);
            assert!((v - exact).abs() < 1e-14);
        }
        let total: f64 = t.grad.iter().map(|g| g.0[0]).sum::<f64>() * h;
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn derivatives_match_differences() {
        for b in [Basis1d::Monomial(3), Basis1d::Bernstein(2, 1), Basis1d::Cos(3), Basis1d::Sin(2), Basis1d::Bump(4)] {
            let x = 0.37;
            let e = 1e-6;
            let fd = (b.eval(x + e).0 - b.eval(x - e).0) / (2.0 * e);
            assert!((fd - b.eval(x).1).abs() < 1e-7, "{b:?}");
        }
    }
}

//! Discrete Young-measure fields and the integral conditions of a DMV solution.
//!
//! A [`MeasureField`] stores one finite atomic probability measure per stored time and
//! cell. The checks pair the measure with a finite [`TestFunctionDictionary`] using cell
//! averages in space and the trapezoid rule over the stored times.

mod bounds;
mod checks;
mod dictionary;

use alloc::vec::Vec;

pub use bounds::{
    concentration_bound_check, korn_poincare_measure_check, uniform_bound_report, ConcentrationBound,
    KornMeasureReport, UniformBoundReport,
};
pub use checks::{
    compatibility_residual, continuity_residual, energy_check, entropy_inequality_residual, momentum_residual,
    CheckOutcome, EnergyReport, Model, Residual,
};
pub(crate) use checks::slice_brackets;
pub use dictionary::{
    Basis1d, DictionaryOptions, Spatial, TestFunction, TestFunctionDictionary, TestShape,
};

use crate::field::{gradient, symmetric_gradient, FieldError, Grid, ScalarField, TimeSeries};
use crate::linalg::{Tensor, Vector};
use crate::solver::State;
use crate::thermo::ThermoError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DmvError {
    #[error("weights must be nonnegative and sum to 1, got sum {sum}")]
    Weights { sum: f64 },
    #[error("measure has no atoms")]
    Empty,
    #[error("ensemble members disagree: {0}")]
    Ensemble(&'static str),
    #[error("expected {expected} measures per slice, got {got}")]
    Slice { expected: usize, got: usize },
    #[error("time series must start at 0 and increase")]
    Times,
    #[error("defect atom refers to time index {t_index}, cell {cell} outside the field")]
    DefectIndex { t_index: usize, cell: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

/// A point `(ρ, θ, u, D_u, D_θ)` of the phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhasePoint {
    pub rho: f64,
    pub theta: f64,
    pub u: Vector,
    /// Symmetric velocity gradient.
    pub d_u: Tensor,
    /// Temperature gradient.
    pub d_theta: Vector,
}

/// Finite atomic probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<PhasePoint>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<PhasePoint>, weights: Vec<f64>) -> Result<Self, DmvError> {
        if atoms.is_empty() {
            return Err(DmvError::Empty);
        }
        if atoms.len() != weights.len() {
            return Err(DmvError::Slice { expected: atoms.len(), got: weights.len() });
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(DmvError::Weights { sum });
        }
        Ok(DiscreteMeasure { atoms, weights })
    }

    pub fn dirac(p: PhasePoint) -> Self {
        DiscreteMeasure { atoms: alloc::vec![p], weights: alloc::vec![1.0] }
    }

    /// Equal weights `1/K`.
    pub fn uniform(atoms: Vec<PhasePoint>) -> Result<Self, DmvError> {
        if atoms.is_empty() {
            return Err(DmvError::Empty);
        }
        let w = 1.0 / atoms.len() as f64;
        let weights = alloc::vec![w; atoms.len()];
        Ok(DiscreteMeasure { atoms, weights })
    }

    pub fn atoms(&self) -> &[PhasePoint] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn as_ref(&self) -> MeasureRef<'_> {
        MeasureRef { atoms: &self.atoms, weights: &self.weights }
    }

    /// `Σ w_i g(atom_i)`; an infinite observable makes the result infinite.
    pub fn expectation<G: Fn(&PhasePoint) -> f64>(&self, g: G) -> f64 {
        self.as_ref().expectation(g)
    }
}

/// Borrowed view of one measure inside a [`MeasureField`].
#[derive(Debug, Clone, Copy)]
pub struct MeasureRef<'a> {
    pub atoms: &'a [PhasePoint],
    pub weights: &'a [f64],
}

impl<'a> MeasureRef<'a> {
    pub fn expectation<G: Fn(&PhasePoint) -> f64>(&self, g: G) -> f64 {
        self.atoms.iter().zip(self.weights).map(|(a, w)| if *w == 0.0 { 0.0 } else { w * g(a) }).sum()
    }

    pub fn expectation_vector<G: Fn(&PhasePoint) -> Vector>(&self, g: G) -> Vector {
        let mut acc = Vector::ZERO;
        for (a, w) in self.atoms.iter().zip(self.weights) {
            acc += g(a) * *w;
        }
        acc
    }

    pub fn expectation_tensor<G: Fn(&PhasePoint) -> Tensor>(&self, g: G) -> Tensor {
        let mut acc = Tensor::ZERO;
        for (a, w) in self.atoms.iter().zip(self.weights) {
            acc += g(a) * *w;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Slice {
    offsets: Vec<usize>,
    atoms: Vec<PhasePoint>,
    weights: Vec<f64>,
}

impl Slice {
    fn from_measures(measures: Vec<DiscreteMeasure>) -> Self {
        let mut offsets = Vec::with_capacity(measures.len() + 1);
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for m in measures {
            atoms.extend_from_slice(&m.atoms);
            weights.extend_from_slice(&m.weights);
            offsets.push(atoms.len());
        }
        Slice { offsets, atoms, weights }
    }
}

/// `V_{t,x}` at the stored times; the first slice plays the role of `V_{0,x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureField {
    grid: Grid,
    times: Vec<f64>,
    slices: Vec<Slice>,
}

impl MeasureField {
    /// `measures[k][cell]` is the measure at `times[k]`.
    pub fn new(grid: Grid, times: Vec<f64>, measures: Vec<Vec<DiscreteMeasure>>) -> Result<Self, DmvError> {
        check_times(&times)?;
        if measures.len() != times.len() {
            return Err(DmvError::Slice { expected: times.len(), got: measures.len() });
        }
        let mut slices = Vec::with_capacity(times.len());
        for m in measures {
            if m.len() != grid.len() {
                return Err(DmvError::Slice { expected: grid.len(), got: m.len() });
            }
            slices.push(Slice::from_measures(m));
        }
        Ok(MeasureField { grid, times, slices })
    }

    /// Young measure of an ensemble: at every stored time and cell the atoms are the
    /// members' `(ρ, θ, u, D[u], ∇θ)` with equal weights, using the discrete operators
    /// of [`crate::field`].
    pub fn from_ensemble(runs: &[TimeSeries<State>]) -> Result<Self, DmvError> {
        let first = runs.first().ok_or(DmvError::Empty)?;
        let grid = *first.values().first().ok_or(DmvError::Empty)?.grid();
        let times = first.times().to_vec();
        for r in runs {
            if r.len() != times.len() {
                return Err(DmvError::Ensemble("different number of stored times"));
            }
            for (a, b) in r.times().iter().zip(&times) {
                if (a - b).abs() > 1e-12 * b.abs().max(1.0) {
                    return Err(DmvError::Ensemble("stored times differ"));
                }
            }
            if r.values().iter().any(|s| !s.grid().same_shape(&grid)) {
                return Err(FieldError::GridMismatch.into());
            }
        }
        let k = runs.len();
        let w = 1.0 / k as f64;
        let n = grid.len();
        let mut slices = Vec::with_capacity(times.len());
        for ti in 0..times.len() {
            let mut atoms = alloc::vec![PhasePoint::default(); n * k];
            for (m, run) in runs.iter().enumerate() {
                let s = &run.values()[ti];
                let du = symmetric_gradient(&s.u);
                let dt = gradient(&s.theta);
                for c in 0..n {
                    atoms[c * k + m] = PhasePoint {
                        rho: s.rho.values()[c],
                        theta: s.theta.values()[c],
                        u: s.u.values()[c],
                        d_u: du.values()[c],
                        d_theta: dt.values()[c],
                    };
                }
            }
            slices.push(Slice {
                offsets: (0..=n).map(|c| c * k).collect(),
                atoms,
                weights: alloc::vec![w; n * k],
            });
        }
        Ok(MeasureField { grid, times, slices })
    }

    /// Dirac field of a single trajectory.
    pub fn dirac(run: &TimeSeries<State>) -> Result<Self, DmvError> {
        Self::from_ensemble(core::slice::from_ref(run))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn measure(&self, t_index: usize, cell: usize) -> MeasureRef<'_> {
        let s = &self.slices[t_index];
        let (a, b) = (s.offsets[cell], s.offsets[cell + 1]);
        MeasureRef { atoms: &s.atoms[a..b], weights: &s.weights[a..b] }
    }

    /// Total number of atoms over all slices.
    pub fn atom_count(&self) -> usize {
        self.slices.iter().map(|s| s.atoms.len()).sum()
    }

    /// Cell means `⟨V; g⟩` at one stored time.
    pub fn mean_field<G: Fn(&PhasePoint) -> f64>(&self, t_index: usize, g: G) -> ScalarField {
        let vals = (0..self.grid.len()).map(|c| self.measure(t_index, c).expectation(&g)).collect();
        ScalarField::new(self.grid, vals).expect("grid length")
    }

    /// Applies `f(t_index, cell, atom)` to every atom.
    pub fn map_atoms<F: FnMut(usize, usize, &mut PhasePoint)>(&mut self, mut f: F) {
        for (ti, s) in self.slices.iter_mut().enumerate() {
            for c in 0..s.offsets.len() - 1 {
                for a in &mut s.atoms[s.offsets[c]..s.offsets[c + 1]] {
                    f(ti, c, a);
                }
            }
        }
    }

    /// Raw parts `(offsets, atoms, weights)` of one slice, for serialization.
    pub fn slice_parts(&self, t_index: usize) -> (&[usize], &[PhasePoint], &[f64]) {
        let s = &self.slices[t_index];
        (&s.offsets, &s.atoms, &s.weights)
    }

    /// Inverse of [`MeasureField::slice_parts`]; validates every measure.
    pub fn from_parts(
        grid: Grid,
        times: Vec<f64>,
        parts: Vec<(Vec<usize>, Vec<PhasePoint>, Vec<f64>)>,
    ) -> Result<Self, DmvError> {
        check_times(&times)?;
        if parts.len() != times.len() {
            return Err(DmvError::Slice { expected: times.len(), got: parts.len() });
        }
        let mut slices = Vec::with_capacity(parts.len());
        for (offsets, atoms, weights) in parts {
            if offsets.len() != grid.len() + 1 {
                return Err(DmvError::Slice { expected: grid.len() + 1, got: offsets.len() });
            }
            if atoms.len() != weights.len() || offsets[0] != 0 || *offsets.last().unwrap() != atoms.len() {
                return Err(DmvError::Slice { expected: atoms.len(), got: weights.len() });
            }
            for c in 0..grid.len() {
                let (a, b) = (offsets[c], offsets[c + 1]);
                if b <= a {
                    return Err(DmvError::Empty);
                }
                let ws = &weights[a..b];
                let sum: f64 = ws.iter().sum();
                if ws.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
                    return Err(DmvError::Weights { sum });
                }
            }
            slices.push(Slice { offsets, atoms, weights });
        }
        Ok(MeasureField { grid, times, slices })
    }
}

fn check_times(times: &[f64]) -> Result<(), DmvError> {
    if times.is_empty() || times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(DmvError::Times);
    }
    Ok(())
}

/// Tensor mass of the concentration measure carried by one cell at one stored time.
///
/// The masses are read as a density in time and paired with the trapezoid weights of
/// the stored times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationAtom {
    pub t_index: usize,
    pub cell: usize,
    pub mass: Tensor,
}

/// Concentration measure, entropy production surplus and concentration defect.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DefectData {
    pub nu_c: Vec<ConcentrationAtom>,
    /// Nonnegative density of the surplus of `σ` over the dissipation expectation, one
    /// field per stored time.
    pub sigma_extra: Option<Vec<ScalarField>>,
    pub d_series: Option<TimeSeries<f64>>,
}

impl DefectData {
    pub fn validate(&self, field: &MeasureField) -> Result<(), DmvError> {
        for a in &self.nu_c {
            if a.t_index >= field.len() || a.cell >= field.grid().len() {
                return Err(DmvError::DefectIndex { t_index: a.t_index, cell: a.cell });
            }
        }
        if let Some(s) = &self.sigma_extra {
            if s.len() != field.len() {
                return Err(DmvError::Slice { expected: field.len(), got: s.len() });
            }
        }
        Ok(())
    }

    /// Total variation `Σ|mass|` of `ν_C` at each stored time.
    pub fn total_variation(&self, slices: usize) -> Vec<f64> {
        let mut tv = alloc::vec![0.0; slices];
        for a in &self.nu_c {
            if a.t_index < slices {
                tv[a.t_index] += a.mass.norm();
            }
        }
        tv
    }
}

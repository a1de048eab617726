//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use nsf_dmv_core::field::{BoundaryKind, Grid};
use nsf_dmv_core::relenergy::{GronwallOptions, Theorem};
use nsf_dmv_core::solver::{ManufacturedKind, ManufacturedParams, ManufacturedSolution, RunOptions};
use nsf_dmv_core::thermo::{DegeneratePressure, EquationOfState, IdealPressure, TransportCoefficients};

use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Expected roll-up; `suite` counts a config as passing when the outcome matches.
    #[serde(default = "yes")]
    pub expect_pass: bool,
    pub grid: GridSpec,
    #[serde(default)]
    pub eos: EosSpec,
    #[serde(default)]
    pub transport: TransportSpec,
    #[serde(default)]
    pub strong: StrongSpec,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub theorem: TheoremSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

fn yes() -> bool {
    true
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Walls,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub cells: Vec<usize>,
    #[serde(default)]
    pub extents: Option<Vec<f64>>,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
}

fn default_boundary() -> Boundary {
    Boundary::Walls
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EosSpec {
    PerfectGas {
        #[serde(default = "default_cv")]
        c_v: f64,
    },
    Monoatomic {
        #[serde(default)]
        pressure: PressureSpec,
    },
    Radiative {
        base: RadiativeBase,
        #[serde(default = "default_cv")]
        c_v: f64,
        #[serde(default)]
        pressure: PressureSpec,
        a: f64,
        exponent: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiativeBase {
    PerfectGas,
    Monoatomic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum PressureSpec {
    #[default]
    Ideal,
    Degenerate { p_bar: f64, beta: f64 },
}

fn default_cv() -> f64 {
    1.5
}

impl Default for EosSpec {
    fn default() -> Self {
        EosSpec::PerfectGas { c_v: default_cv() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransportSpec {
    Constant {
        mu: f64,
        #[serde(default)]
        lambda: f64,
        kappa: f64,
    },
    AffineTheta {
        mu0: f64,
        mu1: f64,
        kappa: f64,
    },
}

impl Default for TransportSpec {
    fn default() -> Self {
        TransportSpec::Constant { mu: 0.05, lambda: 0.0, kappa: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrongKind {
    Constant,
    #[serde(rename = "smooth_vortex_1d")]
    SmoothVortex1d,
    #[serde(rename = "smooth_2d")]
    Smooth2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrongSpec {
    pub kind: StrongKind,
    #[serde(default = "one")]
    pub rho_ref: f64,
    #[serde(default = "one")]
    pub theta_ref: f64,
    #[serde(default = "tenth")]
    pub amplitude: f64,
    #[serde(default = "tenth")]
    pub velocity: f64,
    #[serde(default = "two_pi")]
    pub omega: f64,
    #[serde(default = "tenth")]
    pub delta: f64,
}

fn one() -> f64 {
    1.0
}
fn tenth() -> f64 {
    0.1
}
fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}

impl Default for StrongSpec {
    fn default() -> Self {
        StrongSpec {
            kind: StrongKind::Constant,
            rho_ref: 1.0,
            theta_ref: 1.0,
            amplitude: 0.1,
            velocity: 0.1,
            omega: two_pi(),
            delta: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default = "tenth")]
    pub final_time: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_outputs")]
    pub outputs: usize,
    /// Drop the manufactured forcing, e.g. for conservation runs.
    #[serde(default)]
    pub unforced: bool,
}

fn default_cfl() -> f64 {
    0.3
}
fn default_outputs() -> usize {
    10
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec { final_time: 0.1, cfl: 0.3, outputs: 10, unforced: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    DiracBaseline,
    PerturbedEnsemble {
        members: usize,
        epsilon: f64,
        #[serde(default = "default_modes")]
        modes: usize,
    },
    RefinementFamily {
        levels: usize,
    },
    SyntheticDefect {
        /// Trace of an isotropic concentration mass placed at the domain center, one per
        /// stored time after the first.
        masses: Vec<f64>,
    },
}

fn default_modes() -> usize {
    4
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec::DiracBaseline
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremName {
    TG1,
    T1,
    T2,
    T3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremSpec {
    pub name: TheoremName,
    #[serde(default = "tenth")]
    pub delta: f64,
    #[serde(default = "default_theta_max")]
    pub theta_max: f64,
    #[serde(default = "default_u_max")]
    pub u_max: f64,
    #[serde(default = "default_s_max")]
    pub s_max: f64,
}

fn default_theta_max() -> f64 {
    2.0
}
fn default_u_max() -> f64 {
    1.0
}
fn default_s_max() -> f64 {
    2.0
}

impl Default for TheoremSpec {
    fn default() -> Self {
        TheoremSpec { name: TheoremName::TG1, delta: 0.1, theta_max: 2.0, u_max: 1.0, s_max: 2.0 }
    }
}

impl TheoremSpec {
    pub fn theorem(&self) -> Theorem {
        match self.name {
            TheoremName::TG1 => Theorem::Tg1 { delta: self.delta },
            TheoremName::T1 => Theorem::T1 { theta_max: self.theta_max, u_max: self.u_max },
            TheoremName::T2 => Theorem::T2 { s_max: self.s_max },
            TheoremName::T3 => Theorem::T3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Weak identities (compatibility, continuity, momentum).
    pub identity: f64,
    /// Lower bound for entropy slack, energy defect and relative energy inequality slack.
    pub inequality: f64,
    /// Floor for `H` in the Gronwall fit and bound.
    pub gronwall: f64,
    /// `a` in the grid-dependent floor `gronwall + a h²`.
    pub gronwall_h2: f64,
    /// Relative total-energy drift allowed on unforced runs.
    pub energy_drift: f64,
    pub initial: f64,
    pub structure_constant: f64,
    pub margin: f64,
    pub zero_defect: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-8,
            inequality: 1e-8,
            gronwall: 1e-8,
            gronwall_h2: 0.0,
            energy_drift: 1e-6,
            initial: 1e-12,
            structure_constant: 100.0,
            margin: 0.2,
            zero_defect: 1e-14,
        }
    }
}

impl Tolerances {
    /// Options for a grid of minimal spacing `h`.
    pub fn gronwall_options(&self, h: f64) -> GronwallOptions {
        GronwallOptions {
            tolerance: self.gronwall + self.gronwall_h2 * h * h,
            initial_tolerance: self.initial,
            structure_constant: self.structure_constant,
            margin: self.margin,
            zero_defect: self.zero_defect,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from("out"), seed: 42 }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.grid()?;
        self.eos()?;
        self.transport()?;
        self.strong(&self.grid()?)?;
        let r = &self.run;
        if !(r.final_time > 0.0 && r.cfl > 0.0 && r.outputs > 0) {
            return Err(Error::Config("run.final_time, run.cfl and run.outputs must be positive".into()));
        }
        match &self.scenario {
            ScenarioSpec::PerturbedEnsemble { members, epsilon, modes } => {
                if *members == 0 || *modes == 0 || !(*epsilon >= 0.0) {
                    return Err(Error::Config("perturbed_ensemble needs members, modes > 0 and epsilon >= 0".into()));
                }
            }
            ScenarioSpec::RefinementFamily { levels } if *levels < 2 => {
                return Err(Error::Config("refinement_family needs at least 2 levels".into()));
            }
            ScenarioSpec::SyntheticDefect { masses } if masses.len() != r.outputs => {
                return Err(Error::Config(format!(
                    "synthetic_defect needs one mass per stored time after the first ({} given, {} expected)",
                    masses.len(),
                    r.outputs
                )));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, Error> {
        let g = &self.grid;
        let dim = g.cells.len();
        let extents = g.extents.clone().unwrap_or_else(|| vec![1.0; dim]);
        let boundary = match g.boundary {
            Boundary::Walls => BoundaryKind::NoSlipNoFlux,
            Boundary::Periodic => BoundaryKind::Periodic,
        };
        Grid::new(dim, &extents, &g.cells, boundary).map_err(|e| Error::Config(format!("grid: {e}")))
    }

    pub fn eos(&self) -> Result<EquationOfState, Error> {
        let wrap = |e: nsf_dmv_core::thermo::ThermoError| Error::Config(format!("eos: {e}"));
        let mono = |p: &PressureSpec| match p {
            PressureSpec::Ideal => EquationOfState::monoatomic(Arc::new(IdealPressure)),
            PressureSpec::Degenerate { p_bar, beta } => {
                EquationOfState::monoatomic(Arc::new(DegeneratePressure::new(*p_bar, *beta)?))
            }
        };
        match &self.eos {
            EosSpec::PerfectGas { c_v } => EquationOfState::perfect_gas(*c_v).map_err(wrap),
            EosSpec::Monoatomic { pressure } => mono(pressure).map_err(wrap),
            EosSpec::Radiative { base, c_v, pressure, a, exponent } => {
                let b = match base {
                    RadiativeBase::PerfectGas => EquationOfState::perfect_gas(*c_v),
                    RadiativeBase::Monoatomic => mono(pressure),
                }
                .map_err(wrap)?;
                EquationOfState::radiative(b, *a, *exponent).map_err(wrap)
            }
        }
    }

    pub fn transport(&self) -> Result<TransportCoefficients, Error> {
        let r = match self.transport {
            TransportSpec::Constant { mu, lambda, kappa } => TransportCoefficients::constant(mu, lambda, kappa),
            TransportSpec::AffineTheta { mu0, mu1, kappa } => TransportCoefficients::affine_theta(mu0, mu1, kappa),
        };
        r.map_err(|e| Error::Config(format!("transport: {e}")))
    }

    pub fn strong(&self, grid: &Grid) -> Result<ManufacturedSolution, Error> {
        let s = &self.strong;
        let kind = match s.kind {
            StrongKind::Constant => ManufacturedKind::Constant,
            StrongKind::SmoothVortex1d => ManufacturedKind::SmoothVortex1d,
            StrongKind::Smooth2d => ManufacturedKind::Smooth2d,
        };
        let params = ManufacturedParams {
            rho_ref: s.rho_ref,
            theta_ref: s.theta_ref,
            amplitude: s.amplitude,
            velocity: s.velocity,
            omega: s.omega,
            delta: s.delta,
        };
        ManufacturedSolution::new(kind, params, grid, self.eos()?, self.transport()?)
            .map_err(|e| Error::Config(format!("strong: {e}")))
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            final_time: self.run.final_time,
            cfl: self.run.cfl,
            outputs: self.run.outputs,
            ..Default::default()
        }
    }
}

//! On-disk formats: run directories (snapshot and monitor CSV, `run.json`), the binary
//! measure-field file and the JSON defect file.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nsf_dmv_core::dmv::{ConcentrationAtom, DefectData, MeasureField, PhasePoint};
use nsf_dmv_core::field::{BoundaryKind, Grid, ScalarField, TimeSeries, VectorField};
use nsf_dmv_core::solver::{MonitorRecord, State, Trajectory};
use nsf_dmv_core::{Tensor, Vector};

use crate::Error;

pub const FIELD_MAGIC: &[u8; 4] = b"DMV1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub dim: usize,
    pub cells: [usize; 2],
    pub extents: [f64; 2],
    pub periodic: bool,
}

impl From<&Grid> for GridInfo {
    fn from(g: &Grid) -> Self {
        GridInfo { dim: g.dim(), cells: g.cells(), extents: g.extents(), periodic: g.boundary() == BoundaryKind::Periodic }
    }
}

impl GridInfo {
    pub fn grid(&self) -> Result<Grid, Error> {
        let d = self.dim.clamp(1, 2);
        let b = if self.periodic { BoundaryKind::Periodic } else { BoundaryKind::NoSlipNoFlux };
        Grid::new(self.dim, &self.extents[..d], &self.cells[..d], b).map_err(|e| Error::Format(format!("grid: {e}")))
    }
}

/// Metadata of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub name: String,
    pub grid: GridInfo,
    pub steps: usize,
    pub times: Vec<f64>,
    pub member: Option<usize>,
    /// Echo of the configuration the run was produced with.
    pub config: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotRow {
    t: f64,
    cell: usize,
    x: f64,
    y: f64,
    rho: f64,
    theta: f64,
    ux: f64,
    uy: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct MonitorRow {
    t: f64,
    #[serde(rename = "mass")]
    total_mass: f64,
    #[serde(rename = "energy")]
    total_energy: f64,
    #[serde(rename = "entropy")]
    total_entropy: f64,
    #[serde(rename = "sigma_int")]
    entropy_production_integral: f64,
    min_rho: f64,
    min_theta: f64,
}

pub const SNAPSHOTS: &str = "snapshots.csv";
pub const MONITORS: &str = "monitors.csv";
pub const RUN_INFO: &str = "run.json";

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Format(format!("{}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Error> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_states(path: &Path, states: &TimeSeries<State>) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for (t, s) in states.iter() {
        let grid = s.grid();
        for c in 0..grid.len() {
            let [x, y] = grid.center(c);
            let u = s.u.values()[c];
            w.serialize(SnapshotRow {
                t,
                cell: c,
                x,
                y,
                rho: s.rho.values()[c],
                theta: s.theta.values()[c],
                ux: u.0[0],
                uy: u.0[1],
            })
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_states(path: &Path, grid: Grid) -> Result<TimeSeries<State>, Error> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut out = TimeSeries::new();
    let mut rows: Vec<SnapshotRow> = Vec::with_capacity(grid.len());
    let flush = |rows: &mut Vec<SnapshotRow>, out: &mut TimeSeries<State>| -> Result<(), Error> {
        if rows.is_empty() {
            return Ok(());
        }
        if rows.len() != grid.len() || rows.iter().enumerate().any(|(k, r)| r.cell != k) {
            return Err(Error::Format(format!("{}: incomplete snapshot at t = {}", path.display(), rows[0].t)));
        }
        let t = rows[0].t;
        let rho = ScalarField::new(grid, rows.iter().map(|r| r.rho).collect()).map_err(|e| Error::Format(e.to_string()))?;
        let theta = ScalarField::new(grid, rows.iter().map(|r| r.theta).collect()).map_err(|e| Error::Format(e.to_string()))?;
        let u = VectorField::new(grid, rows.iter().map(|r| Vector::new(r.ux, r.uy)).collect())
            .map_err(|e| Error::Format(e.to_string()))?;
        let mut s = State::new(t, rho, theta, u).map_err(|e| Error::Format(e.to_string()))?;
        s.t = t;
        out.push(t, s).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        rows.clear();
        Ok(())
    };
    for row in r.deserialize() {
        let row: SnapshotRow = row.map_err(csv_err(path))?;
        if rows.last().is_some_and(|l| l.t != row.t) {
            flush(&mut rows, &mut out)?;
        }
        rows.push(row);
    }
    flush(&mut rows, &mut out)?;
    Ok(out)
}

pub fn write_monitors(path: &Path, monitors: &TimeSeries<MonitorRecord>) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for (_, m) in monitors.iter() {
        w.serialize(MonitorRow {
            t: m.t,
            total_mass: m.total_mass,
            total_energy: m.total_energy,
            total_entropy: m.total_entropy,
            entropy_production_integral: m.entropy_production_integral,
            min_rho: m.min_rho,
            min_theta: m.min_theta,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_monitors(path: &Path) -> Result<Vec<MonitorRecord>, Error> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize()
        .map(|row| {
            let m: MonitorRow = row.map_err(csv_err(path))?;
            Ok(MonitorRecord {
                t: m.t,
                total_mass: m.total_mass,
                total_energy: m.total_energy,
                total_entropy: m.total_entropy,
                entropy_production_integral: m.entropy_production_integral,
                min_rho: m.min_rho,
                min_theta: m.min_theta,
            })
        })
        .collect()
}

/// Writes `snapshots.csv`, `monitors.csv` and `run.json` into `dir`.
pub fn write_run(dir: &Path, info: &RunInfo, traj: &Trajectory) -> Result<(), Error> {
    write_states(&dir.join(SNAPSHOTS), &traj.states)?;
    write_monitors(&dir.join(MONITORS), &traj.monitors)?;
    write_json(&dir.join(RUN_INFO), info)
}

pub fn read_run(dir: &Path) -> Result<(RunInfo, TimeSeries<State>), Error> {
    let info: RunInfo = read_json(&dir.join(RUN_INFO))?;
    let states = read_states(&dir.join(SNAPSHOTS), info.grid.grid()?)?;
    Ok((info, states))
}

/// Run directories of an ensemble: `dir` itself if it holds a run, else its `member_*`
/// subdirectories in name order.
pub fn run_dirs(dir: &Path) -> Result<Vec<PathBuf>, Error> {
    if dir.join(RUN_INFO).exists() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(RUN_INFO).exists())
        .collect();
    out.sort();
    if out.is_empty() {
        return Err(Error::Format(format!("{}: no run directories", dir.display())));
    }
    Ok(out)
}

struct Out<W: Write> {
    w: W,
}

impl<W: Write> Out<W> {
    fn u64(&mut self, v: u64) -> std::io::Result<()> {
        self.w.write_all(&v.to_le_bytes())
    }
    fn f64(&mut self, v: f64) -> std::io::Result<()> {
        self.w.write_all(&v.to_le_bytes())
    }
}

struct In<R: Read> {
    r: R,
}

impl<R: Read> In<R> {
    fn u64(&mut self) -> std::io::Result<u64> {
        let mut b = [0u8; 8];
        self.r.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
    fn f64(&mut self) -> std::io::Result<f64> {
        let mut b = [0u8; 8];
        self.r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }
    fn len(&mut self, limit: u64) -> std::io::Result<usize> {
        let v = self.u64()?;
        if v > limit {
            return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "length out of range"));
        }
        Ok(v as usize)
    }
}

const ATOM_WORDS: usize = 10;

/// Little-endian layout: magic `DMV1`; `dim, cells_x, cells_y` (u64); `extents` (2 f64);
/// `periodic` (u64); `n_times` (u64) and the times; then per slice `n_atoms` (u64),
/// `cells + 1` offsets (u64), `n_atoms` atoms of 10 f64
/// `(ρ, θ, u_x, u_y, D_xx, D_xy, D_yx, D_yy, Dθ_x, Dθ_y)` and `n_atoms` weights.
pub fn write_field(path: &Path, field: &MeasureField) -> Result<(), Error> {
    let io = |e| Error::io(path, e);
    let mut o = Out { w: create(path)? };
    o.w.write_all(FIELD_MAGIC).map_err(io)?;
    let g = GridInfo::from(field.grid());
    for v in [g.dim as u64, g.cells[0] as u64, g.cells[1] as u64] {
        o.u64(v).map_err(io)?;
    }
    o.f64(g.extents[0]).map_err(io)?;
    o.f64(g.extents[1]).map_err(io)?;
    o.u64(g.periodic as u64).map_err(io)?;
    o.u64(field.len() as u64).map_err(io)?;
    for &t in field.times() {
        o.f64(t).map_err(io)?;
    }
    for k in 0..field.len() {
        let (offsets, atoms, weights) = field.slice_parts(k);
        o.u64(atoms.len() as u64).map_err(io)?;
        for &v in offsets {
            o.u64(v as u64).map_err(io)?;
        }
        for a in atoms {
            let d = a.d_u.0;
            for v in [a.rho, a.theta, a.u.0[0], a.u.0[1], d[0][0], d[0][1], d[1][0], d[1][1], a.d_theta.0[0], a.d_theta.0[1]] {
                o.f64(v).map_err(io)?;
            }
        }
        for &w in weights {
            o.f64(w).map_err(io)?;
        }
    }
    o.w.flush().map_err(io)
}

pub fn read_field(path: &Path) -> Result<MeasureField, Error> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let bad = |what: &str| Error::Format(format!("{}: {what}", path.display()));
    let io = |e: std::io::Error| Error::Format(format!("{}: {e}", path.display()));
    let mut i = In { r: BufReader::new(f) };
    let mut magic = [0u8; 4];
    i.r.read_exact(&mut magic).map_err(io)?;
    if &magic != FIELD_MAGIC {
        return Err(bad("not a measure-field file"));
    }
    let dim = i.len(2).map_err(io)?;
    let cells = [i.len(1 << 24).map_err(io)?, i.len(1 << 24).map_err(io)?];
    let extents = [i.f64().map_err(io)?, i.f64().map_err(io)?];
    let periodic = i.u64().map_err(io)? != 0;
    let grid = GridInfo { dim, cells, extents, periodic }.grid()?;
    let n = i.len(1 << 24).map_err(io)?;
    let times = (0..n).map(|_| i.f64()).collect::<Result<Vec<_>, _>>().map_err(io)?;
    let mut parts = Vec::with_capacity(n);
    for _ in 0..n {
        let m = i.len(1 << 32).map_err(io)?;
        let offsets = (0..=grid.len()).map(|_| i.len(m as u64)).collect::<Result<Vec<_>, _>>().map_err(io)?;
        let mut atoms = Vec::with_capacity(m);
        for _ in 0..m {
            let mut v = [0.0; ATOM_WORDS];
            for x in v.iter_mut() {
                *x = i.f64().map_err(io)?;
            }
            atoms.push(PhasePoint {
                rho: v[0],
                theta: v[1],
                u: Vector::new(v[2], v[3]),
                d_u: Tensor([[v[4], v[5]], [v[6], v[7]]]),
                d_theta: Vector::new(v[8], v[9]),
            });
        }
        let weights = (0..m).map(|_| i.f64()).collect::<Result<Vec<_>, _>>().map_err(io)?;
        parts.push((offsets, atoms, weights));
    }
    let mut rest = [0u8; 1];
    if i.r.read(&mut rest).map_err(io)? != 0 {
        return Err(bad("trailing bytes"));
    }
    MeasureField::from_parts(grid, times, parts).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DefectFile {
    #[serde(default)]
    pub nu_c: Vec<ConcentrationEntry>,
    /// Surplus entropy production density, one row of cell values per stored time.
    #[serde(default)]
    pub sigma_extra: Option<Vec<Vec<f64>>>,
    /// `D(τ)` at the stored times of the field.
    #[serde(default)]
    pub d_series: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationEntry {
    pub t_index: usize,
    pub cell: usize,
    pub mass: [[f64; 2]; 2],
}

impl DefectFile {
    pub fn from_defect(d: &DefectData) -> Self {
        DefectFile {
            nu_c: d.nu_c.iter().map(|a| ConcentrationEntry { t_index: a.t_index, cell: a.cell, mass: a.mass.0 }).collect(),
            sigma_extra: d.sigma_extra.as_ref().map(|s| s.iter().map(|f| f.values().to_vec()).collect()),
            d_series: d.d_series.as_ref().map(|s| s.values().to_vec()),
        }
    }

    pub fn to_defect(&self, field: &MeasureField) -> Result<DefectData, Error> {
        let grid = *field.grid();
        let fmt = |e: String| Error::Format(format!("defect: {e}"));
        let sigma_extra = match &self.sigma_extra {
            Some(rows) => Some(
                rows.iter()
                    .map(|r| ScalarField::new(grid, r.clone()).map_err(|e| fmt(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        };
        let d_series = match &self.d_series {
            Some(d) => Some(TimeSeries::from_parts(field.times().to_vec(), d.clone()).map_err(|e| fmt(e.to_string()))?),
            None => None,
        };
        let out = DefectData {
            nu_c: self
                .nu_c
                .iter()
                .map(|a| ConcentrationAtom { t_index: a.t_index, cell: a.cell, mass: Tensor(a.mass) })
                .collect(),
            sigma_extra,
            d_series,
        };
        out.validate(field).map_err(|e| fmt(e.to_string()))?;
        Ok(out)
    }
}

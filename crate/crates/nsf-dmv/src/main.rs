use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nsf_dmv::config::{ExperimentConfig, TheoremName};
use nsf_dmv::formats::{self, DefectFile};
use nsf_dmv::harness::{self, SuiteReport, SUITE_JSON};
use nsf_dmv::{report, Error, EXIT_FAIL, EXIT_PASS};
use nsf_dmv_core::dmv::{DefectData, MeasureField, Model};

#[derive(Parser)]
#[command(name = "nsf-dmv", version, about = "Navier-Stokes-Fourier solver and DMV solution checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver for every member of the configured scenario.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a measure field from run directories (or directories of member runs).
    DmvBuild {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the weak identities and inequalities of a measure field.
    DmvCheck {
        #[arg(long)]
        field: PathBuf,
        /// Experiment config supplying the equation of state, transport, sources and tolerances.
        #[arg(long, alias = "config")]
        eos: PathBuf,
        #[arg(long)]
        defect: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
    },
    /// Relative energy inequality and Gronwall suite against the configured strong solution.
    ReiCheck {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        strong: PathBuf,
        #[arg(long)]
        theorem: Option<TheoremArg>,
        #[arg(long)]
        defect: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
    },
    /// Render a suite report.
    Report {
        /// `suite.json` or the directory holding it.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run every experiment config in the given files or directories.
    Suite {
        #[arg(default_value = "configs")]
        configs: Vec<PathBuf>,
        /// Replaces each config's output directory by `<out>/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoremArg {
    #[value(name = "TG1")]
    Tg1,
    #[value(name = "T1")]
    T1,
    #[value(name = "T2")]
    T2,
    #[value(name = "T3")]
    T3,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    HCsv,
}

fn read_defect(path: Option<&Path>, field: &MeasureField) -> Result<DefectData, Error> {
    match path {
        Some(p) => formats::read_json::<DefectFile>(p)?.to_defect(field),
        None => Ok(DefectData::default()),
    }
}

fn status(pass: bool) -> i32 {
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn config_files(args: &[PathBuf]) -> Result<Vec<PathBuf>, Error> {
    let mut out = Vec::new();
    for a in args {
        if a.is_dir() {
            let mut v: Vec<PathBuf> = std::fs::read_dir(a)
                .map_err(|e| Error::io(a, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "toml"))
                .collect();
            v.sort();
            out.extend(v);
        } else {
            out.push(a.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no experiment configs found".into()));
    }
    Ok(out)
}

fn run(cmd: Command) -> Result<i32, Error> {
    match cmd {
        Command::Simulate { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let grid = cfg.grid()?;
            let runs = harness::with_workers(|| harness::simulate(&cfg, &grid))??;
            harness::write_runs(&cfg, &out, &runs)?;
            println!("{} run(s) written to {}", runs.len(), out.display());
            Ok(EXIT_PASS)
        }
        Command::DmvBuild { runs, out } => {
            let mut series = Vec::new();
            for r in &runs {
                for d in formats::run_dirs(r)? {
                    series.push(formats::read_run(&d)?.1);
                }
            }
            let field = MeasureField::from_ensemble(&series).map_err(Error::stage("dmv-build"))?;
            formats::write_field(&out, &field)?;
            println!("{} members, {} slices, {} atoms -> {}", series.len(), field.len(), field.atom_count(), out.display());
            Ok(EXIT_PASS)
        }
        Command::DmvCheck { field, eos, defect, report } => {
            let cfg = ExperimentConfig::load(&eos)?;
            let field = formats::read_field(&field)?;
            let mut defect = read_defect(defect.as_deref(), &field)?;
            let (e, tc) = (cfg.eos()?, cfg.transport()?);
            let strong = cfg.strong(field.grid())?;
            let model = Model::new(&e, &tc);
            let model = if cfg.run.unforced { model } else { model.with_forcing(&strong) };
            if !defect.nu_c.is_empty() {
                harness::complete_defect(&field, &mut defect, &model);
            }
            let t_ref = field.times().last().copied().unwrap_or(0.0);
            let records = harness::with_workers(|| harness::dmv_checks(&field, &defect, &model, &cfg.tolerances, t_ref))??;
            formats::write_json(&report, &records)?;
            for r in &records {
                println!("{:<20} {} max|r| {:.3e} tol {:.1e}", r.name, if r.pass { "pass" } else { "FAIL" }, r.max_abs(), r.tolerance);
            }
            Ok(status(records.iter().all(|r| r.pass)))
        }
        Command::ReiCheck { field, strong, theorem, defect, report } => {
            let mut cfg = ExperimentConfig::load(&strong)?;
            if let Some(t) = theorem {
                cfg.theorem.name = match t {
                    TheoremArg::Tg1 => TheoremName::TG1,
                    TheoremArg::T1 => TheoremName::T1,
                    TheoremArg::T2 => TheoremName::T2,
                    TheoremArg::T3 => TheoremName::T3,
                };
            }
            let field = formats::read_field(&field)?;
            let defect = read_defect(defect.as_deref(), &field)?;
            let (e, tc) = (cfg.eos()?, cfg.transport()?);
            let strong = cfg.strong(field.grid())?;
            let model = Model::new(&e, &tc);
            let model = if cfg.run.unforced { model } else { model.with_forcing(&strong) };
            let opts = cfg.tolerances.gronwall_options(field.grid().min_h());
            let rec = harness::with_workers(|| {
                harness::rei_check(&field, &defect, &model, &strong, cfg.theorem.theorem(), &opts)
            })??;
            formats::write_json(&report, &rec)?;
            println!("theorem {} slack_min {:.3e} C {:.4}", rec.theorem, rec.slack_min, rec.gronwall_c);
            for h in rec.hypotheses.iter().filter(|h| !h.pass) {
                println!("hypothesis {} failed{}", h.name, match h.witness {
                    Some(w) => format!(" at t_index {} cell {} atom {} value {:e}", w.t_index, w.cell, w.atom, w.value),
                    None => String::new(),
                });
            }
            Ok(status(rec.pass && rec.slack_min >= -cfg.tolerances.inequality))
        }
        Command::Report { input, format } => {
            let path = if input.is_dir() { input.join(SUITE_JSON) } else { input };
            let rep: SuiteReport = formats::read_json(&path)?;
            let text = match format {
                Format::Text => report::render_text(&rep),
                Format::Json => report::render_json(&rep) + "\n",
                Format::Csv => report::render_csv(&rep),
                Format::HCsv => report::render_h_csv(&rep),
            };
            print!("{text}");
            Ok(status(rep.pass))
        }
        Command::Suite { configs, out } => {
            let mut all = true;
            for path in config_files(&configs)? {
                let mut cfg = ExperimentConfig::load(&path)?;
                if let Some(o) = &out {
                    cfg.output.dir = o.join(&cfg.name);
                }
                let rep = harness::run_experiment(&cfg)?;
                print!("{}", report::render_text(&rep));
                if rep.pass != cfg.expect_pass {
                    println!("unexpected outcome for {} (expected {})", cfg.name, if cfg.expect_pass { "pass" } else { "fail" });
                    all = false;
                }
            }
            Ok(status(all))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { nsf_dmv::EXIT_USAGE as u8 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

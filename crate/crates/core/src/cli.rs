//! The `nematic-kit` command-line tool.
//!
//! Exit codes: 0 success, 1 validation failure or bad input, 2 numerical
//! degeneracy (including failed LS points and diverged runs), 3 I/O.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::coefficients::{
    validate_consistency, validate_ericksen_inequalities, validate_frank, validate_leslie, FrankCoefficients,
    ValidationReport,
};
use crate::config::ToolkitConfig;
use crate::energy::{breakdown, null_lagrangian_residual, psi_tilde_unchecked};
use crate::ericksen::{compatibility_check, COMPATIBILITY_TOL};
use crate::error::{Error, Result};
use crate::fields::{gradient, DirectorField, Vec3, DIRECTOR_TOL};
use crate::io::{fmt17, load_director_snapshot, save_snapshot, CsvWriter};
use crate::lopatinskii::ls_sweep;
use crate::simulator::{SimulationState, Simulator};
use crate::symbols::{ellipticity_scan, symmetric_eigs};

pub const THREADS_ENV: &str = "NEMATIC_KIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "nematic-kit", version, about = "Nematic liquid crystal elasticity and flow toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the coefficient assumptions (and slab compatibility when initial data are given).
    ValidateCoeffs {
        #[arg(long)]
        config: PathBuf,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Strong-ellipticity certificate over a grid of Frank constants (CSV).
    EllipticityScan {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Lopatinskii-Shapiro check over the compact test set (CSV).
    LsCheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Time integration with diagnostics and field snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Eigenvalues of the elastic symbol at one point.
    SymbolEig {
        #[arg(long)]
        k1: f64,
        #[arg(long)]
        k2: f64,
        #[arg(long)]
        k3: f64,
        /// Defaults to min(k1, k2, k3); it does not enter the symbol.
        #[arg(long)]
        alpha: Option<f64>,
        /// Frequency, `x,y,z`.
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        xi: Vec3,
        /// Director, `x,y,z` (normalized).
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        d: Vec3,
    },
    /// Energy of the configured (or a saved) director field.
    EnergyEval {
        #[arg(long)]
        config: PathBuf,
        /// Director snapshot to evaluate instead of the configured initial data.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

fn parse_vec3(s: &str) -> std::result::Result<Vec3, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got `{s}`"));
    }
    let mut v = Vec3::zeros();
    for (i, p) in parts.iter().enumerate() {
        v[i] = p.parse::<f64>().map_err(|e| format!("`{p}`: {e}"))?;
    }
    Ok(v)
}

/// Caps the global rayon pool when `NEMATIC_KIT_THREADS` is set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(Error::Config(format!("{THREADS_ENV} must be positive")));
        }
        // a second call (tests, embedding) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match configure_threads().and_then(|_| run(&cli.command, &mut out)) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command, writing human-readable output to `out`.
pub fn run(cmd: &Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::ValidateCoeffs { config, json } => cmd_validate(&ToolkitConfig::load(config)?, json.as_deref(), out),
        Command::EllipticityScan { config, output } => {
            cmd_ellipticity_scan(&ToolkitConfig::load(config)?, output.as_deref(), out)
        }
        Command::LsCheck { config, output } => cmd_ls_check(&ToolkitConfig::load(config)?, output.as_deref(), out),
        Command::Simulate { config, output_dir } => {
            let cfg = ToolkitConfig::load(config)?;
            let dir = output_dir
                .clone()
                .or_else(|| cfg.output_dir().map(Path::to_path_buf))
                .ok_or_else(|| Error::Config("no output directory (use --output-dir or output.dir)".into()))?;
            cmd_simulate(&cfg, &dir, out)
        }
        Command::SymbolEig { k1, k2, k3, alpha, xi, d } => {
            let a = alpha.unwrap_or(k1.min(*k2).min(*k3));
            cmd_symbol_eig(&FrankCoefficients::new(*k1, *k2, *k3, a)?, xi, d, out)
        }
        Command::EnergyEval { config, snapshot } => {
            cmd_energy_eval(&ToolkitConfig::load(config)?, snapshot.as_deref(), out)
        }
    }
}

#[derive(Debug, Serialize)]
struct ValidationOutput {
    passed: bool,
    reports: Vec<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    compatibility_residual: Option<f64>,
}

/// Coefficient assumptions, plus compatibility on slabs when initial data are configured.
pub fn cmd_validate(cfg: &ToolkitConfig, json: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let frank = cfg.frank()?;
    let leslie = cfg.leslie()?;
    let mut reports = vec![validate_frank(&frank)?, validate_leslie(&leslie)?, validate_consistency(&leslie, 3)?];
    let ericksen = validate_ericksen_inequalities(&frank)?;
    let mut passed = reports.iter().all(ValidationReport::passed);
    for r in &reports {
        write!(out, "{r}")?;
    }
    writeln!(out, "(informational, implied by (F))")?;
    write!(out, "{ericksen}")?;
    reports.push(ericksen);
    let mut compat = None;
    if cfg.has_grid() && cfg.has_initial_director() {
        let grid = cfg.grid()?;
        if grid.wall_axis().is_some() {
            let d = DirectorField::new(cfg.initial_director(&grid)?, DIRECTOR_TOL)?;
            let r = compatibility_check(&d, &frank, COMPATIBILITY_TOL * frank.scale())?;
            writeln!(
                out,
                "compatibility (B): {} (residual {:e}, tolerance {:e})",
                if r.passes { "PASS" } else { "FAIL" },
                r.residual,
                r.tolerance
            )?;
            passed &= r.passes;
            compat = Some(r.residual);
        }
    }
    writeln!(out, "overall: {}", if passed { "PASS" } else { "FAIL" })?;
    if let Some(path) = json {
        let report = ValidationOutput { passed, reports, compatibility_residual: compat };
        std::fs::write(path, serde_json::to_string_pretty(&report).expect("report serializes"))?;
    }
    Ok(if passed { 0 } else { 1 })
}

fn sink<'a>(path: Option<&Path>, out: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(out),
    })
}

pub const SCAN_HEADER: [&str; 8] = ["k1", "k2", "k3", "alpha", "c_min", "witness_z", "witness_theta", "pass"];

pub fn cmd_ellipticity_scan(cfg: &ToolkitConfig, path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let rows = ellipticity_scan(&cfg.scan(), &cfg.sampler())?;
    let mut w = CsvWriter::new(sink(path, out)?, &SCAN_HEADER)?;
    for r in &rows {
        w.row(&[
            fmt17(r.k1),
            fmt17(r.k2),
            fmt17(r.k3),
            fmt17(r.alpha),
            fmt17(r.c_min),
            fmt17(r.witness_z),
            fmt17(r.witness_theta),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(0)
}

pub const LS_HEADER: [&str; 9] =
    ["re_lambda", "im_lambda", "xi1", "xi2", "xi3", "det_modulus", "min_sv", "stable_dim", "pass"];

pub fn cmd_ls_check(cfg: &ToolkitConfig, path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let frank = cfg.frank()?;
    let leslie = cfg.leslie()?;
    for r in [validate_frank(&frank)?, validate_leslie(&leslie)?] {
        if !r.passed() {
            let names: Vec<_> = r.failed_clauses().iter().map(|c| c.name.clone()).collect();
            return Err(Error::Precondition(format!("{}: {}", r.title, names.join(", "))));
        }
    }
    let points = cfg.test_set()?.points();
    let rows = ls_sweep(&points, &frank, &leslie, cfg.ls_kind());
    let mut w = CsvWriter::new(sink(path, out)?, &LS_HEADER)?;
    for r in &rows {
        let p = &r.point;
        w.row(&[
            fmt17(p.lambda.re),
            fmt17(p.lambda.im),
            fmt17(p.xi[0]),
            fmt17(p.xi[1]),
            fmt17(p.xi[2]),
            fmt17(r.det_modulus),
            fmt17(r.min_sv),
            r.stable_dim.to_string(),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        eprintln!("{failed} of {} points fail", rows.len());
        return Ok(2);
    }
    Ok(0)
}

pub const DIAGNOSTICS_HEADER: [&str; 6] = ["t", "energy", "kinetic", "norm_drift", "phi_residual", "div_u_max"];

fn write_state(dir: &Path, tag: &str, s: &SimulationState) -> Result<()> {
    save_snapshot(&dir.join(format!("d_{tag}.nlck")), s.d.field())?;
    save_snapshot(&dir.join(format!("u_{tag}.nlck")), s.u.field())
}

/// Writes `diagnostics.csv` (one row per logged step after the start) and
/// `d_<step>.nlck`, `u_<step>.nlck` snapshots.
pub fn cmd_simulate(cfg: &ToolkitConfig, dir: &Path, out: &mut dyn Write) -> Result<i32> {
    let sim_cfg = cfg.simulation()?;
    let grid = sim_cfg.grid;
    let u0 = cfg.initial_velocity(&grid)?;
    let d0 = cfg.initial_director(&grid)?;
    let sim = Simulator::new(sim_cfg)?;
    let s0 = sim.initial_state(u0, d0)?;
    std::fs::create_dir_all(dir)?;
    let mut csv = CsvWriter::new(BufWriter::new(File::create(dir.join("diagnostics.csv"))?), &DIAGNOSTICS_HEADER)?;
    let every = cfg.snapshot_every();
    let n = sim.config().steps();
    writeln!(out, "{} steps of dt = {} on {:?}", n, sim.config().dt, grid.extents())?;
    let diag_every = sim.config().diagnostic_every;
    write_state(dir, "000000", &s0)?;
    let mut state = s0;
    let mut result = Ok(());
    for k in 1..=n {
        let logged = k % diag_every == 0 || k == n;
        match sim.step_with(&state, logged) {
            Ok(s) => state = s,
            Err(e) => {
                result = Err(e);
                break;
            }
        }
        if k == n || (every > 0 && k % every == 0) {
            write_state(dir, &format!("{k:06}"), &state)?;
        }
        if logged {
            let g = &state.diagnostics;
            csv.row(&[
                fmt17(g.t),
                fmt17(g.energy),
                fmt17(g.kinetic),
                fmt17(g.norm_drift),
                fmt17(g.phi_residual.unwrap_or(f64::NAN)),
                fmt17(g.div_u_max),
            ])?;
        }
    }
    let result = result.map(|_| state);
    csv.flush()?;
    match result {
        Ok(s) => {
            let g = &s.diagnostics;
            writeln!(out, "t = {}: energy {:e}, norm drift {:e}", g.t, g.energy, g.norm_drift)?;
            Ok(0)
        }
        Err(Error::Diverged { t, reason, last_good }) => {
            write_state(dir, "last_good", &last_good)?;
            Err(Error::Diverged { t, reason, last_good })
        }
        Err(e) => Err(e),
    }
}

pub fn cmd_symbol_eig(c: &FrankCoefficients, xi: &Vec3, d: &Vec3, out: &mut dyn Write) -> Result<i32> {
    if !(d.norm() > 0.0) {
        return Err(Error::InvalidInput("director must be nonzero".into()));
    }
    let d = d.normalize();
    let r = symmetric_eigs(xi, &d, c)?;
    writeln!(out, "xi = ({}, {}, {}), d = ({}, {}, {})", xi[0], xi[1], xi[2], d[0], d[1], d[2])?;
    writeln!(out, "{:<12} {:>24} {:>24}", "", "symmetric", "full (re, im)")?;
    for i in 0..3 {
        let z = r.eigenvalues[i];
        writeln!(out, "{:<12} {:>24.16e} {:>24}", format!("lambda_{i}"), r.symmetric[i], format!("{:.6e}, {:.1e}", z.re, z.im))?;
    }
    let cf = r.closed_form;
    writeln!(out, "closed form ({:?}): plus {:.16e}, minus {:.16e}, transverse {:.16e}", cf.case, cf.plus, cf.minus, cf.transverse)?;
    writeln!(out, "min Rayleigh quotient / |xi|^2: {:.16e}", r.min_rayleigh)?;
    writeln!(out, "normally elliptic: {}", r.normally_elliptic)?;
    Ok(0)
}

pub fn cmd_energy_eval(cfg: &ToolkitConfig, snapshot: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let c = cfg.frank()?;
    let (d, defect) = match snapshot {
        Some(p) => load_director_snapshot(p)?,
        None => (DirectorField::new(cfg.initial_director(&cfg.grid()?)?, DIRECTOR_TOL)?, 0.0),
    };
    let grid = *d.grid();
    let g = gradient(d.field());
    let mut sums = [0.0; 6];
    for (i, (dv, gv)) in d.values().iter().zip(g.values()).enumerate() {
        let b = breakdown(dv, gv, &c);
        let w = grid.weight(i);
        let parts = [b.splay, b.twist, b.bend, b.saddle_splay, b.total, psi_tilde_unchecked(dv, gv, &c)];
        for (s, p) in sums.iter_mut().zip(parts) {
            *s += p * w;
        }
    }
    writeln!(out, "grid {:?}, spacing {:?}", grid.extents(), grid.spacing())?;
    if defect > 0.0 {
        writeln!(out, "renormalized snapshot, max ||d| - 1| was {defect:e}")?;
    }
    for (name, v) in ["int (div d)^2", "int (d . curl d)^2", "int |d x curl d|^2", "int saddle-splay", "int psi", "int psi~"]
        .iter()
        .zip(sums)
    {
        writeln!(out, "{name:<22} {}", fmt17(v))?;
    }
    if grid.is_periodic() {
        writeln!(out, "{:<22} {}", "null Lagrangian resid.", fmt17(null_lagrangian_residual(&d)?))?;
    }
    Ok(0)
}

//! Command-line front end: parses arguments and configuration, runs one
//! subcommand and writes its artifacts.
//!
//! Outputs are deterministic: the same invocation produces byte-identical
//! files (fixed summation order, 17-significant-digit text, no
//! timestamps).

pub mod config;
pub mod output;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use translab::analysis::{
    self, cross_validate_with, default_window, fit_decay, json_number, resolved_band,
    suggested_t_final, AnalysisError,
};
use translab::dynamics::{default_dt, simulate, DynamicsError};
use translab::fem::{clamped_free_beam_pencil, string_pencil, write_coordinate};
use translab::spectral::{
    self, beam_clamped_free_frequencies, eigenvalues, mode_at, string_modes_closed_form,
    ResolventOperator, SpectralError,
};
use translab::{
    Complex, Discretization, FemError, InitialData, ModelError, Profile, StructureConfig,
};

/// Failure of a valid invocation (exit status 1).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn from_io(source: io::Error) -> Self {
        CliError::Io {
            path: PathBuf::from("<output>"),
            source,
        }
    }
}

/// Rejected command line, with the text to show the user.
#[derive(Debug, Error)]
#[error("{message}")]
pub struct UsageError {
    pub message: String,
    /// Exit status: 0 for `--help`/`--version`, 2 otherwise.
    pub exit_code: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Integrate in time; writes energy.csv and snapshots.csv
    Simulate,
    /// Eigenvalues of the generator; writes spectrum.csv
    Spectrum,
    /// Resolvent norm along the imaginary axis; writes resolvent.csv
    Resolvent,
    /// Fit the energy decay rate of the slowest resolved mode; writes decay.json
    Decay,
    /// Closed-form string and beam modes against the isolated pencils; writes modes.csv
    Modes,
    /// Cross-check every invariant; writes report.json, exits 0 iff all pass
    Verify,
}

impl Command {
    pub const ALL: [&'static str; 6] =
        ["simulate", "spectrum", "resolvent", "decay", "modes", "verify"];
}

#[derive(Debug, Parser)]
#[command(
    name = "translab",
    version,
    about = "Beam-string-beam transmission laboratory",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

fn positive(text: &str) -> Result<f64, String> {
    let v: f64 = text.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive and finite (got {text})"))
    }
}

fn finite(text: &str) -> Result<f64, String> {
    let v: f64 = text.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be finite (got {text})"))
    }
}

#[derive(Debug, Args)]
struct Options {
    /// Structure configuration (TOML keys l0..l3, rho1, rho2, beta);
    /// defaults to unit intervals with rho1 = rho2 = beta = 1
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Elements on the first beam
    #[arg(long, global = true, default_value_t = 40,
          value_parser = clap::value_parser!(u64).range(1..))]
    n1: u64,
    /// Elements on the string
    #[arg(long, global = true, default_value_t = 40,
          value_parser = clap::value_parser!(u64).range(1..))]
    n2: u64,
    /// Elements on the second beam
    #[arg(long, global = true, default_value_t = 40,
          value_parser = clap::value_parser!(u64).range(1..))]
    n3: u64,
    /// Time step [default: 2e-3 times the string length]
    #[arg(long, global = true, value_parser = positive)]
    dt: Option<f64>,
    /// Final time [default: 10 for simulate, decay-adapted otherwise]
    #[arg(long, global = true, value_parser = positive)]
    t_final: Option<f64>,
    /// Lower end of the imaginary-axis grid
    #[arg(long, global = true, default_value_t = -50.0, value_parser = finite,
          allow_hyphen_values = true)]
    lambda_min: f64,
    /// Upper end of the imaginary-axis grid
    #[arg(long, global = true, default_value_t = 50.0, value_parser = finite,
          allow_hyphen_values = true)]
    lambda_max: f64,
    /// Number of grid points (at least 2)
    #[arg(long, global = true, default_value_t = 2001,
          value_parser = clap::value_parser!(u64).range(2..))]
    lambda_steps: u64,
    /// Directory for output files (created if missing)
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Keep a snapshot every this many steps (0 disables snapshots.csv)
    #[arg(long, global = true, default_value_t = 100)]
    snapshot_every: u64,
    /// Positions per snapshot on a uniform grid over [l0, l3]
    #[arg(long, global = true, default_value_t = 101,
          value_parser = clap::value_parser!(u64).range(2..))]
    snapshot_points: u64,
    /// Lyapunov weight [default: ten times sup |F|/E]
    #[arg(long, global = true, value_parser = positive)]
    c4: Option<f64>,
    /// Also write S, M, D, K in coordinate format
    #[arg(long, global = true)]
    dump_matrices: bool,
}

/// Fully parsed invocation. `dt == None` selects the time-stepping
/// default for the loaded configuration; `t_final == None` selects the
/// per-subcommand default.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_steps: usize,
    pub out_dir: PathBuf,
    pub snapshot_every: usize,
    pub snapshot_points: usize,
    pub c4: Option<f64>,
    pub dump_matrices: bool,
}

/// Parses `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunSpec, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| UsageError {
        message: e.render().to_string(),
        exit_code: e.exit_code(),
    })?;
    let o = cli.options;
    if o.lambda_min >= o.lambda_max {
        return Err(UsageError {
            message: format!(
                "error: --lambda-min ({}) must be below --lambda-max ({})\n",
                o.lambda_min, o.lambda_max
            ),
            exit_code: 2,
        });
    }
    Ok(RunSpec {
        command: cli.command,
        config_path: o.config,
        n1: o.n1 as usize,
        n2: o.n2 as usize,
        n3: o.n3 as usize,
        dt: o.dt,
        t_final: o.t_final,
        lambda_min: o.lambda_min,
        lambda_max: o.lambda_max,
        lambda_steps: o.lambda_steps as usize,
        out_dir: o.out_dir,
        snapshot_every: o.snapshot_every as usize,
        snapshot_points: o.snapshot_points as usize,
        c4: o.c4,
        dump_matrices: o.dump_matrices,
    })
}

/// Runs the command, reporting errors on standard error. Returns the exit
/// status: 0 on success, 1 on any error or failed verification.
pub fn run(spec: &RunSpec) -> i32 {
    match execute(spec) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Runs the command; `Ok(false)` means `verify` found a failing invariant.
pub fn execute(spec: &RunSpec) -> Result<bool, CliError> {
    let cfg = match &spec.config_path {
        Some(path) => config::load_config(path)?,
        None => config::default_config(),
    };
    let disc = Discretization::new(cfg, spec.n1, spec.n2, spec.n3)?;
    fs::create_dir_all(&spec.out_dir).map_err(|e| CliError::io(&spec.out_dir, e))?;
    if spec.dump_matrices {
        dump_matrices(spec, &disc)?;
    }
    let dt = spec.dt.unwrap_or_else(|| default_dt(&disc.cfg));
    match spec.command {
        Command::Simulate => run_simulate(spec, &disc, dt).map(|_| true),
        Command::Spectrum => run_spectrum(spec, &disc).map(|_| true),
        Command::Resolvent => run_resolvent(spec, &disc).map(|_| true),
        Command::Decay => run_decay(spec, &disc, dt).map(|_| true),
        Command::Modes => run_modes(spec, &disc).map(|_| true),
        Command::Verify => run_verify(spec, &disc, dt),
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn render<F>(f: F) -> Vec<u8>
where
    F: FnOnce(&mut Vec<u8>) -> io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    buf
}

fn dump_matrices(spec: &RunSpec, disc: &Discretization) -> Result<(), CliError> {
    let p = &disc.pencil;
    for (name, m) in [("S.coo", &p.s), ("M.coo", &p.m), ("D.coo", &p.d), ("K.coo", &p.k)] {
        write_file(&spec.out_dir, name, &render(|b| write_coordinate(b, m)))?;
    }
    Ok(())
}

/// `sin²(π (x - l0) / (l3 - l0))`: clamped at both outer ends and smooth
/// across the interfaces.
fn bump_initial_data(cfg: &StructureConfig) -> InitialData {
    let (a, len) = (cfg.l0, cfg.l3 - cfg.l0);
    let k = std::f64::consts::PI / len;
    let profile = || {
        Profile::function(
            move |x| (k * (x - a)).sin().powi(2),
            move |x| k * (2.0 * k * (x - a)).sin(),
        )
    };
    InitialData::displacement(profile(), profile(), profile())
}

fn run_simulate(spec: &RunSpec, disc: &Discretization, dt: f64) -> Result<(), CliError> {
    let t_final = spec.t_final.unwrap_or(10.0);
    let y0 = disc.interpolate(&bump_initial_data(&disc.cfg))?;
    let sim = simulate(&disc.pencil, &y0, dt, t_final, spec.snapshot_every)?;
    write_file(
        &spec.out_dir,
        "energy.csv",
        &render(|b| output::write_energy(b, &sim.trace)),
    )?;
    if spec.snapshot_every > 0 {
        let mut buf = Vec::new();
        output::write_snapshots(&mut buf, disc, &sim.snapshots, spec.snapshot_points)?;
        write_file(&spec.out_dir, "snapshots.csv", &buf)?;
    }
    let e = &sim.trace.energy;
    println!(
        "steps {}  E(0) {}  E(T) {}",
        sim.trace.len() - 1,
        json_number(e[0]),
        json_number(e[e.len() - 1])
    );
    Ok(())
}

fn run_spectrum(spec: &RunSpec, disc: &Discretization) -> Result<(), CliError> {
    let report = eigenvalues(&disc.pencil)?;
    write_file(
        &spec.out_dir,
        "spectrum.csv",
        &render(|b| output::write_spectrum(b, &report.eigenvalues)),
    )?;
    println!(
        "regime {}  eigenvalues {}  abscissa {}  min |Re| {}",
        report.regime,
        report.eigenvalues.len(),
        json_number(report.abscissa),
        json_number(report.min_distance_to_imaginary_axis)
    );
    Ok(())
}

fn run_resolvent(spec: &RunSpec, disc: &Discretization) -> Result<(), CliError> {
    let lambdas = spectral::grid(spec.lambda_min, spec.lambda_max, spec.lambda_steps)?;
    let table = ResolventOperator::new(&disc.pencil)?.sweep(&lambdas);
    write_file(
        &spec.out_dir,
        "resolvent.csv",
        &render(|b| output::write_resolvent(b, &table)),
    )?;
    println!(
        "sup {}  at lambda {}",
        output::num(table.sup_norm),
        table.argmax().map_or("n/a".to_string(), output::num)
    );
    Ok(())
}

fn run_decay(spec: &RunSpec, disc: &Discretization, dt: f64) -> Result<(), CliError> {
    let report = eigenvalues(&disc.pencil)?;
    let band = resolved_band(dt);
    let mu = report
        .slowest_within(band)
        .ok_or(SpectralError::EmptySpectrum)?;
    let t_final = spec.t_final.unwrap_or_else(|| suggested_t_final(mu.re));
    let mode = mode_at(&disc.pencil, mu)?;
    let sim = simulate(&disc.pencil, &mode.real, dt, t_final, 0)?;
    let window = default_window(t_final);
    let fit = fit_decay(&sim.trace, window)?;
    let ratio = if mu.re < 0.0 {
        fit.alpha / (2.0 * mu.re.abs())
    } else {
        f64::NAN
    };
    let fields: [(&str, String); 11] = [
        ("regime", format!("\"{}\"", disc.pencil.regime.tag())),
        ("abscissa", json_number(report.abscissa)),
        ("mode_re", json_number(mu.re)),
        ("mode_im", json_number(mu.im)),
        ("dt", json_number(dt)),
        ("t_final", json_number(t_final)),
        ("window_start", json_number(window.0)),
        ("window_end", json_number(window.1)),
        ("alpha", json_number(fit.alpha)),
        ("r_squared", json_number(fit.r_squared)),
        ("ratio", json_number(ratio)),
    ];
    let mut text = String::from("{\n");
    for (i, (k, v)) in fields.iter().enumerate() {
        let sep = if i + 1 == fields.len() { "" } else { "," };
        text.push_str(&format!("  \"{k}\": {v}{sep}\n"));
    }
    text.push_str("}\n");
    write_file(&spec.out_dir, "decay.json", text.as_bytes())?;
    println!(
        "alpha {}  2|Re mu| {}  ratio {}  r2 {}",
        json_number(fit.alpha),
        json_number(2.0 * mu.re.abs()),
        json_number(ratio),
        json_number(fit.r_squared)
    );
    Ok(())
}

/// Modes per component in the oracle table.
const ORACLE_MODES: usize = 5;

fn run_modes(spec: &RunSpec, disc: &Discretization) -> Result<(), CliError> {
    let cfg = &disc.cfg;
    let mut text = String::from("component,k,oracle_re,oracle_im,computed_re,computed_im,abs_error\n");
    let mut row = |name: &str, k: usize, oracle: Complex<f64>, computed: Complex<f64>| {
        text.push_str(&format!(
            "{name},{k},{},{},{},{},{}\n",
            output::num(oracle.re),
            output::num(oracle.im),
            output::num(computed.re),
            output::num(computed.im),
            output::num((oracle - computed).norm())
        ));
    };

    let string = eigenvalues(&string_pencil(cfg.string_length(), spec.n2, cfg.beta)?)?;
    for k in 1..=ORACLE_MODES.min(spec.n2.saturating_sub(1) / 2) {
        for oracle in string_modes_closed_form(cfg.beta, cfg.string_length(), k) {
            let computed = string.nearest(oracle).expect("nonempty spectrum");
            row("string", k, oracle, computed);
        }
    }

    // the Kelvin-Voigt term has no closed form on a clamped-free beam,
    // so the beam rows compare undamped frequencies
    for (name, length, elements) in [
        ("beam1", cfg.beam1_length(), spec.n1),
        ("beam2", cfg.beam2_length(), spec.n3),
    ] {
        let computed = eigenvalues(&clamped_free_beam_pencil(length, elements, 0.0)?)?;
        let count = ORACLE_MODES.min(elements / 2).max(1);
        for (j, w) in beam_clamped_free_frequencies(length, count).into_iter().enumerate() {
            let oracle = Complex::new(0.0, w);
            let found = computed.nearest(oracle).expect("nonempty spectrum");
            row(name, j + 1, oracle, found);
        }
    }
    write_file(&spec.out_dir, "modes.csv", text.as_bytes())?;
    print!("{text}");
    Ok(())
}

fn run_verify(spec: &RunSpec, disc: &Discretization, dt: f64) -> Result<bool, CliError> {
    let t_final = match spec.t_final {
        Some(t) => t,
        None => analysis::suggested_t_final_for(&disc.pencil, dt)?,
    };
    let report = cross_validate_with(disc, dt, t_final, spec.c4)?;
    write_file(&spec.out_dir, "report.json", report.to_json().as_bytes())?;
    for r in &report.invariant_results {
        println!("{:<28} {:<8} {}", r.name, r.status.as_str(), output::num(r.residual));
    }
    println!("{}", if report.passed() { "PASS" } else { "FAIL" });
    Ok(report.passed())
}

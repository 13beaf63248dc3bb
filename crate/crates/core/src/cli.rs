//! Batch driver: parameter scans, exponent fits and Langevin runs written as
//! CSV with a `#` comment block that records everything needed to re-run.
//!
//! A config file holds `key=value` lines whose keys are long flag names;
//! flags given on the command line take precedence.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::exponents::{self, CrossoverConfig, Exponent, TimeQuantity};
use crate::greens::{self, ModelParams, Scenario, SelfEnergyModel};
use crate::langevin::{self, NoiseKind, SimConfig};
use crate::observables::{Field, QuadConfig};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "DICKE_CRIT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "dicke-crit",
    version,
    about = "Critical exponents of a Dicke model with a sub-ohmic bath"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Photon number against the relative distance dy/y_c.
    #[command(args_override_self = true)]
    ScanPhotonNumber(ScanArgs),
    /// Time-domain correlation, response or mean-square displacement.
    #[command(args_override_self = true)]
    GreensTime(GreensTimeArgs),
    /// Measured exponent over a window against its predicted value.
    #[command(args_override_self = true)]
    FitExponent(FitArgs),
    /// Crossover times against dy/y_c and their scaling exponent.
    #[command(args_override_self = true)]
    Crossover(CrossoverArgs),
    /// Langevin finite-size scan of the stationary <x^2> at criticality.
    #[command(args_override_self = true)]
    FiniteSize(FiniteSizeArgs),
    /// Predicted exponents of a scenario, optionally with measurements.
    #[command(args_override_self = true)]
    Table(TableArgs),
    /// Langevin ensemble: stationary moments, MSD or one trajectory.
    #[command(args_override_self = true)]
    Langevin(LangevinArgs),
}

/// Options shared by every command. Frequencies are in units of omega_z.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// key=value file supplying defaults for any long flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "both")]
    pub scenario: ScenarioArg,
    #[arg(long, default_value_t = 0.7)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1e4)]
    pub omega_m: f64,
    /// Bath temperature.
    #[arg(long, default_value_t = 0.0)]
    pub t_b: f64,
    /// Bath chemical potential (non-positive).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu_b: f64,
    /// Relative distance from criticality, dy/y_c.
    #[arg(long, default_value_t = 0.0)]
    pub dy: f64,
    /// Number of atoms; thermodynamic limit when absent.
    #[arg(long)]
    pub n_atoms: Option<f64>,
    /// Use the finite-cutoff principal-value self-energy at this tolerance.
    #[arg(long)]
    pub pv_tol: Option<f64>,
    /// Relative tolerance of the frequency quadratures.
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Both,
    Thermal,
    MbOnly,
    NmbOnly,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Both => Scenario::Both,
            ScenarioArg::Thermal => Scenario::Thermal,
            ScenarioArg::MbOnly => Scenario::MbOnly,
            ScenarioArg::NmbOnly => Scenario::NmbOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Photon,
    X,
    XLowfreq,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Photon => Field::Photon,
            FieldArg::X => Field::X,
            FieldArg::XLowfreq => Field::XLowFreq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantityArg {
    PhotonFlux,
    Correlation,
    Response,
    Msd,
}

/// `lo:hi` with `0 < lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range(pub f64, pub f64);

impl std::str::FromStr for Range {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got '{s}'"))?;
        let lo: f64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
        let hi: f64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(format!("range {lo}:{hi} must satisfy 0 < lo < hi"));
        }
        Ok(Range(lo, hi))
    }
}

impl std::fmt::Display for Range {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:e}:{:e}", self.0, self.1)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "1e-8:1e-6")]
    pub range: Range,
    #[arg(long, default_value_t = 12)]
    pub points_per_decade: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GreensTimeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "correlation")]
    pub quantity: QuantityArg,
    #[arg(long, value_enum, default_value = "x")]
    pub field: FieldArg,
    #[arg(long, default_value = "1:1e8")]
    pub range: Range,
    #[arg(long, default_value_t = 12)]
    pub points_per_decade: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "photon-flux")]
    pub quantity: QuantityArg,
    #[arg(long, value_enum, default_value = "x")]
    pub field: FieldArg,
    /// dy/y_c window for the photon flux, time window otherwise.
    #[arg(long, default_value = "1e-8:1e-6")]
    pub window: Range,
    #[arg(long, default_value_t = 12)]
    pub points_per_decade: usize,
    /// Largest accepted |measured - predicted|.
    #[arg(long, default_value_t = 0.02)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CrossoverArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Range of dy/y_c.
    #[arg(long, default_value = "1e-4:1e-3")]
    pub distances: Range,
    #[arg(long, default_value_t = 6)]
    pub points: usize,
    /// Early window in absolute time.
    #[arg(long, default_value = "10:100")]
    pub early: Range,
    /// Late window in units of the estimated crossover time.
    #[arg(long, default_value = "1e3:1e5")]
    pub late: Range,
}

/// Langevin settings; coefficients default to the low-frequency theory of
/// the model parameters.
#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 250_000)]
    pub steps: usize,
    /// Burn-in steps; 20% of `steps` when absent.
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long, default_value_t = 16)]
    pub ensemble: usize,
    /// Quartic coupling; g_ph when absent.
    #[arg(long)]
    pub g: Option<f64>,
    /// Mass term; the low-frequency r at the given dy when absent.
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Colored noise from the bath temperature instead of white noise.
    #[arg(long)]
    pub colored: bool,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FiniteSizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Comma-separated atom numbers.
    #[arg(long, value_delimiter = ',', default_value = "1e2,1e3,1e4,1e5")]
    pub n_list: Vec<f64>,
    /// Largest autocorrelation lag in steps.
    #[arg(long, default_value_t = 100_000)]
    pub max_lag: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also measure the photon-flux exponent over `window`.
    #[arg(long)]
    pub measure: bool,
    #[arg(long, default_value = "1e-8:1e-6")]
    pub window: Range,
    #[arg(long, default_value_t = 0.02)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LangevinOutput {
    Stats,
    Msd,
    Trajectory,
}

#[derive(Debug, Clone, Args)]
pub struct LangevinArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, value_enum, default_value = "stats")]
    pub mode: LangevinOutput,
    /// Lag range of the MSD, in time units.
    #[arg(long, default_value = "1:100")]
    pub lags: Range,
    /// Ensemble member written in trajectory mode.
    #[arg(long, default_value_t = 0)]
    pub member: usize,
}

/// CSV artifact: comment lines, a header and rows of preformatted cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }
}

/// Full round-trip precision.
pub fn num(x: f64) -> String {
    format!("{x:.17e}")
}

fn expo(e: Exponent) -> String {
    e.to_string()
}

/// Parses a `key=value` config file into long-flag arguments.
pub fn config_args(text: &str) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("config line {}: expected key=value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        let value = v.trim();
        if key.is_empty() || key == "config" {
            return Err(Error::invalid(format!(
                "config line {}: invalid key '{}'",
                i + 1,
                k.trim()
            )));
        }
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => out.push(format!("--{key}={value}").into()),
        }
    }
    Ok(out)
}

/// Inserts config-file arguments right after the subcommand so that explicit
/// flags, which come later, override them.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        } else if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
    let extra = config_args(&text)?;
    let sub = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 2)
        .unwrap_or(args.len());
    let mut out = args[..sub.min(args.len())].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[sub.min(args.len())..]);
    Ok(out)
}

fn model(c: &CommonArgs) -> Result<ModelParams> {
    let mut p = ModelParams::new(c.delta, c.kappa, 1.0, c.gamma, c.s)?;
    p.bath.omega_m = c.omega_m;
    let scenario: Scenario = c.scenario.into();
    p = p.for_scenario(scenario, c.t_b)?;
    if scenario == Scenario::Both && (c.t_b != 0.0 || c.mu_b != 0.0) {
        if c.t_b > 0.0 && c.mu_b == 0.0 {
            return Err(Error::invalid("T_b > 0 with mu_b = 0 is the thermal scenario"));
        }
        p.bath = p.bath.with_temperature(c.t_b, c.mu_b)?;
    }
    p.n_atoms = c.n_atoms;
    if let Some(rel_tol) = c.pv_tol {
        p.self_energy = SelfEnergyModel::PrincipalValue { rel_tol };
    }
    p = p.at_distance(c.dy)?;
    p.validate()?;
    Ok(p)
}

fn quad_config(c: &CommonArgs) -> Result<QuadConfig> {
    let q = QuadConfig {
        rel_tol: c.rel_tol,
        ..QuadConfig::default()
    };
    q.validate()?;
    Ok(q)
}

fn grid(r: Range, per_decade: usize) -> Vec<f64> {
    let decades = (r.1 / r.0).log10();
    let n = ((decades * per_decade as f64).round() as usize + 1).max(2);
    exponents::log_grid(r.0, r.1, n)
}

fn header_comments(t: &mut Table, argv: &[String], c: &CommonArgs, p: &ModelParams) {
    t.comments.push(format!("dicke-crit {}", env!("CARGO_PKG_VERSION")));
    t.comments.push(format!("command: {}", argv.join(" ")));
    t.comments.push(format!("seed={}", c.seed));
    t.comments.push(format!("scenario={}", p.scenario().name()));
    t.comments.push(format!(
        "delta={} kappa={} omega_z={} gamma={} s={} omega_m={} t_b={} mu_b={}",
        p.delta, p.kappa, p.omega_z, p.bath.gamma, p.bath.s, p.bath.omega_m, p.bath.t_b, p.bath.mu_b
    ));
    t.comments.push(format!(
        "y={} y_c={} dy_rel={} n_atoms={} self_energy={:?} rel_tol={}",
        p.y,
        p.critical_coupling(),
        c.dy,
        p.n_atoms.map_or("inf".to_string(), |n| n.to_string()),
        p.self_energy,
        c.rel_tol
    ));
}

fn sim_config(c: &CommonArgs, sim: &SimArgs, p: &ModelParams) -> Result<SimConfig> {
    let co = greens::lowfreq_coefficients(p)?;
    let mut cfg = SimConfig::from_coefficients(p, &co, sim.steps, sim.ensemble, c.seed);
    cfg.dt = sim.dt;
    cfg.burn_in = sim.burn_in.unwrap_or(sim.steps / 5);
    if let Some(g) = sim.g {
        cfg.g = g;
    }
    if let Some(r) = sim.r {
        cfg.r = r;
    }
    cfg.x0 = sim.x0;
    if sim.colored {
        cfg.noise = NoiseKind::Colored {
            t_b: p.bath.t_b,
            v_i: co.v_i,
            omega_z: p.omega_z,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sim_comments(t: &mut Table, cfg: &SimConfig) {
    t.comments.push(format!(
        "langevin s={} v={} r={} kappa_eff={} g={} n_atoms={} dt={} steps={} burn_in={} ensemble={} noise={:?} x0={}",
        cfg.s,
        cfg.v,
        cfg.r,
        cfg.kappa_eff,
        cfg.g,
        cfg.n_atoms,
        cfg.dt,
        cfg.steps,
        cfg.burn_in,
        cfg.ensemble,
        cfg.noise,
        cfg.x0
    ));
}

fn status(measured: f64, predicted: Option<f64>, tol: f64) -> (String, String) {
    match predicted {
        Some(p) => (num(p), if (measured - p).abs() <= tol { "pass" } else { "fail" }.into()),
        None => ("n/a".into(), "n/a".into()),
    }
}

/// Runs one command and returns its table; `argv` is recorded verbatim.
pub fn execute(cmd: &Command, argv: &[String]) -> Result<Table> {
    match cmd {
        Command::ScanPhotonNumber(a) => {
            let p = model(&a.common)?;
            let q = quad_config(&a.common)?;
            let data = exponents::photon_number_scan(&p, &grid(a.range, a.points_per_decade), &q)?;
            let mut t = Table::new(&["dy_rel", "delta_y", "photon_number"]);
            header_comments(&mut t, argv, &a.common, &p);
            let yc = p.critical_coupling();
            t.rows = data.iter().map(|&(d, n)| vec![num(d), num(d * yc), num(n)]).collect();
            Ok(t)
        }
        Command::GreensTime(a) => {
            let p = model(&a.common)?;
            let q = quad_config(&a.common)?;
            let quantity = time_quantity(a.quantity)?;
            let data = exponents::time_scan(quantity, a.field.into(), &p, &grid(a.range, a.points_per_decade), &q)?;
            let name = match quantity {
                TimeQuantity::Correlation => "iGK",
                TimeQuantity::Response => "abs_GR",
                TimeQuantity::MeanSquareDisplacement => "msd",
            };
            let mut t = Table::new(&["t", name]);
            header_comments(&mut t, argv, &a.common, &p);
            t.comments.push(format!("field={:?}", Field::from(a.field)));
            t.rows = data.iter().map(|&(x, v)| vec![num(x), num(v)]).collect();
            Ok(t)
        }
        Command::FitExponent(a) => {
            let p = model(&a.common)?;
            let q = quad_config(&a.common)?;
            let pred = exponents::predicted_exponents(p.scenario(), p.bath.s)?;
            let w = (a.window.0, a.window.1);
            let n = grid(a.window, a.points_per_decade).len();
            let critical = a.common.dy == 0.0;
            let (fit, measured, predicted) = match a.quantity {
                QuantityArg::PhotonFlux => {
                    let base = p.at_distance(0.0)?;
                    let fit = exponents::photon_flux_fit(&base, w, n, &q)?;
                    (fit, -fit.exponent, pred.photon_flux)
                }
                QuantityArg::Correlation => {
                    let fit = exponents::time_fit(TimeQuantity::Correlation, a.field.into(), &p, w, n, &q)?;
                    let e = if critical { pred.corr_critical } else { pred.corr_away };
                    (fit, -fit.exponent, e)
                }
                QuantityArg::Response => {
                    let fit = exponents::time_fit(TimeQuantity::Response, a.field.into(), &p, w, n, &q)?;
                    let e = if critical { pred.resp_critical } else { pred.resp_away };
                    (fit, -fit.exponent, e)
                }
                QuantityArg::Msd => {
                    let fit = exponents::time_fit(TimeQuantity::MeanSquareDisplacement, a.field.into(), &p, w, n, &q)?;
                    // Subdiffusion at criticality when the correlation is IR divergent.
                    let e = if critical && pred.corr_critical == Exponent::IrDivergent && p.scenario() == Scenario::Both
                    {
                        Exponent::Value(2.0 * p.bath.s - 1.0)
                    } else {
                        Exponent::ExpDecay
                    };
                    (fit, fit.exponent, e)
                }
            };
            let mut t = Table::new(&[
                "quantity",
                "scenario",
                "s",
                "window_lo",
                "window_hi",
                "measured",
                "stderr",
                "r_squared",
                "predicted",
                "tolerance",
                "status",
            ]);
            header_comments(&mut t, argv, &a.common, &p);
            let (pv, st) = status(measured, predicted.value(), a.tolerance);
            t.rows.push(vec![
                a.quantity
                    .to_possible_value()
                    .map_or(String::new(), |v| v.get_name().to_string()),
                p.scenario().name().into(),
                num(p.bath.s),
                num(w.0),
                num(w.1),
                num(measured),
                num(fit.stderr),
                num(fit.r_squared),
                if predicted.value().is_some() {
                    pv
                } else {
                    expo(predicted)
                },
                num(a.tolerance),
                st,
            ]);
            Ok(t)
        }
        Command::Crossover(a) => {
            let p = model(&a.common)?;
            let q = quad_config(&a.common)?;
            let cfg = CrossoverConfig {
                early: (a.early.0, a.early.1),
                late: (a.late.0, a.late.1),
                ..CrossoverConfig::default()
            };
            let dists = exponents::log_grid(a.distances.0, a.distances.1, a.points);
            let (rows, fit) = exponents::crossover_scan(&p, &dists, &cfg, &q)?;
            let mut t = Table::new(&["dy_rel", "t_c", "early_slope", "early_r2", "late_slope", "late_r2"]);
            header_comments(&mut t, argv, &a.common, &p);
            let pred = exponents::predicted_exponents(p.scenario(), p.bath.s)?;
            t.comments.push(format!(
                "fit log t_c vs log dy: slope={} stderr={} r_squared={} predicted={}",
                num(fit.exponent),
                num(fit.stderr),
                num(fit.r_squared),
                pred.crossover.value().map_or(expo(pred.crossover), |z| num(-z))
            ));
            t.rows = rows
                .iter()
                .map(|(d, c)| {
                    vec![
                        num(*d),
                        num(c.time),
                        num(c.early.exponent),
                        num(c.early.r_squared),
                        num(c.late.exponent),
                        num(c.late.r_squared),
                    ]
                })
                .collect();
            Ok(t)
        }
        Command::FiniteSize(a) => {
            let p = model(&a.common)?;
            let mut cfg = sim_config(&a.common, &a.sim, &p)?;
            cfg.r = a.sim.r.unwrap_or(0.0);
            let scan = langevin::finite_size_scan(&cfg, &a.n_list, a.max_lag)?;
            let mut t = Table::new(&[
                "n_atoms",
                "x2",
                "x2_stderr",
                "drift",
                "drift_stderr",
                "correlation_time",
            ]);
            header_comments(&mut t, argv, &a.common, &p);
            sim_comments(&mut t, &cfg);
            let pred = exponents::predicted_exponents(p.scenario(), p.bath.s)?;
            t.comments.push(format!(
                "alpha={} stderr={} predicted={}",
                num(scan.alpha.exponent),
                num(scan.alpha.stderr),
                expo(pred.finite_size)
            ));
            if let Some(z) = &scan.zeta {
                t.comments.push(format!(
                    "zeta={} stderr={} predicted={}",
                    num(z.exponent),
                    num(z.stderr),
                    expo(pred.finite_size_time)
                ));
            }
            t.rows = scan
                .points
                .iter()
                .map(|pt| {
                    vec![
                        num(pt.n_atoms),
                        num(pt.stats.second_moment),
                        num(pt.stats.second_stderr),
                        num(pt.stats.drift),
                        num(pt.stats.drift_stderr),
                        pt.stats.correlation_time.map_or("nan".into(), num),
                    ]
                })
                .collect();
            Ok(t)
        }
        Command::Table(a) => {
            let p = model(&a.common)?;
            let pred = exponents::predicted_exponents(p.scenario(), p.bath.s)?;
            let mut t = Table::new(&["exponent", "predicted", "measured", "tolerance", "status"]);
            header_comments(&mut t, argv, &a.common, &p);
            let entries = [
                ("nu", pred.photon_flux),
                ("nu_t", pred.corr_critical),
                ("corr_away", pred.corr_away),
                ("nu_t_prime", pred.resp_critical),
                ("resp_away", pred.resp_away),
                ("alpha", pred.finite_size),
                ("zeta_c", pred.crossover),
                ("zeta", pred.finite_size_time),
            ];
            for (name, e) in entries {
                let mut row = vec![
                    name.to_string(),
                    expo(e),
                    String::new(),
                    String::new(),
                    "n/a".to_string(),
                ];
                if a.measure && name == "nu" {
                    let q = quad_config(&a.common)?;
                    let n = grid(a.window, 12).len();
                    let fit = exponents::photon_flux_fit(&p.at_distance(0.0)?, (a.window.0, a.window.1), n, &q)?;
                    let (_, st) = status(-fit.exponent, e.value(), a.tolerance);
                    row[2] = num(-fit.exponent);
                    row[3] = num(a.tolerance);
                    row[4] = st;
                }
                t.rows.push(row);
            }
            Ok(t)
        }
        Command::Langevin(a) => {
            let p = model(&a.common)?;
            let cfg = sim_config(&a.common, &a.sim, &p)?;
            let mut t;
            match a.mode {
                LangevinOutput::Stats => {
                    let st = langevin::stationary_statistics(&cfg, 0)?;
                    t = Table::new(&["mean", "mean_stderr", "x2", "x2_stderr", "drift", "drift_stderr"]);
                    t.rows.push(vec![
                        num(st.mean),
                        num(st.mean_stderr),
                        num(st.second_moment),
                        num(st.second_stderr),
                        num(st.drift),
                        num(st.drift_stderr),
                    ]);
                }
                LangevinOutput::Msd => {
                    let lags = grid(a.lags, 12);
                    let data = langevin::mean_square_displacement(&cfg, &lags)?;
                    t = Table::new(&["lag", "msd"]);
                    t.rows = data.iter().map(|&(l, m)| vec![num(l), num(m)]).collect();
                }
                LangevinOutput::Trajectory => {
                    if a.member >= cfg.ensemble {
                        return Err(Error::invalid(format!(
                            "member {} outside an ensemble of {}",
                            a.member, cfg.ensemble
                        )));
                    }
                    let tr = langevin::simulate_member(&cfg, a.member)?;
                    t = Table::new(&["t", "x"]);
                    t.rows = tr
                        .samples
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| vec![num((cfg.burn_in + i) as f64 * cfg.dt), num(x)])
                        .collect();
                }
            }
            let rows = std::mem::take(&mut t.rows);
            header_comments(&mut t, argv, &a.common, &p);
            sim_comments(&mut t, &cfg);
            t.rows = rows;
            Ok(t)
        }
    }
}

fn time_quantity(q: QuantityArg) -> Result<TimeQuantity> {
    match q {
        QuantityArg::Correlation => Ok(TimeQuantity::Correlation),
        QuantityArg::Response => Ok(TimeQuantity::Response),
        QuantityArg::Msd => Ok(TimeQuantity::MeanSquareDisplacement),
        QuantityArg::PhotonFlux => Err(Error::invalid("photon-flux is not a time-domain quantity")),
    }
}

fn common(cmd: &Command) -> &CommonArgs {
    match cmd {
        Command::ScanPhotonNumber(a) => &a.common,
        Command::GreensTime(a) => &a.common,
        Command::FitExponent(a) => &a.common,
        Command::Crossover(a) => &a.common,
        Command::FiniteSize(a) => &a.common,
        Command::Table(a) => &a.common,
        Command::Langevin(a) => &a.common,
    }
}

/// Writes via a temporary file in the target directory and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::from(e.error))?;
    Ok(())
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| Error::invalid(format!("{THREADS_ENV}={v} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::invalid(e.to_string()))?;
    }
    Ok(())
}

/// Entry point; returns the process exit code (0 ok, 1 invalid input,
/// 2 numerical failure).
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let expanded = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(expanded) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|_| {
        let table = execute(&cli.command, &argv)?;
        let text = table.render();
        match &common(&cli.command).output {
            Some(path) => write_atomic(path, &text),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn ranges_parse_and_reject() {
        assert_eq!("1e-8:1e-6".parse::<Range>().unwrap(), Range(1e-8, 1e-6));
        assert!("1e-6:1e-8".parse::<Range>().is_err());
        assert!("0:1".parse::<Range>().is_err());
        assert!("1e-6".parse::<Range>().is_err());
    }

    #[test]
    fn config_lines() {
        let a = config_args("# comment\ns = 0.35\nt_b=1 # trailing\ncolored=true\nmeasure=false\n\n").unwrap();
        assert_eq!(a, os(&["--s=0.35", "--t-b=1", "--colored"]));
        assert!(config_args("no equals sign").is_err());
        assert!(config_args("config=x").is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "s=0.35\ndy=1e-4\n").unwrap();
        let args = os(&["dicke-crit", "table", "--config", path.to_str().unwrap(), "--s", "0.5"]);
        let cli = Cli::try_parse_from(expand_config(args).unwrap()).unwrap();
        let c = common(&cli.command);
        assert_eq!(c.s, 0.5);
        assert_eq!(c.dy, 1e-4);
    }

    #[test]
    fn defaults_are_the_reference_parameters() {
        let cli = Cli::try_parse_from(os(&["dicke-crit", "table"])).unwrap();
        let p = model(common(&cli.command)).unwrap();
        let r = ModelParams::reference(0.7).unwrap().at_distance(0.0).unwrap();
        assert_eq!(p, r);
    }

    #[test]
    fn nmb_only_table_row() {
        let args = os(&["dicke-crit", "table", "--scenario", "nmb-only", "--s", "0.5"]);
        let cli = Cli::try_parse_from(args).unwrap();
        let t = execute(&cli.command, &[]).unwrap();
        let get = |name: &str| t.rows.iter().find(|r| r[0] == name).unwrap()[1].parse::<f64>().unwrap();
        assert_eq!(get("nu"), 0.0);
        assert_eq!(get("nu_t"), 0.5);
        assert_eq!(get("alpha"), 0.0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(os(&["dicke-crit", "table", "--s", "1.5"])), 1);
        assert_eq!(main_with_args(os(&["dicke-crit", "no-such-command"])), 1);
        assert_eq!(main_with_args(os(&["dicke-crit", "table", "--scenario", "bogus"])), 1);
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("t.csv");
        let code = main_with_args(os(&["dicke-crit", "table", "--output", out.to_str().unwrap()]));
        assert_eq!(code, 0);
        // The critical Markovian-only correlation is infrared divergent.
        let code = main_with_args(os(&[
            "dicke-crit",
            "greens-time",
            "--scenario",
            "mb-only",
            "--field",
            "x-lowfreq",
            "--range",
            "1:10",
            "--points-per-decade",
            "1",
        ]));
        assert_eq!(code, 2);
    }

    #[test]
    fn rerun_from_comment_block_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("scan.csv");
        let args = vec![
            "dicke-crit",
            "scan-photon-number",
            "--s",
            "0.7",
            "--range",
            "1e-4:1e-3",
            "--points-per-decade",
            "3",
            "--output",
            out.to_str().unwrap(),
        ];
        assert_eq!(main_with_args(os(&args)), 0);
        let first = std::fs::read_to_string(&out).unwrap();
        let command = first.lines().find_map(|l| l.strip_prefix("# command: ")).unwrap();
        let again: Vec<OsString> = command.split(' ').map(OsString::from).collect();
        std::fs::remove_file(&out).unwrap();
        assert_eq!(main_with_args(again), 0);
        assert_eq!(std::fs::read_to_string(&out).unwrap(), first);
        let header = first.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "dy_rel,delta_y,photon_number");
        assert_eq!(first.lines().filter(|l| !l.starts_with('#')).count(), 5);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        std::fs::write(&path, "old").unwrap();
        write_atomic(&path, "new\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "new\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}

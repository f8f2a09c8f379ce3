//! Command-line front end: config parsing, the four subcommands and their
//! output files.

use crate::error::{Error, Result};
use crate::friedrichs::{self, EtaSign, FormFactor, FormFactorKind, FriedrichsParams, PrefactorMode, ResonanceData};
use crate::grid::{Axis, LiouvilleState};
use crate::survival::{self, CurveOptions, CurveSource, DecayCurve};
use crate::timeop::{self, ProjectionMethod};
use crate::{hardy, oracle};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Method {
    #[default]
    Fft,
    Hilbert,
    Closed,
    Oracle,
}

impl Method {
    fn projection(self) -> Option<ProjectionMethod> {
        match self {
            Method::Fft => Some(ProjectionMethod::FftTruncation),
            Method::Hilbert => Some(ProjectionMethod::HilbertForm),
            Method::Closed => Some(ProjectionMethod::ClosedFormPole),
            Method::Oracle => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fft => "fft",
            Method::Hilbert => "hilbert",
            Method::Closed => "closed",
            Method::Oracle => "oracle",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        <Method as ValueEnum>::from_str(s, true).map_err(|_| Error::Config(format!("method: unknown value {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Paper,
    Normalized,
}

impl From<ModeArg> for PrefactorMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => PrefactorMode::PaperGammaOver2,
            ModeArg::Normalized => PrefactorMode::NormalizedGammaOver2Pi,
        }
    }
}

/// Everything one run needs. `None` fields take defaults derived from the
/// resolved resonance (see [`RunConfig::resolve`]).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub omega1: f64,
    pub lambda: f64,
    pub form_factor: FormFactorKind,
    pub cutoff: f64,
    pub scale: Option<f64>,
    /// Requested width; the form-factor scale is tuned to reproduce it.
    pub gamma: Option<f64>,
    /// Pins the pole state to this level instead of the model's root.
    pub omega_tilde: Option<f64>,
    pub prefactor_mode: PrefactorMode,
    pub eta_sign: EtaSign,
    pub nu_max: Option<f64>,
    pub n_nu: usize,
    pub e_max: Option<f64>,
    pub n_e: usize,
    pub pad_factor: usize,
    pub t_min: f64,
    pub t_max: Option<f64>,
    pub t_steps: usize,
    pub method: Method,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega1: 1.0,
            lambda: 0.1,
            form_factor: FormFactorKind::FlatCutoff,
            cutoff: 20.0,
            scale: None,
            gamma: None,
            omega_tilde: None,
            prefactor_mode: PrefactorMode::NormalizedGammaOver2Pi,
            eta_sign: EtaSign::Paper,
            nu_max: None,
            n_nu: 4096,
            e_max: None,
            n_e: 512,
            pad_factor: 4,
            t_min: 0.0,
            t_max: None,
            t_steps: 2000,
            method: Method::Fft,
            out: PathBuf::from("."),
        }
    }
}

pub const DEFAULT_GAMMA: f64 = 0.2;

pub const CONFIG_KEYS: &[&str] = &[
    "omega1", "lambda", "form_factor", "cutoff", "scale", "gamma", "omega_tilde", "prefactor_mode", "eta_sign", "nu_max",
    "n_nu", "e_max", "n_e", "pad_factor", "t_min", "t_max", "t_steps", "method", "out",
];

fn num(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.trim().parse().map_err(|_| Error::Config(format!("{key}: expected a number, got {v:?}")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("{key}: must be finite, got {v:?}")));
    }
    Ok(x)
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got {v:?}")))
}

fn positive(key: &str, v: &str) -> Result<f64> {
    let x = num(key, v)?;
    if x <= 0.0 {
        return Err(Error::Config(format!("{key}: must be > 0, got {x}")));
    }
    Ok(x)
}

impl RunConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "omega1" => self.omega1 = positive(key, v)?,
            "lambda" => {
                let x = num(key, v)?;
                if x < 0.0 {
                    return Err(Error::Config(format!("lambda: must be >= 0, got {x}")));
                }
                self.lambda = x;
            }
            "form_factor" => {
                self.form_factor = match v {
                    "flat" => FormFactorKind::FlatCutoff,
                    "rational" => FormFactorKind::RationalDecay,
                    _ => return Err(Error::Config(format!("form_factor: expected flat or rational, got {v:?}"))),
                }
            }
            "cutoff" => self.cutoff = positive(key, v)?,
            "scale" => self.scale = Some(positive(key, v)?),
            "gamma" => self.gamma = Some(positive(key, v)?),
            "omega_tilde" => self.omega_tilde = Some(positive(key, v)?),
            "prefactor_mode" | "mode" => {
                self.prefactor_mode = match v {
                    "paper" => PrefactorMode::PaperGammaOver2,
                    "normalized" => PrefactorMode::NormalizedGammaOver2Pi,
                    _ => return Err(Error::Config(format!("prefactor_mode: expected paper or normalized, got {v:?}"))),
                }
            }
            "eta_sign" => {
                self.eta_sign = match v {
                    "paper" | "+" | "plus" => EtaSign::Paper,
                    "flipped" | "-" | "minus" => EtaSign::Flipped,
                    _ => return Err(Error::Config(format!("eta_sign: expected paper or flipped, got {v:?}"))),
                }
            }
            "nu_max" => self.nu_max = Some(positive(key, v)?),
            "n_nu" => {
                let n = count(key, v)?;
                if n < 4 || !n.is_power_of_two() {
                    return Err(Error::Config(format!("n_nu: must be a power of two >= 4, got {n}")));
                }
                self.n_nu = n;
            }
            "e_max" => self.e_max = Some(positive(key, v)?),
            "n_e" => {
                let n = count(key, v)?;
                if n == 0 {
                    return Err(Error::Config("n_e: must be >= 1".into()));
                }
                self.n_e = n;
            }
            "pad_factor" => {
                let n = count(key, v)?;
                if ![1, 2, 4, 8].contains(&n) {
                    return Err(Error::Config(format!("pad_factor: must be 1, 2, 4 or 8, got {n}")));
                }
                self.pad_factor = n;
            }
            "t_min" => {
                let x = num(key, v)?;
                if x < 0.0 {
                    return Err(Error::Config(format!("t_min: must be >= 0, got {x}")));
                }
                self.t_min = x;
            }
            "t_max" => self.t_max = Some(positive(key, v)?),
            "t_steps" => {
                let n = count(key, v)?;
                if n < 2 {
                    return Err(Error::Config(format!("t_steps: must be >= 2, got {n}")));
                }
                self.t_steps = n;
            }
            "method" => self.method = v.parse()?,
            "out" => self.out = PathBuf::from(v),
            other => return Err(Error::Config(format!("unknown key {other:?} (known: {})", CONFIG_KEYS.join(", ")))),
        }
        Ok(())
    }

    /// Flat `key=value` text; `#` starts a comment.
    pub fn parse_kv(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {line:?}", i + 1)))?;
            c.set(k, v).map_err(|e| Error::Config(format!("line {}: {}", i + 1, strip(&e))))?;
        }
        c.validate()?;
        Ok(c)
    }

    /// A flat JSON object with the same keys.
    pub fn parse_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("json: {e}")))?;
        let obj = v.as_object().ok_or_else(|| Error::Config("json: top level must be an object".into()))?;
        let mut c = Self::default();
        for (k, v) in obj {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                _ => return Err(Error::Config(format!("{k}: expected a string or number"))),
            };
            c.set(k, &s)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        if is_json {
            Self::parse_json(&text)
        } else {
            Self::parse_kv(&text)
        }
    }

    /// Cross-field checks that do not need any numerics.
    pub fn validate(&self) -> Result<()> {
        if self.gamma.is_some() && self.scale.is_some() && self.omega_tilde.is_none() {
            return Err(Error::Config("gamma and scale both set; give one of them".into()));
        }
        if self.lambda == 0.0 && self.omega_tilde.is_none() {
            return Err(Error::Config("lambda: must be > 0 unless omega_tilde pins the resonance".into()));
        }
        if let Some(t) = self.t_max {
            if t <= self.t_min {
                return Err(Error::Config(format!("t_max: must exceed t_min = {}, got {t}", self.t_min)));
            }
        }
        Ok(())
    }

    /// Echo of every setting, defaults included, as `key=value` pairs.
    pub fn echo(&self) -> Vec<(String, String)> {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_else(|| "auto".into());
        vec![
            ("omega1".into(), self.omega1.to_string()),
            ("lambda".into(), self.lambda.to_string()),
            ("form_factor".into(), self.form_factor.to_string()),
            ("cutoff".into(), self.cutoff.to_string()),
            ("scale".into(), opt(self.scale)),
            ("gamma_request".into(), opt(self.gamma)),
            ("omega_tilde_request".into(), opt(self.omega_tilde)),
            ("prefactor_mode".into(), self.prefactor_mode.to_string()),
            ("eta_sign".into(), format!("{:?}", self.eta_sign).to_lowercase()),
            ("n_nu".into(), self.n_nu.to_string()),
            ("n_e".into(), self.n_e.to_string()),
            ("pad_factor".into(), self.pad_factor.to_string()),
            ("t_steps".into(), self.t_steps.to_string()),
        ]
    }

    /// Builds the model, resonance, grids and time axis.
    pub fn resolve(&self) -> Result<Resolved> {
        self.validate()?;
        let params = if self.lambda > 0.0 { Some(self.model()?) } else { None };
        let resonance = match (self.omega_tilde, &params) {
            (Some(w), _) => ResonanceData::new(w, self.gamma.unwrap_or(DEFAULT_GAMMA), self.prefactor_mode)?,
            (None, Some(p)) => friedrichs::find_resonance(p, self.prefactor_mode)?,
            (None, None) => unreachable!("validate rejects lambda = 0 without omega_tilde"),
        };
        let g = resonance.gamma;
        let nu_max = self.nu_max.unwrap_or(64.0 * g);
        let e_max = self.e_max.unwrap_or(resonance.omega_tilde + 40.0 * g);
        let nu = Axis::symmetric(nu_max, self.n_nu)?;
        let e = Axis::half_offset(0.0, e_max, self.n_e)?;
        let t_max = self.t_max.unwrap_or(50.0 / g);
        if t_max <= self.t_min {
            return Err(Error::Config(format!("t_max = {t_max} does not exceed t_min = {}", self.t_min)));
        }
        let t = survival::time_axis(self.t_min, t_max, self.t_steps)?;
        let tau_edge = std::f64::consts::PI / nu.step();
        if t_max > tau_edge {
            return Err(Error::Config(format!(
                "t_max = {t_max} beyond the tau range {tau_edge:.6}; raise n_nu or lower nu_max"
            )));
        }
        Ok(Resolved { params, resonance, nu, e, t })
    }

    fn model(&self) -> Result<FriedrichsParams> {
        let build = |scale: f64| -> Result<FriedrichsParams> {
            Ok(FriedrichsParams::new(self.omega1, self.lambda, FormFactor::new(self.form_factor, self.cutoff, scale)?)?
                .with_eta_sign(self.eta_sign))
        };
        if let Some(s) = self.scale {
            return build(s);
        }
        let target = self.gamma.unwrap_or(DEFAULT_GAMMA);
        if self.omega_tilde.is_some() {
            let ff = FormFactor::new(self.form_factor, self.cutoff, 1.0)?;
            return build((target / (2.0 * std::f64::consts::PI * self.lambda.powi(2) * ff.v2(self.omega1))).sqrt());
        }
        // The width depends on the scale through omega_tilde too; a few
        // rescalings settle it (one suffices for the flat cutoff).
        let mut scale = (target / (2.0 * std::f64::consts::PI * self.lambda.powi(2))).sqrt();
        if self.form_factor == FormFactorKind::RationalDecay {
            scale /= FormFactor::new(self.form_factor, self.cutoff, 1.0)?.v(self.omega1).max(1e-300);
        }
        for _ in 0..60 {
            let p = build(scale)?;
            let g = friedrichs::find_resonance(&p, self.prefactor_mode)?.gamma;
            if (g / target - 1.0).abs() < 1e-13 {
                return Ok(p);
            }
            scale *= (target / g).sqrt();
        }
        Err(Error::Config(format!("gamma: could not tune the form-factor scale to gamma = {target}")))
    }
}

fn strip(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: Option<FriedrichsParams>,
    pub resonance: ResonanceData,
    pub nu: Axis,
    pub e: Axis,
    pub t: Axis,
}

impl Resolved {
    fn echo(&self) -> Vec<(String, String)> {
        vec![
            ("omega_tilde".into(), format!("{:.16e}", self.resonance.omega_tilde)),
            ("gamma".into(), format!("{:.16e}", self.resonance.gamma)),
            ("nu_max".into(), format!("{}", self.nu.edges().1)),
            ("e_max".into(), format!("{}", self.e.edges().1)),
            ("t_min".into(), format!("{}", self.t.start())),
            ("t_max".into(), format!("{}", self.t.last())),
        ]
    }
}

#[derive(Debug, Parser)]
#[command(name = "liouville", version, about = "Time-operator projections and survival curves for the Friedrichs model")]
pub struct Cli {
    /// key=value or JSON config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<Method>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the random test states used by verify
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Prefactor mode of the pole state
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Survival curve: writes curve.csv and bound_report.csv
    Curve,
    /// Projection P_s of the pole state: writes state.csv and projected.csv
    Project {
        /// Cut time s (a number, `tau_max` or `-tau_max`)
        #[arg(long, allow_hyphen_values = true)]
        s: String,
    },
    /// Invariant suite: writes verify_report.txt, exit 1 on any failure
    Verify {
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// One curve per value: writes KEY=VALUE/curve.csv and summary.csv
    Sweep {
        /// KEY=V1,V2,...
        #[arg(long)]
        sweep: String,
    },
}

/// Deliberate corruption used to check that verify notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Flips the sign of one decrement of p.
    Monotonicity,
}

/// Writes `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let res = (|| {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    })();
    match res {
        Ok(()) => Ok(std::fs::rename(&tmp, path)?),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn config_from(cli: &Cli) -> Result<RunConfig> {
    let mut c = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = cli.method {
        c.method = m;
    }
    if let Some(o) = &cli.out {
        c.out = o.clone();
    }
    if let Some(m) = cli.mode {
        c.prefactor_mode = m.into();
    }
    c.validate()?;
    Ok(c)
}

pub fn build_curve(cfg: &RunConfig, res: &Resolved) -> Result<DecayCurve> {
    let source = CurveSource::Pole { resonance: res.resonance, nu: res.nu, e: res.e };
    let method = cfg.method.projection().unwrap_or(ProjectionMethod::FftTruncation);
    let mut curve = survival::decay_curve(source, res.t, &CurveOptions { method, ..Default::default() })?;
    if cfg.method == Method::Oracle {
        oracle_curve(&mut curve, res)?;
    }
    let mut echo = vec![("method".to_string(), cfg.method.to_string())];
    echo.extend(cfg.echo());
    echo.extend(res.echo().into_iter().filter(|(k, _)| k != "gamma" && k != "omega_tilde"));
    echo.push(("bound_scale".into(), "bound(-t) / norm2_reference".into()));
    echo.append(&mut curve.meta.echo);
    let mut seen = std::collections::HashSet::new();
    echo.retain(|(k, _)| seen.insert(k.clone()));
    curve.meta.echo = echo;
    Ok(curve)
}

/// Replaces p and q by values from explicit Fourier sums of the pole state.
fn oracle_curve(curve: &mut DecayCurve, res: &Resolved) -> Result<()> {
    let rho = friedrichs::pole_state(&res.resonance, res.nu, res.e)?;
    let (taus, mass) = oracle::dft_tau_masses(&rho)?;
    let dtau = taus[1] - taus[0];
    let below = |cut: f64| crate::sum::sum(taus.iter().zip(&mass).filter(|(t, _)| **t < cut).map(|(_, m)| *m));
    let total = below(0.0);
    for (i, &t) in curve.t.iter().enumerate() {
        let cut = (-t / dtau).round() * dtau;
        curve.p[i] = below(cut.min(0.0)) / total;
        curve.q[i] = 1.0 - curve.p[i];
    }
    Ok(())
}

fn write_bound_report(path: &Path, curve: &DecayCurve) -> Result<survival::BoundReport> {
    let report = survival::bound_check(curve)?;
    write_atomic(path, |w| {
        writeln!(w, "# checked={}", report.checked)?;
        writeln!(w, "# violations={}", report.violations.len())?;
        writeln!(w, "# max_ratio={:.16e}", report.max_ratio)?;
        writeln!(w, "t,p,bound")?;
        for (t, l, r) in &report.violations {
            writeln!(w, "{t:.16e},{l:.16e},{r:.16e}")?;
        }
        Ok(())
    })?;
    Ok(report)
}

pub fn cmd_curve(cfg: &RunConfig) -> Result<PathBuf> {
    let res = cfg.resolve()?;
    let curve = build_curve(cfg, &res)?;
    let path = cfg.out.join("curve.csv");
    write_atomic(&path, |w| curve.write_csv(w))?;
    let report = write_bound_report(&cfg.out.join("bound_report.csv"), &curve)?;
    eprintln!(
        "curve: {} points, p(end) = {:.6e}, bound violations {} of {}",
        curve.len(),
        curve.p.last().copied().unwrap_or(f64::NAN),
        report.violations.len(),
        report.checked
    );
    Ok(path)
}

pub fn parse_cut(s: &str, tau_max: f64) -> Result<f64> {
    match s.trim() {
        "tau_max" | "+tau_max" => Ok(tau_max),
        "-tau_max" => Ok(-tau_max),
        v => v.parse().map_err(|_| Error::Config(format!("s: expected a number or tau_max, got {v:?}"))),
    }
}

pub fn cmd_project(cfg: &RunConfig, s: &str) -> Result<PathBuf> {
    let res = cfg.resolve()?;
    let rho = friedrichs::pole_state(&res.resonance, res.nu, res.e)?;
    let tau_max = timeop::tau_max(&rho)?;
    let s = parse_cut(s, tau_max)?;
    let mut meta = vec![("kind".to_string(), "state".to_string())];
    meta.extend(cfg.echo());
    meta.extend(res.echo());
    let projected = match cfg.method.projection() {
        Some(m) => timeop::project(&rho, s, m)?,
        None => {
            let snap = timeop::snap(&rho.nu_axis().conjugate()?, s)?;
            timeop::Projection { state: oracle::dft_truncation_projection(&rho, s)?, snap }
        }
    };
    write_atomic(&cfg.out.join("state.csv"), |w| rho.write_csv(w, &meta))?;
    let mut pmeta = meta.clone();
    pmeta[0].1 = "projection".into();
    pmeta.push(("method".into(), cfg.method.to_string()));
    pmeta.push(("s_requested".into(), format!("{:.16e}", projected.snap.requested)));
    pmeta.push(("s".into(), format!("{:.16e}", projected.snap.s)));
    let path = cfg.out.join("projected.csv");
    write_atomic(&path, |w| projected.state.write_csv(w, &pmeta))?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.checks.push(Check { name: name.into(), status: if ok { Status::Pass } else { Status::Fail }, detail });
    }

    fn info(&mut self, name: &str, detail: String) {
        self.checks.push(Check { name: name.into(), status: Status::Info, detail });
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }
}

/// Random band-limited pure state: a chirped Gaussian wave packet.
pub fn random_pure_state(rng: &mut ChaCha8Rng) -> Result<(LiouvilleState, timeop::EnergyDensity)> {
    let nu = Axis::symmetric(16.0, 512)?;
    let e = Axis::half_offset(0.0, 30.0, 384)?;
    let centre = rng.gen_range(10.0..20.0);
    let width = rng.gen_range(0.8..2.0);
    let chirp = rng.gen_range(-0.5..0.5);
    let delay = rng.gen_range(-1.0..1.0);
    let psi = move |x: f64| {
        let d = x - centre;
        Complex64::from_polar((-(d * d) / (4.0 * width * width)).exp(), chirp * d * d + delay * x)
    };
    let axis_density = Axis::half_offset(0.0, 30.0, 3000)?;
    let d = timeop::pure_density(psi, axis_density)?;
    let rho = timeop::pure_state(psi, nu, e)?;
    let n = rho.norm();
    Ok((rho.scaled(Complex64::new(1.0 / n, 0.0)), d))
}

pub fn run_verify(cfg: &RunConfig, seed: u64, fault: Option<Fault>) -> Result<VerifyReport> {
    let res = cfg.resolve()?;
    let mut rep = VerifyReport::default();
    let rho = friedrichs::pole_state(&res.resonance, res.nu, res.e)?;
    let g = res.resonance.gamma;
    let fft = ProjectionMethod::FftTruncation;

    let p1 = timeop::project(&rho, -2.0 / g, fft)?.state;
    let p11 = timeop::project(&p1, -2.0 / g, fft)?.state;
    let e = crate::grid::rel_l2(&p11, &p1)?;
    rep.check("idempotence", e <= 1e-10, format!("rel L2 {e:.3e} at s = -2/gamma"));

    let a = timeop::project(&timeop::project(&rho, -1.0 / g, fft)?.state, -3.0 / g, fft)?.state;
    let b = timeop::project(&rho, -3.0 / g, fft)?.state;
    let e = crate::grid::rel_l2(&a, &b)?;
    rep.check("nesting", e <= 1e-10, format!("rel L2 {e:.3e} for P(-3/g) P(-1/g) vs P(-3/g)"));

    let n_nu = rho.norm2();
    let n_tau = rho.to_tau()?.norm2();
    let e = (n_nu - n_tau).abs() / n_nu;
    rep.check("parseval", e <= 1e-12, format!("relative gap {e:.3e}"));

    let p0 = timeop::project(&rho, 0.0, fft)?.state;
    let hr = hardy::state_residual(&p0)?;
    rep.check("hardy_p0", hr <= 1e-6, format!("positive-tau fraction of P0 rho {hr:.3e}"));

    let (_, nu_hi) = res.nu.edges();
    let (_, e_hi) = res.e.edges();
    let quad = oracle::pole_norm2(&res.resonance, (-nu_hi, nu_hi), (0.0, e_hi))?;
    let e = (n_nu - quad).abs() / quad;
    rep.check("normalization_grid", e <= 2e-2, format!("grid {n_nu:.6} vs quadrature {quad:.6}"));
    let unit = res.resonance.unit_norm2();
    rep.info("normalization_target", format!("grid {n_nu:.6} vs {unit:.6} for mode {}", res.resonance.mode));

    let mut curve = build_curve(&RunConfig { method: Method::Fft, ..cfg.clone() }, &res)?;
    if fault == Some(Fault::Monotonicity) {
        let k = curve.len() / 2;
        let step = curve.p[k - 1] - curve.p[k];
        curve.p[k] = curve.p[k - 1] + step.abs().max(1e-6);
        curve.q[k] = 1.0 - curve.p[k];
    }
    let viol = survival::monotonicity_violations(&curve.p, 1e-9);
    rep.check("monotonicity", viol == 0, format!("{viol} violations over {} points", curve.len()));
    let first = curve.p[0];
    if res.t.start() == 0.0 {
        rep.check("p0_unstable", (first - 1.0).abs() <= 1e-6, format!("p(0) = {first:.12}"));
    }
    let qerr = curve.p.iter().zip(&curve.q).map(|(p, q)| (p + q - 1.0).abs()).fold(0.0, f64::max);
    rep.check("p_plus_q", qerr <= 1e-12, format!("max |p + q - 1| = {qerr:.3e}"));
    let range = curve.p.iter().all(|p| (0.0..=1.0 + 1e-12).contains(p));
    rep.check("p_in_unit_interval", range, "p within [0, 1]".into());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for _ in 0..10 {
        let (psi, d) = random_pure_state(&mut rng)?;
        let u = timeop::uncertainty_check(&psi, &d)?;
        worst = worst.min(u.product);
        ok &= u.holds;
    }
    rep.check("uncertainty_random", ok, format!("min dE*dT = {worst:.6} >= {:.6}", timeop::UNCERTAINTY_BOUND));
    if let Some(p) = &res.params {
        let w_hi = match p.form_factor.kind {
            FormFactorKind::FlatCutoff => p.form_factor.cutoff,
            FormFactorKind::RationalDecay => e_hi.max(20.0 * p.form_factor.cutoff),
        };
        let cutoff_axis = Axis::half_offset(0.0, w_hi, 20_000)?;
        match friedrichs::f1_density(p, cutoff_axis).and_then(|d| {
            let unit = rho.scaled(Complex64::new(1.0 / rho.norm(), 0.0));
            timeop::uncertainty_check_derivative(&unit, &d)
        }) {
            Ok(u) => rep.check(
                "uncertainty_friedrichs",
                u.holds,
                format!("dE = {:.6}, dT = {:.6}, product {:.6}", u.delta_e, u.delta_t, u.product),
            ),
            Err(e) => rep.check("uncertainty_friedrichs", false, format!("{e}")),
        }
    }

    let bound = survival::bound_check(&curve)?;
    rep.info(
        "bound_report",
        format!("{} violations of {} checked, max p/bound = {:.4}", bound.violations.len(), bound.checked, bound.max_ratio),
    );
    for (t, l, r) in bound.violations.iter().take(20) {
        rep.info("bound_violation", format!("t = {t:.6e}: p = {l:.6e} > bound = {r:.6e}"));
    }
    Ok(rep)
}

pub fn cmd_verify(cfg: &RunConfig, seed: u64, fault: Option<Fault>) -> Result<VerifyReport> {
    let rep = run_verify(cfg, seed, fault)?;
    write_atomic(&cfg.out.join("verify_report.txt"), |w| {
        for c in &rep.checks {
            writeln!(w, "{} {}: {}", c.status, c.name, c.detail)?;
        }
        writeln!(w, "{}", if rep.passed() { "ALL PASS" } else { "FAILED" })?;
        Ok(())
    })?;
    Ok(rep)
}

/// `KEY=V1,V2,...` split into the key and its values.
pub fn parse_sweep(spec: &str) -> Result<(String, Vec<String>)> {
    let (k, v) = spec.split_once('=').ok_or_else(|| Error::Config(format!("sweep: expected KEY=V1,V2,..., got {spec:?}")))?;
    let key = k.trim().to_string();
    if !CONFIG_KEYS.contains(&key.as_str()) || key == "out" {
        return Err(Error::Config(format!("sweep: unknown or unsweepable key {key:?}")));
    }
    let values: Vec<String> = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if values.is_empty() {
        return Err(Error::Config("sweep: empty value list".into()));
    }
    Ok((key, values))
}

pub fn cmd_sweep(cfg: &RunConfig, spec: &str) -> Result<PathBuf> {
    let (key, values) = parse_sweep(spec)?;
    // Validate every value before any output is written.
    let mut runs = Vec::new();
    for v in &values {
        let mut c = cfg.clone();
        c.set(&key, v)?;
        c.validate()?;
        c.out = cfg.out.join(format!("{key}={v}"));
        runs.push(c);
    }
    let mut rows = Vec::new();
    for (v, c) in values.iter().zip(&runs) {
        let res = c.resolve()?;
        let curve = build_curve(c, &res)?;
        write_atomic(&c.out.join("curve.csv"), |w| curve.write_csv(w))?;
        let g = res.resonance.gamma;
        let fit = survival::tail_analysis(&curve, (10.0 / g, 40.0 / g));
        let bound = write_bound_report(&c.out.join("bound_report.csv"), &curve)?;
        rows.push((v.clone(), res.resonance, curve.p.last().copied().unwrap_or(f64::NAN), fit, bound.violations.len()));
    }
    let path = cfg.out.join("summary.csv");
    write_atomic(&path, |w| {
        writeln!(w, "{key},omega_tilde,gamma,p_end,algebraic_slope,exp_rate,oscillation_period,bound_violations")?;
        for (v, r, p_end, fit, nv) in &rows {
            let (a, b, c) = match fit {
                Ok(f) => (
                    format!("{:.10e}", f.algebraic_slope),
                    format!("{:.10e}", f.exp_rate),
                    f.oscillation_period.map(|x| format!("{x:.10e}")).unwrap_or_default(),
                ),
                Err(_) => (String::new(), String::new(), String::new()),
            };
            writeln!(w, "{v},{:.16e},{:.16e},{p_end:.16e},{a},{b},{c},{nv}", r.omega_tilde, r.gamma)?;
        }
        Ok(())
    })?;
    Ok(path)
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

fn exit_code(e: &Error) -> i32 {
    if e.is_usage() {
        EXIT_USAGE
    } else {
        EXIT_NUMERIC
    }
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let run = || -> Result<i32> {
        let cfg = config_from(&cli)?;
        match &cli.command {
            Command::Curve => {
                let p = cmd_curve(&cfg)?;
                println!("{}", p.display());
                Ok(EXIT_OK)
            }
            Command::Project { s } => {
                let p = cmd_project(&cfg, s)?;
                println!("{}", p.display());
                Ok(EXIT_OK)
            }
            Command::Verify { inject_fault } => {
                let rep = cmd_verify(&cfg, cli.seed, *inject_fault)?;
                for c in &rep.checks {
                    println!("{} {}: {}", c.status, c.name, c.detail);
                }
                Ok(if rep.passed() { EXIT_OK } else { EXIT_VERIFY })
            }
            Command::Sweep { sweep } => {
                let p = cmd_sweep(&cfg, sweep)?;
                println!("{}", p.display());
                Ok(EXIT_OK)
            }
        }
    };
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_config_parses_with_comments() {
        let c = RunConfig::parse_kv("# model\ngamma = 0.1  # width\nn_nu=1024\nform_factor=rational\n").unwrap();
        assert_eq!(c.gamma, Some(0.1));
        assert_eq!(c.n_nu, 1024);
        assert_eq!(c.form_factor, FormFactorKind::RationalDecay);
    }

    #[test]
    fn json_config_matches_kv() {
        let a = RunConfig::parse_json(r#"{"gamma": 0.1, "n_nu": 1024, "method": "closed"}"#).unwrap();
        let b = RunConfig::parse_kv("gamma=0.1\nn_nu=1024\nmethod=closed").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn field_level_errors() {
        for (text, field) in [("gamma=-0.2", "gamma"), ("n_nu=1000", "n_nu"), ("pad_factor=3", "pad_factor"), ("bogus=1", "bogus")] {
            let e = RunConfig::parse_kv(text).unwrap_err();
            assert!(e.is_usage());
            assert!(e.to_string().contains(field), "{e}");
        }
    }

    #[test]
    fn sweep_spec() {
        let (k, v) = parse_sweep("gamma=0.05, 0.1,0.2").unwrap();
        assert_eq!(k, "gamma");
        assert_eq!(v, ["0.05", "0.1", "0.2"]);
        assert!(parse_sweep("gamma=").is_err());
        assert!(parse_sweep("nope=1").is_err());
    }

    #[test]
    fn rational_gamma_is_tuned() {
        let c = RunConfig { form_factor: FormFactorKind::RationalDecay, cutoff: 5.0, gamma: Some(0.05), ..Default::default() };
        let r = friedrichs::find_resonance(&c.model().unwrap(), PrefactorMode::default()).unwrap();
        assert!((r.gamma - 0.05).abs() < 1e-12);
    }
}

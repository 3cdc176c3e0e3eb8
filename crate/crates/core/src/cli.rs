//! Config-driven experiment runner behind the `lvsim` binary.
//!
//! Every subcommand reads an optional TOML file (unknown keys are rejected),
//! applies flag overrides on top, validates, runs, writes its artifacts into
//! `--out` and prints the JSON report on stdout.
//!
//! Exit codes: `0` success, `1` validation failure, `2` numerical-check
//! failure. Errors are reported on stderr as a single JSON object.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::constants::{ConstantsTable, CONSTANTS_VERSION, NUCLEAR_MAGNETON, YB171_MASS, YB_FREQ_FACTOR};
use crate::eep_framework::{ConstraintReport, DecadeWindow, OmegaUnit, TrapParams};
use crate::error::Error;
use crate::interferometry::{
    generate_fringe, ramsey_lv_closed_form, ramsey_lv_unitary, uniform_grid, FringeRecord, MeasurementBasis,
    PulseElement, PulseSequence, RamseyTemplate, ReadoutPhaseTemplate, SequenceTemplate,
};
use crate::lv_model::LvParams;
use crate::metrology::{locality_check, sql_scan, BipartiteState, EstimationConfig, LocalityReport, SqlScanConfig};
use crate::spin_algebra::{make_spin_ops, max_abs_diff, Axis, SpinQuantumNumber, StateVector};
use crate::units::{Hertz, JoulesPerTesla, Kilograms, RadPerSec, Tesla};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            CliError::Validation(m) => ("validation", m),
            CliError::Numerical(m) => ("numerical", m),
        };
        serde_json::json!({ "error": kind, "message": message, "exit_code": self.exit_code() }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::CheckFailed(_) | Error::Eigen | Error::NotNormalized(_) => CliError::Numerical(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "lvsim", version, about = "Spin-J Lorentz-violation interferometry and EEP constraint toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonFlags {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify the Ramsey operator identities numerically.
    CheckIdentities {
        #[command(flatten)]
        common: CommonFlags,
        /// Maximum allowed operator max-norm discrepancy.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Comma-separated spins, e.g. "1/2,1,7/2".
        #[arg(long, value_delimiter = ',')]
        j: Option<Vec<String>>,
    },
    /// Simulate a Ramsey / pair / CPMG fringe and write CSV + JSON.
    SimulateRamsey {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Monte-Carlo scan of the κ uncertainty against ensemble size.
    SqlScan {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated ensemble sizes.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
    },
    /// Convert an LV level-shift bound into the violation parameter a′.
    ConstrainEep {
        #[command(flatten)]
        common: CommonFlags,
        /// Unit of the configured trap frequency.
        #[arg(long)]
        omega_unit: Option<String>,
        /// Δ(m²) used to express the shift as κ.
        #[arg(long)]
        delta_m_sq: Option<f64>,
        #[arg(long)]
        c02: Option<f64>,
    },
    /// Entanglement entropy before/after local LV evolution, with a coupled control.
    LocalityDemo {
        #[command(flatten)]
        common: CommonFlags,
    },
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| invalid(format!("cannot read config {}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| invalid(format!("invalid config {}: {e}", p.display())))
        }
    }
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| invalid(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Numerical(e.to_string()))
}

// ---------------------------------------------------------------- check-identities

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckIdentitiesConfig {
    pub j_values: Vec<SpinQuantumNumber>,
    pub phi_points: usize,
    pub kappa_t: Vec<f64>,
    pub tolerance: f64,
}

impl Default for CheckIdentitiesConfig {
    fn default() -> Self {
        Self {
            j_values: (1..=7).map(|tw| SpinQuantumNumber::from_twice(tw).expect("positive")).collect(),
            phi_points: 50,
            kappa_t: vec![0.0, 0.1, 1.0, 10.0],
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCase {
    pub j: SpinQuantumNumber,
    pub kappa_t: f64,
    pub max_norm: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub constants_version: &'static str,
    pub tolerance: f64,
    pub phi_points: usize,
    pub cases: Vec<IdentityCase>,
    pub all_passed: bool,
}

/// Max-norm gap between the pulse-product Ramsey operator and its closed form,
/// over a `φ` grid on `[−π, π]`, for each `(j, κt)`.
pub fn cmd_check_identities(cfg: &CheckIdentitiesConfig) -> CliResult<IdentityReport> {
    if cfg.j_values.is_empty() {
        return Err(invalid("j list is empty"));
    }
    if cfg.phi_points == 0 {
        return Err(invalid("phi_points must be positive"));
    }
    if cfg.tolerance.is_nan() || cfg.tolerance <= 0.0 {
        return Err(invalid("tolerance must be positive"));
    }
    let grid = uniform_grid(-PI, PI, cfg.phi_points);
    let mut cases = Vec::new();
    for &j in &cfg.j_values {
        let ops = make_spin_ops(j);
        for &kt in &cfg.kappa_t {
            let mut worst = 0.0f64;
            for &phi in &grid {
                let a = ramsey_lv_unitary(&ops, phi, kt, 1.0)?;
                let b = ramsey_lv_closed_form(&ops, phi, kt, 1.0)?;
                worst = worst.max(max_abs_diff(&a, &b));
            }
            cases.push(IdentityCase {
                j,
                kappa_t: kt,
                max_norm: worst,
                passed: worst <= cfg.tolerance,
            });
        }
    }
    Ok(IdentityReport {
        constants_version: CONSTANTS_VERSION,
        tolerance: cfg.tolerance,
        phi_points: cfg.phi_points,
        all_passed: cases.iter().all(|c| c.passed),
        cases,
    })
}

// ---------------------------------------------------------------- simulate-ramsey

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// π/2 – free(φ, κt) – π/2 on `|j, initial_m⟩`.
    Ramsey,
    /// `(|m₁⟩+|m₂⟩)/√2`, free evolution, readout phase φ, pair beamsplitter.
    Pair,
    /// Pair protocol with an even number of y π pulses interleaved.
    Cpmg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    Jz,
    Pair,
    /// Rotation about x by `readout_angle` before `J_z` readout.
    RotatedX,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateRamseyConfig {
    pub j: SpinQuantumNumber,
    pub protocol: Protocol,
    pub kappa: f64,
    pub t: f64,
    pub phi_start: f64,
    pub phi_stop: f64,
    pub phi_points: usize,
    pub shots: u64,
    pub seed: u64,
    /// Initial projection for the Ramsey protocol; defaults to `+j`.
    pub initial_m: Option<f64>,
    pub m1: f64,
    pub m2: f64,
    /// Readout for the Ramsey protocol (pair protocols always use the pair beamsplitter).
    pub readout: Readout,
    pub readout_angle: f64,
    pub cpmg_pulses: usize,
    /// Detuning rate during CPMG free segments, rad/s.
    pub phi_rate: f64,
    pub prefix: String,
}

impl Default for SimulateRamseyConfig {
    fn default() -> Self {
        Self {
            j: SpinQuantumNumber::from_twice(1).expect("positive"),
            protocol: Protocol::Ramsey,
            kappa: 0.0,
            t: 1.0,
            phi_start: 0.0,
            phi_stop: 2.0 * PI,
            phi_points: 64,
            shots: 0,
            seed: 1,
            initial_m: None,
            m1: -3.5,
            m2: -0.5,
            readout: Readout::Jz,
            readout_angle: 0.0,
            cpmg_pulses: 2,
            phi_rate: 0.0,
            prefix: "fringe".into(),
        }
    }
}

pub fn cmd_simulate_ramsey(cfg: &SimulateRamseyConfig) -> CliResult<FringeRecord> {
    if cfg.phi_points == 0 || !(cfg.phi_start.is_finite() && cfg.phi_stop.is_finite()) {
        return Err(invalid("invalid phi grid"));
    }
    if !(cfg.t.is_finite() && cfg.t >= 0.0) {
        return Err(invalid("t must be non-negative"));
    }
    let ops = make_spin_ops(cfg.j);
    let grid = uniform_grid(cfg.phi_start, cfg.phi_stop, cfg.phi_points);
    let pair_state = || -> CliResult<StateVector> {
        let mut amps = DVector::zeros(cfg.j.dim());
        amps[cfg.j.index_of(cfg.m1)?] = Complex64::new(1.0, 0.0);
        amps[cfg.j.index_of(cfg.m2)?] += Complex64::new(1.0, 0.0);
        Ok(StateVector::normalized(amps)?)
    };
    let (template, initial, basis): (Box<dyn SequenceTemplate>, StateVector, MeasurementBasis) = match cfg.protocol {
        Protocol::Ramsey => {
            let m0 = cfg.initial_m.unwrap_or(cfg.j.value());
            let basis = match cfg.readout {
                Readout::Jz => MeasurementBasis::jz(cfg.j.dim()),
                Readout::Pair => MeasurementBasis::pair_beamsplitter(cfg.j, cfg.m1, cfg.m2)?,
                Readout::RotatedX => MeasurementBasis::rotated(&ops, Axis::X, cfg.readout_angle)?,
            };
            (
                Box::new(RamseyTemplate { kappa: cfg.kappa, t: cfg.t }),
                ops.basis_state(m0)?,
                basis,
            )
        }
        Protocol::Pair => (
            Box::new(ReadoutPhaseTemplate::new(PulseSequence::new(vec![PulseElement::free(cfg.t, 0.0, cfg.kappa)])?)),
            pair_state()?,
            MeasurementBasis::pair_beamsplitter(cfg.j, cfg.m1, cfg.m2)?,
        ),
        Protocol::Cpmg => {
            if cfg.cpmg_pulses == 0 || cfg.cpmg_pulses % 2 == 1 {
                return Err(invalid("cpmg_pulses must be a positive even number"));
            }
            let tau = cfg.t / (2 * cfg.cpmg_pulses) as f64;
            let mut el = Vec::new();
            for _ in 0..cfg.cpmg_pulses {
                el.push(PulseElement::free(tau, cfg.phi_rate, cfg.kappa));
                el.push(PulseElement::rotation(Axis::Y, PI));
                el.push(PulseElement::free(tau, cfg.phi_rate, cfg.kappa));
            }
            (
                Box::new(ReadoutPhaseTemplate::new(PulseSequence::new(el)?)),
                pair_state()?,
                MeasurementBasis::pair_beamsplitter(cfg.j, cfg.m1, cfg.m2)?,
            )
        }
    };
    Ok(generate_fringe(&ops, template.as_ref(), &grid, &initial, &basis, cfg.shots, cfg.seed)?)
}

// ---------------------------------------------------------------- sql-scan

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SqlScanCliConfig {
    pub n_list: Vec<usize>,
    pub true_kappa: f64,
    pub t: f64,
    pub shots_per_atom: u64,
    pub trials: usize,
    pub seed: u64,
    pub estimation: EstimationConfig,
}

impl Default for SqlScanCliConfig {
    fn default() -> Self {
        let base = SqlScanConfig::default();
        Self {
            n_list: vec![1, 4, 16, 64, 256],
            true_kappa: base.true_kappa,
            t: base.t,
            shots_per_atom: base.shots_per_atom,
            trials: base.trials,
            seed: base.seed,
            estimation: base.estimation,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SqlFitSummary {
    pub constants_version: &'static str,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub seed: u64,
    pub trials: usize,
    pub n_list: Vec<usize>,
    pub true_kappa: f64,
    pub t: f64,
    pub shots_per_atom: u64,
    pub kappa_hat: Vec<f64>,
}

pub fn cmd_sql_scan(cfg: &SqlScanCliConfig) -> CliResult<(String, SqlFitSummary)> {
    if cfg.trials < 2 {
        return Err(invalid("trials must be at least 2"));
    }
    let scan_cfg = SqlScanConfig {
        true_kappa: cfg.true_kappa,
        t: cfg.t,
        shots_per_atom: cfg.shots_per_atom,
        trials: cfg.trials,
        seed: cfg.seed,
        estimation: cfg.estimation.clone(),
    };
    let r = sql_scan(&cfg.n_list, &scan_cfg)?;
    let summary = SqlFitSummary {
        constants_version: CONSTANTS_VERSION,
        slope: r.fit.slope,
        intercept: r.fit.intercept,
        stderr: r.fit.stderr,
        seed: cfg.seed,
        trials: cfg.trials,
        n_list: cfg.n_list.clone(),
        true_kappa: cfg.true_kappa,
        t: cfg.t,
        shots_per_atom: cfg.shots_per_atom,
        kappa_hat: r.points.iter().map(|p| p.kappa_hat).collect(),
    };
    Ok((r.to_csv(), summary))
}

// ---------------------------------------------------------------- constrain-eep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstrainEepConfig {
    /// When true, unset physical parameters take the Yb example values.
    #[serde(default = "yes")]
    pub use_defaults: bool,
    pub c02: Option<f64>,
    pub freq_factor_hz: Option<f64>,
    pub n: Option<u32>,
    pub omega0: Option<f64>,
    pub omega_unit: Option<OmegaUnit>,
    pub mass_kg: Option<f64>,
    /// Magnetic moment in nuclear magnetons.
    pub mu_nuclear: Option<f64>,
    pub b_field_t: Option<f64>,
    pub delta_m_sq: Option<f64>,
    pub window_lo: Option<f64>,
    pub window_hi: Option<f64>,
}

fn yes() -> bool {
    true
}

impl Default for ConstrainEepConfig {
    fn default() -> Self {
        Self {
            use_defaults: true,
            c02: None,
            freq_factor_hz: None,
            n: None,
            omega0: None,
            omega_unit: None,
            mass_kg: None,
            mu_nuclear: None,
            b_field_t: None,
            delta_m_sq: None,
            window_lo: None,
            window_hi: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstrainEepOutput {
    pub omega_unit: OmegaUnit,
    pub omega0_configured: f64,
    #[serde(flatten)]
    pub report: ConstraintReport,
}

pub fn cmd_constrain_eep(cfg: &ConstrainEepConfig) -> CliResult<ConstrainEepOutput> {
    let mut missing = Vec::new();
    let mut pick = |name: &'static str, v: Option<f64>, default: f64| -> f64 {
        match v {
            Some(x) => x,
            None if cfg.use_defaults => default,
            None => {
                missing.push(name);
                f64::NAN
            }
        }
    };
    let c02 = pick("c02", cfg.c02, 1e-23);
    let freq = pick("freq_factor_hz", cfg.freq_factor_hz, YB_FREQ_FACTOR);
    let omega0 = pick("omega0", cfg.omega0, 1e4);
    let mass = pick("mass_kg", cfg.mass_kg, YB171_MASS);
    let mu = pick("mu_nuclear", cfg.mu_nuclear, 0.429);
    let b = pick("b_field_t", cfg.b_field_t, 1.0);
    let n = match cfg.n {
        Some(n) => n,
        None if cfg.use_defaults => 2,
        None => {
            missing.push("n");
            0
        }
    };
    if !missing.is_empty() {
        return Err(invalid(format!("missing physical parameters: {}", missing.join(", "))));
    }
    let unit = cfg.omega_unit.unwrap_or(OmegaUnit::RadS);
    let lv = LvParams::new(c02, Hertz(freq), RadPerSec(0.0))?;
    let trap = TrapParams {
        mass: Kilograms(mass),
        omega0: unit.to_rad_s(omega0),
        n,
        mu: JoulesPerTesla(mu * NUCLEAR_MAGNETON),
        b_field: Tesla(b),
    };
    let window = DecadeWindow {
        lo: cfg.window_lo.unwrap_or(1e-19),
        hi: cfg.window_hi.unwrap_or(1e-18),
    };
    Ok(ConstrainEepOutput {
        omega_unit: unit,
        omega0_configured: omega0,
        report: ConstraintReport::build(&lv, &trap, cfg.delta_m_sq, window)?,
    })
}

// ---------------------------------------------------------------- locality-demo

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub label: String,
    /// Flat `[re, im, re, im, …]` list of `d²` amplitudes in `A ⊗ B` order.
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalityDemoConfig {
    pub j: SpinQuantumNumber,
    pub kappa: f64,
    pub t: f64,
    pub states: Vec<StateSpec>,
}

impl Default for LocalityDemoConfig {
    fn default() -> Self {
        Self {
            j: SpinQuantumNumber::from_twice(1).expect("positive"),
            kappa: PI / 4.0,
            t: 1.0,
            states: vec![
                StateSpec {
                    label: "bell (|uu>+|dd>)/sqrt2".into(),
                    amplitudes: vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
                },
                StateSpec {
                    label: "product (|u>+|d>)(|u>+|d>)/2".into(),
                    amplitudes: vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
                },
            ],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalityEntry {
    pub label: String,
    pub delta_s_local: f64,
    pub delta_s_nonlocal_control: f64,
    pub max_spectrum_shift: f64,
    #[serde(flatten)]
    pub report: LocalityReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalityDemoReport {
    pub constants_version: &'static str,
    pub j: SpinQuantumNumber,
    pub kappa: f64,
    pub t: f64,
    pub note: &'static str,
    pub states: Vec<LocalityEntry>,
}

pub fn cmd_locality_demo(cfg: &LocalityDemoConfig) -> CliResult<LocalityDemoReport> {
    let ops = make_spin_ops(cfg.j);
    let d = cfg.j.dim();
    let mut states = Vec::new();
    for spec in &cfg.states {
        if spec.amplitudes.len() % 2 == 1 {
            return Err(invalid(format!("state '{}' has an odd number of amplitude components", spec.label)));
        }
        if spec.amplitudes.len() != 2 * d * d {
            return Err(invalid(format!(
                "state '{}' needs {} complex amplitudes, got {}",
                spec.label,
                d * d,
                spec.amplitudes.len() / 2
            )));
        }
        let amps = DVector::from_iterator(d * d, spec.amplitudes.chunks(2).map(|c| Complex64::new(c[0], c[1])));
        let state = BipartiteState::normalized((d, d), amps)?;
        let report = locality_check(&state, &ops, cfg.kappa, cfg.t)?;
        states.push(LocalityEntry {
            label: spec.label.clone(),
            delta_s_local: report.s_after_local - report.s_before,
            delta_s_nonlocal_control: report.s_after_nonlocal_control - report.s_before,
            max_spectrum_shift: report.max_spectrum_shift(),
            report,
        });
    }
    Ok(LocalityDemoReport {
        constants_version: CONSTANTS_VERSION,
        j: cfg.j,
        kappa: cfg.kappa,
        t: cfg.t,
        note: "nonlocal control evolves under kappa*(J1z+J2z)^2, a coupled contrast generator",
        states,
    })
}

// ---------------------------------------------------------------- dispatch

#[derive(Serialize)]
struct WithConstants<'a, T: Serialize> {
    constants: ConstantsTable,
    #[serde(flatten)]
    body: &'a T,
}

fn json_with_constants<T: Serialize>(body: &T) -> CliResult<String> {
    to_json(&WithConstants {
        constants: ConstantsTable::current(),
        body,
    })
}

/// Runs one parsed command. Returns the stdout text.
pub fn execute(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::CheckIdentities { common, tolerance, j } => {
            let mut cfg: CheckIdentitiesConfig = load_config(common.config.as_deref())?;
            if let Some(t) = tolerance {
                cfg.tolerance = t;
            }
            if let Some(js) = j {
                cfg.j_values = js
                    .iter()
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.parse::<SpinQuantumNumber>())
                    .collect::<Result<_, _>>()?;
            }
            let report = cmd_check_identities(&cfg)?;
            let json = json_with_constants(&report)?;
            if let Some(dir) = &common.out {
                write_artifact(dir, "identities.json", &json)?;
            }
            if !report.all_passed {
                let failed: Vec<String> = report
                    .cases
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| format!("j={} kt={} norm={:e}", c.j, c.kappa_t, c.max_norm))
                    .collect();
                return Err(CliError::Numerical(format!("identity check failed: {}", failed.join("; "))));
            }
            Ok(json)
        }
        Command::SimulateRamsey { common, shots, kappa } => {
            let mut cfg: SimulateRamseyConfig = load_config(common.config.as_deref())?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if let Some(s) = shots {
                cfg.shots = s;
            }
            if let Some(k) = kappa {
                cfg.kappa = k;
            }
            let rec = cmd_simulate_ramsey(&cfg)?;
            let json = rec.to_json()?;
            let dir = common.out.unwrap_or_else(|| PathBuf::from("."));
            write_artifact(&dir, &format!("{}.csv", cfg.prefix), &rec.to_csv())?;
            write_artifact(&dir, &format!("{}.json", cfg.prefix), &json)?;
            Ok(json)
        }
        Command::SqlScan { common, trials, n } => {
            let mut cfg: SqlScanCliConfig = load_config(common.config.as_deref())?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(n) = n {
                cfg.n_list = n;
            }
            let (csv, summary) = cmd_sql_scan(&cfg)?;
            let json = json_with_constants(&summary)?;
            let dir = common.out.unwrap_or_else(|| PathBuf::from("."));
            write_artifact(&dir, "sql_scan.csv", &csv)?;
            write_artifact(&dir, "sql_fit.json", &json)?;
            Ok(json)
        }
        Command::ConstrainEep {
            common,
            omega_unit,
            delta_m_sq,
            c02,
        } => {
            let mut cfg: ConstrainEepConfig = load_config(common.config.as_deref())?;
            if let Some(u) = omega_unit {
                cfg.omega_unit = Some(u.parse()?);
            }
            if delta_m_sq.is_some() {
                cfg.delta_m_sq = delta_m_sq;
            }
            if c02.is_some() {
                cfg.c02 = c02;
            }
            let out = cmd_constrain_eep(&cfg)?;
            let json = to_json(&out)?;
            if let Some(dir) = &common.out {
                write_artifact(dir, "constraint.json", &json)?;
            }
            Ok(json)
        }
        Command::LocalityDemo { common } => {
            let cfg: LocalityDemoConfig = load_config(common.config.as_deref())?;
            let report = cmd_locality_demo(&cfg)?;
            let json = json_with_constants(&report)?;
            if let Some(dir) = &common.out {
                write_artifact(dir, "locality.json", &json)?;
            }
            Ok(json)
        }
    }
}

/// Parses arguments, runs, prints and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            eprintln!("{}", CliError::Validation(e.to_string()).to_json());
            return EXIT_VALIDATION;
        }
    };
    match execute(cli) {
        Ok(out) => {
            println!("{out}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_j_list_is_usage_error() {
        let cfg = CheckIdentitiesConfig {
            j_values: vec![],
            ..Default::default()
        };
        assert_eq!(cmd_check_identities(&cfg).unwrap_err().exit_code(), EXIT_VALIDATION);
    }

    #[test]
    fn tolerance_is_reported() {
        let cfg = CheckIdentitiesConfig {
            j_values: vec![SpinQuantumNumber::from_twice(1).unwrap()],
            phi_points: 5,
            kappa_t: vec![0.0],
            tolerance: 1e-11,
        };
        let r = cmd_check_identities(&cfg).unwrap();
        assert_eq!(r.tolerance, 1e-11);
        assert!(r.all_passed);
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let r: Result<SimulateRamseyConfig, _> = toml::from_str("j = \"1/2\"\nbogus = 3\n");
        assert!(r.is_err());
        let ok: SimulateRamseyConfig = toml::from_str("j = \"7/2\"\nprotocol = \"pair\"\n").unwrap();
        assert_eq!(ok.j.twice(), 7);
    }

    #[test]
    fn constrain_requires_parameters_without_defaults() {
        let cfg = ConstrainEepConfig {
            use_defaults: false,
            c02: Some(1e-23),
            ..Default::default()
        };
        let e = cmd_constrain_eep(&cfg).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_VALIDATION);
        assert!(matches!(e, CliError::Validation(m) if m.contains("mass_kg")));
    }

    #[test]
    fn odd_state_spec_rejected() {
        let cfg = LocalityDemoConfig {
            states: vec![StateSpec {
                label: "bad".into(),
                amplitudes: vec![1.0, 0.0, 1.0],
            }],
            ..Default::default()
        };
        assert_eq!(cmd_locality_demo(&cfg).unwrap_err().exit_code(), EXIT_VALIDATION);
    }

    #[test]
    fn cpmg_needs_even_pulses() {
        let cfg = SimulateRamseyConfig {
            j: SpinQuantumNumber::from_twice(7).unwrap(),
            protocol: Protocol::Cpmg,
            cpmg_pulses: 3,
            ..Default::default()
        };
        assert!(cmd_simulate_ramsey(&cfg).is_err());
    }
}

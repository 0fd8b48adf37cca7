//! Run reports and result emission: CSV tables plus a JSON report, written
//! atomically (temp file + rename). Every emitted byte is a deterministic
//! function of (config, master_seed); wall times go to stderr only.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rfsim_core::ExperimentConfig;

use crate::error::{HarnessError, Result};
use crate::montecarlo::ConstellationRow;

pub const EVM_CSV_HEADER: &str =
    "B,U,snr_db,quantizer,dither_mode,d0,evm_empirical_pct,evm_analytical_pct,ci_halfwidth_pct,n_channels,n_symbols,seed";
pub const CONSTELLATION_CSV_HEADER: &str = "trial,symbol,subcarrier,user,re,im";
pub const PSD_CSV_HEADER: &str = "freq_hz,psd_db_empirical,psd_db_analytical";
pub const DITHER_CSV_HEADER: &str = "snr_db,mode,d0_opt,evm_opt_pct,evm_undithered_pct";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    #[serde(flatten)]
    pub base: ExperimentConfig,
    pub s: usize,
    pub bw_hz: f64,
    pub osr: f64,
    pub delay_spread_s: f64,
}

impl ConfigEcho {
    pub fn of(cfg: &ExperimentConfig) -> Self {
        Self {
            base: cfg.clone(),
            s: cfg.s(),
            bw_hz: cfg.bw_hz(),
            osr: cfg.osr(),
            delay_spread_s: cfg.delay_spread_s(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub b: usize,
    pub u: usize,
    pub snr_db: f64,
    pub quantizer: String,
    pub dither_mode: String,
    pub d0: f64,
    pub evm_empirical_pct: Option<f64>,
    pub evm_analytical_pct: Option<f64>,
    pub ci_halfwidth_pct: Option<f64>,
    pub n_channels: usize,
    pub n_symbols: usize,
    pub seed: u64,
    /// Volatile; printed to stderr, never serialized into the report file.
    #[serde(skip, default)]
    pub wall_time_s: f64,
    pub max_imag_trace_ratio: Option<f64>,
    pub max_antihermitian: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdCrossing {
    pub label: String,
    pub threshold_pct: f64,
    pub b: usize,
    pub quantizer: String,
    pub dither_mode: String,
    /// Which EVM column the crossing was interpolated on.
    pub source: String,
    pub enter_snr_db: Option<f64>,
    pub exit_snr_db: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsdSummary {
    pub snr_db: f64,
    pub emp_peak_hz: f64,
    pub ana_peak_hz: Option<f64>,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    /// In-band mean levels after normalizing each density to unit integral.
    pub in_band_emp_db: f64,
    pub in_band_ana_db: Option<f64>,
    pub in_band_delta_db: Option<f64>,
    /// In-band distortion-to-signal power ratio from the analytical split.
    pub dist_to_signal_in_band_db: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DitherRow {
    pub snr_db: f64,
    pub mode: String,
    pub d0_opt: f64,
    pub evm_opt_pct: f64,
    pub evm_undithered_pct: f64,
    pub fell_back_to_grid: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub rows: Vec<ReportRow>,
    #[serde(default)]
    pub threshold_crossings: Vec<ThresholdCrossing>,
    #[serde(default)]
    pub psd: Option<PsdSummary>,
    #[serde(default)]
    pub dither_table: Vec<DitherRow>,
    #[serde(default)]
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            config: ConfigEcho::of(cfg),
            rows: Vec::new(),
            threshold_crossings: Vec::new(),
            psd: None,
            dither_table: Vec::new(),
            artifacts: Vec::new(),
        }
    }
}

/// Parses report bytes back and checks internal consistency; the report
/// schema's own validator.
pub fn validate_report_json(bytes: &[u8]) -> Result<RunReport> {
    let report: RunReport = serde_json::from_slice(bytes)
        .map_err(|e| HarnessError::Config(format!("report does not match schema: {e}")))?;
    let cfg = &report.config;
    if cfg.s != cfg.base.s()
        || (cfg.bw_hz - cfg.base.bw_hz()).abs() > 1e-6
        || (cfg.osr - cfg.base.osr()).abs() > 1e-9
    {
        return Err(HarnessError::Config("config echo does not match its derivations".into()));
    }
    for row in &report.rows {
        let finite = row.snr_db.is_finite()
            && row.d0.is_finite()
            && row.evm_empirical_pct.iter().all(|v| v.is_finite())
            && row.evm_analytical_pct.iter().all(|v| v.is_finite());
        if !finite || row.b == 0 || row.u == 0 {
            return Err(HarnessError::Config("report row fails invariants".into()));
        }
    }
    Ok(report)
}

/// Emission format for the tabular artifacts. The JSON report is always
/// written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

fn fmt_opt(v: &Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

pub fn evm_table_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(EVM_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.b,
            r.u,
            r.snr_db,
            r.quantizer,
            r.dither_mode,
            r.d0,
            fmt_opt(&r.evm_empirical_pct),
            fmt_opt(&r.evm_analytical_pct),
            fmt_opt(&r.ci_halfwidth_pct),
            r.n_channels,
            r.n_symbols,
            r.seed
        );
    }
    out
}

pub fn constellation_csv(rows: &[ConstellationRow]) -> String {
    let mut out = String::from(CONSTELLATION_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.trial, r.symbol, r.subcarrier, r.user, r.re, r.im);
    }
    out
}

/// PSD rows: both columns in dB relative to their own peaks.
pub fn psd_csv(freq_hz: &[f64], emp_db: &[f64], ana_db: Option<&[f64]>) -> String {
    let mut out = String::from(PSD_CSV_HEADER);
    out.push('\n');
    for (i, f) in freq_hz.iter().enumerate() {
        let ana = match ana_db {
            Some(a) => format!("{}", a[i]),
            None => String::new(),
        };
        let _ = writeln!(out, "{},{},{}", f, emp_db[i], ana);
    }
    out
}

pub fn dither_csv(rows: &[DitherRow]) -> String {
    let mut out = String::from(DITHER_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.snr_db, r.mode, r.d0_opt, r.evm_opt_pct, r.evm_undithered_pct);
    }
    out
}

/// Serializes rows as a JSON array (the `--format json` table flavor).
pub fn rows_json<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(rows)
        .map_err(|e| HarnessError::Config(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// ConstellationRow mirror with serde support for the JSON table flavor.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConstellationJsonRow {
    pub trial: usize,
    pub symbol: usize,
    pub subcarrier: usize,
    pub user: usize,
    pub re: f64,
    pub im: f64,
}

impl From<&ConstellationRow> for ConstellationJsonRow {
    fn from(r: &ConstellationRow) -> Self {
        Self { trial: r.trial, symbol: r.symbol, subcarrier: r.subcarrier, user: r.user, re: r.re, im: r.im }
    }
}

/// Writes bytes atomically: temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source: std::io::Error| HarnessError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(io_err)?;
    let mut tmp = PathBuf::from(dir);
    tmp.push(format!(
        ".{}.tmp{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact"),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes).map_err(|source| HarnessError::Io { path: tmp.clone(), source })?;
    std::fs::rename(&tmp, path).map_err(io_err)?;
    Ok(())
}

pub fn write_report_json(dir: &Path, report: &RunReport) -> Result<PathBuf> {
    let path = dir.join("report.json");
    let mut bytes = serde_json::to_vec_pretty(report)
        .map_err(|e| HarnessError::Config(format!("report serialization failed: {e}")))?;
    bytes.push(b'\n');
    atomic_write(&path, &bytes)?;
    Ok(path)
}

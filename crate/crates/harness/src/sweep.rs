//! Sweeps over (antenna count, SNR, quantizer mode) with one report row per
//! grid point and EVM-threshold crossings interpolated per curve.

use std::time::Instant;

use rfsim_core::config::DitherMode;
use rfsim_core::{ExperimentConfig, QuantizerKind};

use crate::dither::optimize_dither;
use crate::error::Result;
use crate::montecarlo::run_point;
use crate::report::{ReportRow, RunReport, ThresholdCrossing};

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub base: ExperimentConfig,
    pub b_values: Vec<usize>,
    pub snr_values: Vec<f64>,
    pub quantizers: Vec<QuantizerKind>,
    /// Re-optimize `d_0` at every (B, SNR) point before simulating.
    pub optimize_d0: bool,
}

impl SweepPlan {
    pub fn single_point(base: &ExperimentConfig, optimize_d0: bool) -> Self {
        Self {
            base: base.clone(),
            b_values: vec![base.b],
            snr_values: vec![base.snr_db],
            quantizers: vec![base.quantizer],
            optimize_d0,
        }
    }
}

/// One row per (B, quantizer, SNR), channel ensemble shared across the grid.
pub fn run_sweep(plan: &SweepPlan) -> Result<RunReport> {
    let mut report = RunReport::new(&plan.base);
    for &b in &plan.b_values {
        for &quantizer in &plan.quantizers {
            for &snr in &plan.snr_values {
                let mut cfg = plan.base.with_b(b).with_quantizer(quantizer).with_snr(snr);
                if plan.optimize_d0 && cfg.dither.mode != DitherMode::None {
                    let opt = optimize_dither(&cfg, snr, cfg.dither.mode)?;
                    cfg.dither.d_0 = opt.d_0;
                }
                let started = Instant::now();
                let outcome = run_point(&cfg, false)?;
                report.rows.push(ReportRow {
                    b,
                    u: cfg.u,
                    snr_db: snr,
                    quantizer: quantizer.to_string(),
                    dither_mode: cfg.dither.mode.to_string(),
                    d0: cfg.dither.d_0,
                    evm_empirical_pct: Some(outcome.evm_empirical_pct),
                    evm_analytical_pct: outcome.evm_analytical_pct,
                    ci_halfwidth_pct: outcome.ci_halfwidth_pct,
                    n_channels: cfg.n_channels,
                    n_symbols: cfg.n_symbols,
                    seed: cfg.master_seed,
                    wall_time_s: started.elapsed().as_secs_f64(),
                    max_imag_trace_ratio: outcome.diagnostics.map(|d| d.max_imag_trace_ratio),
                    max_antihermitian: outcome.diagnostics.map(|d| d.max_antihermitian),
                });
            }
        }
    }
    report.threshold_crossings = crossings_for(&report.rows, &plan.base);
    Ok(report)
}

/// Threshold crossings per (B, quantizer, dither) curve, interpolated on the
/// analytical column when it is complete and on the empirical one otherwise.
pub fn crossings_for(rows: &[ReportRow], base: &ExperimentConfig) -> Vec<ThresholdCrossing> {
    let mut out = Vec::new();
    if base.evm_threshold_lines.is_empty() {
        return out;
    }
    let mut curves: Vec<(usize, String, String)> = rows
        .iter()
        .map(|r| (r.b, r.quantizer.clone(), r.dither_mode.clone()))
        .collect();
    curves.sort();
    curves.dedup();
    for (b, quantizer, dither_mode) in curves {
        let mut points: Vec<&ReportRow> = rows
            .iter()
            .filter(|r| r.b == b && r.quantizer == quantizer && r.dither_mode == dither_mode)
            .collect();
        points.sort_by(|a, b| a.snr_db.partial_cmp(&b.snr_db).unwrap());
        let analytical_complete = points.iter().all(|r| r.evm_analytical_pct.is_some());
        let curve: Vec<(f64, f64)> = points
            .iter()
            .filter_map(|r| {
                let evm = if analytical_complete { r.evm_analytical_pct } else { r.evm_empirical_pct };
                evm.map(|e| (r.snr_db, e))
            })
            .collect();
        if curve.len() < 2 {
            continue;
        }
        for (label, &threshold) in &base.evm_threshold_lines {
            let (enter, exit) = interval_below(&curve, threshold);
            out.push(ThresholdCrossing {
                label: label.clone(),
                threshold_pct: threshold,
                b,
                quantizer: quantizer.clone(),
                dither_mode: dither_mode.clone(),
                source: if analytical_complete { "analytical".into() } else { "empirical".into() },
                enter_snr_db: enter,
                exit_snr_db: exit,
            });
        }
    }
    out
}

/// First entry into and last exit from the region `evm <= threshold`,
/// linearly interpolated between grid points. Open ends clamp to the grid.
fn interval_below(curve: &[(f64, f64)], threshold: f64) -> (Option<f64>, Option<f64>) {
    let below: Vec<bool> = curve.iter().map(|&(_, e)| e <= threshold).collect();
    let first = below.iter().position(|&b| b);
    let last = below.iter().rposition(|&b| b);
    let (Some(first), Some(last)) = (first, last) else {
        return (None, None);
    };
    let interp = |(s0, e0): (f64, f64), (s1, e1): (f64, f64)| -> f64 {
        if (e1 - e0).abs() < 1e-30 {
            s1
        } else {
            s0 + (threshold - e0) * (s1 - s0) / (e1 - e0)
        }
    };
    let enter = if first == 0 { curve[0].0 } else { interp(curve[first - 1], curve[first]) };
    let exit = if last + 1 == curve.len() {
        curve[last].0
    } else {
        interp(curve[last], curve[last + 1])
    };
    (Some(enter), Some(exit))
}

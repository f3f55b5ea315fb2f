use std::io::Write;

use serde::Serialize;
use tsagg_core::asymptotics::{ConvergenceReport, OrderStatus};
use tsagg_core::simulator::Variant;

use crate::config::{Format, Regime};
use crate::error::{CliError, Result};

/// One output line: a grid point evaluated by one or both engines.
///
/// Per-file columns hold the analytical `q_n` when the analysis ran and the
/// simulated per-file frequency otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub variant: Variant,
    pub q_analysis: Option<f64>,
    pub q_sim: Option<f64>,
    pub ci95: Option<f64>,
    pub no_serving_freq: Option<f64>,
    pub seed: Option<u64>,
    pub q_files: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ResultRow {
    pub fn new(sweep_var: &str, sweep_value: f64, variant: Variant, n_files: usize) -> Self {
        Self {
            sweep_var: sweep_var.to_string(),
            sweep_value,
            variant,
            q_analysis: None,
            q_sim: None,
            ci95: None,
            no_serving_freq: None,
            seed: None,
            q_files: vec![None; n_files],
            note: None,
        }
    }

    /// Appends `note`, keeping earlier ones.
    pub fn annotate(&mut self, note: String) {
        self.note = Some(match self.note.take() {
            Some(prev) => format!("{prev}; {note}"),
            None => note,
        });
    }
}

pub fn header(n_files: usize) -> Vec<String> {
    let fixed = [
        "sweep_var",
        "sweep_value",
        "variant",
        "q_analysis",
        "q_sim",
        "ci95",
        "no_serving_freq",
        "seed",
    ];
    fixed
        .iter()
        .map(|s| s.to_string())
        .chain((1..=n_files).map(|n| format!("q{n}")))
        .collect()
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Output(e.to_string())
}

fn json_to<W: Write, T: Serialize + ?Sized>(out: W, value: &T) -> Result<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Output(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Output(e.to_string()))
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow], n_files: usize, format: Format) -> Result<()> {
    match format {
        Format::Json => json_to(out, rows),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header(n_files)).map_err(csv_err)?;
            for r in rows {
                let mut rec = vec![
                    r.sweep_var.clone(),
                    r.sweep_value.to_string(),
                    r.variant.label().to_string(),
                    cell(r.q_analysis),
                    cell(r.q_sim),
                    cell(r.ci95),
                    cell(r.no_serving_freq),
                    r.seed.map(|s| s.to_string()).unwrap_or_default(),
                ];
                rec.extend(r.q_files.iter().map(|&q| cell(q)));
                w.write_record(&rec).map_err(csv_err)?;
            }
            w.flush().map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeOutput {
    pub regime: Regime,
    pub report: ConvergenceReport,
}

pub fn write_probe<W: Write>(out: W, probe: &ProbeOutput, format: Format) -> Result<()> {
    match format {
        Format::Json => json_to(out, probe),
        Format::Csv => {
            let r = &probe.report;
            let status = match r.status {
                OrderStatus::Determined => "determined",
                OrderStatus::Indeterminate => "indeterminate",
            };
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "regime",
                "x",
                "value",
                "limit",
                "error",
                "ratio",
                "fitted_order",
                "status",
            ])
            .map_err(csv_err)?;
            for i in 0..r.schedule.len() {
                let ratio = if i == 0 { None } else { r.ratios[i - 1] };
                w.write_record([
                    probe.regime.name().to_string(),
                    r.schedule[i].to_string(),
                    r.values[i].to_string(),
                    r.limit.to_string(),
                    r.errors[i].to_string(),
                    cell(ratio),
                    cell(r.fitted_order),
                    status.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush().map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

//! CSV and JSON emission for run records.
//!
//! Numbers are serialized with 17 significant digits so that re-parsing
//! reproduces every field bit-exactly.

use std::io::{self, Write};

use convdiff::RunRecord64;
use serde::Serialize;

/// Fixed CSV column order shared by both formats.
pub const COLUMNS: [&str; 16] = [
    "method",
    "epsilon",
    "n",
    "h",
    "beta",
    "forcing",
    "err_h1",
    "err_l2",
    "err_star",
    "err_star_h",
    "quasi_opt_ratio",
    "sign_changes",
    "total_variation",
    "g0_saturated",
    "restriction_ok",
    "residual_inf",
];

/// One record row with keys matching the CSV columns.
#[derive(Debug, Clone, Serialize)]
pub struct RecordDto {
    pub method: String,
    pub epsilon: f64,
    pub n: u64,
    pub h: f64,
    pub beta: Option<f64>,
    pub forcing: String,
    pub err_h1: f64,
    pub err_l2: f64,
    pub err_star: f64,
    pub err_star_h: f64,
    pub quasi_opt_ratio: f64,
    pub sign_changes: u64,
    pub total_variation: f64,
    pub g0_saturated: Option<bool>,
    pub restriction_ok: Option<bool>,
    pub residual_inf: f64,
}

impl From<&RunRecord64> for RecordDto {
    fn from(r: &RunRecord64) -> Self {
        RecordDto {
            method: r.method.label().to_string(),
            epsilon: r.epsilon,
            n: r.n as u64,
            h: r.h,
            beta: r.beta,
            forcing: r.forcing.clone(),
            err_h1: r.err_h1,
            err_l2: r.err_l2,
            err_star: r.err_star,
            err_star_h: r.err_star_h,
            quasi_opt_ratio: r.quasi_opt_ratio,
            sign_changes: r.oscillation.sign_changes as u64,
            total_variation: r.oscillation.total_variation,
            g0_saturated: r.g0_saturated,
            restriction_ok: r.restriction_ok,
            residual_inf: r.residual_inf,
        }
    }
}

/// Echo of the parsed invocation, placed under the `config` key.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigDto {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forcing: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<String>,
    pub quad_order: u64,
    pub format: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputDto {
    pub config: ConfigDto,
    pub records: Vec<RecordDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

/// 17-significant-digit float text, identical in CSV and JSON.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

pub fn write_json<W: Write>(out: &mut W, dto: &OutputDto) -> io::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut *out, SciFormatter);
    dto.serialize(&mut ser)
        .map_err(io::Error::other)?;
    writeln!(out)
}

pub fn write_csv<W: Write>(out: &mut W, records: &[RecordDto]) -> io::Result<()> {
    writeln!(out, "{}", COLUMNS.join(","))?;
    for r in records {
        let fields = [
            r.method.clone(),
            fmt_f64(r.epsilon),
            r.n.to_string(),
            fmt_f64(r.h),
            r.beta.map(fmt_f64).unwrap_or_default(),
            r.forcing.clone(),
            fmt_f64(r.err_h1),
            fmt_f64(r.err_l2),
            fmt_f64(r.err_star),
            fmt_f64(r.err_star_h),
            fmt_f64(r.quasi_opt_ratio),
            r.sign_changes.to_string(),
            fmt_f64(r.total_variation),
            r.g0_saturated.map(|b| b.to_string()).unwrap_or_default(),
            r.restriction_ok.map(|b| b.to_string()).unwrap_or_default(),
            fmt_f64(r.residual_inf),
        ];
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

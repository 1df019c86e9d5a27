//! Deterministic artifact emission: CSV with 17 significant digits and
//! pretty-printed JSON records with fixed field order, so identical inputs
//! produce byte-identical outputs.

use std::fs;
use std::path::Path;

use serde::Serialize;

use walkgate_core::propagator::PropagationResult;

use crate::error::CliError;

/// 17 significant digits, '.' decimal, no locale.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_trajectory_csv(
    path: &Path,
    labels: &[String],
    result: &PropagationResult,
) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str("t,tau");
    for label in labels {
        out.push_str(",P_");
        out.push_str(label);
    }
    out.push_str(",norm,leakage\n");
    for row in &result.trajectory {
        out.push_str(&fmt_f64(row.t));
        out.push(',');
        out.push_str(&fmt_f64(row.tau));
        for p in &row.probabilities {
            out.push(',');
            out.push_str(&fmt_f64(*p));
        }
        out.push(',');
        out.push_str(&fmt_f64(row.norm));
        out.push(',');
        out.push_str(&fmt_f64(row.leakage));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Serialize)]
pub struct FinalStateRecord {
    pub labels: Vec<String>,
    /// Amplitudes as [re, im] pairs in label order.
    pub amplitudes: Vec<[f64; 2]>,
    pub norm_drift: f64,
    pub boundary_leakage: f64,
    pub coin_purity: f64,
    pub warnings: Vec<String>,
}

impl FinalStateRecord {
    pub fn from_result(labels: &[String], result: &PropagationResult) -> Self {
        FinalStateRecord {
            labels: labels.to_vec(),
            amplitudes: result
                .final_walker
                .amplitudes
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
            norm_drift: result.norm_drift,
            boundary_leakage: result.boundary_leakage,
            coin_purity: result.coin_purity,
            warnings: result.warnings.clone(),
        }
    }
}

/// Row-major [re, im] pairs.
pub fn matrix_record(matrix: &ndarray::Array2<walkgate_core::C64>) -> Vec<Vec<[f64; 2]>> {
    matrix
        .rows()
        .into_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

//! Report types and deterministic file output.
//!
//! Reports serialize with numbers rounded to six significant digits and are
//! written atomically (temp file, then rename) so repeated runs with the
//! same seeds produce byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Rounds to six significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor();
    let factor = 10f64.powi(5 - magnitude as i32);
    (x * factor).round() / factor
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
}

impl MetricSummary {
    /// Sample mean and (n-1)-denominator standard deviation, rounded.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MetricSummary {
            mean: sig6(mean),
            std: sig6(std),
        }
    }
}

pub type MetricMap = BTreeMap<String, MetricSummary>;

/// Raw per-seed metric values, kept in the report for transparency.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    /// Per-graph validation metrics.
    pub validation: Vec<BTreeMap<String, f64>>,
    /// Per-graph test metrics.
    pub test: Vec<BTreeMap<String, f64>>,
    pub overall_validation: BTreeMap<String, f64>,
    pub overall_test: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub task: String,
    pub model: String,
    pub seeds: Vec<u64>,
    /// Evaluation set sizes per graph (pairs scored or rankings formed).
    pub n_eval: Vec<usize>,
    pub validation: Vec<MetricMap>,
    pub test: Vec<MetricMap>,
    pub overall_validation: MetricMap,
    pub overall_test: MetricMap,
    pub per_seed: Vec<SeedOutcome>,
}

impl MetricsReport {
    pub fn aggregate(
        task: &str,
        model: &str,
        n_eval: Vec<usize>,
        per_seed: Vec<SeedOutcome>,
    ) -> Self {
        let seeds = per_seed.iter().map(|s| s.seed).collect();
        let graphs = per_seed.first().map(|s| s.test.len()).unwrap_or(0);
        let summarize = |pick: &dyn Fn(&SeedOutcome) -> &BTreeMap<String, f64>| -> MetricMap {
            let mut out = MetricMap::new();
            if per_seed.is_empty() {
                return out;
            }
            for key in pick(&per_seed[0]).keys() {
                let values: Vec<f64> = per_seed.iter().map(|s| pick(s)[key]).collect();
                out.insert(key.clone(), MetricSummary::from_values(&values));
            }
            out
        };
        let validation = (0..graphs)
            .map(|g| summarize(&move |s: &SeedOutcome| &s.validation[g]))
            .collect();
        let test = (0..graphs)
            .map(|g| summarize(&move |s: &SeedOutcome| &s.test[g]))
            .collect();
        let overall_validation = summarize(&|s: &SeedOutcome| &s.overall_validation);
        let overall_test = summarize(&|s: &SeedOutcome| &s.overall_test);
        let per_seed = per_seed
            .into_iter()
            .map(|mut s| {
                for m in s.validation.iter_mut().chain(s.test.iter_mut()) {
                    for v in m.values_mut() {
                        *v = sig6(*v);
                    }
                }
                for v in s
                    .overall_validation
                    .values_mut()
                    .chain(s.overall_test.values_mut())
                {
                    *v = sig6(*v);
                }
                s
            })
            .collect();
        MetricsReport {
            task: task.to_string(),
            model: model.to_string(),
            seeds,
            n_eval,
            validation,
            test,
            overall_validation,
            overall_test,
            per_seed,
        }
    }
}

/// Writes bytes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = dir.to_path_buf();
    tmp.push(format!(
        ".{}.tmp",
        path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_rounding() {
        assert_eq!(sig6(0.123456789), 0.123457);
        assert_eq!(sig6(123456.789), 123457.0);
        assert_eq!(sig6(0.0), 0.0);
        assert_eq!(sig6(-0.000123456789), -0.000123457);
    }

    #[test]
    fn summary_mean_std() {
        let s = MetricSummary::from_values(&[0.5, 0.7]);
        assert!((s.mean - 0.6).abs() < 1e-12);
        assert!((s.std - (0.02f64).sqrt()).abs() < 1e-6);
        let one = MetricSummary::from_values(&[0.4]);
        assert_eq!(one.std, 0.0);
    }

    #[test]
    fn atomic_write_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out/report.json");
        write_atomic(&path, b"{}\n").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"{}\n");
        // no stray temp files
        let entries: Vec<_> = fs::read_dir(dir.path().join("out")).unwrap().collect();
        assert_eq!(entries.len(), 1);
    }
}

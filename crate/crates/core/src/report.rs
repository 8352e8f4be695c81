//! Machine-readable study reports and the batch run configuration.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyEntry {
    pub m: i64,
    pub h: f64,
    pub error_h2h: f64,
    pub cg_iters: usize,
}

/// Per-ladder errors and fitted rates for one (case, scheme) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub case: String,
    pub scheme: String,
    pub entries: Vec<StudyEntry>,
    /// Rates between consecutive ladder entries (empty when degenerate).
    pub pairwise_rates: Vec<f64>,
    /// Log-log least-squares slope (zero when degenerate).
    pub fitted_rate: f64,
    /// Set when the ladder stopped early; the entries hold the completed
    /// prefix.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidArgument(format!(
                "unknown report format `{other}` (expected csv or json)"
            ))),
        }
    }
}

impl ConvergenceReport {
    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::ReportValidation(
                "report has no ladder entries".into(),
            ));
        }
        let mut prev_h = f64::INFINITY;
        for e in &self.entries {
            if !(e.h > 0.0 && e.h < prev_h) {
                return Err(Error::ReportValidation(
                    "ladder spacings must be positive and strictly decreasing".into(),
                ));
            }
            prev_h = e.h;
            if !e.error_h2h.is_finite() || e.error_h2h < 0.0 {
                return Err(Error::ReportValidation(format!(
                    "non-finite or negative error {} at m = {}",
                    e.error_h2h, e.m
                )));
            }
        }
        if !self.fitted_rate.is_finite() || self.pairwise_rates.iter().any(|r| !r.is_finite()) {
            return Err(Error::ReportValidation("non-finite rate".into()));
        }
        Ok(())
    }

    /// CSV with columns `m,h,error_h2h,pairwise_rate,cg_iters` and a trailing
    /// fitted-rate comment. Floats carry 17 significant digits.
    pub fn to_csv(&self) -> Result<String> {
        self.validate()?;
        let mut out = String::from("m,h,error_h2h,pairwise_rate,cg_iters\n");
        for (k, e) in self.entries.iter().enumerate() {
            let rate = if k == 0 {
                String::new()
            } else {
                self.pairwise_rates
                    .get(k - 1)
                    .map(|r| format!("{r:.16e}"))
                    .unwrap_or_default()
            };
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{},{}\n",
                e.m, e.h, e.error_h2h, rate, e.cg_iters
            ));
        }
        out.push_str(&format!("# fitted_rate={:.16e}\n", self.fitted_rate));
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn emit(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
        }
    }
}

fn default_tol() -> f64 {
    1e-10
}

fn default_format() -> ReportFormat {
    ReportFormat::Csv
}

fn default_seed() -> u64 {
    7
}

/// Batch configuration; the JSON schema accepted by `--config`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub dim: usize,
    pub m_list: Vec<i64>,
    pub scheme: String,
    pub case: String,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub maxit: Option<usize>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default = "default_format")]
    pub format: ReportFormat,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub jobs: Option<usize>,
}

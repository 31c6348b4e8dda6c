//! Survey CSV ingestion, run configuration and model strings.
//!
//! The CSV dialect is fixed: comma separated, UTF-8, a mandatory header
//! row and `.` as decimal separator. Required columns are `household_id`
//! and `income`; `adult_equiv` is optional and divides the income at
//! ingest; a group column is read when named in the configuration.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use takayama_core::{AnalyticDistribution, IncomeSample, MixtureModel, PovertyConfig, QuadratureSettings};

use crate::error::{Error, Result};

/// Parameters of a run, from flags or a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Poverty line `Z`.
    pub poverty_line: Option<f64>,
    /// Confidence level of reported intervals.
    pub confidence_level: f64,
    /// Poor means `income < Z` instead of `income <= Z`.
    pub strict_comparison: bool,
    /// Name of the CSV column holding group labels.
    pub group_column: Option<String>,
    /// Absolute tolerance of population integrals.
    pub quadrature_tolerance: f64,
    /// Base seed of simulations and bootstrap.
    pub seed: u64,
    /// Replicates of a simulation study.
    pub replicates: usize,
    /// Bootstrap resamples.
    pub bootstrap_resamples: usize,
    /// Worker threads; all cores when unset.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            poverty_line: None,
            confidence_level: 0.95,
            strict_comparison: false,
            group_column: None,
            quadrature_tolerance: 1e-8,
            seed: 0,
            replicates: 1000,
            bootstrap_resamples: 500,
            threads: None,
        }
    }
}

impl RunConfig {
    /// Parses a JSON configuration.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Usage(format!("config: {e}")))?;
        config.validated()
    }

    /// Reads a JSON configuration file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Checks every field that has a constraint.
    pub fn validated(self) -> Result<Self> {
        if let Some(z) = self.poverty_line {
            if !(z > 0.0 && z.is_finite()) {
                return Err(Error::Usage(format!("poverty line must be positive, got {z}")));
            }
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::Usage(format!(
                "confidence level must lie in (0, 1), got {}",
                self.confidence_level
            )));
        }
        if !(self.quadrature_tolerance > 0.0 && self.quadrature_tolerance.is_finite()) {
            return Err(Error::Usage(format!(
                "quadrature tolerance must be positive, got {}",
                self.quadrature_tolerance
            )));
        }
        if self.replicates == 0 {
            return Err(Error::Usage("replicates must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Usage("threads must be at least 1".into()));
        }
        Ok(self)
    }

    /// Poverty configuration; fails when no poverty line was given.
    pub fn poverty_config(&self) -> Result<PovertyConfig> {
        let z = self
            .poverty_line
            .ok_or_else(|| Error::Usage("a poverty line is required (--poverty-line)".into()))?;
        Ok(PovertyConfig::new(z)?
            .with_confidence_level(self.confidence_level)?
            .with_strict_comparison(self.strict_comparison))
    }

    /// Quadrature settings with the configured tolerance.
    pub fn quadrature(&self) -> QuadratureSettings {
        QuadratureSettings::with_tolerance(self.quadrature_tolerance)
    }
}

/// One household.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRow {
    /// Household identifier.
    pub household_id: String,
    /// Household income, non-negative.
    pub income: f64,
    /// Group label, when a group column was read.
    pub group: Option<String>,
    /// Adult equivalents, positive when present.
    pub adult_equiv: Option<f64>,
}

/// Raw survey rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SurveyTable {
    /// Rows in file order.
    pub rows: Vec<SurveyRow>,
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn required(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    column(headers, name).ok_or_else(|| Error::Data(format!("missing column `{name}`")))
}

impl SurveyTable {
    /// Reads a table; `group_column` names the column of group labels.
    pub fn read_csv<R: Read>(reader: R, group_column: Option<&str>) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = csv
            .headers()
            .map_err(|e| Error::Data(format!("cannot read header: {e}")))?
            .clone();
        if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
            return Err(Error::Data("empty file".into()));
        }
        let id_col = required(&headers, "household_id")?;
        let income_col = required(&headers, "income")?;
        let equiv_col = column(&headers, "adult_equiv");
        let group_col = group_column.map(|g| required(&headers, g)).transpose()?;

        let mut rows = Vec::new();
        for record in csv.records() {
            let record = record.map_err(|e| match e.position() {
                Some(p) => Error::Data(format!("row {}: {e}", p.line())),
                None => Error::Data(e.to_string()),
            })?;
            let line = record.position().map_or(rows.len() as u64 + 2, |p| p.line());
            let field = |i: usize| record.get(i).unwrap_or("").trim();
            let income: f64 = field(income_col)
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Data(format!("row {line}: income not numeric")))?;
            if income < 0.0 {
                return Err(Error::Data(format!("row {line}: income must be non-negative")));
            }
            let adult_equiv = match equiv_col.map(field) {
                None | Some("") => None,
                Some(text) => {
                    let v: f64 = text
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| Error::Data(format!("row {line}: adult_equiv not numeric")))?;
                    if v <= 0.0 {
                        return Err(Error::Data(format!("row {line}: adult_equiv must be positive")));
                    }
                    Some(v)
                }
            };
            let group = match group_col.map(field) {
                None => None,
                Some("") => return Err(Error::Data(format!("row {line}: group label is empty"))),
                Some(label) => Some(label.to_string()),
            };
            rows.push(SurveyRow {
                household_id: field(id_col).to_string(),
                income,
                group,
                adult_equiv,
            });
        }
        if rows.is_empty() {
            return Err(Error::Data("empty file: no data rows".into()));
        }
        Ok(Self { rows })
    }

    /// Reads a table from a file.
    pub fn from_path(path: &Path, group_column: Option<&str>) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, group_column)
    }

    /// Writes the table in the ingest dialect, the group column named `group`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        let to_data = |e: csv::Error| Error::Data(e.to_string());
        csv.write_record(["household_id", "income", "adult_equiv", "group"])
            .map_err(to_data)?;
        for row in &self.rows {
            csv.write_record([
                row.household_id.clone(),
                row.income.to_string(),
                row.adult_equiv.map(|v| v.to_string()).unwrap_or_default(),
                row.group.clone().unwrap_or_default(),
            ])
            .map_err(to_data)?;
        }
        csv.flush().map_err(|e| Error::Data(e.to_string()))
    }

    /// Sample of incomes with divisors and labels attached.
    pub fn to_sample(&self) -> Result<IncomeSample> {
        let values = self.rows.iter().map(|r| r.income).collect();
        let mut sample = IncomeSample::new(values)?;
        if self.rows.iter().any(|r| r.adult_equiv.is_some()) {
            let divisors = self.rows.iter().map(|r| r.adult_equiv.unwrap_or(1.0)).collect();
            sample = sample.with_divisors(divisors)?;
        }
        if self.rows.iter().all(|r| r.group.is_some()) {
            let labels = self.rows.iter().map(|r| r.group.clone().unwrap_or_default()).collect();
            sample = sample.with_groups(labels)?;
        }
        Ok(sample)
    }
}

/// Reads a survey file into a sample, dividing incomes by adult equivalents
/// and attaching the configured group labels.
pub fn ingest_csv(path: &Path, config: &RunConfig) -> Result<IncomeSample> {
    SurveyTable::from_path(path, config.group_column.as_deref())?.to_sample()
}

/// Parses a population model: a single law such as `uniform:0,1`, or a
/// mixture `0.5*exponential:1+0.5*exponential:0.5`. Components are
/// labelled `g1`, `g2`, ... in order.
pub fn parse_model(text: &str) -> Result<MixtureModel> {
    let mut parts = Vec::new();
    for term in text.split('+') {
        let term = term.trim();
        let (weight, law) = match term.split_once('*') {
            Some((w, law)) => {
                let w: f64 = w
                    .trim()
                    .parse()
                    .map_err(|_| Error::Usage(format!("model weight `{}` is not a number", w.trim())))?;
                (w, law.trim())
            }
            None => (1.0, term),
        };
        let dist: AnalyticDistribution = law.parse()?;
        parts.push((dist, weight));
    }
    Ok(MixtureModel::from_weighted(parts)?)
}

/// Canonical text of a model, accepted back by [`parse_model`].
pub fn model_to_string(model: &MixtureModel) -> String {
    match model.components() {
        [only] => only.distribution.to_string(),
        parts => parts
            .iter()
            .map(|c| format!("{}*{}", c.weight, c.distribution))
            .collect::<Vec<_>>()
            .join("+"),
    }
}

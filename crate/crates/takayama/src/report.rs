//! Report serialization: text tables, JSON and tidy CSV.
//!
//! Text mode prints indices as percentages with two decimals and intervals
//! as proportions with four, in the layout of an Area / Index(%) / Size
//! table followed by gap and recomposition lines. JSON carries every value
//! at full precision and is accepted back by the `report` command.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use takayama_core::{ConfidenceInterval, GapVariance, VarianceDecomposition};

use crate::montecarlo::{ReplicateRecord, ReplicateStudy, StudySummary, Target};

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    /// Aligned human-readable tables.
    #[default]
    Text,
    /// JSON document.
    Json,
    /// Long-format CSV, one value per row.
    Csv,
}

/// A confidence interval in serialized form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub center: f64,
    pub half_width: f64,
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
}

impl From<&ConfidenceInterval> for Interval {
    fn from(ci: &ConfidenceInterval) -> Self {
        Self {
            center: ci.center,
            half_width: ci.half_width,
            level: ci.level,
            lower: ci.lower(),
            upper: ci.upper(),
        }
    }
}

/// Variance components of the index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub sigma12: f64,
    pub total: f64,
}

impl From<&VarianceDecomposition> for VarianceRow {
    fn from(v: &VarianceDecomposition) -> Self {
        Self {
            sigma1_sq: v.sigma1_sq,
            sigma2_sq: v.sigma2_sq,
            sigma12: v.sigma12,
            total: v.total,
        }
    }
}

/// One line of the Area / Index / Size table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRow {
    /// Area or group name.
    pub label: String,
    /// Number of observations.
    pub size: usize,
    /// Index value (a proportion).
    pub index: f64,
}

/// Index of one population with its variance and interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexResults {
    pub poverty_line: f64,
    pub row: IndexRow,
    /// Plug-in asymptotic variance.
    pub variance: VarianceRow,
    pub interval: Interval,
    /// `n` times the bootstrap variance, when requested.
    pub bootstrap_variance: Option<f64>,
}

/// Gap variance components in serialized form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapComponents {
    pub a1: f64,
    pub a2: f64,
    pub a31: f64,
    pub a32: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub theta1_sq: f64,
    pub theta2_sq: f64,
    pub theta3_sq: f64,
}

impl From<&GapVariance> for GapComponents {
    fn from(v: &GapVariance) -> Self {
        Self {
            a1: v.a1,
            a2: v.a2,
            a31: v.a31,
            a32: v.a32,
            b1: v.b1,
            b2: v.b2,
            b3: v.b3,
            theta1_sq: v.theta1_sq,
            theta2_sq: v.theta2_sq,
            theta3_sq: v.theta3_sq,
        }
    }
}

/// Subgroup indices, the gap and the recomposed global interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResults {
    pub poverty_line: f64,
    /// One row per group, in partition order.
    pub groups: Vec<IndexRow>,
    /// Group shares `n_i / n`.
    pub weights: Vec<f64>,
    /// The pooled population.
    pub global: IndexRow,
    /// `sum (n_i / n) T_{n_i}`.
    pub weighted_local_sum: f64,
    /// `gd_n`.
    pub gap: f64,
    /// Plug-in limiting variance of `sqrt(n) (gd_n - gd)`.
    pub gap_variance: f64,
    pub components: GapComponents,
    /// Interval for `gd`.
    pub gap_interval: Interval,
    /// Interval for the global index from the weighted sum and the gap interval.
    pub recomposed_interval: Interval,
}

/// One replicate in serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub index: usize,
    /// `None` for flagged replicates.
    pub statistic: Option<f64>,
    pub scaled_error: Option<f64>,
    pub plugin_variance: Option<f64>,
    pub covered: bool,
    pub flag: Option<String>,
}

/// Monte Carlo study summary with its replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResults {
    /// Model string.
    pub model: String,
    pub target: Target,
    pub poverty_line: f64,
    pub sample_size: usize,
    pub replicates: usize,
    pub seed: u64,
    pub summary: StudySummary,
    pub records: Vec<RecordRow>,
}

impl SimulationResults {
    /// Collects a finished study.
    pub fn from_study(study: &ReplicateStudy, model: String, target: Target, summary: StudySummary) -> Self {
        let root = match target {
            Target::Representation => 1.0,
            _ => (study.sample_size as f64).sqrt(),
        };
        let finite = |v: f64| v.is_finite().then_some(v);
        let records = study
            .records
            .iter()
            .map(|r: &ReplicateRecord| RecordRow {
                index: r.index,
                statistic: finite(r.statistic),
                scaled_error: finite(root * (r.statistic - summary.truth)),
                plugin_variance: finite(r.plugin_variance),
                covered: r.covered,
                flag: r.flag.clone(),
            })
            .collect();
        Self {
            model,
            target,
            poverty_line: study.config.poverty_line,
            sample_size: study.sample_size,
            replicates: study.replicate_count,
            seed: study.seed,
            summary,
            records,
        }
    }
}

/// Anything a command can report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Index(IndexResults),
    Decomposition(DecompositionResults),
    Simulation(SimulationResults),
}

/// Serializes `results` in `format`.
pub fn emit_report(results: &Results, format: Format) -> Vec<u8> {
    match format {
        Format::Text => text(results).into_bytes(),
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(results).expect("report types serialize");
            out.push(b'\n');
            out
        }
        Format::Csv => long_csv(results),
    }
}

fn percent(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

fn bracket(i: &Interval) -> String {
    format!("[{:.4}; {:.4}]", i.lower, i.upper)
}

fn level(i: &Interval) -> String {
    format!("{}%", 100.0 * i.level)
}

fn table(out: &mut String, rows: &[&IndexRow]) {
    let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(4);
    let _ = writeln!(out, "{:<width$}  {:>9}  {:>8}", "Area", "Index(%)", "Size");
    for r in rows {
        let _ = writeln!(out, "{:<width$}  {:>9}  {:>8}", r.label, percent(r.index), r.size);
    }
}

fn optional(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.digits$}"))
}

fn text(results: &Results) -> String {
    let mut out = String::new();
    match results {
        Results::Index(r) => {
            let _ = writeln!(out, "Poverty line: {}", r.poverty_line);
            table(&mut out, &[&r.row]);
            let v = &r.variance;
            let _ = writeln!(
                out,
                "Asymptotic variance: {:.6} (sigma1^2 {:.6}, sigma2^2 {:.6}, sigma12 {:.6})",
                v.total, v.sigma1_sq, v.sigma2_sq, v.sigma12
            );
            if let Some(b) = r.bootstrap_variance {
                let _ = writeln!(out, "Bootstrap variance: {b:.6}");
            }
            let _ = writeln!(
                out,
                "{} CI: T = {:.4} in {}",
                level(&r.interval),
                r.row.index,
                bracket(&r.interval)
            );
        }
        Results::Decomposition(r) => {
            let _ = writeln!(out, "Poverty line: {}", r.poverty_line);
            let mut rows: Vec<&IndexRow> = r.groups.iter().collect();
            rows.push(&r.global);
            table(&mut out, &rows);
            let _ = writeln!(out, "Weighted local sum: {:.4}", r.weighted_local_sum);
            let _ = writeln!(
                out,
                "Gap: gd_n = {:.4}, variance {:.6}, {} CI {}",
                r.gap,
                r.gap_variance,
                level(&r.gap_interval),
                bracket(&r.gap_interval)
            );
            let _ = writeln!(
                out,
                "Recomposed: T = {:.4} in {}",
                r.recomposed_interval.center,
                bracket(&r.recomposed_interval)
            );
        }
        Results::Simulation(r) => {
            let s = &r.summary;
            let _ = writeln!(out, "Model: {}", r.model);
            let _ = writeln!(
                out,
                "Target: {}, poverty line {}, n = {}, replicates = {}, seed = {}",
                r.target, r.poverty_line, r.sample_size, r.replicates, r.seed
            );
            let _ = writeln!(out, "Population value: {:.6}", s.truth);
            let _ = writeln!(out, "Limiting variance: {}", optional(s.limiting_variance, 6));
            let _ = writeln!(out, "Monte Carlo variance: {}", optional(s.empirical_variance, 6));
            let _ = writeln!(out, "Mean plug-in variance: {}", optional(s.mean_plugin_variance, 6));
            let _ = writeln!(out, "Coverage: {}", optional(s.coverage.map(|c| 100.0 * c), 2));
            if r.target == Target::Representation {
                let _ = writeln!(out, "Median |residual|: {}", optional(s.median_abs_statistic, 6));
            }
            match &s.normality {
                Some(ks) => {
                    let _ = writeln!(
                        out,
                        "KS normality: D = {:.4}, critical {:.4} at 1%, {}",
                        ks.statistic,
                        ks.critical,
                        if ks.passes { "pass" } else { "fail" }
                    );
                }
                None => {
                    let _ = writeln!(out, "KS normality: n/a");
                }
            }
            let _ = writeln!(out, "Flagged replicates: {}", s.flagged);
        }
    }
    out
}

fn long_csv(results: &Results) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "label", "value"])
        .expect("writing to memory");
    let mut row = |quantity: &str, label: &str, value: f64| {
        w.write_record([quantity, label, &value.to_string()])
            .expect("writing to memory");
    };
    match results {
        Results::Index(r) => {
            row("poverty_line", "", r.poverty_line);
            row("size", &r.row.label, r.row.size as f64);
            row("index", &r.row.label, r.row.index);
            row("sigma1_sq", &r.row.label, r.variance.sigma1_sq);
            row("sigma2_sq", &r.row.label, r.variance.sigma2_sq);
            row("sigma12", &r.row.label, r.variance.sigma12);
            row("variance", &r.row.label, r.variance.total);
            if let Some(b) = r.bootstrap_variance {
                row("bootstrap_variance", &r.row.label, b);
            }
            row("ci_lower", &r.row.label, r.interval.lower);
            row("ci_upper", &r.row.label, r.interval.upper);
        }
        Results::Decomposition(r) => {
            row("poverty_line", "", r.poverty_line);
            for (g, w) in r.groups.iter().zip(&r.weights) {
                row("size", &g.label, g.size as f64);
                row("weight", &g.label, *w);
                row("index", &g.label, g.index);
            }
            row("size", &r.global.label, r.global.size as f64);
            row("index", &r.global.label, r.global.index);
            row("weighted_local_sum", "", r.weighted_local_sum);
            row("gap", "", r.gap);
            row("gap_variance", "", r.gap_variance);
            let c = &r.components;
            for (name, v) in [
                ("a1", c.a1),
                ("a2", c.a2),
                ("a31", c.a31),
                ("a32", c.a32),
                ("b1", c.b1),
                ("b2", c.b2),
                ("b3", c.b3),
                ("theta1_sq", c.theta1_sq),
                ("theta2_sq", c.theta2_sq),
                ("theta3_sq", c.theta3_sq),
            ] {
                row(name, "", v);
            }
            row("gap_ci_lower", "", r.gap_interval.lower);
            row("gap_ci_upper", "", r.gap_interval.upper);
            row("global_ci_lower", "", r.recomposed_interval.lower);
            row("global_ci_upper", "", r.recomposed_interval.upper);
        }
        Results::Simulation(r) => {
            let s = &r.summary;
            row("poverty_line", "", r.poverty_line);
            row("sample_size", "", r.sample_size as f64);
            row("replicates", "", r.replicates as f64);
            row("truth", "", s.truth);
            if let Some(v) = s.limiting_variance {
                row("limiting_variance", "", v);
            }
            if let Some(v) = s.empirical_variance {
                row("empirical_variance", "", v);
            }
            if let Some(v) = s.mean_plugin_variance {
                row("mean_plugin_variance", "", v);
            }
            if let Some(c) = s.coverage {
                row("coverage", "", c);
            }
            if let Some(v) = s.median_abs_statistic {
                row("median_abs_statistic", "", v);
            }
            if let Some(ks) = &s.normality {
                row("ks_statistic", "", ks.statistic);
                row("ks_critical", "", ks.critical);
            }
            row("flagged", "", s.flagged as f64);
        }
    }
    w.into_inner().expect("writing to memory")
}

/// Tidy CSV for external plotting: one row per group for index and
/// decomposition results, one row per replicate for simulations.
pub fn plot_data(results: &Results) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    match results {
        Results::Index(r) => {
            w.write_record(["label", "size", "index", "variance", "ci_lower", "ci_upper"])
                .expect("writing to memory");
            w.write_record([
                r.row.label.clone(),
                r.row.size.to_string(),
                r.row.index.to_string(),
                r.variance.total.to_string(),
                r.interval.lower.to_string(),
                r.interval.upper.to_string(),
            ])
            .expect("writing to memory");
        }
        Results::Decomposition(r) => {
            w.write_record(["label", "size", "weight", "index"])
                .expect("writing to memory");
            for (g, weight) in r.groups.iter().zip(&r.weights) {
                w.write_record([
                    g.label.clone(),
                    g.size.to_string(),
                    weight.to_string(),
                    g.index.to_string(),
                ])
                .expect("writing to memory");
            }
        }
        Results::Simulation(r) => {
            w.write_record(["replicate", "statistic", "scaled_error", "plugin_variance", "covered", "flag"])
                .expect("writing to memory");
            for rec in &r.records {
                w.write_record([
                    rec.index.to_string(),
                    cell(rec.statistic),
                    cell(rec.scaled_error),
                    cell(rec.plugin_variance),
                    rec.covered.to_string(),
                    rec.flag.clone().unwrap_or_default(),
                ])
                .expect("writing to memory");
            }
        }
    }
    w.into_inner().expect("writing to memory")
}

//! Two-stage sampling from mixture models, replicate studies and the
//! bootstrap and normality oracles.
//!
//! Every random draw comes from a ChaCha8 stream seeded with
//! `seed ^ index`, where `index` is the replicate (or resample) number.
//! Replicates run on the rayon pool and are collected in index order, so a
//! study is bit-identical for any number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use takayama_core::special::normal_cdf;
use takayama_core::{
    confidence_interval, decomposability_gap, gap_variance_analytic, gap_variance_plugin,
    sigma_analytic, sigma_plugin, takayama_empirical, takayama_population, AnalyticDistribution,
    EmpiricalDistribution, GapHooks, IncomeSample, MixtureModel, PopulationGap, PovertyConfig,
    QuadratureSettings, RepresentationDiagnostic, SubgroupPartition,
};

use crate::error::{Error, Result};

/// Generator of substream `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index)
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(format!("cannot build a pool of {threads} threads: {e}")))?;
    Ok(pool.install(f))
}

fn maybe_with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(k) => with_threads(k, f),
        None => Ok(f()),
    }
}

/// Draws `n` incomes: a component with probability equal to its weight,
/// then an income from that component. Returns incomes and component
/// positions.
pub fn draw_mixture<R: Rng + ?Sized>(model: &MixtureModel, n: usize, rng: &mut R) -> (Vec<f64>, Vec<usize>) {
    let mut cumulative = Vec::with_capacity(model.len());
    let mut acc = 0.0;
    for c in model.iter() {
        acc += c.weight;
        cumulative.push(acc);
    }
    let last = model.len() - 1;
    let mut values = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.gen();
        let k = cumulative.iter().position(|&c| u < c).unwrap_or(last);
        let v: f64 = rng.gen();
        let x = model.components()[k]
            .distribution
            .quantile(v)
            .expect("levels in [0, 1) are valid quantile arguments");
        values.push(x);
        groups.push(k);
    }
    (values, groups)
}

/// Labelled sample of size `n` drawn with the stream `substream(seed, 0)`.
pub fn draw_mixture_sample(model: &MixtureModel, n: usize, seed: u64) -> Result<IncomeSample> {
    if n == 0 {
        return Err(Error::Usage("sample size must be at least 1".into()));
    }
    let (values, groups) = draw_mixture(model, n, &mut substream(seed, 0));
    labelled_sample(model, values, &groups)
}

fn labelled_sample(model: &MixtureModel, values: Vec<f64>, groups: &[usize]) -> Result<IncomeSample> {
    let labels = groups
        .iter()
        .map(|&k| model.components()[k].label.clone())
        .collect();
    Ok(IncomeSample::new(values)?.with_groups(labels)?)
}

/// Statistic tracked by a replicate study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Empirical index `T_n`, centred at `T`.
    Takayama,
    /// Decomposability gap `gd_n`, centred at `gd`.
    Gap,
    /// Residual of the first-order expansion of `T_n`.
    Representation,
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Target::Takayama => "takayama",
            Target::Gap => "gap",
            Target::Representation => "representation",
        })
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "takayama" => Ok(Target::Takayama),
            "gap" => Ok(Target::Gap),
            "representation" => Ok(Target::Representation),
            other => Err(Error::Usage(format!(
                "unknown target `{other}`; expected takayama, gap or representation"
            ))),
        }
    }
}

/// Population value of the target and its limiting variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    /// `T` or `gd`.
    pub value: f64,
    /// Limiting variance of `sqrt(n) (statistic - value)`, when defined.
    pub variance: Option<f64>,
    /// For the gap, the limiting variance centred at `gd_0`.
    pub mixed_variance: Option<f64>,
}

/// Outcome of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    /// Replicate number, also the substream index.
    pub index: usize,
    /// Value of the statistic; NaN when flagged.
    pub statistic: f64,
    /// Plug-in variance estimate; NaN when not applicable or flagged.
    pub plugin_variance: f64,
    /// Whether the confidence interval contains the population value.
    pub covered: bool,
    /// For the gap, `gd_0` at the replicate's observed group shares.
    pub mixed_reference: Option<f64>,
    /// Reason the replicate is degenerate.
    pub flag: Option<String>,
}

impl ReplicateRecord {
    fn flagged(index: usize, reason: String) -> Self {
        Self {
            index,
            statistic: f64::NAN,
            plugin_variance: f64::NAN,
            covered: false,
            mixed_reference: None,
            flag: Some(reason),
        }
    }
}

/// A Monte Carlo study of `replicate_count` samples of size `sample_size`.
#[derive(Debug, Clone)]
pub struct ReplicateStudy {
    /// Population model; a single law is a one-component mixture.
    pub model: MixtureModel,
    /// Poverty line and interval level.
    pub config: PovertyConfig,
    /// Settings for population quantities.
    pub quadrature: QuadratureSettings,
    /// Observations per replicate.
    pub sample_size: usize,
    /// Number of replicates.
    pub replicate_count: usize,
    /// Base seed of the substreams.
    pub seed: u64,
    /// Worker threads; the global pool when unset.
    pub threads: Option<usize>,
    /// Statistic of the records, filled by [`run_replicates`].
    pub target: Option<Target>,
    /// Population truth, filled by [`run_replicates`].
    pub truth: Option<Truth>,
    /// One record per replicate, in index order.
    pub records: Vec<ReplicateRecord>,
}

impl ReplicateStudy {
    /// Study without records.
    pub fn new(model: MixtureModel, config: PovertyConfig, sample_size: usize, replicate_count: usize, seed: u64) -> Self {
        Self {
            model,
            config,
            quadrature: QuadratureSettings::default(),
            sample_size,
            replicate_count,
            seed,
            threads: None,
            target: None,
            truth: None,
            records: Vec::new(),
        }
    }

    /// Replaces the quadrature settings.
    pub fn with_quadrature(mut self, quadrature: QuadratureSettings) -> Self {
        self.quadrature = quadrature;
        self
    }

    /// Fixes the number of worker threads.
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    /// Law of a single income.
    pub fn population(&self) -> AnalyticDistribution {
        match self.model.components() {
            [only] => only.distribution.clone(),
            _ => AnalyticDistribution::mixture(self.model.clone()),
        }
    }

    /// Records that were not flagged.
    pub fn valid_records(&self) -> impl Iterator<Item = &ReplicateRecord> {
        self.records.iter().filter(|r| r.flag.is_none())
    }

    /// `sqrt(n) (statistic - truth)` over the valid records; the residuals
    /// themselves for a representation study.
    pub fn scaled_errors(&self) -> Vec<f64> {
        let Some(truth) = self.truth else {
            return Vec::new();
        };
        let root = match self.target {
            Some(Target::Representation) => 1.0,
            _ => (self.sample_size as f64).sqrt(),
        };
        self.valid_records()
            .map(|r| root * (r.statistic - truth.value))
            .collect()
    }

    /// `sqrt(n) (gd_n - gd_0)` over the valid records of a gap study.
    pub fn mixed_scaled_errors(&self) -> Vec<f64> {
        let root = (self.sample_size as f64).sqrt();
        self.valid_records()
            .filter_map(|r| r.mixed_reference.map(|m| root * (r.statistic - m)))
            .collect()
    }
}

/// Runs every replicate of `study` for `target` and fills the truth and
/// the records. Degenerate replicates are kept and flagged.
pub fn run_replicates(mut study: ReplicateStudy, target: Target) -> Result<ReplicateStudy> {
    if study.sample_size == 0 || study.replicate_count == 0 {
        return Err(Error::Usage("sample size and replicate count must be at least 1".into()));
    }
    let population = study.population();
    let config = study.config;
    let quad = study.quadrature;
    let n = study.sample_size;
    let seed = study.seed;
    let model = &study.model;
    let count = study.replicate_count;

    let (truth, records) = match target {
        Target::Takayama => {
            let value = takayama_population(&population, &config, &quad)?.value;
            let variance = sigma_analytic(&population, &config, &quad)?.total;
            let truth = Truth {
                value,
                variance: Some(variance),
                mixed_variance: None,
            };
            let records = maybe_with_threads(study.threads, || {
                (0..count)
                    .into_par_iter()
                    .map(|i| {
                        let (values, _) = draw_mixture(model, n, &mut substream(seed, i as u64));
                        takayama_replicate(i, values, &config, value)
                            .unwrap_or_else(|e| ReplicateRecord::flagged(i, e.to_string()))
                    })
                    .collect()
            })?;
            (truth, records)
        }
        Target::Gap => {
            let population_gap = PopulationGap::new(model, &config, &quad)?;
            let limit = gap_variance_analytic(
                &SubgroupPartition::from_model(model),
                &config,
                &quad,
                &GapHooks::default(),
            )?;
            let truth = Truth {
                value: population_gap.gap,
                variance: Some(limit.population_centred()),
                mixed_variance: Some(limit.mixed_centred()),
            };
            let labels = model.labels();
            let records = maybe_with_threads(study.threads, || {
                (0..count)
                    .into_par_iter()
                    .map(|i| {
                        let (values, groups) = draw_mixture(model, n, &mut substream(seed, i as u64));
                        gap_replicate(i, model, values, &groups, &labels, &config, &population_gap)
                            .unwrap_or_else(|e| ReplicateRecord::flagged(i, e.to_string()))
                    })
                    .collect()
            })?;
            (truth, records)
        }
        Target::Representation => {
            let diagnostic = RepresentationDiagnostic::new(&population, &config, &quad)?;
            let truth = Truth {
                value: 0.0,
                variance: None,
                mixed_variance: None,
            };
            let records = maybe_with_threads(study.threads, || {
                (0..count)
                    .into_par_iter()
                    .map(|i| {
                        let (values, _) = draw_mixture(model, n, &mut substream(seed, i as u64));
                        match EmpiricalDistribution::from_values(values) {
                            Ok(dist) => ReplicateRecord {
                                index: i,
                                statistic: diagnostic.residual(&dist).residual,
                                plugin_variance: f64::NAN,
                                covered: false,
                                mixed_reference: None,
                                flag: None,
                            },
                            Err(e) => ReplicateRecord::flagged(i, e.to_string()),
                        }
                    })
                    .collect()
            })?;
            (truth, records)
        }
    };
    study.target = Some(target);
    study.truth = Some(truth);
    study.records = records;
    Ok(study)
}

fn takayama_replicate(
    index: usize,
    values: Vec<f64>,
    config: &PovertyConfig,
    truth: f64,
) -> takayama_core::Result<ReplicateRecord> {
    let dist = EmpiricalDistribution::from_values(values)?;
    let t = takayama_empirical(&dist, config).value;
    let variance = sigma_plugin(&dist, config).checked()?;
    let ci = confidence_interval(t, variance.total_clamped(), dist.size(), config.confidence_level)?;
    Ok(ReplicateRecord {
        index,
        statistic: t,
        plugin_variance: variance.total,
        covered: ci.contains(truth),
        mixed_reference: None,
        flag: None,
    })
}

fn gap_replicate(
    index: usize,
    model: &MixtureModel,
    values: Vec<f64>,
    groups: &[usize],
    labels: &[String],
    config: &PovertyConfig,
    truth: &PopulationGap,
) -> Result<ReplicateRecord> {
    let sample = labelled_sample(model, values, groups)?;
    let partition = SubgroupPartition::from_sample_with_groups(&sample, labels)?;
    let gap = decomposability_gap(&partition, config)?;
    let variance = gap_variance_plugin(&partition, config, &GapHooks::default())?.population_centred();
    let ci = confidence_interval(gap.gap, variance.max(0.0), sample.len(), config.confidence_level)?;
    Ok(ReplicateRecord {
        index,
        statistic: gap.gap,
        plugin_variance: variance,
        covered: ci.contains(truth.gap),
        mixed_reference: Some(truth.reweighted(&partition.weights())),
        flag: None,
    })
}

/// Mean and variance with denominator `len - 1` (Welford updates; exactly
/// zero for a constant sequence).
pub fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut ss = 0.0;
    for (k, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (k + 1) as f64;
        ss += delta * (v - mean);
    }
    (mean, ss / (values.len() as f64 - 1.0))
}

/// Aggregates of a finished study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    /// Population value of the target.
    pub truth: f64,
    /// Limiting variance from the analytic law.
    pub limiting_variance: Option<f64>,
    /// Sample variance of `sqrt(n) (statistic - truth)` over the replicates.
    pub empirical_variance: Option<f64>,
    /// Median of `|statistic|` (used for residual studies).
    pub median_abs_statistic: Option<f64>,
    /// Average plug-in variance.
    pub mean_plugin_variance: Option<f64>,
    /// Fraction of intervals containing the truth.
    pub coverage: Option<f64>,
    /// Number of flagged replicates.
    pub flagged: usize,
    /// Normality test of the scaled errors, when at least 100 are available.
    pub normality: Option<KsOutcome>,
}

impl ReplicateStudy {
    /// Summary statistics, computed in record order.
    pub fn summary(&self) -> Result<StudySummary> {
        let truth = self
            .truth
            .ok_or_else(|| Error::Usage("study has not been run".into()))?;
        let errors = self.scaled_errors();
        let valid: Vec<&ReplicateRecord> = self.valid_records().collect();
        let empirical_variance = (errors.len() > 1).then(|| mean_and_variance(&errors).1);
        let mut magnitudes: Vec<f64> = valid.iter().map(|r| r.statistic.abs()).collect();
        let median_abs_statistic = (!magnitudes.is_empty()).then(|| median(&mut magnitudes));
        let plugin: Vec<f64> = valid
            .iter()
            .map(|r| r.plugin_variance)
            .filter(|v| v.is_finite())
            .collect();
        let has_intervals = !plugin.is_empty();
        let mean_plugin_variance = has_intervals.then(|| plugin.iter().sum::<f64>() / plugin.len() as f64);
        let coverage = has_intervals
            .then(|| valid.iter().filter(|r| r.covered).count() as f64 / valid.len() as f64);
        let normality = if errors.len() >= 100 {
            ks_normality(&errors).ok()
        } else {
            None
        };
        Ok(StudySummary {
            truth: truth.value,
            limiting_variance: truth.variance,
            empirical_variance,
            median_abs_statistic,
            mean_plugin_variance,
            coverage,
            flagged: self.records.len() - valid.len(),
            normality,
        })
    }
}

/// Median of a slice; NaN when empty. Reorders the slice.
pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// `n` times the variance of `T_n` over `resamples` bootstrap resamples.
pub fn bootstrap_variance(
    dist: &EmpiricalDistribution,
    config: &PovertyConfig,
    resamples: usize,
    seed: u64,
) -> Result<f64> {
    if resamples < 100 {
        return Err(Error::Usage(format!("bootstrap needs at least 100 resamples, got {resamples}")));
    }
    let values = dist.sorted_values();
    let n = values.len();
    let stats: Vec<takayama_core::Result<f64>> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, b as u64);
            let draw: Vec<f64> = (0..n).map(|_| values[rng.gen_range(0..n)]).collect();
            Ok(takayama_empirical(&EmpiricalDistribution::from_values(draw)?, config).value)
        })
        .collect();
    let stats = stats.into_iter().collect::<takayama_core::Result<Vec<f64>>>()?;
    let (_, variance) = mean_and_variance(&stats);
    Ok(n as f64 * variance)
}

/// Kolmogorov-Smirnov comparison with the standard normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsOutcome {
    /// `sup |F_n - Phi|` of the standardized values.
    pub statistic: f64,
    /// Asymptotic critical value at level 0.01.
    pub critical: f64,
    /// `statistic <= critical`.
    pub passes: bool,
}

/// Significance level of [`ks_normality`].
pub const KS_LEVEL: f64 = 0.01;

/// One-sample KS test of normality after standardizing by the sample mean
/// and standard deviation. Critical value `sqrt(ln(2 / alpha) / 2) / sqrt(n)`.
pub fn ks_normality(values: &[f64]) -> Result<KsOutcome> {
    if values.len() < 100 {
        return Err(Error::Usage(format!(
            "normality test needs at least 100 values, got {}",
            values.len()
        )));
    }
    let (mean, variance) = mean_and_variance(values);
    let sd = variance.sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::Data("normality test needs values with positive spread".into()));
    }
    let mut z: Vec<f64> = values.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let statistic = z
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let phi = normal_cdf(x);
            (phi - i as f64 / n).max((i + 1) as f64 / n - phi)
        })
        .fold(0.0, f64::max);
    let critical = ((2.0 / KS_LEVEL).ln() / 2.0).sqrt() / n.sqrt();
    Ok(KsOutcome {
        statistic,
        critical,
        passes: statistic <= critical,
    })
}

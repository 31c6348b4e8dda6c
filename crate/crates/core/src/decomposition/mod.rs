//! Subgroup decomposition of the index and the decomposability gap.
//!
//! The population is split into `K` subgroups with weights `p_i` and laws
//! `F_i`, so that the pooled law is the mixture `F = sum p_i F_i`. The gap
//! `gd_n = T_n - sum (n_i / n) T_{n_i}(i)` measures how far the index is
//! from being decomposable; its limiting variance is assembled in
//! [`gap_variance_plugin`] (sample groups) and [`gap_variance_analytic`]
//! (model groups).

mod analytic;
mod plugin;

use alloc::string::String;
use alloc::vec::Vec;

use crate::distribution::{AnalyticDistribution, MixtureModel};
use crate::error::{Error, Result};
use crate::indices::{takayama_empirical, takayama_population};
use crate::quadrature::QuadratureSettings;
use crate::sample::{EmpiricalDistribution, IncomeSample, PovertyConfig};
use crate::variance::ConfidenceInterval;

pub use analytic::gap_variance_analytic;
pub use plugin::gap_variance_plugin;

/// Income law of one subgroup.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupLaw {
    /// Observed incomes.
    Empirical(EmpiricalDistribution),
    /// Model distribution.
    Analytic(AnalyticDistribution),
}

/// One subgroup of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgroup {
    /// Group identifier.
    pub label: String,
    /// Income law within the group.
    pub law: GroupLaw,
    /// Number of observations (sample groups only).
    pub size: Option<usize>,
    /// Group weight: `n_i / n` for samples, `p_i` for models.
    pub weight: f64,
}

impl Subgroup {
    /// Empirical law, for sample groups.
    pub fn empirical(&self) -> Option<&EmpiricalDistribution> {
        match &self.law {
            GroupLaw::Empirical(d) => Some(d),
            GroupLaw::Analytic(_) => None,
        }
    }

    /// Model law, for model groups.
    pub fn analytic(&self) -> Option<&AnalyticDistribution> {
        match &self.law {
            GroupLaw::Analytic(d) => Some(d),
            GroupLaw::Empirical(_) => None,
        }
    }
}

/// Either a labelled sample split by group, or a mixture model.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgroupPartition {
    groups: Vec<Subgroup>,
    pooled: Pooled,
}

#[derive(Debug, Clone, PartialEq)]
enum Pooled {
    Sample(EmpiricalDistribution),
    Model(AnalyticDistribution),
}

impl SubgroupPartition {
    /// Splits a labelled sample, keeping groups in order of first appearance.
    pub fn from_sample(sample: &IncomeSample) -> Result<Self> {
        let labels = sample.group_labels().ok_or(Error::MissingLabels)?;
        let mut order: Vec<String> = Vec::new();
        for label in labels {
            if !order.iter().any(|l| l == label) {
                order.push(label.clone());
            }
        }
        Self::from_sample_with_groups(sample, &order)
    }

    /// Splits a labelled sample into the declared groups, in that order.
    /// Every label must be declared and every declared group observed.
    pub fn from_sample_with_groups(sample: &IncomeSample, groups: &[String]) -> Result<Self> {
        let labels = sample.group_labels().ok_or(Error::MissingLabels)?;
        let values = sample.adjusted_values();
        let mut buckets: Vec<Vec<f64>> = alloc::vec![Vec::new(); groups.len()];
        for (label, value) in labels.iter().zip(&values) {
            let slot = groups
                .iter()
                .position(|g| g == label)
                .ok_or_else(|| Error::UnknownGroup(label.clone()))?;
            buckets[slot].push(*value);
        }
        let n = values.len();
        let pooled = EmpiricalDistribution::from_values(values)?;
        let mut out = Vec::with_capacity(groups.len());
        for (label, bucket) in groups.iter().zip(buckets) {
            if bucket.is_empty() {
                return Err(Error::EmptyGroup(label.clone()));
            }
            let size = bucket.len();
            out.push(Subgroup {
                label: label.clone(),
                law: GroupLaw::Empirical(EmpiricalDistribution::from_values(bucket)?),
                size: Some(size),
                weight: size as f64 / n as f64,
            });
        }
        Ok(Self {
            groups: out,
            pooled: Pooled::Sample(pooled),
        })
    }

    /// Partition induced by a mixture model.
    pub fn from_model(model: &MixtureModel) -> Self {
        let groups = model
            .iter()
            .map(|c| Subgroup {
                label: c.label.clone(),
                law: GroupLaw::Analytic(c.distribution.clone()),
                size: None,
                weight: c.weight,
            })
            .collect();
        Self {
            groups,
            pooled: Pooled::Model(AnalyticDistribution::mixture(model.clone())),
        }
    }

    /// Subgroups in order.
    pub fn groups(&self) -> &[Subgroup] {
        &self.groups
    }

    /// Number of subgroups `K`.
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    /// Always false; a partition has at least one group.
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Group weights.
    pub fn weights(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.weight).collect()
    }

    /// Group labels.
    pub fn labels(&self) -> Vec<String> {
        self.groups.iter().map(|g| g.label.clone()).collect()
    }

    /// Pooled sample, for sample partitions.
    pub fn pooled_sample(&self) -> Option<&EmpiricalDistribution> {
        match &self.pooled {
            Pooled::Sample(d) => Some(d),
            Pooled::Model(_) => None,
        }
    }

    /// Mixture law, for model partitions.
    pub fn mixture(&self) -> Option<&AnalyticDistribution> {
        match &self.pooled {
            Pooled::Model(d) => Some(d),
            Pooled::Sample(_) => None,
        }
    }

    /// Total sample size, for sample partitions.
    pub fn size(&self) -> Option<usize> {
        self.pooled_sample().map(EmpiricalDistribution::size)
    }
}

/// Splits a labelled sample into subgroups (first-appearance order).
pub fn partition(sample: &IncomeSample) -> Result<SubgroupPartition> {
    SubgroupPartition::from_sample(sample)
}

/// Global index, subgroup indices and their gap.
#[derive(Debug, Clone, PartialEq)]
pub struct GapEstimate {
    /// Group labels.
    pub labels: Vec<String>,
    /// Group weights used in the weighted sum.
    pub weights: Vec<f64>,
    /// Index of the pooled population.
    pub global_index: f64,
    /// Index of each subgroup.
    pub local_indices: Vec<f64>,
    /// `sum weights[i] * local_indices[i]`.
    pub weighted_local_sum: f64,
    /// `global_index - weighted_local_sum`.
    pub gap: f64,
    /// `gd = T(F) - sum p_i T(F_i)` under a model.
    pub population_gap: Option<f64>,
    /// `gd_0 = T(F) - sum (n_i / n) T(F_i)` under a model.
    pub mixed_gap: Option<f64>,
}

impl GapEstimate {
    fn assemble(labels: Vec<String>, weights: Vec<f64>, global_index: f64, local_indices: Vec<f64>) -> Self {
        let weighted_local_sum = weighted_sum(&weights, &local_indices);
        Self {
            labels,
            weights,
            global_index,
            local_indices,
            weighted_local_sum,
            gap: global_index - weighted_local_sum,
            population_gap: None,
            mixed_gap: None,
        }
    }

    /// Fills the population and mixed gaps from a model whose component
    /// labels cover the sample's group labels.
    pub fn with_model(
        mut self,
        model: &MixtureModel,
        config: &PovertyConfig,
        quad: &QuadratureSettings,
    ) -> Result<Self> {
        let truth = PopulationGap::new(model, config, quad)?;
        let mut local = Vec::with_capacity(self.labels.len());
        for label in &self.labels {
            let slot = model
                .position(label)
                .ok_or_else(|| Error::UnknownGroup(label.clone()))?;
            local.push(truth.local_indices[slot]);
        }
        self.population_gap = Some(truth.gap);
        self.mixed_gap = Some(truth.global_index - weighted_sum(&self.weights, &local));
        Ok(self)
    }
}

fn weighted_sum(weights: &[f64], values: &[f64]) -> f64 {
    weights.iter().zip(values).map(|(w, v)| w * v).sum()
}

/// Population indices of a mixture and of its components.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationGap {
    /// `T(F)` for the mixture.
    pub global_index: f64,
    /// `T(F_i)` per component, in model order.
    pub local_indices: Vec<f64>,
    /// `T(F) - sum p_i T(F_i)`.
    pub gap: f64,
}

impl PopulationGap {
    /// Evaluates the indices by quadrature.
    pub fn new(model: &MixtureModel, config: &PovertyConfig, quad: &QuadratureSettings) -> Result<Self> {
        let mixture = AnalyticDistribution::mixture(model.clone());
        let global_index = takayama_population(&mixture, config, quad)?.value;
        let mut local_indices = Vec::with_capacity(model.len());
        for c in model.iter() {
            local_indices.push(takayama_population(&c.distribution, config, quad)?.value);
        }
        let weights: Vec<f64> = model.iter().map(|c| c.weight).collect();
        let gap = global_index - weighted_sum(&weights, &local_indices);
        Ok(Self {
            global_index,
            local_indices,
            gap,
        })
    }

    /// `T(F) - sum w_i T(F_i)` for other weights, e.g. observed group shares.
    pub fn reweighted(&self, weights: &[f64]) -> f64 {
        self.global_index - weighted_sum(weights, &self.local_indices)
    }
}

/// Decomposability gap of the Takayama index.
///
/// Sample partitions use the empirical index; model partitions use the
/// population index with default quadrature settings and also fill
/// `population_gap`.
pub fn decomposability_gap(partition: &SubgroupPartition, config: &PovertyConfig) -> Result<GapEstimate> {
    match &partition.pooled {
        Pooled::Sample(_) => decomposability_gap_by(partition, |d| takayama_empirical(d, config).value),
        Pooled::Model(mixture) => {
            let quad = QuadratureSettings::default();
            let global = takayama_population(mixture, config, &quad)?.value;
            let mut local = Vec::with_capacity(partition.len());
            for g in &partition.groups {
                let d = g.analytic().expect("model partitions hold model groups");
                local.push(takayama_population(d, config, &quad)?.value);
            }
            let mut estimate = GapEstimate::assemble(partition.labels(), partition.weights(), global, local);
            estimate.population_gap = Some(estimate.gap);
            Ok(estimate)
        }
    }
}

/// Decomposability gap of an arbitrary sample index.
pub fn decomposability_gap_by<F>(partition: &SubgroupPartition, index: F) -> Result<GapEstimate>
where
    F: Fn(&EmpiricalDistribution) -> f64,
{
    let pooled = partition
        .pooled_sample()
        .ok_or_else(|| Error::parameter("a sample index needs a sample partition"))?;
    let global = index(pooled);
    let local = partition
        .groups
        .iter()
        .map(|g| index(g.empirical().expect("sample partitions hold sample groups")))
        .collect();
    Ok(GapEstimate::assemble(partition.labels(), partition.weights(), global, local))
}

/// Global interval `[S + lower, S + upper]` recovered from the weighted sum
/// `S` of subgroup indices and an interval for the gap.
pub fn recompose_global(weighted_local_sum: f64, gap_ci: &ConfidenceInterval) -> ConfidenceInterval {
    gap_ci.shifted(weighted_local_sum)
}

/// A per-group functional used as a hook in the gap variance.
pub type GroupFunctional<'a> = &'a dyn Fn(&Subgroup, &PovertyConfig) -> Result<f64>;

/// Substitutable scalars of the gap variance.
///
/// `index_functional` is `J(F_h)` in the scalar behind the `p`-variance of
/// the population-centred gap; it defaults to the index functional at the
/// group law. `group_scale` is the scalar `I_i` multiplying `x` in the
/// group influence kernel `g_i`; it defaults to the group's `P(h_i)`.
#[derive(Clone, Copy, Default)]
pub struct GapHooks<'a> {
    /// Replacement for `J(F_h)`.
    pub index_functional: Option<GroupFunctional<'a>>,
    /// Replacement for `I_i`.
    pub group_scale: Option<GroupFunctional<'a>>,
}

impl core::fmt::Debug for GapHooks<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("GapHooks")
            .field("index_functional", &self.index_functional.is_some())
            .field("group_scale", &self.group_scale.is_some())
            .finish()
    }
}

/// Per-group scalars behind the variance of the group-share fluctuations.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    /// Group identifier.
    pub label: String,
    /// Group weight.
    pub weight: f64,
    /// `J(F_h)`.
    pub index_functional: f64,
    /// `I_h`.
    pub group_scale: f64,
    /// `M_h`, the group mean of the global influence function.
    pub conditional_mean: f64,
    /// `M_h - J(F_h)`.
    pub gap_scalar: f64,
}

/// Components of the limiting variance of the decomposability gap.
///
/// `theta1_sq = a1 + a2 + a31 + a32 + 2 (b1 + b2 + b3)` is the within-group
/// part; `theta2_sq` and `theta3_sq` are the `p`-weighted variances of the
/// gap scalars and of the conditional means.
#[derive(Debug, Clone, PartialEq)]
pub struct GapVariance {
    #[allow(missing_docs)]
    pub a1: f64,
    #[allow(missing_docs)]
    pub a2: f64,
    #[allow(missing_docs)]
    pub a31: f64,
    #[allow(missing_docs)]
    pub a32: f64,
    #[allow(missing_docs)]
    pub b1: f64,
    #[allow(missing_docs)]
    pub b2: f64,
    #[allow(missing_docs)]
    pub b3: f64,
    /// Within-group variance.
    pub theta1_sq: f64,
    /// Weighted variance of the gap scalars.
    pub theta2_sq: f64,
    /// Weighted variance of the conditional means.
    pub theta3_sq: f64,
    /// Per-group scalars.
    pub groups: Vec<GroupSummary>,
}

impl GapVariance {
    /// Limiting variance of `sqrt(n) (gd_n - gd)`.
    pub fn population_centred(&self) -> f64 {
        self.theta1_sq + self.theta2_sq
    }

    /// Limiting variance of `sqrt(n) (gd_n - gd_0)`, centred at the
    /// population gap reweighted by the observed group shares.
    pub fn mixed_centred(&self) -> f64 {
        self.theta1_sq + self.theta3_sq
    }
}

/// Limiting gap variance with default hooks: plug-in for sample
/// partitions, quadrature for model partitions.
pub fn gap_variance(
    partition: &SubgroupPartition,
    config: &PovertyConfig,
    quad: &QuadratureSettings,
) -> Result<GapVariance> {
    let hooks = GapHooks::default();
    match partition.pooled {
        Pooled::Sample(_) => gap_variance_plugin(partition, config, &hooks),
        Pooled::Model(_) => gap_variance_analytic(partition, config, quad, &hooks),
    }
}

/// Running sums of the seven components.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Components {
    pub a1: f64,
    pub a2: f64,
    pub a31: f64,
    pub a32: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl Components {
    /// Adds the cross-group terms of distribution group `i` from the
    /// covariances of the `q`-weighted upper sums `S_h` under group `i`.
    /// `cov_s(h, h')` and `cov_d(h)` give `Cov_i(S_h, S_h')` and
    /// `Cov_i(d_i, S_h)`; `own(h)` gives the own-group bridge term against
    /// `S_h`.
    pub fn add_cross_terms(
        &mut self,
        i: usize,
        weights: &[f64],
        cov_s: impl Fn(usize, usize) -> f64,
        cov_d: impl Fn(usize) -> f64,
        own: impl Fn(usize) -> f64,
    ) {
        let p_i = weights[i];
        for (h, &p_h) in weights.iter().enumerate() {
            if h == i {
                continue;
            }
            self.a31 += p_i * p_h * p_h * cov_s(h, h);
            self.b2 += p_i * p_h * own(h);
            self.b3 -= p_i * p_h * cov_d(h);
            for (k, &p_k) in weights.iter().enumerate() {
                if k != i && k != h {
                    self.a32 += p_i * p_h * p_k * cov_s(h, k);
                }
            }
        }
    }

    pub fn finish(self, weights: &[f64], groups: Vec<GroupSummary>) -> Result<GapVariance> {
        let theta1_sq = self.a1 + self.a2 + self.a31 + self.a32 + 2.0 * (self.b1 + self.b2 + self.b3);
        let theta2_sq = weighted_variance(weights, groups.iter().map(|g| g.gap_scalar));
        let theta3_sq = weighted_variance(weights, groups.iter().map(|g| g.conditional_mean));
        for (component, value) in [
            ("theta1_sq", theta1_sq),
            ("theta2_sq", theta2_sq),
            ("theta3_sq", theta3_sq),
        ] {
            if !(value >= -1e-6) {
                return Err(Error::VarianceAssembly { component, value });
            }
        }
        Ok(GapVariance {
            a1: self.a1,
            a2: self.a2,
            a31: self.a31,
            a32: self.a32,
            b1: self.b1,
            b2: self.b2,
            b3: self.b3,
            theta1_sq,
            theta2_sq,
            theta3_sq,
            groups,
        })
    }
}

fn weighted_variance(weights: &[f64], values: impl Iterator<Item = f64> + Clone) -> f64 {
    let centre: f64 = weights.iter().zip(values.clone()).map(|(w, v)| w * v).sum();
    weights
        .iter()
        .zip(values)
        .map(|(w, v)| w * (v - centre) * (v - centre))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indices::fgt_index;
    use alloc::string::ToString;
    use alloc::vec;

    fn labelled(values: &[f64], labels: &[&str]) -> IncomeSample {
        IncomeSample::new(values.to_vec())
            .unwrap()
            .with_groups(labels.iter().map(|s| s.to_string()).collect())
            .unwrap()
    }

    #[test]
    fn partition_shapes() {
        let p = partition(&labelled(&[1.0, 2.0, 3.0], &["a", "a", "b"])).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.weights(), vec![2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(p.groups()[0].size, Some(2));

        let p = partition(&labelled(&[1.0, 2.0], &["x", "x"])).unwrap();
        assert_eq!(p.weights(), vec![1.0]);

        let p = partition(&labelled(&[1.0, 2.0], &["a", "b"])).unwrap();
        assert_eq!(p.labels(), vec!["a".to_string(), "b".to_string()]);
        assert_eq!(p.size(), Some(2));
    }

    #[test]
    fn partition_errors() {
        let bare = IncomeSample::new(vec![1.0]).unwrap();
        assert_eq!(partition(&bare), Err(Error::MissingLabels));
        let s = labelled(&[1.0, 2.0], &["a", "b"]);
        assert_eq!(
            SubgroupPartition::from_sample_with_groups(&s, &["a".into(), "b".into(), "c".into()]),
            Err(Error::EmptyGroup("c".into()))
        );
        assert_eq!(
            SubgroupPartition::from_sample_with_groups(&s, &["a".into()]),
            Err(Error::UnknownGroup("b".into()))
        );
    }

    #[test]
    fn gap_is_global_minus_weighted_sum() {
        let p = partition(&labelled(&[1.0, 3.0, 2.0, 4.0], &["a", "a", "b", "b"])).unwrap();
        let config = PovertyConfig::new(2.5).unwrap();
        let g = decomposability_gap(&p, &config).unwrap();
        // pooled (1,2,3,4): mu 2.5, q 2, T = 1.25 - (2/(2.5*16)) (4*1 + 3*2)
        assert!((g.global_index - 0.75).abs() < 1e-15);
        // (1,3): mu 2, q 1, T = 1.5 - (2/(2*4)) * 2 = 1.0
        // (2,4): mu 3, q 1, T = 1.5 - (2/(3*4)) * 4 = 5/6
        assert!((g.local_indices[0] - 1.0).abs() < 1e-15);
        assert!((g.local_indices[1] - 5.0 / 6.0).abs() < 1e-15);
        assert!((g.gap - (0.75 - 11.0 / 12.0)).abs() < 1e-15);
        assert_eq!(g.gap, g.global_index - (0.5 * g.local_indices[0] + 0.5 * g.local_indices[1]));
    }

    #[test]
    fn single_group_and_fgt_gaps_vanish() {
        let config = PovertyConfig::new(2.0).unwrap();
        let p = partition(&labelled(&[1.0, 3.0, 0.5], &["a", "a", "a"])).unwrap();
        assert_eq!(decomposability_gap(&p, &config).unwrap().gap, 0.0);

        let p = partition(&labelled(&[1.0, 3.0, 0.5, 1.5], &["a", "b", "a", "b"])).unwrap();
        let fgt = decomposability_gap_by(&p, |d| fgt_index(d, &config, 2.0).unwrap().value).unwrap();
        assert!(fgt.gap.abs() < 1e-15);
    }

    #[test]
    fn identical_model_groups_have_no_population_gap() {
        let e = AnalyticDistribution::exponential(1.0).unwrap();
        let model = MixtureModel::from_weighted(vec![(e.clone(), 0.5), (e, 0.5)]).unwrap();
        let config = PovertyConfig::new(1.0).unwrap();
        let g = decomposability_gap(&SubgroupPartition::from_model(&model), &config).unwrap();
        assert!(g.population_gap.unwrap().abs() < 1e-12);
    }

    #[test]
    fn recomposition_arithmetic() {
        let ci = ConfidenceInterval::from_half_width(0.0203, 0.0099, 0.95).unwrap();
        let global = recompose_global(0.9111, &ci);
        assert!((global.lower() - 0.9215).abs() < 1e-12);
        assert!((global.upper() - 0.9413).abs() < 1e-12);
        let point = ConfidenceInterval::from_half_width(0.0, 0.0, 0.95).unwrap();
        assert_eq!(recompose_global(0.5, &point).lower(), 0.5);
    }
}

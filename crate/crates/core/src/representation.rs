//! Residual of the first-order expansion of the empirical index.
//!
//! For a sample of size `n` from `F`,
//! `sqrt(n) (T_n - T) = G_n(g) + beta_n(nu) + o_P(1)`, where
//! `G_n(g) = n^{-1/2} sum (g(X_i) - E g)` and
//! `beta_n(nu) = -int_0^1 G_n(1(. <= F^{-1}(s))) nu(s) ds`.
//!
//! For continuous `F`, `1(X_i <= F^{-1}(s)) = 1(s >= F(X_i))`, so the rank
//! term collapses to `-G_n(S)` with `S(x) = int_{F(x)}^1 nu(s) ds`, which is
//! available in closed form. Both terms are therefore exact sums over the
//! order statistics.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::distribution::AnalyticDistribution;
use crate::error::Result;
use crate::kernels::KernelSet;
use crate::quadrature::QuadratureSettings;
use crate::sample::{EmpiricalDistribution, PovertyConfig};
use crate::indices::takayama_empirical;

/// Population ingredients of the expansion, computed once per law.
#[derive(Debug, Clone)]
pub struct RepresentationDiagnostic<'a> {
    dist: &'a AnalyticDistribution,
    config: PovertyConfig,
    kernels: KernelSet<'a>,
    population_index: f64,
    rank_term_mean: f64,
    partial_mean_at_line: f64,
}

/// Terms of the expansion for one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentationTerms {
    /// `sqrt(n) (T_n - T)`.
    pub scaled_error: f64,
    /// `G_n(g)`.
    pub linear_term: f64,
    /// `beta_n(nu)`.
    pub residual_process: f64,
    /// `scaled_error - linear_term - residual_process`.
    pub residual: f64,
}

impl<'a> RepresentationDiagnostic<'a> {
    /// Computes `T`, the kernels and `E S(X)` for `dist`.
    pub fn new(
        dist: &'a AnalyticDistribution,
        config: &PovertyConfig,
        quad: &QuadratureSettings,
    ) -> Result<Self> {
        let kernels = KernelSet::analytic(dist, config, quad)?;
        let z = config.poverty_line;
        let partial_mean_at_line = dist.partial_moment(1, z);
        let scale = -2.0 / kernels.mean();
        let mut s = |x: f64| Ok(scale * (partial_mean_at_line - dist.partial_moment(1, x)));
        let rank_term_mean = dist.expect_below(z, &mut s, quad)?;
        Ok(Self {
            dist,
            config: *config,
            population_index: kernels.index_value(),
            kernels,
            rank_term_mean,
            partial_mean_at_line,
        })
    }

    /// Population index `T`.
    pub fn population_index(&self) -> f64 {
        self.population_index
    }

    /// Kernels of the law.
    pub fn kernels(&self) -> &KernelSet<'a> {
        &self.kernels
    }

    fn rank_term(&self, x: f64) -> f64 {
        if x > self.config.poverty_line {
            0.0
        } else {
            -2.0 / self.kernels.mean() * (self.partial_mean_at_line - self.dist.partial_moment(1, x))
        }
    }

    /// Expansion terms for a sample drawn from the law.
    pub fn residual(&self, sample: &EmpiricalDistribution) -> RepresentationTerms {
        let n = sample.size() as f64;
        let root = n.sqrt();
        let t_n = takayama_empirical(sample, &self.config).value;
        let scaled_error = root * (t_n - self.population_index);
        let g_mean = self.kernels.influence_mean();
        let mut linear = 0.0;
        let mut rank = 0.0;
        for &x in sample.sorted_values() {
            linear += self.kernels.influence(x) - g_mean;
            rank += self.rank_term(x) - self.rank_term_mean;
        }
        let linear_term = linear / root;
        let residual_process = -rank / root;
        RepresentationTerms {
            scaled_error,
            linear_term,
            residual_process,
            residual: scaled_error - linear_term - residual_process,
        }
    }
}

/// One-shot residual `sqrt(n)(T_n - T) - G_n(g) - beta_n(nu)`.
pub fn representation_residual(
    sample: &EmpiricalDistribution,
    dist: &AnalyticDistribution,
    config: &PovertyConfig,
    quad: &QuadratureSettings,
) -> Result<f64> {
    Ok(RepresentationDiagnostic::new(dist, config, quad)?
        .residual(sample)
        .residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn line_below_support_leaves_only_the_bias() {
        let d = AnalyticDistribution::uniform(2.0, 3.0).unwrap();
        let config = PovertyConfig::new(1.0).unwrap();
        let sample = EmpiricalDistribution::from_values(vec![2.1, 2.5, 2.9, 2.2]).unwrap();
        let r = representation_residual(&sample, &d, &config, &QuadratureSettings::default()).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singleton_sample_is_finite() {
        let d = AnalyticDistribution::uniform(0.0, 1.0).unwrap();
        let config = PovertyConfig::new(1.0).unwrap();
        let sample = EmpiricalDistribution::from_values(vec![0.4]).unwrap();
        let r = representation_residual(&sample, &d, &config, &QuadratureSettings::default()).unwrap();
        assert!(r.is_finite());
    }

    #[test]
    fn rank_term_is_centred_for_uniform() {
        // S(x) = -2 (1 - x^2) on [0, 1]; E S = -4/3
        let d = AnalyticDistribution::uniform(0.0, 1.0).unwrap();
        let config = PovertyConfig::new(1.0).unwrap();
        let diag = RepresentationDiagnostic::new(&d, &config, &QuadratureSettings::default()).unwrap();
        assert!((diag.rank_term_mean + 4.0 / 3.0).abs() < 1e-10);
        assert!((diag.rank_term(0.5) + 1.5).abs() < 1e-15);
    }
}

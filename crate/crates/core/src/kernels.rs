//! Kernel functions driving the asymptotic expansion of the index.
//!
//! For a law `F` with mean `mu` and poverty line `Z`:
//!
//! * `l(x) = x 1(x poor)`
//! * `h(x) = x (1 - F(x)) 1(x poor)`
//! * `g(x) = 2 (P(h) x / mu^2 - h(x) / mu)`
//! * `q(x) = -2 l(x) / mu`
//! * `nu(s) = q(F^{-1}(s))`
//!
//! where `P(h)` is the mean of `h` under `F`. Beyond the poverty line `h`
//! and `q` vanish and `g` is linear with slope `2 P(h) / mu^2`.

use crate::distribution::AnalyticDistribution;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSettings;
use crate::sample::{EmpiricalDistribution, PovertyConfig};

/// The law a [`KernelSet`] is built from.
#[derive(Debug, Clone, Copy)]
pub enum Law<'a> {
    /// Empirical distribution of a sample.
    Empirical(&'a EmpiricalDistribution),
    /// Analytic reference distribution.
    Analytic(&'a AnalyticDistribution),
}

impl Law<'_> {
    /// Distribution function of the law (right-continuous for samples).
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Law::Empirical(d) => d.cdf(x),
            Law::Analytic(d) => d.cdf(x),
        }
    }

    /// Quantile at level `s` in `(0, 1)`.
    pub fn quantile(&self, s: f64) -> Result<f64> {
        match self {
            Law::Empirical(d) => d.quantile(s),
            Law::Analytic(d) => d.quantile(s),
        }
    }

    /// Mean of the law.
    pub fn mean(&self) -> f64 {
        match self {
            Law::Empirical(d) => d.mean(),
            Law::Analytic(d) => d.mean(),
        }
    }
}

/// Which kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `l(x) = x 1(x poor)`.
    PoorIncome,
    /// `h(x) = x (1 - F(x)) 1(x poor)`.
    SurvivalWeighted,
    /// `g(x)`, the influence of the sample mean of `h` and of `mu`.
    Influence,
    /// `q(x) = -2 l(x) / mu`.
    RankWeight,
    /// `nu(s) = q(F^{-1}(s))`, argument on the probability scale.
    RankWeightQuantile,
}

/// Kernels bound to one law and one poverty line, with their scalar
/// ingredients cached.
#[derive(Debug, Clone, Copy)]
pub struct KernelSet<'a> {
    law: Law<'a>,
    config: PovertyConfig,
    mean: f64,
    survival_mean: f64,
    influence_mean: f64,
}

impl<'a> KernelSet<'a> {
    /// Kernels of the empirical distribution of a sample (plug-in kernels).
    pub fn empirical(dist: &'a EmpiricalDistribution, config: &PovertyConfig) -> Self {
        let n = dist.size() as f64;
        let mean = dist.mean();
        let sorted = dist.sorted_values();
        let upper = dist.upper_ranks();
        let mut total_h = 0.0;
        for (x, &rank) in sorted.iter().zip(&upper) {
            if config.is_poor(*x) {
                total_h += x * (1.0 - rank as f64 / n);
            }
        }
        let mut set = Self {
            law: Law::Empirical(dist),
            config: *config,
            mean,
            survival_mean: total_h / n,
            influence_mean: 0.0,
        };
        set.influence_mean = set.centre_of_influence();
        set
    }

    /// Kernels of an analytic law; `P(h)` is computed by quadrature.
    pub fn analytic(
        dist: &'a AnalyticDistribution,
        config: &PovertyConfig,
        quad: &QuadratureSettings,
    ) -> Result<Self> {
        let mean = dist.mean();
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::DegenerateMean);
        }
        let mut h = |x: f64| Ok(x * (1.0 - dist.cdf(x)));
        let survival_mean = dist.expect_below(config.poverty_line, &mut h, quad)?;
        let mut set = Self {
            law: Law::Analytic(dist),
            config: *config,
            mean,
            survival_mean,
            influence_mean: 0.0,
        };
        set.influence_mean = set.centre_of_influence();
        Ok(set)
    }

    /// Replaces the scalar `P(h)` entering `g`; the group kernels of a
    /// decomposition use this to substitute their own scale.
    pub fn with_survival_mean(mut self, value: f64) -> Self {
        self.survival_mean = value;
        self.influence_mean = self.centre_of_influence();
        self
    }

    // E g = 2 (P(h) mu / mu^2 - P(h) / mu) when P(h) is the mean of h
    fn centre_of_influence(&self) -> f64 {
        2.0 * (self.survival_mean * self.mean / (self.mean * self.mean) - self.survival_mean / self.mean)
    }

    /// Bound law.
    pub fn law(&self) -> Law<'a> {
        self.law
    }

    /// Poverty configuration.
    pub fn config(&self) -> &PovertyConfig {
        &self.config
    }

    /// Mean `mu` of the bound law.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `P(h)`, the mean of the survival-weighted kernel.
    pub fn survival_mean(&self) -> f64 {
        self.survival_mean
    }

    /// `P(g)`, the mean of the influence kernel.
    pub fn influence_mean(&self) -> f64 {
        self.influence_mean
    }

    /// Slope of `g` beyond the poverty line.
    pub fn influence_slope(&self) -> f64 {
        2.0 * self.survival_mean / (self.mean * self.mean)
    }

    /// The index functional at the bound law, `1 - 2 P(h) / mu`.
    pub fn index_value(&self) -> f64 {
        1.0 - 2.0 * self.survival_mean / self.mean
    }

    /// `l(x)`.
    #[inline]
    pub fn poor_income(&self, x: f64) -> f64 {
        if self.config.is_poor(x) {
            x
        } else {
            0.0
        }
    }

    /// `h(x)`.
    #[inline]
    pub fn survival_weighted(&self, x: f64) -> f64 {
        if self.config.is_poor(x) {
            x * (1.0 - self.law.cdf(x))
        } else {
            0.0
        }
    }

    /// `h(x)` given the value of `F(x)`, avoiding a CDF lookup.
    #[inline]
    pub(crate) fn survival_weighted_at(&self, x: f64, cdf: f64) -> f64 {
        if self.config.is_poor(x) {
            x * (1.0 - cdf)
        } else {
            0.0
        }
    }

    /// `g(x)`.
    #[inline]
    pub fn influence(&self, x: f64) -> f64 {
        self.influence_from_survival(x, self.survival_weighted(x))
    }

    #[inline]
    pub(crate) fn influence_from_survival(&self, x: f64, h: f64) -> f64 {
        2.0 * (self.survival_mean * x / (self.mean * self.mean) - h / self.mean)
    }

    /// `q(x)`.
    #[inline]
    pub fn rank_weight(&self, x: f64) -> f64 {
        -2.0 * self.poor_income(x) / self.mean
    }

    /// `nu(s)` for `s` in `(0, 1)`.
    pub fn rank_weight_quantile(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::KernelArgument(s));
        }
        Ok(self.rank_weight(self.law.quantile(s)?))
    }

    /// Evaluates one kernel.
    pub fn eval(&self, which: Kernel, arg: f64) -> Result<f64> {
        if which != Kernel::RankWeightQuantile && !(arg >= 0.0 && arg.is_finite()) {
            return Err(Error::KernelArgument(arg));
        }
        Ok(match which {
            Kernel::PoorIncome => self.poor_income(arg),
            Kernel::SurvivalWeighted => self.survival_weighted(arg),
            Kernel::Influence => self.influence(arg),
            Kernel::RankWeight => self.rank_weight(arg),
            Kernel::RankWeightQuantile => self.rank_weight_quantile(arg)?,
        })
    }
}

/// Evaluates one kernel of a kernel set.
pub fn kernel_eval(kernels: &KernelSet<'_>, which: Kernel, arg: f64) -> Result<f64> {
    kernels.eval(which, arg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn uniform_kernels(dist: &AnalyticDistribution) -> KernelSet<'_> {
        let config = PovertyConfig::new(1.0).unwrap();
        KernelSet::analytic(dist, &config, &QuadratureSettings::with_tolerance(1e-13)).unwrap()
    }

    #[test]
    fn uniform_reference_values() {
        let u = AnalyticDistribution::uniform(0.0, 1.0).unwrap();
        let k = uniform_kernels(&u);
        assert!((k.survival_mean() - 1.0 / 6.0).abs() < 1e-13);
        assert!((k.eval(Kernel::SurvivalWeighted, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((k.eval(Kernel::RankWeight, 0.5).unwrap() + 2.0).abs() < 1e-15);
        assert!((k.eval(Kernel::Influence, 0.5).unwrap() + 1.0 / 3.0).abs() < 1e-12);
        assert!((k.eval(Kernel::RankWeightQuantile, 0.25).unwrap() + 1.0).abs() < 1e-15);
        assert!(k.influence_mean().abs() < 1e-15);
    }

    #[test]
    fn quantile_kernel_rejects_end_points() {
        let u = AnalyticDistribution::uniform(0.0, 1.0).unwrap();
        let k = uniform_kernels(&u);
        assert!(matches!(kernel_eval(&k, Kernel::RankWeightQuantile, 0.0), Err(Error::KernelArgument(_))));
        assert!(kernel_eval(&k, Kernel::RankWeightQuantile, 1.0).is_err());
        assert!(kernel_eval(&k, Kernel::Influence, -1.0).is_err());
    }

    #[test]
    fn kernels_vanish_or_go_linear_above_the_line() {
        let d = EmpiricalDistribution::from_values(vec![0.5, 1.0, 2.0, 4.0]).unwrap();
        let config = PovertyConfig::new(1.0).unwrap();
        let k = KernelSet::empirical(&d, &config);
        for x in [1.5, 3.0, 10.0] {
            assert_eq!(k.survival_weighted(x), 0.0);
            assert_eq!(k.rank_weight(x), 0.0);
            assert!((k.influence(x) - k.influence_slope() * x).abs() < 1e-15);
        }
    }

    #[test]
    fn empirical_influence_is_centred() {
        let d = EmpiricalDistribution::from_values(vec![0.3, 0.9, 1.0, 1.0, 2.5, 7.0]).unwrap();
        let config = PovertyConfig::new(1.0).unwrap();
        let k = KernelSet::empirical(&d, &config);
        let direct: f64 = d.sorted_values().iter().map(|&x| k.influence(x)).sum::<f64>() / 6.0;
        assert!(direct.abs() < 1e-15);
        assert!(k.influence_mean().abs() < 1e-15);
        // ties take the right-continuous CDF value
        assert!((k.survival_weighted(1.0) - (1.0 - 4.0 / 6.0)).abs() < 1e-15);
    }
}

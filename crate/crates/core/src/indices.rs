//! Point values of the Takayama index and the FGT benchmark.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::distribution::AnalyticDistribution;
use crate::error::{Error, Result};
use crate::kernels::KernelSet;
use crate::quadrature::QuadratureSettings;
use crate::sample::{EmpiricalDistribution, PovertyConfig};

/// Which estimator produced an [`IndexValue`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    /// L-statistic computed from a sample.
    TakayamaEmpirical,
    /// Functional evaluated at an analytic law.
    TakayamaPopulation,
    /// Foster–Greer–Thorbecke index.
    Fgt,
}

/// An index value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexValue {
    /// The index.
    pub value: f64,
    /// Estimator that produced it.
    pub kind: IndexKind,
    /// Sample size for sample-based values.
    pub sample_size: Option<usize>,
}

/// Empirical Takayama index
/// `T_n = 1 + 1/n - 2 / (mu_n n^2) * sum_{j <= q} (n - j + 1) X_{j,n}`,
/// with `q` the number of poor observations.
pub fn takayama_empirical(dist: &EmpiricalDistribution, config: &PovertyConfig) -> IndexValue {
    let n = dist.size();
    let q = dist.poor_count(config);
    let nf = n as f64;
    let weighted: f64 = dist.sorted_values()[..q]
        .iter()
        .enumerate()
        .map(|(j, x)| (n - j) as f64 * x)
        .sum();
    IndexValue {
        value: 1.0 + 1.0 / nf - 2.0 * weighted / (dist.mean() * nf * nf),
        kind: IndexKind::TakayamaEmpirical,
        sample_size: Some(n),
    }
}

/// Population Takayama index `T = 1 - (2 / mu) E[X (1 - F(X)) ; X poor]`.
pub fn takayama_population(
    dist: &AnalyticDistribution,
    config: &PovertyConfig,
    quad: &QuadratureSettings,
) -> Result<IndexValue> {
    let kernels = KernelSet::analytic(dist, config, quad)?;
    Ok(IndexValue {
        value: kernels.index_value(),
        kind: IndexKind::TakayamaPopulation,
        sample_size: None,
    })
}

/// Foster–Greer–Thorbecke index `(1/n) sum_{poor} ((Z - X_i) / Z)^alpha`.
///
/// `alpha = 0` gives the headcount ratio.
pub fn fgt_index(dist: &EmpiricalDistribution, config: &PovertyConfig, alpha: f64) -> Result<IndexValue> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::parameter(alloc::format!("FGT exponent must be non-negative, got {alpha}")));
    }
    let z = config.poverty_line;
    let q = dist.poor_count(config);
    let total: f64 = if alpha == 0.0 {
        q as f64
    } else {
        dist.sorted_values()[..q]
            .iter()
            .map(|x| ((z - x) / z).powf(alpha))
            .sum()
    };
    Ok(IndexValue {
        value: total / dist.size() as f64,
        kind: IndexKind::Fgt,
        sample_size: Some(dist.size()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(values: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::from_values(values.to_vec()).unwrap()
    }

    fn cfg(z: f64) -> PovertyConfig {
        PovertyConfig::new(z).unwrap()
    }

    #[test]
    fn takayama_small_cases() {
        assert_eq!(takayama_empirical(&dist(&[5.0]), &cfg(10.0)).value, 0.0);
        assert_eq!(takayama_empirical(&dist(&[3.0, 7.0]), &cfg(2.0)).value, 1.5);
        assert_eq!(takayama_empirical(&dist(&[1.0, 3.0]), &cfg(2.0)).value, 1.0);
        let v = takayama_empirical(&dist(&[3.0, 1.0]), &cfg(2.0));
        assert_eq!(v.kind, IndexKind::TakayamaEmpirical);
        assert_eq!(v.sample_size, Some(2));
    }

    #[test]
    fn fgt_small_cases() {
        assert_eq!(fgt_index(&dist(&[3.0, 7.0]), &cfg(2.0), 1.0).unwrap().value, 0.0);
        assert_eq!(fgt_index(&dist(&[1.0, 3.0]), &cfg(2.0), 0.0).unwrap().value, 0.5);
        assert_eq!(fgt_index(&dist(&[1.0, 3.0]), &cfg(2.0), 1.0).unwrap().value, 0.25);
        assert!(fgt_index(&dist(&[1.0]), &cfg(2.0), -1.0).is_err());
    }

    #[test]
    fn headcount_counts_the_line_itself_unless_strict() {
        let d = dist(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(fgt_index(&d, &cfg(2.0), 0.0).unwrap().value, 0.5);
        let strict = cfg(2.0).with_strict_comparison(true);
        assert_eq!(fgt_index(&d, &strict, 0.0).unwrap().value, 0.25);
    }

    #[test]
    fn population_uniform_references() {
        let quad = QuadratureSettings::default();
        let u01 = AnalyticDistribution::uniform(0.0, 1.0).unwrap();
        let t = takayama_population(&u01, &cfg(1.0), &quad).unwrap();
        assert!((t.value - 1.0 / 3.0).abs() < 1e-8);
        assert_eq!(t.kind, IndexKind::TakayamaPopulation);

        let u02 = AnalyticDistribution::uniform(0.0, 2.0).unwrap();
        let t = takayama_population(&u02, &cfg(1.0), &quad).unwrap();
        assert!((t.value - 2.0 / 3.0).abs() < 1e-8);

        let shifted = AnalyticDistribution::uniform(2.0, 3.0).unwrap();
        assert_eq!(takayama_population(&shifted, &cfg(1.0), &quad).unwrap().value, 1.0);
    }
}

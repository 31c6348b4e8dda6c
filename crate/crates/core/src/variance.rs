//! Asymptotic variance of the empirical index and confidence intervals.
//!
//! The limiting variance splits as `sigma^2 = sigma_1^2 + sigma_2^2 + 2
//! sigma_12`: the variance of `g(X)`, the bridge quadratic form of `nu`,
//! and their cross term
//! `sigma_12 = -int nu(s) (E[g(X) ; X <= F^{-1}(s)] - s E g) ds`.
//!
//! Writing `S(x) = int_{F(x)}^1 nu(s) ds = -(2/mu) E[X ; x <= X <= Z]`, the
//! three parts are `Var g(X)`, `Var S(X)` and `-Cov(g(X), S(X))`. The
//! analytic path evaluates them in that form, with `S` in closed form
//! through partial moments.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::bridge::bridge_quadratic_form;
use crate::distribution::AnalyticDistribution;
use crate::error::{Error, Result};
use crate::kernels::KernelSet;
use crate::quadrature::QuadratureSettings;
use crate::sample::{EmpiricalDistribution, PovertyConfig};
use crate::special::two_sided_critical_value;

/// Components of the limiting variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceDecomposition {
    /// Variance of the influence kernel `g`.
    pub sigma1_sq: f64,
    /// Bridge quadratic form of `nu`.
    pub sigma2_sq: f64,
    /// Cross term.
    pub sigma12: f64,
    /// `sigma1_sq + sigma2_sq + 2 sigma12`.
    pub total: f64,
}

impl VarianceDecomposition {
    /// Assembles the total from the three parts.
    pub fn assemble(sigma1_sq: f64, sigma2_sq: f64, sigma12: f64) -> Self {
        Self {
            sigma1_sq,
            sigma2_sq,
            sigma12,
            total: sigma1_sq + sigma2_sq + 2.0 * sigma12,
        }
    }

    /// All components zero.
    pub fn zero() -> Self {
        Self::assemble(0.0, 0.0, 0.0)
    }

    /// Total floored at zero, for use as a variance.
    pub fn total_clamped(&self) -> f64 {
        self.total.max(0.0)
    }

    /// Rejects totals below `-1e-9` and quadratic forms below `-1e-10`.
    pub fn checked(self) -> Result<Self> {
        if !(self.sigma2_sq >= -1e-10) {
            return Err(Error::VarianceAssembly {
                component: "sigma2_sq",
                value: self.sigma2_sq,
            });
        }
        if !(self.total >= -1e-9) {
            return Err(Error::VarianceAssembly {
                component: "total",
                value: self.total,
            });
        }
        Ok(self)
    }
}

/// Step weights `nu(s)` on the quantile cells of the empirical law:
/// `-2 l(X_{j,n}) / mu_n`.
pub fn plugin_rank_weights(dist: &EmpiricalDistribution, config: &PovertyConfig) -> Vec<f64> {
    let kernels = KernelSet::empirical(dist, config);
    dist.sorted_values().iter().map(|&x| kernels.rank_weight(x)).collect()
}

/// Plug-in variance: every population quantity replaced by its empirical
/// counterpart, with the integrals over quantile cells done in closed form.
pub fn sigma_plugin(dist: &EmpiricalDistribution, config: &PovertyConfig) -> VarianceDecomposition {
    let kernels = KernelSet::empirical(dist, config);
    let n = dist.size();
    let nf = n as f64;
    let sorted = dist.sorted_values();
    let upper = dist.upper_ranks();

    let g: Vec<f64> = sorted
        .iter()
        .zip(&upper)
        .map(|(&x, &r)| kernels.influence_from_survival(x, kernels.survival_weighted_at(x, r as f64 / nf)))
        .collect();
    let g_mean = g.iter().sum::<f64>() / nf;
    let sigma1_sq = g.iter().map(|v| (v - g_mean) * (v - g_mean)).sum::<f64>() / nf;

    let nu: Vec<f64> = sorted.iter().map(|&x| kernels.rank_weight(x)).collect();
    let sigma2_sq = bridge_quadratic_form(&nu);

    // prefix[r] = sum of the first r values of g
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in &g {
        acc += v;
        prefix.push(acc);
    }
    // int over cell j of (int_0^s g(Q_n(t)) dt - s E g), which keeps the
    // total equal to Var(g(Q_n(U)) - R(U)) for U uniform
    let mut cross = 0.0;
    for (j, &w) in nu.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let below = (prefix[j] + 0.5 * g[j]) / nf;
        let cell_s = (2 * j + 1) as f64 / (2.0 * nf * nf);
        cross += w * (below / nf - g_mean * cell_s);
    }
    VarianceDecomposition::assemble(sigma1_sq, sigma2_sq, -cross)
}

/// A function of income that is arbitrary at or below the poverty line and
/// linear through the origin above it.
pub(crate) struct Profile<'f> {
    pub below: &'f dyn Fn(f64) -> f64,
    pub slope: f64,
}

/// Means and covariance matrix of several profiles under `dist`.
pub(crate) fn profile_moments(
    dist: &AnalyticDistribution,
    z: f64,
    profiles: &[Profile<'_>],
    quad: &QuadratureSettings,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let k = profiles.len();
    let upper_first = dist.mean() - dist.partial_moment(1, z);
    let any_slope = profiles.iter().any(|p| p.slope != 0.0);
    let upper_second = if any_slope {
        let second = dist.second_moment();
        if !second.is_finite() {
            return Err(Error::parameter(
                "the variance needs a finite second moment of income",
            ));
        }
        second - dist.partial_moment(2, z)
    } else {
        0.0
    };

    let mut means = Vec::with_capacity(k);
    for p in profiles {
        let mut f = |x: f64| Ok((p.below)(x));
        let below = dist.expect_below(z, &mut f, quad)?;
        let above = if p.slope != 0.0 { p.slope * upper_first } else { 0.0 };
        means.push(below + above);
    }
    let mut cov = alloc::vec![alloc::vec![0.0; k]; k];
    for a in 0..k {
        for b in a..k {
            let (pa, pb) = (&profiles[a], &profiles[b]);
            let mut f = |x: f64| Ok((pa.below)(x) * (pb.below)(x));
            let below = dist.expect_below(z, &mut f, quad)?;
            let slope = pa.slope * pb.slope;
            let above = if slope != 0.0 { slope * upper_second } else { 0.0 };
            let value = below + above - means[a] * means[b];
            cov[a][b] = value;
            cov[b][a] = value;
        }
    }
    Ok((means, cov))
}

/// `S(x) = scale * E[X ; x <= X <= Z]` under `dist`, zero above `Z`.
pub(crate) fn upper_partial_mean<'d>(
    dist: &'d AnalyticDistribution,
    z: f64,
    scale: f64,
) -> impl Fn(f64) -> f64 + 'd {
    let top = dist.partial_moment(1, z);
    move |x: f64| {
        if x > z {
            0.0
        } else {
            scale * (top - dist.partial_moment(1, x))
        }
    }
}

/// Limiting variance under an analytic law.
pub fn sigma_analytic(
    dist: &AnalyticDistribution,
    config: &PovertyConfig,
    quad: &QuadratureSettings,
) -> Result<VarianceDecomposition> {
    let kernels = KernelSet::analytic(dist, config, quad)?;
    let z = config.poverty_line;
    if dist.cdf(z) <= 0.0 {
        return Ok(VarianceDecomposition::zero());
    }
    let influence = |x: f64| kernels.influence(x);
    let bridge = upper_partial_mean(dist, z, -2.0 / kernels.mean());
    let profiles = [
        Profile {
            below: &influence,
            slope: kernels.influence_slope(),
        },
        Profile {
            below: &bridge,
            slope: 0.0,
        },
    ];
    let (_, cov) = profile_moments(dist, z, &profiles, quad)?;
    VarianceDecomposition::assemble(cov[0][0], cov[1][1], -cov[0][1]).checked()
}

/// A symmetric confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    /// Point estimate.
    pub center: f64,
    /// Half the interval length.
    pub half_width: f64,
    /// Nominal coverage.
    pub level: f64,
}

impl ConfidenceInterval {
    /// Interval from its center and half-width.
    pub fn from_half_width(center: f64, half_width: f64, level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::ConfidenceLevel(level));
        }
        if !(half_width >= 0.0) {
            return Err(Error::parameter(alloc::format!("negative half-width {half_width}")));
        }
        Ok(Self {
            center,
            half_width,
            level,
        })
    }

    /// `center - half_width`.
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    /// `center + half_width`.
    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    /// Whether `x` lies in the closed interval.
    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }

    /// The same interval translated by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            center: self.center + offset,
            ..*self
        }
    }
}

/// Normal-approximation interval `point +/- z_{(1+level)/2} sqrt(variance / n)`.
pub fn confidence_interval(point: f64, variance: f64, n: usize, level: f64) -> Result<ConfidenceInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::ConfidenceLevel(level));
    }
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::parameter(alloc::format!("variance must be finite and non-negative, got {variance}")));
    }
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let half_width = two_sided_critical_value(level) * (variance / n as f64).sqrt();
    ConfidenceInterval::from_half_width(point, half_width, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::bridge_quadratic_form_pairwise;

    fn dist(values: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::from_values(values.to_vec()).unwrap()
    }

    #[test]
    fn uniform_closed_forms() {
        let u = AnalyticDistribution::uniform(0.0, 1.0).unwrap();
        let config = PovertyConfig::new(1.0).unwrap();
        let v = sigma_analytic(&u, &config, &QuadratureSettings::with_tolerance(1e-13)).unwrap();
        assert!((v.sigma1_sq - 32.0 / 135.0).abs() < 1e-11, "{v:?}");
        assert!((v.sigma2_sq - 16.0 / 45.0).abs() < 1e-11, "{v:?}");
        assert!((v.sigma12 + 4.0 / 15.0).abs() < 1e-11, "{v:?}");
        assert!((v.total - 8.0 / 135.0).abs() < 1e-11, "{v:?}");
    }

    #[test]
    fn line_below_support_gives_zero() {
        let u = AnalyticDistribution::uniform(2.0, 3.0).unwrap();
        let config = PovertyConfig::new(1.0).unwrap();
        let v = sigma_analytic(&u, &config, &QuadratureSettings::default()).unwrap();
        assert_eq!(v, VarianceDecomposition::zero());
    }

    #[test]
    fn plugin_degenerate_cases() {
        let rich = dist(&[5.0, 6.0, 9.0]);
        let v = sigma_plugin(&rich, &PovertyConfig::new(1.0).unwrap());
        assert_eq!((v.sigma1_sq, v.sigma2_sq, v.sigma12, v.total), (0.0, 0.0, 0.0, 0.0));

        let constant = dist(&[0.5; 8]);
        let v = sigma_plugin(&constant, &PovertyConfig::new(1.0).unwrap());
        assert!(v.sigma1_sq.abs() < 1e-30);
    }

    #[test]
    fn plugin_cross_term_matches_cellwise_integration() {
        let d = dist(&[0.1, 0.4, 0.4, 0.7, 0.9, 1.3, 2.0]);
        let config = PovertyConfig::new(1.0).unwrap();
        let k = KernelSet::empirical(&d, &config);
        let n = d.size();
        let xs = d.sorted_values();
        let g_mean = xs.iter().map(|&x| k.influence(x)).sum::<f64>() / n as f64;
        // midpoint rule is exact here: the integrand is linear in s on each cell
        let mut cross = 0.0;
        for j in 0..n {
            let s_mid = (j as f64 + 0.5) / n as f64;
            let below: f64 = (xs[..j].iter().map(|&x| k.influence(x)).sum::<f64>() + 0.5 * k.influence(xs[j]))
                / n as f64;
            cross += k.rank_weight(xs[j]) * (below - s_mid * g_mean) / n as f64;
        }
        let v = sigma_plugin(&d, &config);
        assert!((v.sigma12 + cross).abs() < 1e-15);
        let nu = plugin_rank_weights(&d, &config);
        assert!((v.sigma2_sq - bridge_quadratic_form_pairwise(&nu)).abs() < 1e-15);
    }

    #[test]
    fn plugin_total_is_a_variance_for_tiny_samples() {
        let d = dist(&[53.65536221491533, 72.78444695358485]);
        let v = sigma_plugin(&d, &PovertyConfig::new(62.72693177687414).unwrap());
        assert!(v.total >= 0.0, "{v:?}");
        assert!(v.checked().is_ok());
    }

    #[test]
    fn interval_arithmetic() {
        let ci = confidence_interval(0.3, 0.0, 10, 0.95).unwrap();
        assert_eq!((ci.lower(), ci.upper()), (0.3, 0.3));
        let ci = ConfidenceInterval::from_half_width(0.0203, 0.0099, 0.95).unwrap();
        assert!((ci.lower() - 0.0104).abs() < 1e-12);
        assert!((ci.upper() - 0.0302).abs() < 1e-12);
        assert!(confidence_interval(0.0, 1.0, 10, 1.0).is_err());
        assert!(confidence_interval(0.0, -1.0, 10, 0.9).is_err());
        let ci = confidence_interval(1.0, 4.0, 100, 0.95).unwrap();
        assert!((ci.half_width - 1.959_963_984_540_054 * 0.2).abs() < 1e-14);
    }
}

//! Gap variance for model partitions.
//!
//! Under group `i` every component is a covariance of functions of income:
//! `d_i = g - g_i`, the own-group upper sum `S[F_i, p_i q - q_i]` and the
//! cross-group upper sums `S[F_h, q]`, where
//! `S[H, w](x) = int w(y) 1(y >= x) dH(y)`. For weights of the form
//! `c y 1(y poor)` these are partial first moments, so each covariance is a
//! one-dimensional integral.

use alloc::vec::Vec;

use super::{Components, GapHooks, GapVariance, GroupSummary, SubgroupPartition};
use crate::error::{Error, Result};
use crate::kernels::KernelSet;
use crate::quadrature::QuadratureSettings;
use crate::sample::PovertyConfig;
use crate::variance::{profile_moments, upper_partial_mean, Profile};

/// Limiting gap variance for a partition built from a mixture model.
pub fn gap_variance_analytic(
    partition: &SubgroupPartition,
    config: &PovertyConfig,
    quad: &QuadratureSettings,
    hooks: &GapHooks<'_>,
) -> Result<GapVariance> {
    let mixture = partition
        .mixture()
        .ok_or_else(|| Error::parameter("the analytic gap variance needs a model partition"))?;
    let z = config.poverty_line;
    let weights = partition.weights();
    let k = partition.len();
    let global = KernelSet::analytic(mixture, config, quad)?;
    let mu = global.mean();

    let laws: Vec<_> = partition
        .groups()
        .iter()
        .map(|g| g.analytic().expect("model partitions hold model groups"))
        .collect();

    let mut locals = Vec::with_capacity(k);
    let mut summaries = Vec::with_capacity(k);
    for (group, law) in partition.groups().iter().zip(&laws) {
        let own = KernelSet::analytic(law, config, quad)?;
        let index_functional = match hooks.index_functional {
            Some(f) => f(group, config)?,
            None => own.index_value(),
        };
        let scale = match hooks.group_scale {
            Some(f) => f(group, config)?,
            None => own.survival_mean(),
        };
        locals.push(own.with_survival_mean(scale));
        summaries.push(GroupSummary {
            label: group.label.clone(),
            weight: group.weight,
            index_functional,
            group_scale: scale,
            conditional_mean: 0.0,
            gap_scalar: 0.0,
        });
    }

    let uppers: Vec<_> = laws.iter().map(|law| upper_partial_mean(law, z, -2.0 / mu)).collect();

    let mut sums = Components::default();
    let mut influence_means = Vec::with_capacity(k);
    let mut upper_means = Vec::with_capacity(k);
    for i in 0..k {
        let law = laws[i];
        let own = &locals[i];
        let p_i = weights[i];
        let influence = |x: f64| global.influence(x);
        let diff = |x: f64| global.influence(x) - own.influence(x);
        let own_scale = -2.0 * (p_i / mu - 1.0 / own.mean());
        let own_upper = upper_partial_mean(law, z, own_scale);
        let mut profiles = Vec::with_capacity(k + 3);
        profiles.push(Profile {
            below: &influence,
            slope: global.influence_slope(),
        });
        profiles.push(Profile {
            below: &diff,
            slope: global.influence_slope() - own.influence_slope(),
        });
        profiles.push(Profile {
            below: &own_upper,
            slope: 0.0,
        });
        for upper in &uppers {
            profiles.push(Profile {
                below: upper,
                slope: 0.0,
            });
        }
        let (means, cov) = profile_moments(law, z, &profiles, quad)?;
        // 0: g, 1: d_i, 2: own-group upper sum, 3 + h: upper sum of group h
        sums.a1 += p_i * cov[1][1];
        sums.a2 += p_i * cov[2][2];
        sums.b1 -= p_i * cov[1][2];
        sums.add_cross_terms(
            i,
            &weights,
            |h, l| cov[3 + h][3 + l],
            |h| cov[1][3 + h],
            |h| cov[2][3 + h],
        );
        influence_means.push(means[0]);
        upper_means.push(means[3..].to_vec());
    }

    // M_h = E_h g + E_h psi + c with psi = -sum_k p_k S_k and c = -E psi
    let psi_means: Vec<f64> = upper_means
        .iter()
        .map(|row| -row.iter().zip(&weights).map(|(s, p)| p * s).sum::<f64>())
        .collect();
    let centre: f64 = -psi_means.iter().zip(&weights).map(|(m, p)| p * m).sum::<f64>();
    for (h, summary) in summaries.iter_mut().enumerate() {
        summary.conditional_mean = influence_means[h] + psi_means[h] + centre;
        summary.gap_scalar = summary.conditional_mean - summary.index_functional;
    }
    sums.finish(&weights, summaries)
}

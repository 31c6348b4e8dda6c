//! Plug-in gap variance for sample partitions.
//!
//! Group laws are step functions. Components whose integrand pairs a
//! group's own quantile cells with the bridge kernel (`a2`, `b1`, `b2`) are
//! integrated cell by cell in closed form; the others are exact discrete
//! covariances under the group's empirical law.

use alloc::vec::Vec;

use super::{Components, GapHooks, GapVariance, GroupSummary, SubgroupPartition};
use crate::bridge::{bridge_quadratic_form, integrated_weights};
use crate::error::{Error, Result};
use crate::kernels::KernelSet;
use crate::sample::{EmpiricalDistribution, PovertyConfig};

/// `S(x) = (1/n) sum_l w(y_l) 1(y_l >= x)` for a sorted sample `y`.
struct UpperSum<'a> {
    sorted: &'a [f64],
    suffix: Vec<f64>,
}

impl<'a> UpperSum<'a> {
    fn new(dist: &'a EmpiricalDistribution, weight: impl Fn(f64) -> f64) -> Self {
        let sorted = dist.sorted_values();
        let n = sorted.len() as f64;
        let mut suffix = alloc::vec![0.0; sorted.len() + 1];
        for j in (0..sorted.len()).rev() {
            suffix[j] = suffix[j + 1] + weight(sorted[j]);
        }
        for v in &mut suffix {
            *v /= n;
        }
        Self { sorted, suffix }
    }

    fn at(&self, x: f64) -> f64 {
        self.suffix[self.sorted.partition_point(|&y| y < x)]
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64
}

/// Plug-in limiting gap variance for a partition of a labelled sample.
pub fn gap_variance_plugin(
    partition: &SubgroupPartition,
    config: &PovertyConfig,
    hooks: &GapHooks<'_>,
) -> Result<GapVariance> {
    let pooled = partition
        .pooled_sample()
        .ok_or_else(|| Error::parameter("the plug-in gap variance needs a sample partition"))?;
    let weights = partition.weights();
    let k = partition.len();
    let global = KernelSet::empirical(pooled, config);
    let rank_weight = |x: f64| global.rank_weight(x);

    let laws: Vec<&EmpiricalDistribution> = partition
        .groups()
        .iter()
        .map(|g| g.empirical().expect("sample partitions hold sample groups"))
        .collect();

    let mut locals = Vec::with_capacity(k);
    let mut summaries = Vec::with_capacity(k);
    for (group, law) in partition.groups().iter().zip(&laws) {
        let own = KernelSet::empirical(law, config);
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

    let uppers: Vec<UpperSum<'_>> = laws.iter().map(|law| UpperSum::new(law, rank_weight)).collect();
    let pooled_upper = UpperSum::new(pooled, rank_weight);

    let mut sums = Components::default();
    let mut influence_means = Vec::with_capacity(k);
    let mut psi_means = Vec::with_capacity(k);
    for i in 0..k {
        let law = laws[i];
        let own = &locals[i];
        let p_i = weights[i];
        let xs = law.sorted_values();
        let n = xs.len();
        let nf = n as f64;

        let g: Vec<f64> = xs.iter().map(|&x| global.influence(x)).collect();
        let d: Vec<f64> = xs.iter().zip(&g).map(|(&x, gx)| gx - own.influence(x)).collect();
        let rho: Vec<f64> = xs
            .iter()
            .map(|&x| p_i * global.rank_weight(x) - own.rank_weight(x))
            .collect();
        let d_mean = mean(&d);

        sums.a1 += p_i * covariance(&d, &d);
        sums.a2 += p_i * bridge_quadratic_form(&rho);

        // D(s) = int_0^s d(Q(t)) dt is linear on each cell
        let mut b1 = 0.0;
        let mut running = 0.0;
        for (j, (&w, &dj)) in rho.iter().zip(&d).enumerate() {
            let cell_d = running / nf + dj / (2.0 * nf * nf);
            let cell_s = (2 * j + 1) as f64 / (2.0 * nf * nf);
            b1 += w * (cell_d - d_mean * cell_s);
            running += dj / nf;
        }
        sums.b1 -= p_i * b1;

        // prefix[m] = int_0^{m/n} R(u) du with R(u) = int_u^1 rho(Q(s)) ds
        let tail = integrated_weights(&rho);
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        for m in 0..n {
            prefix.push(prefix[m] + 0.5 * (tail[m] + tail[m + 1]) / nf);
        }
        let own_against = |h: usize| -> f64 {
            let ys = laws[h].sorted_values();
            let total: f64 = ys
                .iter()
                .map(|&y| {
                    let m = law.count_le(y);
                    global.rank_weight(y) * (prefix[m] - m as f64 / nf * prefix[n])
                })
                .sum();
            total / ys.len() as f64
        };

        let s: Vec<Vec<f64>> = uppers
            .iter()
            .map(|u| xs.iter().map(|&x| u.at(x)).collect())
            .collect();
        sums.add_cross_terms(
            i,
            &weights,
            |h, l| covariance(&s[h], &s[l]),
            |h| covariance(&d, &s[h]),
            own_against,
        );

        influence_means.push(mean(&g));
        psi_means.push(-xs.iter().map(|&x| pooled_upper.at(x)).sum::<f64>() / nf);
    }

    let centre: f64 = -psi_means.iter().zip(&weights).map(|(m, p)| p * m).sum::<f64>();
    for (h, summary) in summaries.iter_mut().enumerate() {
        summary.conditional_mean = influence_means[h] + psi_means[h] + centre;
        summary.gap_scalar = summary.conditional_mean - summary.index_functional;
    }
    sums.finish(&weights, summaries)
}

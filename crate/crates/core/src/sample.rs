//! Income samples, their empirical distribution, and the poverty line.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Raw incomes with optional group labels and adult-equivalence divisors.
///
/// Incomes are finite and non-negative; divisors are finite and positive.
/// Labels and divisors, when present, have one entry per income.
#[derive(Debug, Clone, PartialEq)]
pub struct IncomeSample {
    values: Vec<f64>,
    group_labels: Option<Vec<String>>,
    equivalence_divisors: Option<Vec<f64>>,
}

impl IncomeSample {
    /// Wraps raw incomes. An empty sample is accepted here and rejected by
    /// every estimation routine.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidIncome { index, value });
        }
        Ok(Self {
            values,
            group_labels: None,
            equivalence_divisors: None,
        })
    }

    /// Attaches one group label per income.
    pub fn with_groups(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                field: "group labels",
                expected: self.values.len(),
                found: labels.len(),
            });
        }
        self.group_labels = Some(labels);
        Ok(self)
    }

    /// Attaches one adult-equivalence divisor per income.
    pub fn with_divisors(mut self, divisors: Vec<f64>) -> Result<Self> {
        if divisors.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                field: "equivalence divisors",
                expected: self.values.len(),
                found: divisors.len(),
            });
        }
        if let Some((index, &value)) = divisors
            .iter()
            .enumerate()
            .find(|(_, d)| !(d.is_finite() && **d > 0.0))
        {
            return Err(Error::InvalidDivisor { index, value });
        }
        self.equivalence_divisors = Some(divisors);
        Ok(self)
    }

    /// Raw incomes, before any equivalence scaling.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Group labels, if attached.
    pub fn group_labels(&self) -> Option<&[String]> {
        self.group_labels.as_deref()
    }

    /// Equivalence divisors, if attached.
    pub fn equivalence_divisors(&self) -> Option<&[f64]> {
        self.equivalence_divisors.as_deref()
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True when the sample holds no observation.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Incomes divided by their equivalence divisors (a copy of the raw
    /// incomes when no divisor is attached).
    pub fn adjusted_values(&self) -> Vec<f64> {
        match &self.equivalence_divisors {
            Some(divisors) => self
                .values
                .iter()
                .zip(divisors)
                .map(|(v, d)| v / d)
                .collect(),
            None => self.values.clone(),
        }
    }
}

/// Order statistics of a sample together with its mean.
///
/// The empirical CDF is right-continuous, `F_n(x) = #{X_i <= x} / n`, and the
/// quantile function is the left-continuous step function taking the value
/// `X_{j,n}` on `((j-1)/n, j/n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
    mean: f64,
}

impl EmpiricalDistribution {
    /// Sorts `values` and computes their mean.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, value) in values.iter_mut().enumerate() {
            if !(value.is_finite() && *value >= 0.0) {
                return Err(Error::InvalidIncome {
                    index,
                    value: *value,
                });
            }
            // -0.0 and 0.0 must sort and sum identically
            if *value == 0.0 {
                *value = 0.0;
            }
        }
        values.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(Error::DegenerateMean);
        }
        Ok(Self {
            sorted: values,
            mean,
        })
    }

    /// Order statistics `X_{1,n} <= ... <= X_{n,n}`.
    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    /// Sample mean `mu_n`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample size `n`.
    pub fn size(&self) -> usize {
        self.sorted.len()
    }

    /// Number of observations `<= x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }

    /// Number of observations `< x`.
    pub fn count_lt(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v < x)
    }

    /// Empirical CDF at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.size() as f64
    }

    /// Rank (1-based) of the order statistic returned by [`Self::quantile`]
    /// at level `s`: the smallest `j` with `j / n >= s`.
    pub fn quantile_rank(&self, s: f64) -> Result<usize> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::QuantileLevel(s));
        }
        let n = self.size();
        let nf = n as f64;
        let mut j = ((nf * s).ceil() as usize).clamp(1, n);
        // settle rounding in n * s so that j / n computed by callers maps back to j
        while j > 1 && (j - 1) as f64 / nf >= s {
            j -= 1;
        }
        while j < n && (j as f64) / nf < s {
            j += 1;
        }
        Ok(j)
    }

    /// Empirical quantile `X_{ceil(ns),n}` for `s` in `(0, 1]`.
    pub fn quantile(&self, s: f64) -> Result<f64> {
        Ok(self.sorted[self.quantile_rank(s)? - 1])
    }

    /// Number of poor observations under `config`.
    pub fn poor_count(&self, config: &PovertyConfig) -> usize {
        if config.strict_comparison {
            self.count_lt(config.poverty_line)
        } else {
            self.count_le(config.poverty_line)
        }
    }

    /// For every order statistic, the number of observations `<= X_{j,n}`
    /// (the last rank of its tie block). Equals `j` when there are no ties.
    pub(crate) fn upper_ranks(&self) -> Vec<usize> {
        let n = self.size();
        let mut ranks = alloc::vec![0; n];
        let mut end = n;
        for j in (0..n).rev() {
            if j + 1 < n && self.sorted[j] != self.sorted[j + 1] {
                end = j + 1;
            }
            ranks[j] = end;
        }
        ranks
    }
}

/// Builds the empirical distribution of a sample, dividing incomes by their
/// equivalence divisors first.
pub fn build_empirical(sample: &IncomeSample) -> Result<EmpiricalDistribution> {
    EmpiricalDistribution::from_values(sample.adjusted_values())
}

/// Poverty line and reporting options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovertyConfig {
    /// Poverty line `Z > 0`.
    pub poverty_line: f64,
    /// Confidence level of reported intervals, in `(0, 1)`.
    pub confidence_level: f64,
    /// Poor means `income < Z` when set, `income <= Z` otherwise.
    pub strict_comparison: bool,
}

impl PovertyConfig {
    /// Non-strict comparison at the 95% level.
    pub fn new(poverty_line: f64) -> Result<Self> {
        Self {
            poverty_line,
            confidence_level: 0.95,
            strict_comparison: false,
        }
        .validated()
    }

    /// Replaces the confidence level.
    pub fn with_confidence_level(mut self, level: f64) -> Result<Self> {
        self.confidence_level = level;
        self.validated()
    }

    /// Replaces the comparison flag.
    pub fn with_strict_comparison(mut self, strict: bool) -> Self {
        self.strict_comparison = strict;
        self
    }

    /// Checks the invariants of a hand-built configuration.
    pub fn validated(self) -> Result<Self> {
        if !(self.poverty_line > 0.0) || !self.poverty_line.is_finite() {
            return Err(Error::parameter(alloc::format!(
                "poverty line must be positive, got {}",
                self.poverty_line
            )));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::ConfidenceLevel(self.confidence_level));
        }
        Ok(self)
    }

    /// Whether an income counts as poor.
    #[inline]
    pub fn is_poor(&self, x: f64) -> bool {
        if self.strict_comparison {
            x < self.poverty_line
        } else {
            x <= self.poverty_line
        }
    }
}

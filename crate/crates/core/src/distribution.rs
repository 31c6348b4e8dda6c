//! Analytic income distributions and finite mixtures of them.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quadrature::{try_integrate, QuadratureSettings};
use crate::special::{normal_cdf, normal_quantile};

/// A continuous income law with closed-form CDF, quantile and moments.
///
/// The textual form (`Display` / `FromStr`) is `family:p1,p2`, for instance
/// `uniform:0,1`, `exponential:0.5`, `lognormal:0,1` or `pareto:1,3`.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticDistribution {
    /// Uniform on `[low, high]`.
    Uniform {
        /// Lower end of the support.
        low: f64,
        /// Upper end of the support.
        high: f64,
    },
    /// Exponential with the given rate (mean `1 / rate`).
    Exponential {
        /// Rate parameter.
        rate: f64,
    },
    /// `exp(N(mu, sigma^2))`.
    LogNormal {
        /// Mean of the logarithm.
        mu: f64,
        /// Standard deviation of the logarithm.
        sigma: f64,
    },
    /// Pareto type I, `F(x) = 1 - (scale / x)^shape` for `x >= scale`.
    Pareto {
        /// Minimum income.
        scale: f64,
        /// Tail index; must exceed 1 so the mean is finite.
        shape: f64,
    },
    /// Finite mixture `sum_i p_i F_i`.
    Mixture(Box<MixtureModel>),
}

/// One labelled component of a mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    /// Group identifier.
    pub label: String,
    /// Distribution of incomes within the group.
    pub distribution: AnalyticDistribution,
    /// Probability of drawing the group.
    pub weight: f64,
}

/// Population made of subgroups drawn with fixed probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    components: Vec<MixtureComponent>,
}

fn check(ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::parameter(message))
    }
}

impl AnalyticDistribution {
    /// Uniform law on `[low, high]`, `0 <= low < high`.
    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        check(
            low.is_finite() && high.is_finite() && low >= 0.0 && low < high,
            "uniform bounds must satisfy 0 <= low < high",
        )?;
        Ok(Self::Uniform { low, high })
    }

    /// Exponential law with positive rate.
    pub fn exponential(rate: f64) -> Result<Self> {
        check(rate.is_finite() && rate > 0.0, "exponential rate must be positive")?;
        Ok(Self::Exponential { rate })
    }

    /// Lognormal law with log-mean `mu` and log-sd `sigma > 0`.
    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        check(
            mu.is_finite() && sigma.is_finite() && sigma > 0.0,
            "lognormal needs finite mu and positive sigma",
        )?;
        Ok(Self::LogNormal { mu, sigma })
    }

    /// Pareto law with minimum `scale > 0` and tail index `shape > 1`.
    pub fn pareto(scale: f64, shape: f64) -> Result<Self> {
        check(
            scale.is_finite() && scale > 0.0 && shape.is_finite() && shape > 1.0,
            "pareto needs scale > 0 and shape > 1",
        )?;
        Ok(Self::Pareto { scale, shape })
    }

    /// Mixture of labelled components.
    pub fn mixture(model: MixtureModel) -> Self {
        Self::Mixture(Box::new(model))
    }

    /// Distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_cdf((x.ln() - mu) / sigma)
                }
            }
            Self::Pareto { scale, shape } => {
                if x <= *scale {
                    0.0
                } else {
                    -(shape * (scale / x).ln()).exp_m1()
                }
            }
            Self::Mixture(m) => m.iter().map(|c| c.weight * c.distribution.cdf(x)).sum(),
        }
    }

    /// Density.
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { low, high } => {
                if x >= *low && x <= *high {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
            Self::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Self::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - mu) / sigma;
                    (-0.5 * z * z).exp() / (x * sigma * (2.0 * core::f64::consts::PI).sqrt())
                }
            }
            Self::Pareto { scale, shape } => {
                if x < *scale {
                    0.0
                } else {
                    shape / x * (scale / x).powf(*shape)
                }
            }
            Self::Mixture(m) => m.iter().map(|c| c.weight * c.distribution.pdf(x)).sum(),
        }
    }

    /// Quantile function on `[0, 1]`; the end points map to the ends of the
    /// support (possibly infinite).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::QuantileLevel(u));
        }
        Ok(self.quantile_unchecked(u))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        match self {
            Self::Uniform { low, high } => low + u * (high - low),
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::LogNormal { mu, sigma } => (mu + sigma * normal_quantile(u)).exp(),
            Self::Pareto { scale, shape } => scale * (-(-u).ln_1p() / shape).exp(),
            Self::Mixture(m) => m.quantile(u),
        }
    }

    /// Mean `E X`.
    pub fn mean(&self) -> f64 {
        match self {
            Self::Uniform { low, high } => 0.5 * (low + high),
            Self::Exponential { rate } => 1.0 / rate,
            Self::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Self::Pareto { scale, shape } => shape * scale / (shape - 1.0),
            Self::Mixture(m) => m.iter().map(|c| c.weight * c.distribution.mean()).sum(),
        }
    }

    /// Second moment `E X^2`; infinite for Pareto tails with `shape <= 2`.
    pub fn second_moment(&self) -> f64 {
        match self {
            Self::Uniform { low, high } => (low * low + low * high + high * high) / 3.0,
            Self::Exponential { rate } => 2.0 / (rate * rate),
            Self::LogNormal { mu, sigma } => (2.0 * mu + 2.0 * sigma * sigma).exp(),
            Self::Pareto { scale, shape } => {
                if *shape > 2.0 {
                    shape * scale * scale / (shape - 2.0)
                } else {
                    f64::INFINITY
                }
            }
            Self::Mixture(m) => m
                .iter()
                .map(|c| c.weight * c.distribution.second_moment())
                .sum(),
        }
    }

    /// Partial moment `E[X^k ; X <= z]` for `k` in `0..=2`.
    pub fn partial_moment(&self, k: u32, z: f64) -> f64 {
        debug_assert!(k <= 2);
        if k == 0 {
            return self.cdf(z);
        }
        let kf = k as f64;
        match self {
            Self::Uniform { low, high } => {
                let c = z.clamp(*low, *high);
                (c.powi(k as i32 + 1) - low.powi(k as i32 + 1)) / ((kf + 1.0) * (high - low))
            }
            Self::Exponential { rate } => {
                if z <= 0.0 {
                    return 0.0;
                }
                let t = rate * z;
                let tail = (-t).exp();
                if k == 1 {
                    (-(-t).exp_m1() - t * tail) / rate
                } else {
                    (2.0 * -(-t).exp_m1() - tail * (t * t + 2.0 * t)) / (rate * rate)
                }
            }
            Self::LogNormal { mu, sigma } => {
                if z <= 0.0 {
                    return 0.0;
                }
                let s2 = sigma * sigma;
                (kf * mu + 0.5 * kf * kf * s2).exp() * normal_cdf((z.ln() - mu - kf * s2) / sigma)
            }
            Self::Pareto { scale, shape } => {
                if z <= *scale {
                    return 0.0;
                }
                let coef = shape * scale.powf(*shape);
                if (kf - shape).abs() < 1e-12 {
                    coef * (z / scale).ln()
                } else {
                    coef * (z.powf(kf - shape) - scale.powf(kf - shape)) / (kf - shape)
                }
            }
            Self::Mixture(m) => m
                .iter()
                .map(|c| c.weight * c.distribution.partial_moment(k, z))
                .sum(),
        }
    }

    /// Closed hull of the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Uniform { low, high } => (*low, *high),
            Self::Exponential { .. } | Self::LogNormal { .. } => (0.0, f64::INFINITY),
            Self::Pareto { scale, .. } => (*scale, f64::INFINITY),
            Self::Mixture(m) => m.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, c| {
                let (lo, hi) = c.distribution.support();
                (acc.0.min(lo), acc.1.max(hi))
            }),
        }
    }

    /// `E[phi(X) ; X <= z]` by quadrature on the probability scale of each
    /// non-mixture component, which keeps the integrand bounded for every
    /// shipped family.
    pub fn expect_below<F>(&self, z: f64, phi: &mut F, settings: &QuadratureSettings) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        match self {
            Self::Mixture(m) => {
                let mut total = 0.0;
                for c in m.iter() {
                    total += c.weight * c.distribution.expect_below(z, phi, settings)?;
                }
                Ok(total)
            }
            _ => {
                let top = self.cdf(z);
                if top <= 0.0 {
                    return Ok(0.0);
                }
                let estimate = try_integrate(|u| phi(self.quantile_unchecked(u)), 0.0, top, settings)?;
                Ok(estimate.value)
            }
        }
    }
}

impl fmt::Display for AnalyticDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { low, high } => write!(f, "uniform:{low},{high}"),
            Self::Exponential { rate } => write!(f, "exponential:{rate}"),
            Self::LogNormal { mu, sigma } => write!(f, "lognormal:{mu},{sigma}"),
            Self::Pareto { scale, shape } => write!(f, "pareto:{scale},{shape}"),
            Self::Mixture(m) => {
                write!(f, "mixture[")?;
                for (i, c) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{}={}*{}", c.label, c.weight, c.distribution)?;
                }
                write!(f, "]")
            }
        }
    }
}

impl FromStr for AnalyticDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, params) = s
            .split_once(':')
            .ok_or_else(|| Error::parameter(alloc::format!("model `{s}` is not of the form family:params")))?;
        let values = params
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<core::result::Result<Vec<f64>, _>>()
            .map_err(|_| Error::parameter(alloc::format!("model `{s}` has a non-numeric parameter")))?;
        let arity = |n: usize| {
            if values.len() == n {
                Ok(())
            } else {
                Err(Error::parameter(alloc::format!(
                    "model `{s}` needs {n} parameter(s), got {}",
                    values.len()
                )))
            }
        };
        match family.trim().to_ascii_lowercase().as_str() {
            "uniform" => arity(2).and_then(|_| Self::uniform(values[0], values[1])),
            "exponential" | "exp" => arity(1).and_then(|_| Self::exponential(values[0])),
            "lognormal" => arity(2).and_then(|_| Self::lognormal(values[0], values[1])),
            "pareto" => arity(2).and_then(|_| Self::pareto(values[0], values[1])),
            other => Err(Error::parameter(alloc::format!("unknown distribution family `{other}`"))),
        }
    }
}

impl MixtureComponent {
    /// Labelled component.
    pub fn new(label: impl Into<String>, distribution: AnalyticDistribution, weight: f64) -> Self {
        Self {
            label: label.into(),
            distribution,
            weight,
        }
    }
}

impl MixtureModel {
    /// Validates weights (positive, summing to one within `1e-12`) and label
    /// uniqueness.
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::parameter("a mixture needs at least one component"));
        }
        for c in &components {
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(Error::parameter(alloc::format!(
                    "component `{}` has non-positive weight {}",
                    c.label,
                    c.weight
                )));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::parameter(alloc::format!("mixture weights sum to {total}, not 1")));
        }
        for (i, c) in components.iter().enumerate() {
            if components[..i].iter().any(|d| d.label == c.label) {
                return Err(Error::parameter(alloc::format!("duplicate component label `{}`", c.label)));
            }
        }
        Ok(Self { components })
    }

    /// Mixture of unlabelled components, labelled `g1`, `g2`, ...
    pub fn from_weighted(parts: Vec<(AnalyticDistribution, f64)>) -> Result<Self> {
        Self::new(
            parts
                .into_iter()
                .enumerate()
                .map(|(i, (d, w))| MixtureComponent::new(alloc::format!("g{}", i + 1), d, w))
                .collect(),
        )
    }

    /// Components in declaration order.
    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    /// Iterator over the components.
    pub fn iter(&self) -> core::slice::Iter<'_, MixtureComponent> {
        self.components.iter()
    }

    /// Number of components.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    /// Always false; a mixture has at least one component.
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Component labels in order.
    pub fn labels(&self) -> Vec<String> {
        self.components.iter().map(|c| c.label.to_string()).collect()
    }

    /// Position of the component with the given label.
    pub fn position(&self, label: &str) -> Option<usize> {
        self.components.iter().position(|c| c.label == label)
    }

    /// Mixture quantile by safeguarded Newton iteration inside the bracket
    /// spanned by the component quantiles.
    fn quantile(&self, u: f64) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in &self.components {
            let q = c.distribution.quantile_unchecked(u);
            lo = lo.min(q);
            hi = hi.max(q);
        }
        if !(lo < hi) || !hi.is_finite() {
            return if lo.is_finite() { lo } else { hi };
        }
        let cdf = |x: f64| self.components.iter().map(|c| c.weight * c.distribution.cdf(x)).sum::<f64>();
        let pdf = |x: f64| self.components.iter().map(|c| c.weight * c.distribution.pdf(x)).sum::<f64>();
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let err = cdf(x) - u;
            if err == 0.0 {
                return x;
            }
            if err < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let density = pdf(x);
            let newton = x - err / density;
            let next = if density > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                return next;
            }
            x = next;
        }
        x
    }
}

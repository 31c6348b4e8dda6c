//! Globally adaptive Gauss–Legendre quadrature.
//!
//! Each panel is integrated with a 10-point Gauss–Legendre rule, once over
//! the whole panel and once over its two halves; the difference is the
//! panel's error estimate. The panel with the largest estimate is bisected
//! until the summed estimate drops below the tolerance.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// Tolerances and panel budget of the adaptive rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Absolute tolerance on the summed error estimate.
    pub abs_tol: f64,
    /// Relative tolerance, applied to the magnitude of the running estimate.
    /// Convergence is declared when the error is below either bound.
    pub rel_tol: f64,
    /// Maximum number of panels before giving up.
    pub max_panels: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-12,
            max_panels: 1 << 20,
        }
    }
}

impl QuadratureSettings {
    /// Default settings with a different absolute tolerance.
    pub fn with_tolerance(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    /// Settings for an integral nested inside another one: a hundred times
    /// tighter, so that inner errors stay below the outer error estimate.
    pub fn nested(&self) -> Self {
        Self {
            abs_tol: self.abs_tol * 1e-2,
            rel_tol: self.rel_tol * 1e-2,
            max_panels: self.max_panels,
        }
    }

    fn split(&self, parts: usize) -> Self {
        Self {
            abs_tol: self.abs_tol / parts.max(1) as f64,
            ..*self
        }
    }
}

/// Value of an integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    /// Integral estimate.
    pub value: f64,
    /// Summed absolute error estimate.
    pub error: f64,
    /// Number of panels in the final partition.
    pub panels: usize,
}

// Positive nodes and weights of the 10-point rule on [-1, 1].
const NODES: [f64; 5] = [
    0.148_874_338_981_631_210_88,
    0.433_395_394_129_247_190_8,
    0.679_409_568_299_024_406_23,
    0.865_063_366_688_984_510_73,
    0.973_906_528_517_171_720_08,
];
const WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_870_17,
    0.269_266_719_309_996_355_09,
    0.219_086_362_515_982_044,
    0.149_451_349_150_580_593_15,
    0.066_671_344_308_688_137_594,
];

/// One application of the 10-point rule on `[a, b]`.
pub fn gauss_legendre<F>(mut f: F, a: f64, b: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
        sum += w * (f(mid - half * x)? + f(mid + half * x)?);
    }
    Ok(sum * half)
}

struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn refine<F>(f: &mut F, a: f64, b: f64, whole: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mid = 0.5 * (a + b);
    let left = gauss_legendre(&mut *f, a, mid)?;
    let right = gauss_legendre(&mut *f, mid, b)?;
    let error = (whole - (left + right)).abs();
    Ok(Panel {
        a,
        b,
        left,
        right,
        error,
    })
}

/// Adaptive integral of a fallible integrand over `[a, b]`.
///
/// Integrand errors are propagated unchanged; this is how nested integrals
/// report an inner failure.
pub fn try_integrate<F>(mut f: F, a: f64, b: f64, settings: &QuadratureSettings) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::parameter("integration bounds must be finite"));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    if b < a {
        let reversed = try_integrate(f, b, a, settings)?;
        return Ok(Estimate {
            value: -reversed.value,
            ..reversed
        });
    }

    let whole = gauss_legendre(&mut f, a, b)?;
    let first = refine(&mut f, a, b, whole)?;
    let mut value = first.left + first.right;
    let mut error = first.error;
    // error of panels too narrow to bisect further
    let mut frozen_error = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    let converged = |value: f64, error: f64| {
        error <= settings.abs_tol || error <= settings.rel_tol * value.abs()
    };

    while !converged(value, error + frozen_error) {
        if heap.len() >= settings.max_panels {
            return Err(Error::Quadrature {
                achieved: error + frozen_error,
                requested: settings.abs_tol,
                panels: heap.len(),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            frozen_error += worst.error;
            error -= worst.error;
            continue;
        }
        let left = refine(&mut f, worst.a, mid, worst.left)?;
        let right = refine(&mut f, mid, worst.b, worst.right)?;
        value += (left.left + left.right + right.left + right.right) - (worst.left + worst.right);
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);

        if converged(value, error + frozen_error) || heap.is_empty() {
            // re-sum to shed the drift of the running updates
            value = heap.iter().map(|p| p.left + p.right).sum();
            error = heap.iter().map(|p| p.error).sum();
        }
    }

    let panels = heap.len();
    let mut parts: alloc::vec::Vec<Panel> = heap.into_vec();
    parts.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = parts.iter().map(|p| p.left + p.right).sum();
    Ok(Estimate {
        value,
        error: error + frozen_error,
        panels,
    })
}

/// Adaptive integral of an infallible integrand over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, settings: &QuadratureSettings) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, settings)
}

/// Integral over consecutive breakpoints, integrating each piece
/// separately. Breakpoints must be non-decreasing.
pub fn try_integrate_pieces<F>(
    mut f: F,
    breakpoints: &[f64],
    settings: &QuadratureSettings,
) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    let pieces = breakpoints.len().saturating_sub(1);
    let local = settings.split(pieces);
    let mut total = Estimate {
        value: 0.0,
        error: 0.0,
        panels: 0,
    };
    for w in breakpoints.windows(2) {
        let piece = try_integrate(&mut f, w[0], w[1], &local)?;
        total.value += piece.value;
        total.error += piece.error;
        total.panels += piece.panels;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_polynomials_up_to_degree_19() {
        for degree in 0..20 {
            let got = gauss_legendre(|x| Ok(x.powi(degree)), 0.0, 1.0).unwrap();
            let exact = 1.0 / (degree as f64 + 1.0);
            assert!((got - exact).abs() < 1e-15, "degree {degree}");
        }
    }

    #[test]
    fn weights_sum_to_interval_length() {
        let total: f64 = WEIGHTS.iter().sum::<f64>() * 2.0;
        assert!((total - 2.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_and_kinked_integrands() {
        let s = QuadratureSettings::default();
        let e = integrate(|x| x.exp(), 0.0, 2.0, &s).unwrap();
        assert!((e.value - (2.0f64.exp() - 1.0)).abs() < 1e-12);

        let kink = integrate(|x| (x - 0.3).abs(), 0.0, 1.0, &s).unwrap();
        assert!((kink.value - (0.045 + 0.245)).abs() < 1e-8);

        // integrable log singularity at the left end
        let log = integrate(|x| -x.ln(), 0.0, 1.0, &s).unwrap();
        assert!((log.value - 1.0).abs() < 1e-8, "{}", log.value);
    }

    #[test]
    fn reversed_and_empty_ranges() {
        let s = QuadratureSettings::default();
        assert_eq!(integrate(|x| x, 1.0, 1.0, &s).unwrap().value, 0.0);
        let r = integrate(|x| x, 1.0, 0.0, &s).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn reports_non_convergence() {
        let s = QuadratureSettings {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_panels: 8,
        };
        let err = integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, &s).unwrap_err();
        assert!(matches!(err, Error::Quadrature { panels: 8, .. }), "{err:?}");
    }

    #[test]
    fn integrand_errors_propagate() {
        let s = QuadratureSettings::default();
        let err = try_integrate(|_| Err(Error::EmptySample), 0.0, 1.0, &s).unwrap_err();
        assert_eq!(err, Error::EmptySample);
    }

    #[test]
    fn pieces_follow_breakpoints() {
        let s = QuadratureSettings::default();
        let step = |x: f64| Ok(if x < 0.5 { 1.0 } else { 3.0 });
        let e = try_integrate_pieces(step, &[0.0, 0.5, 1.0], &s).unwrap();
        assert!((e.value - 2.0).abs() < 1e-15);
    }
}

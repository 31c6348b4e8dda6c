//! Integrals against the Brownian bridge covariance `min(s, t) - s t`.
//!
//! Plug-in variances integrate step functions on the quantile cells
//! `((j-1)/n, j/n]` against this kernel. Three evaluations are provided:
//! the literal double sum over cells, an equivalent single pass through the
//! integrated weight function, and nested quadrature.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::quadrature::{try_integrate_pieces, Estimate, QuadratureSettings};

/// `int_a^b int_c^d (min(s, t) - s t) dt ds` for a rectangle inside the unit
/// square.
pub fn bridge_cell_integral(a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    let inside = |lo: f64, hi: f64| (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo <= hi;
    if !(inside(a, b) && inside(c, d)) {
        return Err(Error::RectangleBounds { a, b, c, d });
    }
    Ok(cell(a, b, c, d))
}

// [a, b] entirely below [c, d]: min(s, t) = s and the kernel is s (1 - t)
#[inline]
fn ordered(a: f64, b: f64, c: f64, d: f64) -> f64 {
    ((b - a) * (a + b) / 2.0) * ((d - c) * (2.0 - c - d) / 2.0)
}

#[inline]
fn square(o: f64, p: f64) -> f64 {
    let w = p - o;
    w * w * ((p + 2.0 * o) / 3.0 - (p + o) * (p + o) / 4.0)
}

#[inline]
fn disjoint(a: f64, b: f64, c: f64, d: f64) -> f64 {
    if b - a == 0.0 || d - c == 0.0 {
        0.0
    } else if b <= c {
        ordered(a, b, c, d)
    } else {
        ordered(c, d, a, b)
    }
}

fn cell(a: f64, b: f64, c: f64, d: f64) -> f64 {
    if b <= c || d <= a {
        return disjoint(a, b, c, d);
    }
    if a == c && b == d {
        return square(a, b);
    }
    let lo = a.max(c);
    let hi = b.min(d);
    let s_pieces = [(a, lo), (lo, hi), (hi, b)];
    let t_pieces = [(c, lo), (lo, hi), (hi, d)];
    let mut total = 0.0;
    for (i, &(sa, sb)) in s_pieces.iter().enumerate() {
        for (j, &(tc, td)) in t_pieces.iter().enumerate() {
            total += if i == 1 && j == 1 {
                square(lo, hi)
            } else {
                disjoint(sa, sb, tc, td)
            };
        }
    }
    total
}

/// Literal double sum `sum_{j,k} w_j w_k B(cell_j, cell_k)` over the cells
/// `((j-1)/n, j/n]`. Quadratic in `n`; kept as the reference evaluation.
pub fn bridge_quadratic_form_pairwise(weights: &[f64]) -> f64 {
    let n = weights.len();
    let nf = n as f64;
    let mut total = 0.0;
    for (j, wj) in weights.iter().enumerate() {
        if *wj == 0.0 {
            continue;
        }
        let (a, b) = (j as f64 / nf, (j + 1) as f64 / nf);
        let mut row = 0.0;
        for (k, wk) in weights.iter().enumerate() {
            if *wk != 0.0 {
                row += wk * cell(a, b, k as f64 / nf, (k + 1) as f64 / nf);
            }
        }
        total += wj * row;
    }
    total
}

/// Values `R(k/n) = int_{k/n}^1 w(s) ds`, `k = 0..=n`, of the integrated
/// step weight.
pub fn integrated_weights(weights: &[f64]) -> Vec<f64> {
    let n = weights.len();
    let nf = n as f64;
    let mut tail = alloc::vec![0.0; n + 1];
    let mut acc = 0.0;
    for k in (0..n).rev() {
        acc += weights[k];
        tail[k] = acc / nf;
    }
    tail
}

/// Same value as [`bridge_quadratic_form_pairwise`] in a single pass.
///
/// The double integral equals the variance of `R(U)` for `U` uniform, where
/// `R(u) = int_u^1 w(s) ds` is piecewise linear on the cells.
pub fn bridge_quadratic_form(weights: &[f64]) -> f64 {
    let n = weights.len();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let tail = integrated_weights(weights);
    let centre: f64 = tail.windows(2).map(|p| 0.5 * (p[0] + p[1])).sum::<f64>() / nf;
    let spread: f64 = tail
        .windows(2)
        .map(|p| {
            let (x, y) = (p[0] - centre, p[1] - centre);
            (x * x + x * y + y * y) / 3.0
        })
        .sum();
    spread / nf
}

/// Nested adaptive quadrature of the same double integral, split at the
/// cell boundaries and at the diagonal.
pub fn bridge_quadratic_form_quadrature(weights: &[f64], settings: &QuadratureSettings) -> Result<Estimate> {
    let n = weights.len();
    let nf = n as f64;
    let knots: Vec<f64> = (0..=n).map(|k| k as f64 / nf).collect();
    let step = |x: f64| weights[((x * nf) as usize).min(n - 1)];
    let inner_settings = settings.nested();
    let mut inner_knots = Vec::with_capacity(n + 2);
    let outer = |s: f64| -> Result<f64> {
        inner_knots.clear();
        inner_knots.extend(knots.iter().copied().filter(|&k| k < s));
        inner_knots.push(s);
        inner_knots.extend(knots.iter().copied().filter(|&k| k > s));
        let inner = try_integrate_pieces(
            |t| Ok(step(t) * (s.min(t) - s * t)),
            &inner_knots,
            &inner_settings,
        )?;
        Ok(step(s) * inner.value)
    };
    try_integrate_pieces(outer, &knots, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::try_integrate;

    fn antiderivative(x: f64, y: f64) -> f64 {
        let (m, big) = if x <= y { (x, y) } else { (y, x) };
        m * m * big / 2.0 - m * m * m / 6.0 - x * x * y * y / 4.0
    }

    fn by_antiderivative(a: f64, b: f64, c: f64, d: f64) -> f64 {
        antiderivative(b, d) - antiderivative(a, d) - antiderivative(b, c) + antiderivative(a, c)
    }

    fn by_quadrature(a: f64, b: f64, c: f64, d: f64) -> f64 {
        let s = QuadratureSettings::with_tolerance(1e-14);
        try_integrate(
            |x| {
                let mut knots = alloc::vec![c];
                if x > c && x < d {
                    knots.push(x);
                }
                knots.push(d);
                Ok(try_integrate_pieces(|t| Ok(x.min(t) - x * t), &knots, &s.nested())?.value)
            },
            a,
            b,
            &s,
        )
        .unwrap()
        .value
    }

    #[test]
    fn reference_rectangles() {
        assert!((bridge_cell_integral(0.0, 1.0, 0.0, 1.0).unwrap() - 1.0 / 12.0).abs() < 1e-16);
        assert!((bridge_cell_integral(0.0, 0.5, 0.5, 1.0).unwrap() - 1.0 / 64.0).abs() < 1e-16);
    }

    #[test]
    fn agrees_with_antiderivative_and_quadrature() {
        let rects = [
            (0.1, 0.4, 0.2, 0.9),
            (0.3, 0.35, 0.0, 1.0),
            (0.0, 0.7, 0.6, 0.8),
            (0.25, 0.5, 0.25, 0.5),
            (0.5, 0.9, 0.1, 0.3),
            (0.2, 0.2, 0.1, 0.9),
        ];
        for (a, b, c, d) in rects {
            let v = bridge_cell_integral(a, b, c, d).unwrap();
            assert!((v - by_antiderivative(a, b, c, d)).abs() < 1e-15, "{a} {b} {c} {d}");
            assert!((v - by_quadrature(a, b, c, d)).abs() < 1e-10, "{a} {b} {c} {d}");
            assert!((v - bridge_cell_integral(c, d, a, b).unwrap()).abs() < 1e-16);
        }
    }

    #[test]
    fn rejects_rectangles_outside_the_square() {
        assert!(matches!(
            bridge_cell_integral(-0.1, 0.5, 0.0, 1.0),
            Err(Error::RectangleBounds { .. })
        ));
        assert!(bridge_cell_integral(0.6, 0.5, 0.0, 1.0).is_err());
        assert!(bridge_cell_integral(0.0, 0.5, 0.0, 1.5).is_err());
    }

    #[test]
    fn single_pass_matches_pairwise_sum() {
        let weights: Vec<f64> = (0..37).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        let fast = bridge_quadratic_form(&weights);
        let slow = bridge_quadratic_form_pairwise(&weights);
        assert!((fast - slow).abs() < 1e-12 * slow.abs().max(1.0), "{fast} {slow}");
        assert!(fast >= 0.0);
        assert_eq!(bridge_quadratic_form(&[]), 0.0);
    }

    #[test]
    fn constant_weight_gives_the_full_square() {
        assert!((bridge_quadratic_form(&[1.0; 10]) - 1.0 / 12.0).abs() < 1e-15);
    }
}

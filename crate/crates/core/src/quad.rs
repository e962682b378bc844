//! Gauss–Legendre quadrature on real intervals and on straight complex
//! segments, with bisection-based adaptivity.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Panel order used by the adaptive segment integrator.
const PANEL_ORDER: usize = 20;
const MAX_DEPTH: usize = 40;

/// Nodes and weights of the `n`-point rule on [-1, 1].
pub fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("quadrature order must be positive");
    GaussLegendre::new(n).as_node_weight_pairs().to_vec()
}

fn panel_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(PANEL_ORDER))
}

/// Fixed-order rule mapped to [a, b].
pub fn integrate_interval<F: FnMut(f64) -> f64>(
    rule: &[(f64, f64)],
    a: f64,
    b: f64,
    mut f: F,
) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    rule.iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn panel<const K: usize, F>(a: Complex64, b: Complex64, f: &F) -> [Complex64; K]
where
    F: Fn(Complex64) -> [Complex64; K],
{
    let half = (b - a) * 0.5;
    let mid = (b + a) * 0.5;
    let mut acc = [Complex64::new(0.0, 0.0); K];
    for &(x, w) in panel_rule() {
        let v = f(mid + half * x);
        for (s, vi) in acc.iter_mut().zip(v) {
            *s += vi * w;
        }
    }
    acc.map(|s| s * half)
}

fn norm<const K: usize>(v: &[Complex64; K]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Integrates a vector-valued holomorphic integrand along the straight
/// segment from `a` to `b`. Panels are bisected until the one-panel and
/// two-panel estimates agree to `tol` (absolute, scaled by the local
/// magnitude when that exceeds one).
pub fn integrate_segment<const K: usize, F>(
    a: Complex64,
    b: Complex64,
    tol: f64,
    f: F,
) -> Result<[Complex64; K]>
where
    F: Fn(Complex64) -> [Complex64; K],
{
    let mut total = [Complex64::new(0.0, 0.0); K];
    if a == b {
        return Ok(total);
    }
    let whole = panel(a, b, &f);
    let mut stack = vec![(a, b, whole, 0usize)];
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = (lo + hi) * 0.5;
        let left = panel(lo, mid, &f);
        let right = panel(mid, hi, &f);
        let mut refined = left;
        for (r, x) in refined.iter_mut().zip(right) {
            *r += x;
        }
        let mut diff = refined;
        for (d, e) in diff.iter_mut().zip(est) {
            *d -= e;
        }
        let scale = norm(&refined).max(1.0);
        if norm(&diff) <= tol * scale {
            for (t, r) in total.iter_mut().zip(refined) {
                *t += r;
            }
        } else if depth >= MAX_DEPTH {
            return Err(Error::Quadrature { a: lo, b: hi });
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_rule_is_exact_for_low_degree() {
        let rule = legendre_rule(5);
        let v = integrate_interval(&rule, 0.0, 2.0, |x| x.powi(9));
        assert!((v - 102.4).abs() < 1e-12);
    }

    #[test]
    fn segment_integral_of_exponential() {
        let a = Complex64::new(0.0, 0.0);
        let b = Complex64::new(0.3, 0.8);
        let [v] = integrate_segment(a, b, 1e-13, |z| [z.exp()]).unwrap();
        let exact = b.exp() - 1.0;
        assert!((v - exact).norm() < 1e-13);
    }

    #[test]
    fn segment_integral_near_pole_refines() {
        // 1/(1 - z) from 0 to 0.999: log(1000)
        let a = Complex64::new(0.0, 0.0);
        let b = Complex64::new(0.999, 0.0);
        let [v] = integrate_segment(a, b, 1e-13, |z| [1.0 / (1.0 - z)]).unwrap();
        assert!((v.re - 1000f64.ln()).abs() < 1e-11, "{v}");
    }
}

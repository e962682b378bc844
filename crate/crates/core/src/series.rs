//! Truncated Laurent series in a local variable t = ζ − ζ₀.

use num_complex::Complex64;

/// `Σ coef[n] t^(val + n)`, known through order `val + coef.len() - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub val: i32,
    pub coef: Vec<Complex64>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Series {
    pub fn new(val: i32, coef: Vec<Complex64>) -> Self {
        Self { val, coef }
    }

    pub fn constant(c: Complex64, len: usize) -> Self {
        let mut coef = vec![zero(); len];
        coef[0] = c;
        Self { val: 0, coef }
    }

    /// Taylor expansion of a polynomial (ascending coefficients) at `center`.
    pub fn from_poly(coeffs: &[Complex64], center: Complex64, len: usize) -> Self {
        // Taylor shift by repeated synthetic division.
        let mut work: Vec<Complex64> = coeffs.to_vec();
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            if work.is_empty() {
                out.push(zero());
                continue;
            }
            let mut rem = zero();
            let mut quotient = vec![zero(); work.len().saturating_sub(1)];
            for i in (0..work.len()).rev() {
                rem = rem * center + work[i];
                if i > 0 {
                    quotient[i - 1] = rem;
                }
            }
            out.push(rem);
            work = quotient;
        }
        Self { val: 0, coef: out }
    }

    pub fn len(&self) -> usize {
        self.coef.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coef.is_empty()
    }

    /// Declares the first `m` coefficients to be zero (they are numerically
    /// negligible by construction) and shifts the valuation.
    pub fn strip(mut self, m: usize) -> Self {
        let m = m.min(self.coef.len());
        self.coef.drain(..m);
        self.val += m as i32;
        self
    }

    /// Strips leading coefficients that are exactly zero.
    pub fn normalize(self) -> Self {
        let m = self.coef.iter().take_while(|c| **c == zero()).count();
        self.strip(m)
    }

    pub fn truncate(mut self, len: usize) -> Self {
        self.coef.truncate(len);
        self
    }

    /// Coefficient of t^k.
    pub fn at(&self, k: i32) -> Complex64 {
        let i = k - self.val;
        if i < 0 || i as usize >= self.coef.len() {
            zero()
        } else {
            self.coef[i as usize]
        }
    }

    pub fn scale(mut self, s: Complex64) -> Self {
        for c in &mut self.coef {
            *c *= s;
        }
        self
    }

    pub fn mul(&self, other: &Series) -> Series {
        let len = self.len().min(other.len());
        let mut coef = vec![zero(); len];
        for (i, a) in self.coef.iter().enumerate().take(len) {
            for (j, b) in other.coef.iter().enumerate().take(len - i) {
                coef[i + j] += a * b;
            }
        }
        Series {
            val: self.val + other.val,
            coef,
        }
    }

    /// Multiplicative inverse; the leading coefficient must be nonzero.
    pub fn inv(&self) -> Series {
        let len = self.len();
        let a0 = self.coef[0];
        assert!(
            a0 != zero(),
            "series inverse of a series with zero leading coefficient"
        );
        let mut out = vec![zero(); len];
        out[0] = 1.0 / a0;
        for n in 1..len {
            let mut s = zero();
            for k in 1..=n {
                s += self.coef[k] * out[n - k];
            }
            out[n] = -s / a0;
        }
        Series {
            val: -self.val,
            coef: out,
        }
    }

    pub fn div(&self, other: &Series) -> Series {
        self.mul(&other.inv())
    }

    pub fn add(&self, other: &Series) -> Series {
        let val = self.val.min(other.val);
        let top = (self.val + self.len() as i32).min(other.val + other.len() as i32);
        let len = (top - val).max(0) as usize;
        let coef = (0..len)
            .map(|n| self.at(val + n as i32) + other.at(val + n as i32))
            .collect();
        Series { val, coef }
    }

    pub fn deriv(&self) -> Series {
        let coef: Vec<Complex64> = self
            .coef
            .iter()
            .enumerate()
            .map(|(n, c)| c * (self.val + n as i32) as f64)
            .collect();
        if self.val == 0 {
            Series {
                val: 0,
                coef: coef[1..].to_vec(),
            }
        } else {
            Series {
                val: self.val - 1,
                coef,
            }
        }
    }

    /// Antiderivative vanishing at t = 0. Requires no t^-1 term and val ≥ 0.
    pub fn integrate(&self) -> Series {
        assert!(
            self.val >= 0,
            "antiderivative of a series with a principal part"
        );
        let coef = self
            .coef
            .iter()
            .enumerate()
            .map(|(n, c)| c / (self.val + n as i32 + 1) as f64)
            .collect();
        Series {
            val: self.val + 1,
            coef,
        }
    }

    /// Drops every term with negative exponent.
    pub fn regular_part(&self) -> Series {
        if self.val >= 0 {
            return self.clone();
        }
        let skip = (-self.val) as usize;
        Series {
            val: 0,
            coef: self.coef.iter().skip(skip).copied().collect(),
        }
    }

    /// Largest coefficient magnitude among negative-exponent terms.
    pub fn principal_norm(&self) -> f64 {
        (self.val..0).map(|k| self.at(k).norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        let mut acc = zero();
        for c in self.coef.iter().rev() {
            acc = acc * t + c;
        }
        acc * t.powi(self.val)
    }

    /// n-th derivative at t = 0 of a Taylor series (val ≥ 0).
    pub fn derivative_at_center(&self, n: usize) -> Complex64 {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        self.at(n as i32) * fact
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn taylor_shift_of_square() {
        // z^2 at 1: 1 + 2t + t^2
        let s = Series::from_poly(&[zero(), zero(), c(1.0, 0.0)], c(1.0, 0.0), 4);
        assert_eq!(s.coef, vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), zero()]);
    }

    #[test]
    fn inverse_of_geometric() {
        // 1/(1 - t) = Σ t^n
        let s = Series::new(0, vec![c(1.0, 0.0), c(-1.0, 0.0), zero(), zero(), zero()]);
        let inv = s.inv();
        for k in 0..5 {
            assert!((inv.coef[k] - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn laurent_division_tracks_valuation() {
        // (t + t^2) / t^3 = t^-2 + t^-1
        let num = Series::new(1, vec![c(1.0, 0.0), c(1.0, 0.0), zero(), zero()]);
        let den = Series::new(3, vec![c(1.0, 0.0), zero(), zero(), zero()]);
        let q = num.div(&den);
        assert_eq!(q.val, -2);
        assert_eq!(q.at(-2), c(1.0, 0.0));
        assert_eq!(q.at(-1), c(1.0, 0.0));
        assert!(q.principal_norm() > 0.5);
        assert_eq!(q.regular_part().at(0), zero());
    }

    #[test]
    fn integrate_then_derive_roundtrip() {
        let s = Series::new(0, vec![c(1.0, 2.0), c(0.5, 0.0), c(0.0, -1.0)]);
        let back = s.integrate().deriv();
        assert_eq!(back.val, 0);
        for k in 0..3 {
            assert!((back.coef[k] - s.coef[k]).norm() < 1e-15);
        }
    }
}

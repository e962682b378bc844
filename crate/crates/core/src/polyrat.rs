//! Complex polynomials and rational maps of the disk.
//!
//! Two coefficient modes are kept strictly apart: [`ComplexPoly`] /
//! [`RationalMap`] work in floating point and carry the evaluation
//! pipelines, while [`ExactPoly`] / [`ExactRationalMap`] hold Gaussian
//! rationals for identity checks. Converting from exact to float is the
//! only direction offered, and it is always an explicit call.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Series;

/// Largest polynomial degree accepted in a [`RationalMap`].
pub const DEGREE_CAP: usize = 20;
/// Roots closer than this (relative) are treated as one multiple root.
pub const ROOT_CLUSTER_TOL: f64 = 1e-7;
/// Numerator and denominator roots closer than this cancel on reduction.
pub const CANCEL_TOL: f64 = 1e-9;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Polynomial with ascending-degree complex coefficients. The zero
/// polynomial is the empty coefficient vector.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == czero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn one() -> Self {
        Self::new(vec![Complex64::new(1.0, 0.0)])
    }

    /// ζ^k
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![czero(); k + 1];
        c[k] = Complex64::new(1.0, 0.0);
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(czero(), |acc, c| acc * z + c)
    }

    pub fn deriv(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::default();
        }
        let mut out = vec![czero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Self, k: usize| p.coeffs.get(k).copied().unwrap_or_default();
        Self::new((0..n).map(|k| get(self, k) + get(other, k)).collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn conj_coeffs(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// ζ^deg · p*(1/ζ): conjugated coefficients in reverse order.
    pub fn conj_reversed(&self) -> Self {
        Self::new(self.coeffs.iter().rev().map(|c| c.conj()).collect())
    }

    /// Multiplies by ζ^k.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![czero(); k];
        c.extend_from_slice(&self.coeffs);
        Self::new(c)
    }

    /// Multiplicity of the root at exactly zero.
    pub fn valuation(&self) -> usize {
        self.coeffs.iter().take_while(|c| **c == czero()).count()
    }

    /// Quotient of synthetic division by (ζ − r); the remainder is dropped.
    pub fn deflate(&self, r: Complex64) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::default();
        }
        let mut q = vec![czero(); n - 1];
        let mut acc = czero();
        for i in (1..n).rev() {
            acc = acc * r + self.coeffs[i];
            q[i - 1] = acc;
        }
        Self::new(q)
    }

    /// Roots with multiplicities. Exact zero roots are read off the
    /// coefficient vector; the rest come from the eigenvalues of the
    /// companion matrix with one Newton polish step, then clustering.
    pub fn roots(&self) -> Result<Vec<(Complex64, usize)>> {
        if self.degree() == 0 {
            return Ok(Vec::new());
        }
        let v = self.valuation();
        let rest = Self::new(self.coeffs[v..].to_vec());
        let n = rest.degree();
        let mut roots = Vec::with_capacity(n + 1);
        if n > 0 {
            let lead = rest.coeffs[n];
            let mut comp = DMatrix::<Complex64>::zeros(n, n);
            for i in 1..n {
                comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
            }
            for i in 0..n {
                comp[(i, n - 1)] = -rest.coeffs[i] / lead;
            }
            let eig = nalgebra::linalg::Schur::new(comp)
                .eigenvalues()
                .ok_or_else(|| Error::RootFinding {
                    coefficients: self.coeffs.clone(),
                })?;
            let dp = rest.deriv();
            for z in eig.iter() {
                let d = dp.eval(*z);
                let polished = if d.norm() > 1e-14 {
                    z - rest.eval(*z) / d
                } else {
                    *z
                };
                if !polished.re.is_finite() || !polished.im.is_finite() {
                    return Err(Error::RootFinding {
                        coefficients: self.coeffs.clone(),
                    });
                }
                roots.push(polished);
            }
        }
        let mut clusters = cluster_roots(&roots);
        if v > 0 {
            clusters.push((czero(), v));
        }
        Ok(clusters)
    }
}

fn cluster_roots(roots: &[Complex64]) -> Vec<(Complex64, usize)> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![roots[i]];
        for j in i + 1..roots.len() {
            if !used[j]
                && (roots[j] - roots[i]).norm() <= ROOT_CLUSTER_TOL * roots[i].norm().max(1.0)
            {
                used[j] = true;
                members.push(roots[j]);
            }
        }
        let centroid = members.iter().sum::<Complex64>() / members.len() as f64;
        out.push((centroid, members.len()));
    }
    out
}

/// Pole of a rational function inside the unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleRecord {
    pub location: Complex64,
    pub order: usize,
}

/// Rational function numerator/denominator over floating complex numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RationalMapJson", into = "RationalMapJson")]
pub struct RationalMap {
    num: ComplexPoly,
    den: ComplexPoly,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RationalMapJson {
    num: Vec<[f64; 2]>,
    den: Vec<[f64; 2]>,
}

impl TryFrom<RationalMapJson> for RationalMap {
    type Error = Error;
    fn try_from(j: RationalMapJson) -> Result<Self> {
        let conv = |v: Vec<[f64; 2]>| {
            ComplexPoly::new(
                v.into_iter()
                    .map(|[re, im]| Complex64::new(re, im))
                    .collect(),
            )
        };
        RationalMap::new(conv(j.num), conv(j.den))
    }
}

impl From<RationalMap> for RationalMapJson {
    fn from(m: RationalMap) -> Self {
        let conv = |p: &ComplexPoly| p.coeffs.iter().map(|c| [c.re, c.im]).collect();
        RationalMapJson {
            num: conv(&m.num),
            den: conv(&m.den),
        }
    }
}

impl RationalMap {
    pub fn new(num: ComplexPoly, den: ComplexPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidInput(
                "rational map with zero denominator".into(),
            ));
        }
        if num.degree() > DEGREE_CAP || den.degree() > DEGREE_CAP {
            return Err(Error::InvalidInput(format!(
                "rational map degree exceeds the cap of {DEGREE_CAP}"
            )));
        }
        Ok(Self { num, den })
    }

    pub fn from_poly(p: ComplexPoly) -> Self {
        Self {
            num: p,
            den: ComplexPoly::one(),
        }
    }

    /// φ(ζ) = ζ
    pub fn identity() -> Self {
        Self::from_poly(ComplexPoly::monomial(1))
    }

    /// φ(ζ) = ζ + cζ²
    pub fn quadratic(c: Complex64) -> Self {
        Self::from_poly(ComplexPoly::new(vec![czero(), Complex64::new(1.0, 0.0), c]))
    }

    pub fn num(&self) -> &ComplexPoly {
        &self.num
    }

    pub fn den(&self) -> &ComplexPoly {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == 0
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let d = self.den.eval(z);
        if d == czero() || !d.norm().is_finite() {
            return Err(Error::PoleEvaluation(z));
        }
        let v = self.num.eval(z) / d;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::PoleEvaluation(z));
        }
        Ok(v)
    }

    /// Value and first two derivatives at z.
    pub fn eval_with_derivs(&self, z: Complex64) -> Result<[Complex64; 3]> {
        let d = self.den.eval(z);
        if d == czero() {
            return Err(Error::PoleEvaluation(z));
        }
        let n = self.num.eval(z);
        if self.is_polynomial() {
            let n1 = self.num.deriv();
            return Ok([n / d, n1.eval(z) / d, n1.deriv().eval(z) / d]);
        }
        let n1 = self.num.deriv();
        let n2 = n1.deriv();
        let d1 = self.den.deriv();
        let d2 = d1.deriv();
        let (n1v, n2v, d1v, d2v) = (n1.eval(z), n2.eval(z), d1.eval(z), d2.eval(z));
        let f = n / d;
        let f1 = (n1v - f * d1v) / d;
        let f2 = (n2v - 2.0 * f1 * d1v - f * d2v) / d;
        Ok([f, f1, f2])
    }

    /// Derivative as a rational map (not reduced).
    pub fn derivative(&self) -> Self {
        let num = self.num.deriv().mul(&self.den).add(
            &self
                .num
                .mul(&self.den.deriv())
                .scale(Complex64::new(-1.0, 0.0)),
        );
        Self {
            num,
            den: self.den.mul(&self.den),
        }
    }

    /// Conjugates every coefficient: φ*(w) = conj(φ(conj w)).
    pub fn reflect(&self) -> Self {
        Self {
            num: self.num.conj_coeffs(),
            den: self.den.conj_coeffs(),
        }
    }

    /// ζ ↦ φ*(1/ζ), which equals conj(φ(ζ)) on the unit circle.
    pub fn schwarz_pullback(&self) -> Self {
        let dn = self.num.degree();
        let dd = self.den.degree();
        let nr = self.num.conj_reversed();
        let dr = self.den.conj_reversed();
        let (num, den) = if self.num.is_zero() {
            (ComplexPoly::default(), ComplexPoly::one())
        } else if dd >= dn {
            (nr.shift(dd - dn), dr)
        } else {
            (nr, dr.shift(dn - dd))
        };
        Self { num, den }.reduce()
    }

    /// self / other, reduced.
    pub fn divide(&self, other: &Self) -> Result<Self> {
        if other.num.is_zero() {
            return Err(Error::InvalidInput(
                "division by the zero rational function".into(),
            ));
        }
        Ok(Self {
            num: self.num.mul(&other.den),
            den: self.den.mul(&other.num),
        }
        .reduce())
    }

    /// Cancels common roots: exact zeros structurally, the rest when they
    /// agree within [`CANCEL_TOL`].
    pub fn reduce(&self) -> Self {
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        if num.is_zero() {
            return Self {
                num,
                den: ComplexPoly::one(),
            };
        }
        let common = num.valuation().min(den.valuation());
        if common > 0 {
            num = ComplexPoly::new(num.coeffs[common..].to_vec());
            den = ComplexPoly::new(den.coeffs[common..].to_vec());
        }
        let (Ok(nr), Ok(dr)) = (num.roots(), den.roots()) else {
            return Self { num, den };
        };
        let mut num_roots: Vec<(Complex64, usize)> = nr;
        for (r, m) in dr {
            if r == czero() {
                continue;
            }
            for (s, k) in num_roots.iter_mut() {
                if *k > 0 && (*s - r).norm() <= CANCEL_TOL * r.norm().max(1.0) {
                    let cancel = (*k).min(m);
                    let at = (*s + r) * 0.5;
                    for _ in 0..cancel {
                        num = num.deflate(at);
                        den = den.deflate(at);
                    }
                    *k -= cancel;
                    break;
                }
            }
        }
        Self { num, den }
    }

    /// Laurent expansion at `center` with `len` terms.
    pub fn laurent_at(&self, center: Complex64, len: usize) -> Result<Series> {
        let mult = |p: &ComplexPoly| -> Result<usize> {
            if p.is_zero() {
                return Ok(0);
            }
            if center == czero() {
                return Ok(p.valuation());
            }
            Ok(p.roots()?
                .into_iter()
                .filter(|(r, _)| (*r - center).norm() <= ROOT_CLUSTER_TOL * center.norm().max(1.0))
                .map(|(_, m)| m)
                .sum())
        };
        let mn = mult(&self.num)?;
        let md = mult(&self.den)?;
        let n = Series::from_poly(self.num.coeffs(), center, len + mn).strip(mn);
        let d = Series::from_poly(self.den.coeffs(), center, len + md).strip(md);
        Ok(n.div(&d).truncate(len))
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}) / ({:?})", self.num.coeffs, self.den.coeffs)
    }
}

/// Denominator roots strictly inside the unit disk, with multiplicities,
/// sorted by modulus and then by argument.
pub fn poles_in_disk(f: &RationalMap) -> Result<Vec<PoleRecord>> {
    let reduced = f.reduce();
    let mut poles: Vec<PoleRecord> = reduced
        .den
        .roots()?
        .into_iter()
        .filter(|(r, _)| r.norm() < 1.0)
        .map(|(location, order)| PoleRecord { location, order })
        .collect();
    poles.sort_by(|a, b| {
        a.location
            .norm()
            .partial_cmp(&b.location.norm())
            .unwrap_or(Ordering::Equal)
            .then(
                a.location
                    .arg()
                    .partial_cmp(&b.location.arg())
                    .unwrap_or(Ordering::Equal),
            )
    });
    Ok(poles)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConformalReport {
    pub ok: bool,
    /// Zeros of φ′ counted by the argument principle on |ζ| = 1 + ε.
    pub winding: i64,
    pub min_boundary_separation: f64,
    pub reasons: Vec<String>,
}

const CONFORMAL_EPS: f64 = 1e-3;

/// Checks that φ is holomorphic and locally injective on the closed disk
/// and injective on `samples` boundary points.
pub fn conformal_check(map: &RationalMap, samples: usize) -> ConformalReport {
    let mut reasons = Vec::new();
    if samples < 64 {
        reasons.push(format!("need at least 64 samples, got {samples}"));
    }
    match map.den.roots() {
        Ok(r) => {
            if let Some((z, _)) = r.iter().find(|(z, _)| z.norm() <= 1.0 + CONFORMAL_EPS) {
                reasons.push(format!("denominator vanishes at {z} in the closed disk"));
            }
        }
        Err(e) => reasons.push(e.to_string()),
    }
    let phi0 = map.eval(czero()).unwrap_or(Complex64::new(f64::NAN, 0.0));
    if phi0.norm() > 1e-14 || phi0.re.is_nan() {
        reasons.push(format!("phi(0) = {phi0}, expected 0"));
    }
    // φ′ = (N′D − ND′)/D²; D has no zeros inside, so the winding of the
    // numerator counts the critical points.
    let dnum = map.derivative().num;
    let steps = samples.max(64 * (dnum.degree() + 1));
    let radius = 1.0 + CONFORMAL_EPS;
    let mut winding = 0.0;
    let mut prev = dnum.eval(Complex64::new(radius, 0.0));
    for k in 1..=steps {
        let z = Complex64::from_polar(radius, 2.0 * PI * k as f64 / steps as f64);
        let cur = dnum.eval(z);
        winding += (cur / prev).arg();
        prev = cur;
    }
    let winding = (winding / (2.0 * PI)).round() as i64;
    if winding != 0 {
        reasons.push(format!("phi' has {winding} zero(s) in the closed disk"));
    }
    let pts: Vec<Complex64> = (0..samples)
        .map(|k| {
            let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / samples as f64);
            map.eval(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        })
        .collect();
    let mut min_sep = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            min_sep = min_sep.min((pts[i] - pts[j]).norm());
        }
    }
    if !(min_sep > 1e-9) {
        reasons.push(format!(
            "boundary samples not injective (min separation {min_sep:e})"
        ));
    }
    ConformalReport {
        ok: reasons.is_empty(),
        winding,
        min_boundary_separation: min_sep,
        reasons,
    }
}

/// Gaussian rational a + bi with a, b ∈ ℚ.
pub type GaussRational = Complex<BigRational>;

fn gzero() -> GaussRational {
    Complex::new(BigRational::zero(), BigRational::zero())
}

fn gconj(c: &GaussRational) -> GaussRational {
    Complex::new(c.re.clone(), -c.im.clone())
}

fn gto_f64(c: &GaussRational) -> Complex64 {
    Complex64::new(
        c.re.to_f64().unwrap_or(f64::NAN),
        c.im.to_f64().unwrap_or(f64::NAN),
    )
}

/// Polynomial with Gaussian-rational coefficients, ascending order.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ExactPoly {
    coeffs: Vec<GaussRational>,
}

impl ExactPoly {
    pub fn new(mut coeffs: Vec<GaussRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Coefficients given as (re, im) pairs of integer ratios.
    pub fn from_ratios(coeffs: &[((i64, i64), (i64, i64))]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&((rn, rd), (inn, ind))| {
                    Complex::new(
                        BigRational::new(rn.into(), rd.into()),
                        BigRational::new(inn.into(), ind.into()),
                    )
                })
                .collect(),
        )
    }

    pub fn one() -> Self {
        Self::new(vec![Complex::new(BigRational::one(), BigRational::zero())])
    }

    pub fn coeffs(&self) -> &[GaussRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: &GaussRational) -> GaussRational {
        self.coeffs
            .iter()
            .rev()
            .fold(gzero(), |acc, c| acc * z.clone() + c.clone())
    }

    pub fn conj_coeffs(&self) -> Self {
        Self::new(self.coeffs.iter().map(gconj).collect())
    }

    pub fn conj_reversed(&self) -> Self {
        Self::new(self.coeffs.iter().rev().map(gconj).collect())
    }

    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![gzero(); k];
        c.extend(self.coeffs.iter().cloned());
        Self::new(c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::default();
        }
        let mut out = vec![gzero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, other: &Self) -> (Self, Self) {
        assert!(!other.is_zero(), "polynomial division by zero");
        let mut rem = self.coeffs.clone();
        let dd = other.degree();
        let lead = other.coeffs[dd].clone();
        if self.is_zero() || self.degree() < dd {
            return (Self::default(), self.clone());
        }
        let mut quot = vec![gzero(); self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd].clone() / lead.clone();
            if !c.is_zero() {
                for (j, b) in other.coeffs.iter().enumerate() {
                    rem[k + j] = rem[k + j].clone() - c.clone() * b.clone();
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn monic(&self) -> Self {
        match self.coeffs.last() {
            None => self.clone(),
            Some(lead) => {
                let lead = lead.clone();
                Self::new(
                    self.coeffs
                        .iter()
                        .map(|c| c.clone() / lead.clone())
                        .collect(),
                )
            }
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn to_float(&self) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(gto_f64).collect())
    }
}

/// Exact rational function kept in lowest terms with a monic denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactRationalMap {
    num: ExactPoly,
    den: ExactPoly,
}

impl ExactRationalMap {
    pub fn new(num: ExactPoly, den: ExactPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidInput(
                "rational map with zero denominator".into(),
            ));
        }
        if num.is_zero() {
            return Ok(Self {
                num,
                den: ExactPoly::one(),
            });
        }
        let g = num.gcd(&den);
        let (n, _) = num.div_rem(&g);
        let (d, _) = den.div_rem(&g);
        let lead = d.coeffs.last().cloned().expect("nonzero denominator");
        let scale = |p: &ExactPoly| {
            ExactPoly::new(p.coeffs.iter().map(|c| c.clone() / lead.clone()).collect())
        };
        Ok(Self {
            num: scale(&n),
            den: scale(&d),
        })
    }

    pub fn from_poly(p: ExactPoly) -> Self {
        Self {
            num: p,
            den: ExactPoly::one(),
        }
    }

    pub fn num(&self) -> &ExactPoly {
        &self.num
    }

    pub fn den(&self) -> &ExactPoly {
        &self.den
    }

    pub fn eval(&self, z: &GaussRational) -> Result<GaussRational> {
        let d = self.den.eval(z);
        if d.is_zero() {
            return Err(Error::PoleEvaluation(gto_f64(z)));
        }
        Ok(self.num.eval(z) / d)
    }

    pub fn reflect(&self) -> Self {
        Self {
            num: self.num.conj_coeffs(),
            den: self.den.conj_coeffs(),
        }
    }

    pub fn schwarz_pullback(&self) -> Self {
        let dn = self.num.degree();
        let dd = self.den.degree();
        let nr = self.num.conj_reversed();
        let dr = self.den.conj_reversed();
        let (num, den) = if dd >= dn {
            (nr.shift(dd - dn), dr)
        } else {
            (nr, dr.shift(dn - dd))
        };
        Self::new(num, den).expect("reversed denominator is nonzero")
    }

    pub fn to_float(&self) -> Result<RationalMap> {
        RationalMap::new(self.num.to_float(), self.den.to_float())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn roots_of_unity(n: usize) -> impl Iterator<Item = Complex64> {
        (0..n).map(move |k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
    }

    #[test]
    fn eval_examples() {
        assert_eq!(
            RationalMap::identity().eval(c(0.5, 0.0)).unwrap(),
            c(0.5, 0.0)
        );
        assert_eq!(
            RationalMap::quadratic(c(0.25, 0.0))
                .eval(c(1.0, 0.0))
                .unwrap(),
            c(1.25, 0.0)
        );
        let m = RationalMap::new(
            ComplexPoly::from_real(&[0.0, 1.0]),
            ComplexPoly::from_real(&[1.0, -0.5]),
        )
        .unwrap();
        assert_eq!(m.eval(c(1.0, 0.0)).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn eval_at_pole_names_the_point() {
        let m = RationalMap::new(
            ComplexPoly::from_real(&[0.0, 1.0]),
            ComplexPoly::from_real(&[1.0, -0.5]),
        )
        .unwrap();
        match m.eval(c(2.0, 0.0)) {
            Err(Error::PoleEvaluation(z)) => assert_eq!(z, c(2.0, 0.0)),
            other => panic!("expected pole error, got {other:?}"),
        }
    }

    #[test]
    fn reflect_conjugates_coefficients() {
        let m = RationalMap::quadratic(c(0.0, 1.0 / 3.0));
        let r = m.reflect();
        assert_eq!(
            r.num().coeffs(),
            &[czero(), c(1.0, 0.0), c(0.0, -1.0 / 3.0)]
        );
        let real = RationalMap::quadratic(c(0.25, 0.0));
        assert_eq!(real.reflect(), real);
    }

    #[test]
    fn reflect_matches_boundary_conjugate() {
        let m = RationalMap::new(
            ComplexPoly::new(vec![czero(), c(1.0, 0.2), c(0.1, -0.3)]),
            ComplexPoly::new(vec![c(1.0, 0.0), c(0.0, 0.25)]),
        )
        .unwrap();
        let r = m.reflect();
        for z in roots_of_unity(64) {
            let lhs = r.eval(1.0 / z).unwrap();
            let rhs = m.eval(z).unwrap().conj();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn pullback_of_scaled_identity_is_r_over_zeta() {
        let m = RationalMap::from_poly(ComplexPoly::from_real(&[0.0, 1.5]));
        let s = m.schwarz_pullback();
        let z = c(0.3, 0.4);
        assert!((s.eval(z).unwrap() - 1.5 / z).norm() < 1e-14);
        assert_eq!(
            poles_in_disk(&s).unwrap(),
            vec![PoleRecord {
                location: czero(),
                order: 1
            }]
        );
    }

    #[test]
    fn pullback_of_quadratic_has_double_pole() {
        let cc = c(0.3, 0.1);
        let m = RationalMap::quadratic(cc);
        let s = m.schwarz_pullback();
        let z = c(0.2, -0.5);
        let expected = 1.0 / z + cc.conj() / (z * z);
        assert!((s.eval(z).unwrap() - expected).norm() < 1e-13);
        let poles = poles_in_disk(&s).unwrap();
        assert_eq!(
            poles,
            vec![PoleRecord {
                location: czero(),
                order: 2
            }]
        );
        for z in roots_of_unity(64) {
            assert!((s.eval(z).unwrap() - m.eval(z).unwrap().conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn poles_of_c_coefficient() {
        // φ*(1/ζ)/φ(ζ) for φ = ζ is ζ^-2.
        let id = RationalMap::identity();
        let cfun = id.schwarz_pullback().divide(&id).unwrap();
        assert_eq!(
            poles_in_disk(&cfun).unwrap(),
            vec![PoleRecord {
                location: czero(),
                order: 2
            }]
        );
        // φ = ζ + 0.3ζ²: (1/ζ + 0.3/ζ²)/(ζ(1 + 0.3ζ)) has a triple pole at 0.
        let q = RationalMap::quadratic(c(0.3, 0.0));
        let cq = q.schwarz_pullback().divide(&q).unwrap();
        assert_eq!(
            poles_in_disk(&cq).unwrap(),
            vec![PoleRecord {
                location: czero(),
                order: 3
            }]
        );
        // Laurent oracle: leading coefficient c/ζ³ = 0.3.
        let l = cq.laurent_at(czero(), 6).unwrap();
        assert_eq!(l.val, -3);
        assert!((l.at(-3) - c(0.3, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn polynomial_has_no_poles() {
        let p = RationalMap::quadratic(c(0.2, 0.0));
        assert!(poles_in_disk(&p).unwrap().is_empty());
    }

    #[test]
    fn interior_pole_of_rational_pullback() {
        // φ = ζ/(1 − ζ/2): pullback has den ∝ (1 − 2ζ)... pole at 1/2 inside.
        let m = RationalMap::new(
            ComplexPoly::from_real(&[0.0, 1.0]),
            ComplexPoly::from_real(&[1.0, -0.5]),
        )
        .unwrap();
        let s = m.schwarz_pullback();
        for z in roots_of_unity(64) {
            assert!((s.eval(z).unwrap() - m.eval(z).unwrap().conj()).norm() < 1e-12);
        }
        let poles = poles_in_disk(&s).unwrap();
        assert_eq!(poles.len(), 1);
        assert_eq!(poles[0].order, 1);
        assert!((poles[0].location - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn multiple_roots_cluster() {
        // (ζ − 0.5)² (ζ + 2)
        let p =
            ComplexPoly::from_real(&[0.25, -1.0, 1.0]).mul(&ComplexPoly::from_real(&[2.0, 1.0]));
        let mut r = p.roots().unwrap();
        r.sort_by(|a, b| a.0.re.partial_cmp(&b.0.re).unwrap());
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].1, 1);
        assert_eq!(r[1].1, 2);
        assert!((r[1].0 - c(0.5, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn conformal_examples() {
        assert!(conformal_check(&RationalMap::identity(), 64).ok);
        assert!(conformal_check(&RationalMap::quadratic(c(0.25, 0.0)), 64).ok);
        let bad = conformal_check(&RationalMap::quadratic(c(1.0, 0.0)), 64);
        assert!(!bad.ok);
        assert_eq!(bad.winding, 1);
    }

    #[test]
    fn json_round_trip() {
        let m = RationalMap::quadratic(c(0.3, -0.1));
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"num":[[0.0,0.0],[1.0,0.0],[0.3,-0.1]],"den":[[1.0,0.0]]}"#
        );
        let back: RationalMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<RationalMap>(r#"{"num":[[1,0]],"den":[]}"#).is_err());
    }

    #[test]
    fn exact_reflect_is_an_involution() {
        let p = ExactPoly::from_ratios(&[((0, 1), (0, 1)), ((1, 1), (0, 1)), ((0, 1), (1, 3))]);
        let m = ExactRationalMap::from_poly(p);
        assert_eq!(m.reflect().reflect(), m);
        assert_ne!(m.reflect(), m);
    }

    #[test]
    fn exact_reduction_cancels_common_factor() {
        // (ζ² − 1)/(ζ − 1) = ζ + 1
        let num = ExactPoly::from_ratios(&[((-1, 1), (0, 1)), ((0, 1), (0, 1)), ((1, 1), (0, 1))]);
        let den = ExactPoly::from_ratios(&[((-1, 1), (0, 1)), ((1, 1), (0, 1))]);
        let m = ExactRationalMap::new(num, den).unwrap();
        assert_eq!(m.den(), &ExactPoly::one());
        assert_eq!(m.num().degree(), 1);
    }

    #[test]
    fn exact_pullback_matches_float() {
        let p = ExactPoly::from_ratios(&[((0, 1), (0, 1)), ((1, 1), (0, 1)), ((3, 10), (1, 10))]);
        let exact = ExactRationalMap::from_poly(p).schwarz_pullback();
        let float = exact.to_float().unwrap();
        let direct = RationalMap::quadratic(c(0.3, 0.1)).schwarz_pullback();
        let z = c(0.4, 0.1);
        assert!((float.eval(z).unwrap() - direct.eval(z).unwrap()).norm() < 1e-13);
    }
}

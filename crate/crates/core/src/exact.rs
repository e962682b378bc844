//! Exact multivariate polynomials over ℚ and small exact linear algebra.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Σ c_e x^e over exponent vectors e ∈ ℕ^D. Zero coefficients are never
/// stored, so structural equality is polynomial equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly<const D: usize> {
    terms: BTreeMap<[u32; D], BigRational>,
}

impl<const D: usize> Poly<D> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial([0; D], c)
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn monomial(exps: [u32; D], c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(exps, c);
        p
    }

    /// The coordinate x_i.
    pub fn var(i: usize) -> Self {
        let mut e = [0; D];
        e[i] = 1;
        Self::monomial(e, BigRational::one())
    }

    pub fn from_terms<I: IntoIterator<Item = ([u32; D], BigRational)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exps: [u32; D], c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; D], &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32; D]) -> BigRational {
        self.terms
            .get(exps)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn homogeneous_part(&self, d: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() == d)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect(),
        }
    }

    /// Multiplies by x^e.
    pub fn shift(&self, e: [u32; D]) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| {
                    let mut k2 = *k;
                    for i in 0..D {
                        k2[i] += e[i];
                    }
                    (k2, c.clone())
                })
                .collect(),
        }
    }

    pub fn deriv(&self, i: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = *e;
                e2[i] -= 1;
                out.add_term(e2, c * BigRational::from_integer(BigInt::from(e[i])));
            }
        }
        out
    }

    /// ∂^e applied once per coordinate.
    pub fn deriv_multi(&self, e: &[u32; D]) -> Self {
        let mut out = Self::zero();
        'terms: for (k, c) in &self.terms {
            let mut factor = BigInt::one();
            let mut k2 = *k;
            for i in 0..D {
                if k[i] < e[i] {
                    continue 'terms;
                }
                for j in 0..e[i] {
                    factor *= BigInt::from(k[i] - j);
                }
                k2[i] -= e[i];
            }
            out.add_term(k2, c * BigRational::from_integer(factor));
        }
        out
    }

    /// Antiderivative in x_i vanishing on {x_i = 0}.
    pub fn antideriv(&self, i: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let mut e2 = *e;
            e2[i] += 1;
            out.add_term(e2, c / BigRational::from_integer(BigInt::from(e2[i])));
        }
        out
    }

    /// Restriction to the hyperplane {x_i = 0}.
    pub fn restrict_zero(&self, i: usize) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[i] == 0)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..D {
            out = &out + &self.deriv(i).deriv(i);
        }
        out
    }

    pub fn laplacian_pow(&self, k: usize) -> Self {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.laplacian();
        }
        p
    }

    /// |x|²
    pub fn r2() -> Self {
        let mut p = Self::zero();
        for i in 0..D {
            let mut e = [0; D];
            e[i] = 2;
            p.add_term(e, BigRational::one());
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn eval_f64(&self, x: &[f64; D]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = (0..D).map(|i| x[i].powi(e[i] as i32)).product();
                c.to_f64().unwrap_or(f64::NAN) * m
            })
            .sum()
    }

    pub fn eval_exact(&self, x: &[BigRational; D]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for i in 0..D {
                for _ in 0..e[i] {
                    m *= &x[i];
                }
            }
            acc += m;
        }
        acc
    }

    /// Harmonic component of each homogeneous part (Fischer decomposition):
    /// H(p) = Σ_j (−1)^j |x|^{2j} Δ^j p / (2^j j! Π_{i=1..j} (D + 2d − 2 − 2i)).
    pub fn harmonic_projection(&self) -> Self {
        let mut out = Self::zero();
        for d in 0..=self.degree() {
            let p = self.homogeneous_part(d);
            if p.is_zero() {
                continue;
            }
            let mut lap = p.clone();
            let mut r2j = Self::one();
            let mut denom = BigRational::one();
            let mut j = 0i64;
            loop {
                let sign = if j % 2 == 0 { int(1) } else { int(-1) };
                out = &out + &(&r2j * &lap).scale(&(sign / &denom));
                j += 1;
                lap = lap.laplacian();
                if lap.is_zero() {
                    break;
                }
                r2j = &r2j * &Self::r2();
                denom *= int(2 * j * (D as i64 + 2 * d as i64 - 2 - 2 * j));
            }
        }
        out
    }

    /// Random polynomial of total degree ≤ `deg` with small integer
    /// coefficients; each monomial is present with probability `density`.
    pub fn random<R: Rng>(rng: &mut R, deg: u32, density: f64) -> Self {
        let mut p = Self::zero();
        for e in exponents::<D>(deg) {
            if rng.random_bool(density) {
                let c: i64 = rng.random_range(-4..=4);
                p.add_term(e, int(c));
            }
        }
        p
    }

    /// Random harmonic polynomial of degree ≤ `deg`, exact.
    pub fn random_harmonic<R: Rng>(rng: &mut R, deg: u32) -> Self {
        loop {
            let h = Self::random(rng, deg, 0.6).harmonic_projection();
            if !h.is_zero() {
                return h;
            }
        }
    }

    /// Largest numerator/denominator bit length, a rough size measure.
    pub fn max_bits(&self) -> u64 {
        self.terms
            .values()
            .map(|c| c.numer().bits().max(c.denom().bits()))
            .max()
            .unwrap_or(0)
    }
}

/// All exponent vectors of total degree ≤ deg, in lexicographic order.
pub fn exponents<const D: usize>(deg: u32) -> Vec<[u32; D]> {
    let mut out = Vec::new();
    let mut e = [0u32; D];
    fn rec<const D: usize>(i: usize, left: u32, e: &mut [u32; D], out: &mut Vec<[u32; D]>) {
        if i == D {
            out.push(*e);
            return;
        }
        for k in 0..=left {
            e[i] = k;
            rec(i + 1, left - k, e, out);
        }
        e[i] = 0;
    }
    rec(0, deg, &mut e, &mut out);
    out
}

/// Exponent vectors of total degree exactly d, lexicographically descending.
pub fn exponents_exact<const D: usize>(d: u32) -> Vec<[u32; D]> {
    let mut v: Vec<[u32; D]> = exponents::<D>(d)
        .into_iter()
        .filter(|e| e.iter().sum::<u32>() == d)
        .collect();
    v.sort();
    v.reverse();
    v
}

impl<const D: usize> Add for &Poly<D> {
    type Output = Poly<D>;
    fn add(self, rhs: &Poly<D>) -> Poly<D> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<const D: usize> Sub for &Poly<D> {
    type Output = Poly<D>;
    fn sub(self, rhs: &Poly<D>) -> Poly<D> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl<const D: usize> Neg for &Poly<D> {
    type Output = Poly<D>;
    fn neg(self) -> Poly<D> {
        self.scale(&int(-1))
    }
}

impl<const D: usize> Mul for &Poly<D> {
    type Output = Poly<D>;
    fn mul(self, rhs: &Poly<D>) -> Poly<D> {
        let mut out = Poly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let mut e = *a;
                for i in 0..D {
                    e[i] += b[i];
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl<const D: usize> $tr for Poly<D> {
            type Output = Poly<D>;
            fn $m(self, rhs: Poly<D>) -> Poly<D> {
                (&self).$m(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

const VAR_NAMES_2: [&str; 2] = ["x", "y"];
const VAR_NAMES_3: [&str; 3] = ["x1", "x2", "x3"];

impl<const D: usize> fmt::Display for Poly<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let is_const = e.iter().all(|&k| k == 0);
            if !abs.is_one() || is_const {
                write!(f, "{abs}")?;
            }
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = match D {
                    2 => VAR_NAMES_2[i].to_string(),
                    3 => VAR_NAMES_3[i].to_string(),
                    _ => format!("x{}", i + 1),
                };
                if k == 1 {
                    write!(f, "{name}")?;
                } else {
                    write!(f, "{name}^{k}")?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntJson {
    Small(i64),
    Big(String),
}

impl IntJson {
    fn from_big(b: &BigInt) -> Self {
        match b.to_i64() {
            Some(v) => IntJson::Small(v),
            None => IntJson::Big(b.to_string()),
        }
    }

    fn to_big(&self) -> Result<BigInt, String> {
        match self {
            IntJson::Small(v) => Ok(BigInt::from(*v)),
            IntJson::Big(s) => s.parse().map_err(|_| format!("invalid integer {s:?}")),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e: Option<Vec<u32>>,
    num: IntJson,
    den: IntJson,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyJson {
    terms: Vec<TermJson>,
}

/// Two-variable polynomials serialize terms as {"a","b","num","den"};
/// other dimensions use an exponent array {"e":[...],"num","den"}.
impl<const D: usize> Serialize for Poly<D> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| TermJson {
                a: (D == 2).then(|| e[0]),
                b: (D == 2).then(|| e[1]),
                e: (D != 2).then(|| e.to_vec()),
                num: IntJson::from_big(c.numer()),
                den: IntJson::from_big(c.denom()),
            })
            .collect();
        PolyJson { terms }.serialize(s)
    }
}

impl<'de, const D: usize> Deserialize<'de> for Poly<D> {
    fn deserialize<De: Deserializer<'de>>(d: De) -> Result<Self, De::Error> {
        let j = PolyJson::deserialize(d)?;
        let mut p = Poly::zero();
        for t in j.terms {
            let exps: Vec<u32> = match (t.a, t.b, t.e) {
                (Some(a), Some(b), None) if D == 2 => vec![a, b],
                (None, None, Some(e)) => e,
                _ => return Err(De::Error::custom("term needs either a/b (2D) or e")),
            };
            let exps: [u32; D] = exps
                .try_into()
                .map_err(|_| De::Error::custom(format!("exponent vector must have length {D}")))?;
            let num = t.num.to_big().map_err(De::Error::custom)?;
            let den = t.den.to_big().map_err(De::Error::custom)?;
            if den.is_zero() {
                return Err(De::Error::custom("zero denominator"));
            }
            p.add_term(exps, BigRational::new(num, den));
        }
        Ok(p)
    }
}

/// Solves A x = b exactly by Gauss–Jordan elimination with pivots taken in
/// column order; free variables are set to zero. Returns None when the
/// system is inconsistent.
pub fn solve_pivoting(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = BigRational::one() / &m[row][col];
        for k in col..=cols {
            m[row][k] = &m[row][k] * &inv;
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for k in col..=cols {
                    let v = &m[row][k] * &f;
                    m[r][k] -= v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if m[row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][cols].clone();
    }
    Some(x)
}

/// Minimum-norm exact solution x = Aᵀ y with (A Aᵀ) y = b.
pub fn solve_min_norm(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let gram: Vec<Vec<BigRational>> = (0..rows)
        .map(|i| {
            (0..rows)
                .map(|j| (0..cols).map(|k| &a[i][k] * &a[j][k]).sum())
                .collect()
        })
        .collect();
    let y = solve_pivoting(&gram, b)?;
    let x: Vec<BigRational> = (0..cols)
        .map(|k| (0..rows).map(|i| &a[i][k] * &y[i]).sum())
        .collect();
    // Gram singular: the pivoting solution of the normal system still gives
    // a consistent x, but confirm it.
    let ok = (0..rows).all(|i| (0..cols).map(|k| &a[i][k] * &x[k]).sum::<BigRational>() == b[i]);
    ok.then_some(x)
}

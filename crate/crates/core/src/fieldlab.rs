//! Numerical differential operators on real plane fields: derivative jets,
//! Wirtinger and Laplace operators, normal derivatives along arcs and
//! measurement of the rate at which a field and its normal derivatives
//! decay toward a boundary arc.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-3;
/// Points closer than this to a declared singularity are never evaluated.
pub const SINGULAR_GUARD: f64 = 1e-6;
pub const MAX_JET_ORDER: usize = 4;
/// Fitted exponents may fall short of the integer target by this much.
pub const DECAY_MARGIN: f64 = 0.2;
pub const NOISE_FLOOR: f64 = 1e-15;
pub const MIN_LADDER: usize = 6;

/// A real field on (part of) the plane.
pub trait ScalarField2: Sync {
    fn eval(&self, x: f64, y: f64) -> f64;

    fn singular_points(&self) -> &[[f64; 2]] {
        &[]
    }

    /// Declared number of continuous derivatives.
    fn smoothness(&self) -> u32 {
        u32::MAX
    }
}

/// Evaluates `field` after checking the declared singular set.
pub fn checked_eval<F: ScalarField2 + ?Sized>(field: &F, x: f64, y: f64) -> Result<f64> {
    for s in field.singular_points() {
        if (x - s[0]).hypot(y - s[1]) < SINGULAR_GUARD {
            return Err(Error::Stencil {
                x,
                y,
                sx: s[0],
                sy: s[1],
            });
        }
    }
    Ok(field.eval(x, y))
}

/// Closure-backed field.
pub struct FnField<F> {
    f: F,
    singular: Vec<[f64; 2]>,
    smoothness: u32,
}

impl<F: Fn(f64, f64) -> f64 + Sync> FnField<F> {
    pub fn new(f: F) -> Self {
        Self {
            f,
            singular: Vec::new(),
            smoothness: u32::MAX,
        }
    }

    pub fn with_singular(mut self, points: Vec<[f64; 2]>) -> Self {
        self.singular = points;
        self
    }

    pub fn with_smoothness(mut self, k: u32) -> Self {
        self.smoothness = k;
        self
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> ScalarField2 for FnField<F> {
    fn eval(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    fn singular_points(&self) -> &[[f64; 2]] {
        &self.singular
    }

    fn smoothness(&self) -> u32 {
        self.smoothness
    }
}

/// u(z) = (1 − |z|²)³ / |1 − e^{−iθ}z|⁴: biharmonic in the disk and flat to
/// order three on the unit circle away from its boundary singularity e^{iθ}.
#[derive(Clone, Debug)]
pub struct CubicFlatKernel {
    rotation: Complex64,
    singular: [[f64; 2]; 1],
}

impl CubicFlatKernel {
    pub fn new(theta: f64) -> Self {
        let rotation = Complex64::from_polar(1.0, theta);
        Self {
            rotation,
            singular: [[rotation.re, rotation.im]],
        }
    }
}

impl Default for CubicFlatKernel {
    fn default() -> Self {
        Self::new(0.0)
    }
}

impl ScalarField2 for CubicFlatKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        let z = Complex64::new(x, y);
        let q = (1.0 - z * self.rotation.conj()).norm_sqr();
        (1.0 - z.norm_sqr()).powi(3) / (q * q)
    }

    fn singular_points(&self) -> &[[f64; 2]] {
        &self.singular
    }
}

/// Index of ∂_x^a ∂_y^b in the packed jet storage.
const fn slot(a: usize, b: usize) -> usize {
    let n = a + b;
    n * (n + 1) / 2 + b
}

const JET_LEN: usize = slot(0, MAX_JET_ORDER) + 1;

/// Central finite-difference scheme: stencils exact on polynomials of
/// degree < derivative order + `accuracy`, optionally combined over steps
/// h and h/2 by one Richardson level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FdScheme {
    pub accuracy: usize,
    pub richardson: bool,
}

impl FdScheme {
    /// Fourth-order stencils with one Richardson level.
    pub const STANDARD: FdScheme = FdScheme {
        accuracy: 4,
        richardson: true,
    };
    /// Eighth-order stencils on a single step. Used for fourth derivatives at
    /// coarse steps, where the half-step samples would be rounding-limited.
    pub const WIDE: FdScheme = FdScheme {
        accuracy: 8,
        richardson: false,
    };

    fn validate(&self) -> Result<()> {
        if self.accuracy == 0 || self.accuracy % 2 == 1 || self.accuracy > 12 {
            return Err(Error::InvalidInput(format!(
                "stencil accuracy must be even and in 2..=12, got {}",
                self.accuracy
            )));
        }
        Ok(())
    }

    fn radius(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            (k + self.accuracy - 1) / 2
        }
    }

    /// Radius of the sample grid, in units of the step.
    pub fn reach(&self, order: usize) -> usize {
        (0..=order).map(|k| self.radius(k)).max().unwrap_or(0)
    }
}

impl Default for FdScheme {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Weights of the central stencil for the k-th derivative on offsets
/// −r..=r, solved exactly from the moment conditions.
fn central_weights(k: usize, r: usize) -> Vec<f64> {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    let n = 2 * r + 1;
    let offs: Vec<BigRational> = (0..n)
        .map(|i| BigRational::from_integer(BigInt::from(i as i64 - r as i64)))
        .collect();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|row| {
            let mut line: Vec<BigRational> = offs
                .iter()
                .map(|o| {
                    let mut p = BigRational::one();
                    for _ in 0..row {
                        p *= o;
                    }
                    p
                })
                .collect();
            let rhs: BigRational = if row == k {
                (1..=k).fold(BigRational::one(), |acc, j| {
                    acc * BigRational::from_integer(BigInt::from(j))
                })
            } else {
                BigRational::zero()
            };
            line.push(rhs);
            line
        })
        .collect();
    for c in 0..n {
        let piv = (c..n)
            .find(|&r| !m[r][c].is_zero())
            .expect("Vandermonde system is nonsingular");
        m.swap(c, piv);
        let lead = m[c][c].clone();
        for v in m[c].iter_mut() {
            *v = &*v / &lead;
        }
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for j in 0..=n {
                    let t = &f * &m[c][j];
                    m[r][j] -= t;
                }
            }
        }
    }
    m.iter()
        .map(|row| num_traits::ToPrimitive::to_f64(&row[n]).expect("finite weight"))
        .collect()
}

fn stencil(k: usize, r: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("stencil cache poisoned");
    guard
        .entry((k, r))
        .or_insert_with(|| Arc::new(central_weights(k, r)))
        .clone()
}

/// Complex-valued partials up to `order` from samples on a square grid
/// around `p`.
fn fd_partials<G>(
    eval: G,
    p: [f64; 2],
    order: usize,
    step: f64,
    scheme: FdScheme,
) -> [Complex64; JET_LEN]
where
    G: Fn(f64, f64) -> Complex64,
{
    let r = scheme.reach(order) as i64;
    // With Richardson the grid has spacing h/2 and the coarse stencil uses
    // every other sample.
    let (spacing, span, coarse_mult) = if scheme.richardson {
        (step / 2.0, 2 * r, 2)
    } else {
        (step, r, 1)
    };
    let width = (2 * span + 1) as usize;
    let mut grid = vec![Complex64::new(0.0, 0.0); width * width];
    for i in -span..=span {
        for j in -span..=span {
            let idx = ((i + span) as usize) * width + (j + span) as usize;
            grid[idx] = eval(p[0] + i as f64 * spacing, p[1] + j as f64 * spacing);
        }
    }
    let at = |i: i64, j: i64| grid[((i + span) as usize) * width + (j + span) as usize];
    let mut out = [Complex64::new(0.0, 0.0); JET_LEN];
    for n in 0..=order {
        for b in 0..=n {
            let a = n - b;
            let (sa, sb) = (stencil(a, scheme.radius(a)), stencil(b, scheme.radius(b)));
            let (ra, rb) = ((sa.len() / 2) as i64, (sb.len() / 2) as i64);
            let apply = |mult: i64, h: f64| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (ia, ca) in sa.iter().enumerate() {
                    if *ca == 0.0 {
                        continue;
                    }
                    for (ib, cb) in sb.iter().enumerate() {
                        if *cb == 0.0 {
                            continue;
                        }
                        acc += at((ia as i64 - ra) * mult, (ib as i64 - rb) * mult) * (ca * cb);
                    }
                }
                acc / h.powi(n as i32)
            };
            out[slot(a, b)] = if !scheme.richardson {
                apply(1, step)
            } else if n == 0 {
                at(0, 0)
            } else {
                let extrap = 2f64.powi(scheme.accuracy as i32);
                (apply(1, step / 2.0) * extrap - apply(coarse_mult, step)) / (extrap - 1.0)
            };
        }
    }
    out
}

fn guard_stencil<F: ScalarField2 + ?Sized>(field: &F, p: [f64; 2], radius: f64) -> Result<()> {
    for s in field.singular_points() {
        if (p[0] - s[0]).hypot(p[1] - s[1]) <= radius + SINGULAR_GUARD {
            return Err(Error::Stencil {
                x: p[0],
                y: p[1],
                sx: s[0],
                sy: s[1],
            });
        }
    }
    Ok(())
}

/// All partial derivatives ∂_x^a ∂_y^b u(p), a + b ≤ order.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub point: [f64; 2],
    pub order: usize,
    partials: [f64; JET_LEN],
}

impl Jet2 {
    /// Builds a jet from `(a, b, value)` triples; missing partials are zero.
    pub fn from_partials(point: [f64; 2], order: usize, values: &[(usize, usize, f64)]) -> Self {
        let mut partials = [0.0; JET_LEN];
        for &(a, b, v) in values {
            partials[slot(a, b)] = v;
        }
        Self {
            point,
            order,
            partials,
        }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        assert!(
            a + b <= self.order,
            "partial of order {} not in jet of order {}",
            a + b,
            self.order
        );
        self.partials[slot(a, b)]
    }

    pub fn value(&self) -> f64 {
        self.get(0, 0)
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.get(1, 0), self.get(0, 1)]
    }

    pub fn laplacian(&self) -> f64 {
        self.get(2, 0) + self.get(0, 2)
    }

    pub fn bilaplacian(&self) -> f64 {
        self.get(4, 0) + 2.0 * self.get(2, 2) + self.get(0, 4)
    }

    /// k-th directional derivative along the unit vector `dir`, k ≤ order.
    pub fn directional(&self, dir: [f64; 2], k: usize) -> f64 {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for b in 0..=k {
            let a = k - b;
            acc += binom * dir[0].powi(a as i32) * dir[1].powi(b as i32) * self.get(a, b);
            binom = binom * (k - b) as f64 / (b + 1) as f64;
        }
        acc
    }

    /// ∂_z^p ∂̄_z^q u = 2^{−(p+q)} (∂_x − i∂_y)^p (∂_x + i∂_y)^q u.
    pub fn wirtinger_mixed(&self, p: usize, q: usize) -> Complex64 {
        wirtinger_combination(p, q, |a, b| Complex64::new(self.get(a, b), 0.0))
    }
}

/// Complex-valued counterpart of [`Jet2`].
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexJet2 {
    pub point: [f64; 2],
    pub order: usize,
    partials: [Complex64; JET_LEN],
}

impl ComplexJet2 {
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        assert!(a + b <= self.order);
        self.partials[slot(a, b)]
    }

    pub fn wirtinger_mixed(&self, p: usize, q: usize) -> Complex64 {
        wirtinger_combination(p, q, |a, b| self.get(a, b))
    }
}

fn wirtinger_combination<G: Fn(usize, usize) -> Complex64>(
    p: usize,
    q: usize,
    get: G,
) -> Complex64 {
    // Expand (X − iY)^p (X + iY)^q into coefficients of X^a Y^b.
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    let i = Complex64::new(0.0, 1.0);
    let factors = std::iter::repeat_n(-i, p).chain(std::iter::repeat_n(i, q));
    for y_coeff in factors {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (b, c) in poly.iter().enumerate() {
            next[b] += c;
            next[b + 1] += c * y_coeff;
        }
        poly = next;
    }
    let n = p + q;
    let scale = 0.5f64.powi(n as i32);
    poly.iter()
        .enumerate()
        .map(|(b, c)| c * get(n - b, b))
        .sum::<Complex64>()
        * scale
}

/// Finite-difference jet of `field` at `point` with the standard scheme.
pub fn jet_at<F: ScalarField2 + ?Sized>(
    field: &F,
    point: [f64; 2],
    order: usize,
    step: f64,
) -> Result<Jet2> {
    jet_with(field, point, order, step, FdScheme::STANDARD)
}

fn check_jet_args(order: usize, step: f64, scheme: FdScheme) -> Result<()> {
    if order > MAX_JET_ORDER {
        return Err(Error::JetOrder(order));
    }
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "step must be positive, got {step}"
        )));
    }
    scheme.validate()
}

pub fn jet_with<F: ScalarField2 + ?Sized>(
    field: &F,
    point: [f64; 2],
    order: usize,
    step: f64,
    scheme: FdScheme,
) -> Result<Jet2> {
    check_jet_args(order, step, scheme)?;
    let radius = scheme.reach(order) as f64 * step * std::f64::consts::SQRT_2;
    guard_stencil(field, point, radius)?;
    let c = fd_partials(
        |x, y| Complex64::new(field.eval(x, y), 0.0),
        point,
        order,
        step,
        scheme,
    );
    let mut partials = [0.0; JET_LEN];
    for (dst, src) in partials.iter_mut().zip(c) {
        *dst = src.re;
    }
    Ok(Jet2 {
        point,
        order,
        partials,
    })
}

/// Finite-difference jet of a complex-valued field (no singular set).
pub fn complex_jet_at<G>(field: G, point: [f64; 2], order: usize, step: f64) -> Result<ComplexJet2>
where
    G: Fn(f64, f64) -> Complex64,
{
    check_jet_args(order, step, FdScheme::STANDARD)?;
    Ok(ComplexJet2 {
        point,
        order,
        partials: fd_partials(field, point, order, step, FdScheme::STANDARD),
    })
}

/// (∂_z u, ∂̄_z u) at the jet's base point.
pub fn wirtinger(jet: &Jet2) -> (Complex64, Complex64) {
    (jet.wirtinger_mixed(1, 0), jet.wirtinger_mixed(0, 1))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BilaplacianReport {
    pub max_abs: f64,
    pub values: Vec<f64>,
}

/// Finite-difference Δ²u at every grid point, with [`FdScheme::WIDE`].
pub fn bilaplacian_residual<F: ScalarField2 + ?Sized>(
    field: &F,
    grid: &[[f64; 2]],
    step: f64,
) -> Result<BilaplacianReport> {
    bilaplacian_residual_with(field, grid, step, FdScheme::WIDE)
}

pub fn bilaplacian_residual_with<F: ScalarField2 + ?Sized>(
    field: &F,
    grid: &[[f64; 2]],
    step: f64,
    scheme: FdScheme,
) -> Result<BilaplacianReport> {
    for p in grid {
        guard_stencil(field, *p, 4.0 * step)?;
    }
    let values = grid
        .par_iter()
        .map(|p| jet_with(field, *p, 4, step, scheme).map(|j| j.bilaplacian()))
        .collect::<Result<Vec<f64>>>()?;
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(BilaplacianReport { max_abs, values })
}

/// Full n×n tensor grid on the square inscribed in the disk |z| ≤ r.
pub fn inscribed_grid(n: usize, r: f64) -> Vec<[f64; 2]> {
    let h = r / std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let t = |k: usize| -h + 2.0 * h * k as f64 / (n - 1) as f64;
            out.push([t(i), t(j)]);
        }
    }
    out
}

/// Points of an n×n grid over [−r, r]² that lie in the closed disk |z| ≤ r.
pub fn disk_grid(n: usize, r: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = -r + 2.0 * r * i as f64 / (n - 1) as f64;
            let y = -r + 2.0 * r * j as f64 / (n - 1) as f64;
            if x.hypot(y) <= r + 1e-12 {
                out.push([x, y]);
            }
        }
    }
    out
}

type ArcFn = Box<dyn Fn(f64) -> [f64; 2] + Send + Sync>;

/// Boundary arc parametrized on [0, 1] together with its inward unit normal.
pub struct CurveArc {
    pub id: String,
    point: ArcFn,
    normal: ArcFn,
    pub endpoints_excluded: bool,
}

impl CurveArc {
    pub fn new(id: impl Into<String>, point: ArcFn, normal: ArcFn) -> Self {
        Self {
            id: id.into(),
            point,
            normal,
            endpoints_excluded: true,
        }
    }

    /// Arc {c + r e^{iθ} : θ ∈ [θ₀, θ₁]} of a circle, normal pointing to c.
    pub fn circle(center: [f64; 2], radius: f64, theta0: f64, theta1: f64) -> Self {
        let id = format!(
            "circle({},{};{})[{:.6},{:.6}]",
            center[0], center[1], radius, theta0, theta1
        );
        Self::new(
            id,
            Box::new(move |s| {
                let t = theta0 + s * (theta1 - theta0);
                [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            }),
            Box::new(move |s| {
                let t = theta0 + s * (theta1 - theta0);
                [-t.cos(), -t.sin()]
            }),
        )
    }

    pub fn point(&self, s: f64) -> [f64; 2] {
        (self.point)(s)
    }

    pub fn normal(&self, s: f64) -> [f64; 2] {
        (self.normal)(s)
    }

    /// Checks unit normals and injectivity on `samples` parameter values.
    pub fn validate(&self, samples: usize) -> Result<()> {
        let pts: Vec<[f64; 2]> = (0..samples)
            .map(|k| self.point(k as f64 / (samples - 1) as f64))
            .collect();
        for k in 0..samples {
            let n = self.normal(k as f64 / (samples - 1) as f64);
            if (n[0].hypot(n[1]) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "arc {} normal is not unit at sample {k}",
                    self.id
                )));
            }
        }
        for i in 0..samples {
            for j in i + 1..samples {
                if (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]) < 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "arc {} is not injective",
                        self.id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// t₀, t₀/2, t₀/4, ...
pub fn geometric_ladder(t0: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t0 * 0.5f64.powi(k as i32)).collect()
}

/// Arc parameters probed by [`flatness_decay`].
pub const ARC_SAMPLES: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DecayReport {
    pub arc_id: String,
    pub expected_order: u32,
    pub ladder: Vec<f64>,
    pub abs_u: Vec<f64>,
    pub abs_dnu: Vec<f64>,
    pub abs_dn2u: Vec<f64>,
    /// Fitted log-log slopes for u, ∂_n u, ∂_n² u; None when the quantity
    /// sits at the noise floor.
    pub exponents: [Option<f64>; 3],
    pub thresholds: [f64; 3],
    pub verdicts: [bool; 3],
    pub pass: bool,
}

#[derive(Serialize)]
struct DecaySummary<'a> {
    exponents: &'a [Option<f64>; 3],
    verdicts: &'a [bool; 3],
    arc_id: &'a str,
}

impl DecayReport {
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(DecaySummary {
            exponents: &self.exponents,
            verdicts: &self.verdicts,
            arc_id: &self.arc_id,
        })
        .expect("summary serializes")
    }

    /// CSV with a leading '#' comment documenting the columns.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# arc {}: t = inward probe distance; abs_u, abs_dnu, abs_dn2u = max over arc samples of |u|, |d_n u|, |d_n^2 u|",
            self.arc_id
        )?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["t", "abs_u", "abs_dnu", "abs_dn2u"])?;
        for i in 0..self.ladder.len() {
            csv.write_record([
                format!("{:e}", self.ladder[i]),
                format!("{:e}", self.abs_u[i]),
                format!("{:e}", self.abs_dnu[i]),
                format!("{:e}", self.abs_dn2u[i]),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Least-squares slope of log y against log x over points above the floor.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > NOISE_FLOOR)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Probes the field along inward normals of `arc` at the distances in
/// `ladder` and fits the decay exponents of |u|, |∂_n u| and |∂_n² u|.
pub fn flatness_decay<F: ScalarField2 + ?Sized>(
    field: &F,
    arc: &CurveArc,
    ladder: &[f64],
    expected_order: u32,
) -> Result<DecayReport> {
    if ladder.len() < MIN_LADDER {
        return Err(Error::InvalidInput(format!(
            "decay ladder needs at least {MIN_LADDER} points, got {}",
            ladder.len()
        )));
    }
    for w in ladder.windows(2) {
        if ((w[1] / w[0]) - 0.5).abs() > 1e-12 {
            return Err(Error::InvalidInput("decay ladder ratio must be 1/2".into()));
        }
    }
    let probes: Vec<(usize, f64)> = (0..ladder.len())
        .flat_map(|i| ARC_SAMPLES.iter().map(move |&s| (i, s)))
        .collect();
    let measured = probes
        .par_iter()
        .map(|&(i, s)| {
            let t = ladder[i];
            let base = arc.point(s);
            let n = arc.normal(s);
            let p = [base[0] + t * n[0], base[1] + t * n[1]];
            let jet = jet_at(field, p, 2, DEFAULT_STEP.min(t / 4.0))?;
            Ok((
                i,
                [
                    jet.value().abs(),
                    jet.directional(n, 1).abs(),
                    jet.directional(n, 2).abs(),
                ],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cols = [
        vec![0.0; ladder.len()],
        vec![0.0; ladder.len()],
        vec![0.0; ladder.len()],
    ];
    for (i, vals) in measured {
        for k in 0..3 {
            cols[k][i] = f64::max(cols[k][i], vals[k]);
        }
    }
    let mut exponents = [None; 3];
    let mut verdicts = [false; 3];
    let mut thresholds = [0.0; 3];
    for k in 0..3 {
        thresholds[k] = expected_order as f64 - DECAY_MARGIN - k as f64;
        exponents[k] = loglog_slope(ladder, &cols[k]);
        verdicts[k] = match exponents[k] {
            None => true,
            Some(e) => e >= thresholds[k],
        };
    }
    let [abs_u, abs_dnu, abs_dn2u] = cols;
    Ok(DecayReport {
        arc_id: arc.id.clone(),
        expected_order,
        ladder: ladder.to_vec(),
        abs_u,
        abs_dnu,
        abs_dn2u,
        exponents,
        thresholds,
        verdicts,
        pass: verdicts.iter().all(|v| *v),
    })
}

/// The arc {e^{iθ} : |θ − π| ≤ π/2} opposite the kernel's singularity.
pub fn kernel_arc() -> CurveArc {
    CurveArc::circle([0.0, 0.0], 1.0, PI / 2.0, 3.0 * PI / 2.0)
}

//! Biharmonic functions on a rational-map domain Ω = φ(𝔻) that are flat to
//! order three on a boundary arc I = φ(Ĩ).
//!
//! The pipeline is
//!
//! 1. a real atomic measure ν on 𝕋 \ Ĩ with V₂ = ∫ F(·, ξ) dν(ξ), where
//!    F(ζ, ξ) = φ(ζ)⁻¹ ∫₀^ζ (1 + ξ̄η)/(1 − ξ̄η) φ′(η) dη, so that
//!    Re[(φV₂)′/φ′] is a Poisson integral of ν and vanishes on Ĩ;
//! 2. V₁ from [V₁′/φ′]′ = −c·G′ with c(ζ) = φ*(1/ζ)/φ(ζ) and
//!    G = φ²V₂′/φ′, which is holomorphic once ν kills the poles of c;
//! 3. v = Re V₁ + |φ|² Re V₂, ũ = v ∘ φ⁻¹ and u = ũ − A with an affine A
//!    matching the value and gradient of ũ at the midpoint of I.
//!
//! Writing P(ζ) = Σ c_k/(1 − ξ̄_k ζ) and K(ζ) = ∫₀^ζ φ′P gives the closed
//! forms V₂ = −Σc_k + 2K/φ and c·G′ = 2φ*(1/ζ)P′(ζ), which is what the
//! evaluators use.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldlab::{
    bilaplacian_residual, flatness_decay, geometric_ladder, jet_at, CurveArc, DecayReport,
    ScalarField2, DEFAULT_STEP,
};
use crate::polyrat::{poles_in_disk, RationalMap};
use crate::quad::integrate_segment;
use crate::schwarz::conformal_inverse;
use crate::series::Series;

/// Minimal angular gap between an atom and the closure of Ĩ.
pub const ATOM_MARGIN: f64 = 0.05;
pub const DEFAULT_ATOMS: usize = 12;
pub const CONSTRAINT_TOL: f64 = 1e-10;
pub const NULLSPACE_TOL: f64 = 1e-8;
pub const PATH_TOL: f64 = 1e-9;
/// Principal part of c·G′ on its suppression disk, relative to the regular part.
pub const SUPPRESSION_TOL: f64 = 1e-8;
pub const BLOWUP_LIMIT: f64 = 1e6;
pub const NONTRIVIAL_TOL: f64 = 1e-8;
pub const DECAY_T0: f64 = 0.04;
pub const DECAY_POINTS: usize = 6;

const SEGMENT_TOL: f64 = 1e-13;
const SERIES_LEN: usize = 48;
const ORIGIN_RADIUS: f64 = 0.2;
const PATH_CLEARANCE: f64 = 1e-6;

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Open arc Ĩ = {e^{iθ} : θ₀ < θ < θ₁} of the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArcJson", into = "ArcJson")]
pub struct ArcSpec {
    theta0: f64,
    theta1: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcJson {
    theta0: f64,
    theta1: f64,
}

impl TryFrom<ArcJson> for ArcSpec {
    type Error = Error;
    fn try_from(j: ArcJson) -> Result<Self> {
        ArcSpec::new(j.theta0, j.theta1)
    }
}

impl From<ArcSpec> for ArcJson {
    fn from(a: ArcSpec) -> Self {
        ArcJson {
            theta0: a.theta0,
            theta1: a.theta1,
        }
    }
}

impl ArcSpec {
    pub fn new(theta0: f64, theta1: f64) -> Result<Self> {
        let len = theta1 - theta0;
        if !theta0.is_finite() || !theta1.is_finite() || len <= 0.0 || len >= TAU {
            return Err(Error::InvalidInput(format!(
                "arc ({theta0}, {theta1}) must satisfy 0 < theta1 - theta0 < 2 pi"
            )));
        }
        Ok(Self { theta0, theta1 })
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn length(&self) -> f64 {
        self.theta1 - self.theta0
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.theta0 + self.theta1)
    }

    /// The complementary closed arc as an angle interval [θ₁, θ₀ + 2π].
    pub fn complement(&self) -> (f64, f64) {
        (self.theta1, self.theta0 + TAU)
    }

    /// Angular distance from e^{iθ} to the closed arc (zero inside).
    pub fn angular_distance(&self, theta: f64) -> f64 {
        let d = (theta - self.theta0).rem_euclid(TAU);
        if d <= self.length() {
            0.0
        } else {
            (d - self.length()).min(TAU - d)
        }
    }
}

/// Real point masses c_k at unit-modulus atoms ξ_k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<Complex64>,
    pub weights: Vec<f64>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<Complex64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::InvalidInput(
                "measure needs one weight per atom and at least one atom".into(),
            ));
        }
        if let Some(a) = atoms.iter().find(|a| (a.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidInput(format!(
                "atom {a} is not on the unit circle"
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("measure weights must be finite".into()));
        }
        Ok(Self { atoms, weights })
    }

    /// `n` atoms equally spaced on the complement of `arc`, keeping
    /// [`ATOM_MARGIN`] from its endpoints.
    pub fn complement_atoms(arc: &ArcSpec, n: usize) -> Vec<Complex64> {
        let (a, b) = arc.complement();
        let (a, b) = (a + ATOM_MARGIN, b - ATOM_MARGIN);
        if n == 1 {
            return vec![Complex64::from_polar(1.0, 0.5 * (a + b))];
        }
        (0..n)
            .map(|k| Complex64::from_polar(1.0, a + (b - a) * k as f64 / (n - 1) as f64))
            .collect()
    }

    /// Checks the support margin against `arc` and rejects the zero measure.
    pub fn check_support(&self, arc: &ArcSpec) -> Result<()> {
        for a in &self.atoms {
            let d = arc.angular_distance(a.arg());
            if d < ATOM_MARGIN - 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "atom {a} lies within {d:.3} of the arc, margin is {ATOM_MARGIN}"
                )));
            }
        }
        if self.is_trivial() {
            return Err(Error::InvalidInput("measure has all weights zero".into()));
        }
        Ok(())
    }

    pub fn is_trivial(&self) -> bool {
        self.weights.iter().all(|w| *w == 0.0)
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// max |c_k|.
    pub fn scale(&self) -> f64 {
        self.weights.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            atoms: self.atoms.clone(),
            weights: self.weights.iter().map(|w| w * s).collect(),
        }
    }
}

/// Pole of c(ζ) in 𝔻 with the vanishing order it forces on V₂′.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleConstraint {
    pub zeta: Complex64,
    pub pole_order: usize,
    pub vanishing_order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct ConstraintSet {
    pub entries: Vec<PoleConstraint>,
}

impl ConstraintSet {
    /// Number of real linear conditions, 2Σs_p.
    pub fn real_rows(&self) -> usize {
        2 * self
            .entries
            .iter()
            .map(|e| e.vanishing_order)
            .sum::<usize>()
    }
}

fn check_normalized(map: &RationalMap) -> Result<()> {
    let v = map.eval(c0())?;
    if v.norm() > 1e-14 {
        return Err(Error::Normalization(v));
    }
    Ok(())
}

/// Taylor coefficients of (1 − ξ̄ζ)^{−power} at `center`, power ∈ {1, 2}.
fn geometric_series(xbar: Complex64, center: Complex64, power: u32, len: usize) -> Series {
    let a = 1.0 - xbar * center;
    let q = xbar / a;
    let lead = a.powi(-(power as i32));
    let coef = (0..len)
        .map(|n| {
            let mult = if power == 2 { (n + 1) as f64 } else { 1.0 };
            lead * q.powu(n as u32) * mult
        })
        .collect();
    Series::new(0, coef)
}

fn check_path(a: Complex64, b: Complex64, xbar: &[Complex64]) -> Result<()> {
    let d = b - a;
    for x in xbar {
        let pole = 1.0 / x;
        let s = if d.norm_sqr() == 0.0 {
            0.0
        } else {
            (((pole - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0)
        };
        let distance = (a + d * s - pole).norm();
        if distance < PATH_CLEARANCE {
            return Err(Error::Path {
                point: pole,
                distance,
            });
        }
    }
    Ok(())
}

/// K_ξ(ζ) = ∫₀^ζ φ′(η)/(1 − ξ̄η) dη along the segment.
fn herglotz_k(map: &RationalMap, zeta: Complex64, xbar: Complex64) -> Result<Complex64> {
    check_path(c0(), zeta, &[xbar])?;
    let dphi = map.derivative();
    let [k] = integrate_segment(c0(), zeta, SEGMENT_TOL, |eta| {
        [dphi.eval(eta).unwrap_or(c0()) / (1.0 - xbar * eta)]
    })?;
    Ok(k)
}

/// Taylor series of F(center + t, ξ) in t with `len` coefficients.
pub fn herglotz_series(
    map: &RationalMap,
    center: Complex64,
    xi: Complex64,
    len: usize,
) -> Result<Series> {
    let xbar = xi.conj();
    let phi = map.laurent_at(center, len + 1)?;
    let dphi = map.derivative().laurent_at(center, len + 1)?;
    let k_prime = dphi.mul(&geometric_series(xbar, center, 1, len + 1));
    let mut k = k_prime.integrate();
    if center != c0() {
        k = k.add(&Series::constant(herglotz_k(map, center, xbar)?, len + 2));
    }
    let f = Series::constant(Complex64::new(-1.0, 0.0), len)
        .add(&k.scale(Complex64::new(2.0, 0.0)).div(&phi));
    Ok(f.truncate(len))
}

/// F(ζ, ξ) = φ(ζ)⁻¹ ∫₀^ζ (1 + ξ̄η)/(1 − ξ̄η) φ′(η) dη.
pub fn herglotz_f(map: &RationalMap, zeta: Complex64, xi: Complex64) -> Result<Complex64> {
    if zeta.norm() < 1e-4 {
        return Ok(herglotz_series(map, c0(), xi, 8)?.eval(zeta));
    }
    let k = herglotz_k(map, zeta, xi.conj())?;
    Ok(-1.0 + 2.0 * k / map.eval(zeta)?)
}

/// Poles of c(ζ) = φ*(1/ζ)/φ(ζ) in 𝔻 with vanishing orders m − 1 at the
/// zero of φ and m + 1 elsewhere. Poles needing no condition are omitted.
pub fn pole_constraints(map: &RationalMap) -> Result<ConstraintSet> {
    check_normalized(map)?;
    let c = map.schwarz_pullback().divide(map)?;
    let entries = poles_in_disk(&c)?
        .into_iter()
        .map(|p| {
            let at_zero = p.location.norm() < 1e-12;
            PoleConstraint {
                zeta: if at_zero { c0() } else { p.location },
                pole_order: p.order,
                vanishing_order: if at_zero { p.order - 1 } else { p.order + 1 },
            }
        })
        .filter(|e| e.vanishing_order >= 1)
        .collect();
    Ok(ConstraintSet { entries })
}

/// Rows of the real constraint system: Re/Im of ∂^j F(ζ_p, ξ_k) for
/// j = 1..s_p, then the total-mass row that makes V₂(0) = Σc_k vanish.
fn constraint_rows(
    map: &RationalMap,
    constraints: &ConstraintSet,
    atoms: &[Complex64],
) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for e in &constraints.entries {
        let series: Vec<Series> = atoms
            .iter()
            .map(|&xi| herglotz_series(map, e.zeta, xi, e.vanishing_order + 1))
            .collect::<Result<_>>()?;
        for j in 1..=e.vanishing_order {
            let d: Vec<Complex64> = series.iter().map(|s| s.derivative_at_center(j)).collect();
            rows.push(d.iter().map(|c| c.re).collect());
            rows.push(d.iter().map(|c| c.im).collect());
        }
    }
    rows.push(vec![1.0; atoms.len()]);
    Ok(rows)
}

/// Largest |Σ c_k ∂^j F(ζ_p, ξ_k)| over all constraints, and |V₂(0)|.
pub fn constraint_residual(
    map: &RationalMap,
    measure: &AtomicMeasure,
    constraints: &ConstraintSet,
) -> Result<f64> {
    let rows = constraint_rows(map, constraints, &measure.atoms)?;
    Ok(rows
        .iter()
        .map(|r| {
            r.iter()
                .zip(&measure.weights)
                .map(|(a, c)| a * c)
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureSolution {
    pub measure: AtomicMeasure,
    pub nullspace_dim: usize,
    /// Singular values of the row-normalized constraint matrix, ascending.
    pub singular_values: Vec<f64>,
    pub constraint_residual: f64,
}

/// ΣcF′ at a handful of interior points; zero iff V₂ is constant.
fn v2_prime_probe(map: &RationalMap, atoms: &[Complex64], weights: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 0..5 {
        let zeta = Complex64::from_polar(0.3 + 0.1 * k as f64, 0.7 + 1.3 * k as f64);
        let mut acc = c0();
        for (xi, w) in atoms.iter().zip(weights) {
            acc += herglotz_series(map, zeta, *xi, 2)?.at(1) * *w;
        }
        worst = worst.max(acc.norm());
    }
    Ok(worst)
}

/// Nullspace vector of the constraint system with atoms equally spaced on
/// the complement of `arc`. The returned weights have unit Euclidean norm
/// and a positive largest entry.
pub fn solve_measure(
    map: &RationalMap,
    arc: &ArcSpec,
    constraints: &ConstraintSet,
    atom_count: usize,
) -> Result<MeasureSolution> {
    let needed = constraints.real_rows() + 3;
    if atom_count < needed {
        return Err(Error::InvalidInput(format!(
            "atom count {atom_count} below the required {needed} (2 x total vanishing order + 3)"
        )));
    }
    let atoms = AtomicMeasure::complement_atoms(arc, atom_count);
    let rows = constraint_rows(map, constraints, &atoms)?;
    let n = atom_count;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, r) in rows.iter().enumerate() {
        let s = r
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        for (j, x) in r.iter().enumerate() {
            a[(i, j)] = x / s;
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let top = singular_values.last().copied().unwrap_or(0.0).max(1.0);
    let null: Vec<Vec<f64>> = order
        .iter()
        .filter(|&&i| svd.singular_values[i] <= NULLSPACE_TOL * top)
        .map(|&i| v_t.row(i).iter().copied().collect())
        .collect();
    if null.is_empty() {
        return Err(Error::Infeasible(singular_values[0]));
    }
    // Basis-independent first choice: the nullspace projection of a ramp.
    let ramp: Vec<f64> = (0..n).map(|k| k as f64 + 1.0).collect();
    let mut projected = vec![0.0; n];
    for v in &null {
        let dot: f64 = v.iter().zip(&ramp).map(|(a, b)| a * b).sum();
        for (p, x) in projected.iter_mut().zip(v) {
            *p += dot * x;
        }
    }
    let mut candidates = vec![projected];
    candidates.extend(null.iter().cloned());
    for mut w in candidates {
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        let lead = w
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() + 1e-12 { x } else { m });
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for x in w.iter_mut() {
            *x *= sign / norm;
        }
        if v2_prime_probe(map, &atoms, &w)? < 1e-12 {
            continue;
        }
        let measure = AtomicMeasure::new(atoms.clone(), w)?;
        let residual = constraint_residual(map, &measure, constraints)?;
        return Ok(MeasureSolution {
            measure,
            nullspace_dim: null.len(),
            singular_values,
            constraint_residual: residual,
        });
    }
    Err(Error::Infeasible(singular_values[0]))
}

/// Neighborhood of a pole of φ*(1/ζ) in 𝔻 on which c·G′ is replaced by
/// its Taylor series, with antiderivatives of c·G′ and φ·c·G′.
#[derive(Clone, Debug)]
struct SuppressedPole {
    center: Complex64,
    radius: f64,
    principal: Series,
    f_int: Series,
    phif_int: Series,
    /// Size of the principal part relative to the regular part on the rim.
    relative_principal: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SuppressionRecord {
    pub zeta: Complex64,
    pub radius: f64,
    pub relative_principal: f64,
}

/// Holomorphic pair (V₁, V₂) and its derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartsValue {
    pub v1: Complex64,
    pub dv1: Complex64,
    pub v2: Complex64,
    pub dv2: Complex64,
}

/// Evaluation contracts for V₂, V₂′, V₁, V₁′ on 𝔻 for a fixed measure.
#[derive(Clone, Debug)]
pub struct HolomorphicParts {
    map: RationalMap,
    dphi: RationalMap,
    pullback: RationalMap,
    measure: AtomicMeasure,
    xbar: Vec<Complex64>,
    v2_origin: Series,
    dv2_origin: Series,
    poles: Vec<SuppressedPole>,
}

impl HolomorphicParts {
    pub fn new(map: RationalMap, measure: AtomicMeasure) -> Result<Self> {
        check_normalized(&map)?;
        let xbar: Vec<Complex64> = measure.atoms.iter().map(|a| a.conj()).collect();
        let mut v2_origin = Series::new(0, vec![c0(); SERIES_LEN]);
        for (xi, w) in measure.atoms.iter().zip(&measure.weights) {
            let f = herglotz_series(&map, c0(), *xi, SERIES_LEN)?;
            v2_origin = v2_origin.add(&f.scale(Complex64::new(*w, 0.0)));
        }
        let dv2_origin = v2_origin.deriv();
        let pullback = map.schwarz_pullback();
        let mut parts = Self {
            dphi: map.derivative(),
            map,
            pullback,
            measure,
            xbar,
            v2_origin,
            dv2_origin,
            poles: Vec::new(),
        };
        parts.poles = parts.suppress_poles()?;
        Ok(parts)
    }

    fn suppress_poles(&self) -> Result<Vec<SuppressedPole>> {
        let poles = poles_in_disk(&self.pullback)?;
        let all_roots = self.pullback.reduce().den().roots()?;
        let mut out = Vec::new();
        for p in &poles {
            let mut gap = 1.0 - p.location.norm();
            for (r, _) in &all_roots {
                let d = (*r - p.location).norm();
                if d > 1e-9 {
                    gap = gap.min(d);
                }
            }
            let radius = 0.3 * gap.min(1.0);
            let m = p.order;
            let len = SERIES_LEN + m;
            let center = if p.location.norm() < 1e-12 {
                c0()
            } else {
                p.location
            };
            let pb = self.pullback.laurent_at(center, len)?;
            let mut dp = Series::new(0, vec![c0(); len]);
            for (x, w) in self.xbar.iter().zip(&self.measure.weights) {
                dp = dp.add(&geometric_series(*x, center, 2, len).scale(*x * *w));
            }
            let f = pb.mul(&dp).scale(Complex64::new(2.0, 0.0));
            let principal = Series::new(
                f.val,
                f.coef
                    .iter()
                    .take((-f.val).max(0) as usize)
                    .copied()
                    .collect(),
            );
            let regular = f.regular_part();
            let rim_principal: f64 = (principal.val..0)
                .map(|k| principal.at(k).norm() * radius.powi(k))
                .sum();
            let rim_regular = regular
                .coef
                .iter()
                .enumerate()
                .map(|(n, c)| c.norm() * radius.powi(n as i32))
                .fold(0.0, f64::max);
            let relative_principal = if rim_principal == 0.0 {
                0.0
            } else {
                rim_principal / rim_regular.max(f64::MIN_POSITIVE)
            };
            let phi = self.map.laurent_at(center, len)?;
            out.push(SuppressedPole {
                center,
                radius,
                f_int: regular.integrate(),
                phif_int: phi.mul(&regular).integrate(),
                principal,
                relative_principal,
            });
        }
        Ok(out)
    }

    pub fn map(&self) -> &RationalMap {
        &self.map
    }

    pub fn measure(&self) -> &AtomicMeasure {
        &self.measure
    }

    pub fn suppression(&self) -> Vec<SuppressionRecord> {
        self.poles
            .iter()
            .map(|p| SuppressionRecord {
                zeta: p.center,
                radius: p.radius,
                relative_principal: p.relative_principal,
            })
            .collect()
    }

    fn check_suppressed(&self) -> Result<()> {
        match self
            .poles
            .iter()
            .find(|p| p.relative_principal > SUPPRESSION_TOL)
        {
            Some(p) => Err(Error::PoleSuppression(p.center)),
            None => Ok(()),
        }
    }

    /// P(η) and P′(η).
    fn p_and_dp(&self, eta: Complex64) -> (Complex64, Complex64) {
        let mut p = c0();
        let mut dp = c0();
        for (x, w) in self.xbar.iter().zip(&self.measure.weights) {
            let inv = 1.0 / (1.0 - x * eta);
            p += inv * *w;
            dp += x * inv * inv * *w;
        }
        (p, dp)
    }

    /// c·G′ = 2φ*(1/η)P′(η) with the principal parts at suppressed poles removed.
    fn suppressed_integrand(&self, eta: Complex64, dp: Complex64) -> Complex64 {
        let mut f = 2.0 * self.pullback.eval(eta).unwrap_or(c0()) * dp;
        for p in &self.poles {
            f -= p.principal.eval(eta - p.center);
        }
        f
    }

    /// [∫φ′P, ∫c·G′, ∫φ·c·G′] along the segment a → b.
    fn segment(&self, a: Complex64, b: Complex64, with_v1: bool) -> Result<[Complex64; 3]> {
        check_path(a, b, &self.xbar)?;
        let d = b - a;
        let mut out = [c0(); 3];
        if d.norm_sqr() == 0.0 {
            return Ok(out);
        }
        let mut inside: Vec<(f64, f64, usize)> = Vec::new();
        if with_v1 {
            for (i, p) in self.poles.iter().enumerate() {
                let w = a - p.center;
                let qa = d.norm_sqr();
                let qb = 2.0 * (w * d.conj()).re;
                let qc = w.norm_sqr() - p.radius * p.radius;
                let disc = qb * qb - 4.0 * qa * qc;
                if disc <= 0.0 {
                    continue;
                }
                let s1 = ((-qb - disc.sqrt()) / (2.0 * qa)).max(0.0);
                let s2 = ((-qb + disc.sqrt()) / (2.0 * qa)).min(1.0);
                if s2 > s1 {
                    inside.push((s1, s2, i));
                }
            }
            inside.sort_by(|x, y| x.0.total_cmp(&y.0));
        }
        let add = |out: &mut [Complex64; 3], v: [Complex64; 3]| {
            for (o, x) in out.iter_mut().zip(v) {
                *o += x;
            }
        };
        let outside = |p: Complex64, q: Complex64| -> Result<[Complex64; 3]> {
            if with_v1 {
                integrate_segment(p, q, SEGMENT_TOL, |eta| {
                    let (pv, dpv) = self.p_and_dp(eta);
                    let [phi, dphi, _] = self.map.eval_with_derivs(eta).unwrap_or([c0(); 3]);
                    let f = self.suppressed_integrand(eta, dpv);
                    [dphi * pv, f, phi * f]
                })
            } else {
                let [k] = integrate_segment(p, q, SEGMENT_TOL, |eta| {
                    [self.dphi.eval(eta).unwrap_or(c0()) * self.p_and_dp(eta).0]
                })?;
                Ok([k, c0(), c0()])
            }
        };
        let mut s = 0.0;
        for (s1, s2, i) in inside {
            let (p, q) = (a + d * s1, a + d * s2);
            if s1 > s {
                add(&mut out, outside(a + d * s, p)?);
            }
            let pole = &self.poles[i];
            let [k] = integrate_segment(p, q, SEGMENT_TOL, |eta| {
                [self.dphi.eval(eta).unwrap_or(c0()) * self.p_and_dp(eta).0]
            })?;
            let (tp, tq) = (p - pole.center, q - pole.center);
            add(
                &mut out,
                [
                    k,
                    pole.f_int.eval(tq) - pole.f_int.eval(tp),
                    pole.phif_int.eval(tq) - pole.phif_int.eval(tp),
                ],
            );
            s = s2;
        }
        if s < 1.0 {
            add(&mut out, outside(a + d * s, b)?);
        }
        Ok(out)
    }

    fn along(&self, path: &[Complex64], with_v1: bool) -> Result<[Complex64; 3]> {
        let mut total = [c0(); 3];
        let mut prev = c0();
        for &q in path {
            let v = self.segment(prev, q, with_v1)?;
            for (t, x) in total.iter_mut().zip(v) {
                *t += x;
            }
            prev = q;
        }
        Ok(total)
    }

    fn v2_from(&self, zeta: Complex64, k: Complex64) -> Result<(Complex64, Complex64)> {
        if zeta.norm() < ORIGIN_RADIUS {
            return Ok((self.v2_origin.eval(zeta), self.dv2_origin.eval(zeta)));
        }
        let [phi, dphi, _] = self.map.eval_with_derivs(zeta)?;
        let (p, _) = self.p_and_dp(zeta);
        let v2 = -self.measure.mass() + 2.0 * k / phi;
        let dv2 = 2.0 * dphi * (phi * p - k) / (phi * phi);
        Ok((v2, dv2))
    }

    /// (V₂(ζ), V₂′(ζ)).
    pub fn v2(&self, zeta: Complex64) -> Result<(Complex64, Complex64)> {
        let k = if zeta.norm() < ORIGIN_RADIUS {
            c0()
        } else {
            self.segment(c0(), zeta, false)?[0]
        };
        self.v2_from(zeta, k)
    }

    /// (V₁(ζ), V₁′(ζ)) integrating along the polyline 0 → path[0] → … .
    pub fn v1_along(&self, path: &[Complex64]) -> Result<(Complex64, Complex64)> {
        self.check_suppressed()?;
        let zeta = *path
            .last()
            .ok_or_else(|| Error::InvalidInput("empty integration path".into()))?;
        let [_, w, phiw] = self.along(path, true)?;
        let [phi, dphi, _] = self.map.eval_with_derivs(zeta)?;
        Ok((-phi * w + phiw, -dphi * w))
    }

    pub fn v1(&self, zeta: Complex64) -> Result<(Complex64, Complex64)> {
        self.v1_along(&[zeta])
    }

    /// All four quantities from one pass along the segment [0, ζ].
    pub fn eval(&self, zeta: Complex64) -> Result<PartsValue> {
        self.check_suppressed()?;
        let [k, w, phiw] = self.segment(c0(), zeta, true)?;
        let (v2, dv2) = self.v2_from(zeta, k)?;
        let [phi, dphi, _] = self.map.eval_with_derivs(zeta)?;
        let blowup = self
            .suppressed_integrand(zeta, self.p_and_dp(zeta).1)
            .norm();
        if blowup > BLOWUP_LIMIT * self.measure.scale().max(f64::MIN_POSITIVE) {
            let culprit = self.poles.iter().min_by(|a, b| {
                (a.center - zeta)
                    .norm()
                    .total_cmp(&(b.center - zeta).norm())
            });
            return Err(Error::PoleSuppression(culprit.map_or(zeta, |p| p.center)));
        }
        Ok(PartsValue {
            v1: -phi * w + phiw,
            dv1: -dphi * w,
            v2,
            dv2,
        })
    }

    /// v(ζ) = Re V₁ + |φ|² Re V₂.
    pub fn v(&self, zeta: Complex64) -> Result<f64> {
        let pv = self.eval(zeta)?;
        let phi = self.map.eval(zeta)?;
        Ok(pv.v1.re + phi.norm_sqr() * pv.v2.re)
    }

    /// Δu at φ(ζ): 4 Re Σ c_k (1 + ξ̄_kζ)/(1 − ξ̄_kζ).
    pub fn laplacian(&self, zeta: Complex64) -> f64 {
        4.0 * self
            .xbar
            .iter()
            .zip(&self.measure.weights)
            .map(|(x, w)| w * ((1.0 + x * zeta) / (1.0 - x * zeta)).re)
            .sum::<f64>()
    }
}

/// V₂′ = Σc_k F(·, ξ_k)′ and V₂ at ζ for a given measure.
pub fn build_v2(
    measure: &AtomicMeasure,
    map: &RationalMap,
    zeta: Complex64,
) -> Result<(Complex64, Complex64)> {
    let (v2, dv2) = HolomorphicParts::new(map.clone(), measure.clone())?.v2(zeta)?;
    Ok((dv2, v2))
}

/// (V₁′(ζ), V₁(ζ)); fails if the measure does not suppress the poles of c.
pub fn build_v1(
    measure: &AtomicMeasure,
    map: &RationalMap,
    zeta: Complex64,
) -> Result<(Complex64, Complex64)> {
    let (v1, dv1) = HolomorphicParts::new(map.clone(), measure.clone())?.v1(zeta)?;
    Ok((dv1, v1))
}

/// I = φ(Ĩ) with the inward unit normal −ζφ′/|ζφ′|.
pub fn boundary_arc(map: &RationalMap, arc: &ArcSpec) -> CurveArc {
    let (t0, t1) = (arc.theta0, arc.theta1);
    let pm = map.clone();
    let nm = map.clone();
    CurveArc::new(
        format!("phi(e^it)[{t0:.6},{t1:.6}]"),
        Box::new(move |s| {
            let z = pm
                .eval(Complex64::from_polar(1.0, t0 + s * (t1 - t0)))
                .unwrap_or(c0());
            [z.re, z.im]
        }),
        Box::new(move |s| {
            let zeta = Complex64::from_polar(1.0, t0 + s * (t1 - t0));
            let n = -zeta * nm.eval_with_derivs(zeta).map(|d| d[1]).unwrap_or(c0());
            let n = n / n.norm();
            [n.re, n.im]
        }),
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Nontriviality {
    pub max_abs_laplacian: f64,
    pub weight_scale: f64,
    pub relative: f64,
    /// Largest gap between the finite-difference and closed-form Δu.
    pub fd_gap: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArcFlatDiagnostics {
    pub constraints: ConstraintSet,
    pub nullspace_dim: Option<usize>,
    pub constraint_residual: f64,
    pub suppression: Vec<SuppressionRecord>,
    pub affine: [f64; 3],
    pub v2_origin: Complex64,
    pub decay: DecayReport,
    pub nontriviality: Nontriviality,
}

/// What `arcflat verify` reloads: everything else is recomputed.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoredSolution {
    pub map: RationalMap,
    pub arc: ArcSpec,
    pub measure: AtomicMeasure,
    pub affine: [f64; 3],
}

/// The constructed u together with its diagnostics.
#[derive(Clone, Debug)]
pub struct ArcFlatSolution {
    parts: HolomorphicParts,
    arc: ArcSpec,
    affine: [f64; 3],
    diagnostics: ArcFlatDiagnostics,
}

impl ScalarField2 for ArcFlatSolution {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.value(Complex64::new(x, y)).unwrap_or(f64::NAN)
    }
}

/// A(z) = A₀ + A₁x + A₂y matching the value and gradient of ũ at φ(ζ₀).
fn affine_at(parts: &HolomorphicParts, zeta0: Complex64) -> Result<[f64; 3]> {
    let pv = parts.eval(zeta0)?;
    let [phi, dphi, _] = parts.map.eval_with_derivs(zeta0)?;
    let v = pv.v1.re + phi.norm_sqr() * pv.v2.re;
    let dv = 0.5 * pv.dv1 + dphi * phi.conj() * pv.v2.re + 0.5 * phi.norm_sqr() * pv.dv2;
    let du = dv / dphi;
    let (a1, a2) = (2.0 * du.re, -2.0 * du.im);
    Ok([v - a1 * phi.re - a2 * phi.im, a1, a2])
}

fn interior_samples(map: &RationalMap) -> Result<Vec<(Complex64, Complex64)>> {
    let mut out = Vec::new();
    for r in [0.2, 0.4, 0.6] {
        for k in 0..8 {
            let zeta = Complex64::from_polar(r, PI * k as f64 / 4.0 + 0.1);
            out.push((zeta, map.eval(zeta)?));
        }
    }
    Ok(out)
}

fn nontriviality(sol: &ArcFlatSolution) -> Result<Nontriviality> {
    let samples = interior_samples(&sol.parts.map)?;
    let values = samples
        .par_iter()
        .map(|(zeta, z)| {
            let fd = jet_at(sol, [z.re, z.im], 2, DEFAULT_STEP)?.laplacian();
            Ok((fd, sol.parts.laplacian(*zeta)))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs_laplacian = values.iter().fold(0.0f64, |m, (fd, _)| m.max(fd.abs()));
    let fd_gap = values
        .iter()
        .fold(0.0f64, |m, (fd, ex)| m.max((fd - ex).abs()));
    let weight_scale = sol.parts.measure.scale();
    let relative = if weight_scale > 0.0 {
        max_abs_laplacian / weight_scale
    } else {
        0.0
    };
    Ok(Nontriviality {
        max_abs_laplacian,
        weight_scale,
        relative,
        fd_gap,
        pass: relative > NONTRIVIAL_TOL,
    })
}

impl ArcFlatSolution {
    /// u(z) = v(φ⁻¹(z)) − A(z).
    pub fn value(&self, z: Complex64) -> Result<f64> {
        let zeta = conformal_inverse(&self.parts.map, z)?;
        let [a0, a1, a2] = self.affine;
        Ok(self.parts.v(zeta)? - a0 - a1 * z.re - a2 * z.im)
    }

    pub fn parts(&self) -> &HolomorphicParts {
        &self.parts
    }

    pub fn arc(&self) -> &ArcSpec {
        &self.arc
    }

    pub fn affine(&self) -> [f64; 3] {
        self.affine
    }

    pub fn diagnostics(&self) -> &ArcFlatDiagnostics {
        &self.diagnostics
    }

    pub fn boundary_arc(&self) -> CurveArc {
        boundary_arc(&self.parts.map, &self.arc)
    }

    pub fn to_stored(&self) -> StoredSolution {
        StoredSolution {
            map: self.parts.map.clone(),
            arc: self.arc,
            measure: self.parts.measure.clone(),
            affine: self.affine,
        }
    }

    /// Rebuilds a stored solution, rerunning the assembly checks. The stored
    /// affine part must agree with the recomputed one.
    pub fn from_stored(stored: StoredSolution) -> Result<Self> {
        let constraints = pole_constraints(&stored.map)?;
        let parts = HolomorphicParts::new(stored.map, stored.measure)?;
        let sol = assemble(parts, stored.arc, constraints, None)?;
        let gap = sol
            .affine
            .iter()
            .zip(&stored.affine)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if gap > 1e-9 * sol.affine.iter().fold(1.0f64, |m, a| m.max(a.abs())) {
            return Err(Error::InvalidInput(format!(
                "stored affine part differs from the recomputed one by {gap:e}"
            )));
        }
        Ok(sol)
    }
}

/// Fixes the affine correction and checks flatness and nontriviality.
pub fn assemble(
    parts: HolomorphicParts,
    arc: ArcSpec,
    constraints: ConstraintSet,
    solved: Option<&MeasureSolution>,
) -> Result<ArcFlatSolution> {
    if parts.measure.is_trivial() {
        return Err(Error::Assembly {
            reason: "the zero measure produces the trivial function".into(),
            report: None,
        });
    }
    parts.measure.check_support(&arc)?;
    let constraint_residual = constraint_residual(&parts.map, &parts.measure, &constraints)?;
    let affine = affine_at(&parts, Complex64::from_polar(1.0, arc.mid()))?;
    let v2_origin = parts.v2(c0())?.0;
    let mut sol = ArcFlatSolution {
        diagnostics: ArcFlatDiagnostics {
            constraints,
            nullspace_dim: solved.map(|s| s.nullspace_dim),
            constraint_residual,
            suppression: parts.suppression(),
            affine,
            v2_origin,
            decay: DecayReport {
                arc_id: String::new(),
                expected_order: 3,
                ladder: Vec::new(),
                abs_u: Vec::new(),
                abs_dnu: Vec::new(),
                abs_dn2u: Vec::new(),
                exponents: [None; 3],
                thresholds: [0.0; 3],
                verdicts: [false; 3],
                pass: false,
            },
            nontriviality: Nontriviality {
                max_abs_laplacian: 0.0,
                weight_scale: 0.0,
                relative: 0.0,
                fd_gap: 0.0,
                pass: false,
            },
        },
        parts,
        arc,
        affine,
    };
    let decay = flatness_decay(
        &sol,
        &sol.boundary_arc(),
        &geometric_ladder(DECAY_T0, DECAY_POINTS),
        3,
    )?;
    if !decay.pass {
        return Err(Error::Assembly {
            reason: format!(
                "flatness verification failed with exponents {:?}",
                decay.exponents
            ),
            report: Some(Box::new(decay)),
        });
    }
    sol.diagnostics.decay = decay;
    let nt = nontriviality(&sol)?;
    if !nt.pass {
        return Err(Error::Assembly {
            reason: format!(
                "constructed function is affine to tolerance (relative Laplacian {:e})",
                nt.relative
            ),
            report: Some(Box::new(sol.diagnostics.decay.clone())),
        });
    }
    sol.diagnostics.nontriviality = nt;
    Ok(sol)
}

/// The whole pipeline: constraints, measure, parts, assembly.
pub fn build(map: RationalMap, arc: ArcSpec, atom_count: usize) -> Result<ArcFlatSolution> {
    let constraints = pole_constraints(&map)?;
    let solved = solve_measure(&map, &arc, &constraints, atom_count)?;
    let parts = HolomorphicParts::new(map, solved.measure.clone())?;
    assemble(parts, arc, constraints, Some(&solved))
}

/// Independent re-verification of a constructed solution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArcFlatVerification {
    pub decay: DecayReport,
    pub constraint_residual: f64,
    pub path_independence: f64,
    pub nontriviality: Nontriviality,
    /// max |Δ²u| on an interior grid relative to max |u| there.
    pub biharmonic_relative: f64,
    pub v2_origin: Complex64,
    pub v1_origin: Complex64,
    pub pass: bool,
}

pub const BIHARMONIC_REL_TOL: f64 = 1e-3;
const BIHARMONIC_STEP: f64 = 1e-2;

pub fn path_independence(parts: &HolomorphicParts, target: Complex64) -> Result<f64> {
    let (a, da) = parts.v1_along(&[target])?;
    let (b, db) = parts.v1_along(&[Complex64::new(target.re, 0.0), target])?;
    Ok((a - b).norm().max((da - db).norm()))
}

pub fn verify(sol: &ArcFlatSolution) -> Result<ArcFlatVerification> {
    let parts = &sol.parts;
    let constraints = pole_constraints(&parts.map)?;
    let constraint_residual = constraint_residual(&parts.map, &parts.measure, &constraints)?;
    let path = path_independence(parts, Complex64::new(0.5, 0.3))?;
    let decay = flatness_decay(
        sol,
        &sol.boundary_arc(),
        &geometric_ladder(DECAY_T0, DECAY_POINTS),
        3,
    )?;
    let nt = nontriviality(sol)?;
    let grid: Vec<[f64; 2]> = interior_samples(&parts.map)?
        .into_iter()
        .filter(|(zeta, _)| zeta.norm() < 0.5)
        .map(|(_, z)| [z.re, z.im])
        .collect();
    let bilap = bilaplacian_residual(sol, &grid, BIHARMONIC_STEP)?;
    let u_scale = grid
        .iter()
        .map(|p| sol.eval(p[0], p[1]).abs())
        .fold(f64::MIN_POSITIVE, f64::max);
    let biharmonic_relative = bilap.max_abs / u_scale;
    let v2_origin = parts.v2(c0())?.0;
    let v1_origin = parts.v1(c0())?.0;
    let pass = decay.pass
        && nt.pass
        && constraint_residual < CONSTRAINT_TOL
        && path < PATH_TOL
        && biharmonic_relative < BIHARMONIC_REL_TOL
        && v2_origin.norm() < CONSTRAINT_TOL
        && v1_origin.im.abs() < CONSTRAINT_TOL;
    Ok(ArcFlatVerification {
        decay,
        constraint_residual,
        path_independence: path,
        nontriviality: nt,
        biharmonic_relative,
        v2_origin,
        v1_origin,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk_arc() -> ArcSpec {
        ArcSpec::new(-3.0 * PI / 4.0, 3.0 * PI / 4.0).unwrap()
    }

    #[test]
    fn arc_spec_validation() {
        assert!(ArcSpec::new(0.0, 0.0).is_err());
        assert!(ArcSpec::new(0.0, TAU).is_err());
        let arc = disk_arc();
        assert_eq!(arc.angular_distance(0.3), 0.0);
        assert!((arc.angular_distance(PI) - PI / 4.0).abs() < 1e-12);
        let atoms = AtomicMeasure::complement_atoms(&arc, 6);
        assert!(atoms
            .iter()
            .all(|a| arc.angular_distance(a.arg()) >= ATOM_MARGIN - 1e-12));
    }

    #[test]
    fn herglotz_limit_at_origin() {
        let map = RationalMap::quadratic(c(0.3, 0.0));
        let xi = Complex64::from_polar(1.0, 2.0);
        let f3 = herglotz_f(&map, c(1e-3, 0.0), xi).unwrap();
        let f4 = herglotz_f(&map, c(1e-4, 0.0), xi).unwrap();
        let extrapolated = f4 + (f4 - f3) / 9.0;
        assert!((extrapolated - 1.0).norm() < 1e-6, "{extrapolated}");
    }

    #[test]
    fn herglotz_closed_form_on_disk() {
        let map = RationalMap::identity();
        let xi = c(-1.0, 0.0);
        for zeta in [c(0.3, 0.2), c(-0.6, 0.5), c(0.05, -0.7)] {
            let xb = xi.conj();
            let exact = -1.0 - 2.0 * (1.0 - xb * zeta).ln() / (xb * zeta);
            assert!((herglotz_f(&map, zeta, xi).unwrap() - exact).norm() < 1e-12);
            let s = herglotz_series(&map, c0(), xi, SERIES_LEN).unwrap();
            if zeta.norm() < 0.5 {
                assert!((s.eval(zeta) - exact).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn herglotz_derivative_is_poisson_kernel() {
        let map = RationalMap::quadratic(c(0.2, 0.1));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let zeta =
                Complex64::from_polar(rng.random_range(0.05..0.9), rng.random_range(0.0..TAU));
            let xi = Complex64::from_polar(1.0, rng.random_range(0.0..TAU));
            let s = herglotz_series(&map, zeta, xi, 3).unwrap();
            let phi = map.laurent_at(zeta, 3).unwrap();
            let d = phi.mul(&s).at(1) / phi.at(1);
            let kernel = (1.0 + xi.conj() * zeta) / (1.0 - xi.conj() * zeta);
            assert!((d - kernel).norm() < 1e-9 * kernel.norm().max(1.0));
            assert!(kernel.re > 0.0);
        }
        let xi = c(1.0, 0.0);
        let zeta = Complex64::from_polar(0.999, 0.5);
        assert!(((1.0 + xi.conj() * zeta) / (1.0 - xi.conj() * zeta)).re < 0.01);
    }

    #[test]
    fn pole_constraint_rules() {
        let disk = pole_constraints(&RationalMap::identity()).unwrap();
        assert_eq!(disk.entries.len(), 1);
        assert_eq!(
            (disk.entries[0].pole_order, disk.entries[0].vanishing_order),
            (2, 1)
        );
        let quad = pole_constraints(&RationalMap::quadratic(c(0.3, 0.0))).unwrap();
        assert_eq!(
            (quad.entries[0].pole_order, quad.entries[0].vanishing_order),
            (3, 2)
        );
        let scaled = RationalMap::from_poly(crate::polyrat::ComplexPoly::from_real(&[0.0, 2.5]));
        assert_eq!(
            pole_constraints(&scaled).unwrap().entries[0].vanishing_order,
            1
        );
        let shifted = RationalMap::from_poly(crate::polyrat::ComplexPoly::from_real(&[0.1, 1.0]));
        assert!(matches!(
            pole_constraints(&shifted),
            Err(Error::Normalization(_))
        ));
    }

    #[test]
    fn measure_solution_on_disk() {
        let map = RationalMap::identity();
        let arc = disk_arc();
        let cons = pole_constraints(&map).unwrap();
        let sol = solve_measure(&map, &arc, &cons, 6).unwrap();
        // Two rows from V₂′(0) = 0 and one from V₂(0) = 0.
        assert!(sol.nullspace_dim >= 3);
        assert!(sol.constraint_residual < 1e-10);
        let norm: f64 = sol
            .measure
            .weights
            .iter()
            .map(|w| w * w)
            .sum::<f64>()
            .sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        // Moment oracle: V₂′(0) = Σ c ξ̄ for φ = ζ.
        let m1: Complex64 = sol
            .measure
            .atoms
            .iter()
            .zip(&sol.measure.weights)
            .map(|(a, w)| a.conj() * *w)
            .sum();
        assert!(m1.norm() < 1e-10);
        let (dv2, v2) = build_v2(&sol.measure, &map, c0()).unwrap();
        assert!(dv2.norm() < 1e-10 && v2.norm() < 1e-10);
        assert!(solve_measure(&map, &arc, &cons, 4).is_err());
    }

    #[test]
    fn quadratic_map_moments() {
        let map = RationalMap::quadratic(c(0.3, 0.0));
        let cons = pole_constraints(&map).unwrap();
        let sol = solve_measure(&map, &disk_arc(), &cons, 10).unwrap();
        for n in 1..=2 {
            let m: Complex64 = sol
                .measure
                .atoms
                .iter()
                .zip(&sol.measure.weights)
                .map(|(a, w)| a.conj().powu(n) * *w)
                .sum();
            assert!(m.norm() < 1e-10, "moment {n}: {m}");
        }
    }

    #[test]
    fn single_atom_v2_matches_closed_form() {
        let map = RationalMap::identity();
        let measure = AtomicMeasure::new(vec![c(-1.0, 0.0)], vec![1.0]).unwrap();
        for zeta in [c(0.1, 0.05), c(0.5, -0.3), c(-0.2, 0.7)] {
            let (dv2, v2) = build_v2(&measure, &map, zeta).unwrap();
            let exact = -1.0 + 2.0 * (1.0 + zeta).ln() / zeta;
            let dexact = 2.0 / (zeta * (1.0 + zeta)) - 2.0 * (1.0 + zeta).ln() / (zeta * zeta);
            assert!((v2 - exact).norm() < 1e-10, "{v2} vs {exact}");
            assert!((dv2 - dexact).norm() < 1e-9);
        }
        // c·G′ keeps its pole, so V₁ is refused.
        assert!(matches!(
            build_v1(&measure, &map, c(0.5, 0.0)),
            Err(Error::PoleSuppression(_))
        ));
    }

    #[test]
    fn symmetric_measure_gives_real_v2_on_axis() {
        let map = RationalMap::identity();
        let a = Complex64::from_polar(1.0, 2.6);
        let b = Complex64::from_polar(1.0, 3.0);
        let measure =
            AtomicMeasure::new(vec![a, a.conj(), b, b.conj()], vec![1.0, 1.0, -1.0, -1.0]).unwrap();
        for x in [-0.7, -0.1, 0.3, 0.8] {
            let (_, v2) = build_v2(&measure, &map, c(x, 0.0)).unwrap();
            assert!(v2.im.abs() < 1e-10);
        }
    }

    #[test]
    fn first_boundary_condition_holds_on_arc() {
        let map = RationalMap::identity();
        let arc = disk_arc();
        let sol = solve_measure(&map, &arc, &pole_constraints(&map).unwrap(), 8).unwrap();
        let parts = HolomorphicParts::new(map, sol.measure).unwrap();
        let on_arc = (0..20)
            .map(|k| arc.theta0() + 0.2 + (arc.length() - 0.4) * k as f64 / 19.0)
            .map(|t| parts.laplacian(Complex64::from_polar(0.995, t)).abs())
            .fold(0.0, f64::max);
        let (a, b) = arc.complement();
        let peak = (0..200)
            .map(|k| a + (b - a) * k as f64 / 199.0)
            .map(|t| parts.laplacian(Complex64::from_polar(0.995, t)).abs())
            .fold(0.0, f64::max);
        assert!(on_arc < 0.05 * peak, "{on_arc} vs {peak}");
    }

    #[test]
    fn v1_path_independence_and_zero_measure() {
        let map = RationalMap::quadratic(c(0.3, 0.0));
        let sol = solve_measure(&map, &disk_arc(), &pole_constraints(&map).unwrap(), 10).unwrap();
        let parts = HolomorphicParts::new(map.clone(), sol.measure.clone()).unwrap();
        assert!(path_independence(&parts, c(0.5, 0.3)).unwrap() < 1e-9);
        assert!(parts
            .suppression()
            .iter()
            .all(|s| s.relative_principal < SUPPRESSION_TOL));
        let zero = sol.measure.scaled(0.0);
        let zparts = HolomorphicParts::new(map, zero.clone()).unwrap();
        assert_eq!(zparts.v1(c(0.4, -0.2)).unwrap().0, c0());
        assert!(matches!(
            assemble(zparts, disk_arc(), ConstraintSet::default(), None),
            Err(Error::Assembly { .. })
        ));
    }

    #[test]
    fn disk_pipeline_end_to_end() {
        let sol = build(RationalMap::identity(), disk_arc(), DEFAULT_ATOMS).unwrap();
        let d = sol.diagnostics();
        assert!(d.decay.pass, "{:?}", d.decay.exponents);
        assert!(d.constraint_residual < CONSTRAINT_TOL);
        assert!(d.nontriviality.pass);
        assert!(d.nontriviality.fd_gap < 1e-4 * d.nontriviality.max_abs_laplacian.max(1.0));
        // u and its gradient vanish at the midpoint of I.
        let z0 = Complex64::from_polar(1.0, disk_arc().mid());
        let jet = jet_at(&sol, [0.999 * z0.re, 0.999 * z0.im], 1, 1e-4).unwrap();
        assert!(jet.value().abs() < 1e-7 && jet.gradient().iter().all(|g| g.abs() < 1e-5));
    }

    #[test]
    fn pipeline_is_linear_in_the_measure() {
        let map = RationalMap::identity();
        let sol = build(map.clone(), disk_arc(), 8).unwrap();
        let parts = HolomorphicParts::new(map, sol.parts().measure().scaled(2.0)).unwrap();
        let doubled = assemble(
            parts,
            disk_arc(),
            sol.diagnostics().constraints.clone(),
            None,
        )
        .unwrap();
        for z in [c(0.3, 0.1), c(-0.5, 0.4), c(0.1, -0.8)] {
            let a = sol.value(z).unwrap();
            let b = doubled.value(z).unwrap();
            assert!((b - 2.0 * a).abs() < 1e-10 * a.abs().max(1.0));
        }
    }

    #[test]
    fn stored_round_trip() {
        let sol = build(RationalMap::identity(), disk_arc(), 8).unwrap();
        let text = serde_json::to_string(&sol.to_stored()).unwrap();
        let back = ArcFlatSolution::from_stored(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.affine(), sol.affine());
    }
}

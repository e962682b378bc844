//! Schwarz functions of ellipses and of images of the disk under rational
//! maps, branch detection by analytic continuation, and quadrature
//! identities ∫_Ω h dA = ⟨h, α⟩ for harmonic h.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::almansi2d::RealPoly2;
use crate::error::{Error, Result};
use crate::polyrat::{conformal_check, poles_in_disk, RationalMap};
use crate::quad::legendre_rule;

pub const BOUNDARY_SAMPLES: usize = 256;
pub const BOUNDARY_TOL: f64 = 1e-10;
pub const DEFAULT_MONODROMY_STEPS: usize = 720;
/// Loops must keep at least this distance from branch points and poles.
pub const LOOP_CLEARANCE: f64 = 1e-3;
pub const BRANCHED_THRESHOLD: f64 = 1e-3;

/// Axis-aligned centered ellipse x²/a² + y²/b² = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipseSpec {
    a: f64,
    b: f64,
}

impl EllipseSpec {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(b > 0.0 && a >= b && a.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "ellipse needs a >= b > 0, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Focal distance √(a² − b²).
    pub fn focal(&self) -> f64 {
        (self.a * self.a - self.b * self.b).sqrt()
    }

    pub fn is_circle(&self) -> bool {
        self.a == self.b
    }

    pub fn boundary_point(&self, theta: f64) -> Complex64 {
        Complex64::new(self.a * theta.cos(), self.b * theta.sin())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwarzValue {
    pub z: Complex64,
    pub value: Complex64,
    /// +1 for the sheet that equals z̄ on the ellipse, −1 for the other.
    pub sheet: i8,
}

/// Closed-form Schwarz function of an ellipse,
/// S(z) = [(a² + b²)z − 2ab·σ·√(z − c)√(z + c)]/c² (a²/z on a circle),
/// accepted only after it reproduces z̄ on the boundary.
#[derive(Clone, Debug)]
pub struct EllipseSchwarz {
    spec: EllipseSpec,
    boundary_residual: f64,
}

impl EllipseSchwarz {
    pub fn new(spec: EllipseSpec) -> Result<Self> {
        let mut s = Self {
            spec,
            boundary_residual: f64::INFINITY,
        };
        let mut worst = 0.0f64;
        for k in 0..BOUNDARY_SAMPLES {
            let z = spec.boundary_point(2.0 * PI * k as f64 / BOUNDARY_SAMPLES as f64);
            let v = s.eval(z, 1)?;
            worst = worst.max((v.value - z.conj()).norm());
        }
        if !(worst < BOUNDARY_TOL) {
            return Err(Error::SchwarzBoundary(worst));
        }
        s.boundary_residual = worst;
        Ok(s)
    }

    pub fn spec(&self) -> EllipseSpec {
        self.spec
    }

    pub fn boundary_residual(&self) -> f64 {
        self.boundary_residual
    }

    /// √(z − c)√(z + c): analytic off the focal segment, ≈ z at infinity.
    fn root(&self, z: Complex64) -> Complex64 {
        let c = self.spec.focal();
        (z - c).sqrt() * (z + c).sqrt()
    }

    /// [(a²+b²)z − 2abw]/c², rationalized to (c²z² + 4a²b²)/((a²+b²)z + 2abw)
    /// so that it stays accurate as c → 0.
    fn from_root(&self, z: Complex64, w: Complex64) -> Complex64 {
        let (a, b) = (self.spec.a, self.spec.b);
        let c2 = a * a - b * b;
        (c2 * z * z + 4.0 * a * a * b * b) / ((a * a + b * b) * z + 2.0 * a * b * w)
    }

    pub fn eval(&self, z: Complex64, sheet: i8) -> Result<SchwarzValue> {
        if sheet != 1 && sheet != -1 {
            return Err(Error::InvalidInput(format!(
                "sheet must be +1 or -1, got {sheet}"
            )));
        }
        let value = if self.spec.is_circle() {
            if z.norm() == 0.0 {
                return Err(Error::SchwarzPole(z));
            }
            self.spec.a * self.spec.a / z
        } else {
            let c = self.spec.focal();
            if (z - c).norm() < 1e-12 * c || (z + c).norm() < 1e-12 * c {
                return Err(Error::BranchPoint(z));
            }
            let v = self.from_root(z, self.root(z) * f64::from(sheet));
            if !v.is_finite() {
                return Err(Error::SchwarzPole(z));
            }
            v
        };
        Ok(SchwarzValue { z, value, sheet })
    }
}

/// S(z) for the ellipse `spec` on the given sheet.
pub fn schwarz_ellipse(spec: EllipseSpec, z: Complex64, sheet: i8) -> Result<SchwarzValue> {
    EllipseSchwarz::new(spec)?.eval(z, sheet)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub center: Complex64,
    pub radius: f64,
    pub steps: usize,
    pub start: Complex64,
    pub end: Complex64,
    pub mismatch: f64,
}

/// Continues S along the circle of `radius` about `center`, choosing at each
/// step the square-root sheet nearest the previous value, and returns the
/// discrepancy after one turn.
pub fn monodromy_probe(
    spec: EllipseSpec,
    center: Complex64,
    radius: f64,
    steps: usize,
) -> Result<MonodromyReport> {
    if steps < 8 || !(radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "loop needs radius > 0 and >= 8 steps, got {radius}, {steps}"
        )));
    }
    let s = EllipseSchwarz::new(spec)?;
    let c = spec.focal();
    let singular = if spec.is_circle() {
        vec![Complex64::new(0.0, 0.0)]
    } else {
        vec![Complex64::new(c, 0.0), Complex64::new(-c, 0.0)]
    };
    for p in &singular {
        if ((center - p).norm() - radius).abs() <= LOOP_CLEARANCE {
            return Err(Error::Path {
                point: *p,
                distance: ((center - p).norm() - radius).abs(),
            });
        }
    }
    let at = |k: usize| center + Complex64::from_polar(radius, 2.0 * PI * k as f64 / steps as f64);
    let z0 = at(0);
    if spec.is_circle() {
        // S = a²/z is single-valued; continuation is plain evaluation.
        let start = s.eval(z0, 1)?.value;
        let mut prev = start;
        for k in 1..=steps {
            let cur = s.eval(at(k), 1)?.value;
            if (cur - prev).norm() > 0.5 * prev.norm() {
                return Err(Error::Continuation {
                    step: k,
                    jump: (cur - prev).norm(),
                });
            }
            prev = cur;
        }
        return Ok(MonodromyReport {
            center,
            radius,
            steps,
            start,
            end: prev,
            mismatch: (prev - start).norm(),
        });
    }
    let mut w = s.root(z0);
    let start = s.from_root(z0, w);
    for k in 1..=steps {
        let z = at(k);
        let cand = s.root(z);
        let next = if (cand - w).norm() <= (-cand - w).norm() {
            cand
        } else {
            -cand
        };
        let jump = (next - w).norm();
        if jump > 0.5 * w.norm() {
            return Err(Error::Continuation { step: k, jump });
        }
        w = next;
    }
    let end = s.from_root(z0, w);
    Ok(MonodromyReport {
        center,
        radius,
        steps,
        start,
        end,
        mismatch: (end - start).norm(),
    })
}

/// Preimage ζ ∈ closed disk with φ(ζ) = z, by Newton's method started from
/// z/φ′(0) and, failing that, from the nearest point of a polar seed grid.
pub fn conformal_inverse(map: &RationalMap, z: Complex64) -> Result<Complex64> {
    let newton = |mut zeta: Complex64| -> Option<Complex64> {
        for _ in 0..60 {
            let [f, df, _] = map.eval_with_derivs(zeta).ok()?;
            let r = f - z;
            if r.norm() <= 1e-14 * z.norm().max(1.0) {
                return (zeta.norm() <= 1.0 + 1e-9).then_some(zeta);
            }
            if df.norm() == 0.0 {
                return None;
            }
            let stepped = zeta - r / df;
            // Keep iterates from wandering far outside the disk.
            zeta = if stepped.norm() > 1.5 {
                stepped / stepped.norm() * 1.5
            } else {
                stepped
            };
        }
        let f = map.eval(zeta).ok()?;
        ((f - z).norm() <= 1e-12 * z.norm().max(1.0) && zeta.norm() <= 1.0 + 1e-9).then_some(zeta)
    };
    let d0 = map.eval_with_derivs(Complex64::new(0.0, 0.0))?[1];
    if let Some(zeta) = newton(z / d0) {
        return Ok(zeta);
    }
    let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
    for i in 1..=64 {
        for j in 0..64 {
            let zeta = Complex64::from_polar(i as f64 / 64.0, 2.0 * PI * j as f64 / 64.0);
            if let Ok(f) = map.eval(zeta) {
                let d = (f - z).norm();
                if d < best.0 {
                    best = (d, zeta);
                }
            }
        }
    }
    newton(best.1).ok_or(Error::InverseMap(z))
}

/// Schwarz function S(z) = φ*(1/φ⁻¹(z)) of Ω = φ(𝔻).
#[derive(Clone, Debug)]
pub struct RationalSchwarz {
    map: RationalMap,
    pullback: RationalMap,
}

impl RationalSchwarz {
    pub fn new(map: RationalMap) -> Result<Self> {
        let report = conformal_check(&map, BOUNDARY_SAMPLES);
        if !report.ok {
            return Err(Error::InvalidInput(format!(
                "map is not conformal: {}",
                report.reasons.join("; ")
            )));
        }
        let pullback = map.schwarz_pullback();
        Ok(Self { map, pullback })
    }

    pub fn map(&self) -> &RationalMap {
        &self.map
    }

    pub fn pullback(&self) -> &RationalMap {
        &self.pullback
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let zeta = conformal_inverse(&self.map, z)?;
        self.pullback.eval(zeta).map_err(|_| Error::SchwarzPole(z))
    }

    /// sup |S(z) − z̄| over boundary samples z = φ(e^{iθ}).
    pub fn boundary_residual(&self, samples: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for k in 0..samples {
            let zeta = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / samples as f64);
            let z = self.map.eval(zeta)?;
            worst = worst.max((self.pullback.eval(zeta)? - z.conj()).norm());
        }
        Ok(worst)
    }
}

/// A node of a quadrature identity: the functional
/// h ↦ mass·h(z) + 2 Re(dz_weight·∂_z h(z)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadNode {
    pub z: Complex64,
    pub mass: f64,
    pub dz_weight: Complex64,
    /// Whether the node carries a derivative functional at all.
    pub derivative: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureData {
    pub nodes: Vec<QuadNode>,
}

fn dz_poly(h: &RealPoly2, p: [f64; 2]) -> Complex64 {
    Complex64::new(h.deriv(0).eval_f64(&p), -h.deriv(1).eval_f64(&p)) * 0.5
}

impl QuadratureData {
    /// Mean-value identity of the disk of radius r about `center`.
    pub fn disk(center: Complex64, r: f64) -> Self {
        Self {
            nodes: vec![QuadNode {
                z: center,
                mass: PI * r * r,
                dz_weight: Complex64::new(0.0, 0.0),
                derivative: false,
            }],
        }
    }

    pub fn apply(&self, h: &RealPoly2) -> f64 {
        self.nodes
            .iter()
            .map(|n| {
                let p = [n.z.re, n.z.im];
                let mut v = n.mass * h.eval_f64(&p);
                if n.derivative {
                    v += 2.0 * (n.dz_weight * dz_poly(h, p)).re;
                }
                v
            })
            .sum()
    }
}

/// Polar tensor Gauss–Legendre rule for ∫_Ω f dA = ∫_𝔻 f(φ)|φ′|² dA.
pub struct AreaRule {
    points: Vec<([f64; 2], f64)>,
}

pub const RADIAL_NODES: usize = 256;
pub const ANGULAR_NODES: usize = 512;
pub const RESOLUTION_TOL: f64 = 1e-6;

impl AreaRule {
    pub fn new(map: &RationalMap, radial: usize, angular: usize) -> Result<Self> {
        let rr = legendre_rule(radial);
        let rt = legendre_rule(angular);
        let mut points = Vec::with_capacity(radial * angular);
        for &(xr, wr) in &rr {
            let r = 0.5 * (xr + 1.0);
            for &(xt, wt) in &rt {
                let t = PI * (xt + 1.0);
                let zeta = Complex64::from_polar(r, t);
                let [f, df, _] = map.eval_with_derivs(zeta)?;
                points.push(([f.re, f.im], 0.5 * wr * PI * wt * r * df.norm_sqr()));
            }
        }
        Ok(Self { points })
    }

    pub fn integrate<F: Fn([f64; 2]) -> f64>(&self, f: F) -> f64 {
        self.points.iter().map(|(p, w)| w * f(*p)).sum()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub integrals: Vec<f64>,
    pub functionals: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Largest |I(n) − I(2n)| over the test functions for the radial check.
    pub resolution_gap: f64,
}

fn check_harmonic(tests: &[RealPoly2]) -> Result<()> {
    for (i, h) in tests.iter().enumerate() {
        if !h.laplacian().is_zero() {
            return Err(Error::InvalidInput(format!(
                "test function {i} is not harmonic"
            )));
        }
    }
    Ok(())
}

/// Area integrals of the tests at `radial` × `angular` nodes, checked
/// against 2·`radial` radial nodes.
fn resolved_integrals(
    map: &RationalMap,
    tests: &[RealPoly2],
    radial: usize,
    angular: usize,
) -> Result<(Vec<f64>, f64)> {
    let coarse = AreaRule::new(map, radial, angular)?;
    let fine = AreaRule::new(map, 2 * radial, angular)?;
    let mut out = Vec::with_capacity(tests.len());
    let mut gap = 0.0f64;
    for h in tests {
        let a = coarse.integrate(|p| h.eval_f64(&p));
        let b = fine.integrate(|p| h.eval_f64(&p));
        let diff = (a - b).abs();
        if diff > RESOLUTION_TOL * a.abs().max(1.0) {
            return Err(Error::Resolution {
                coarse: a,
                fine: b,
                diff,
            });
        }
        gap = gap.max(diff);
        out.push(a);
    }
    Ok((out, gap))
}

/// max over h of |∫_Ω h dA − ⟨h, α⟩| at the default resolution.
pub fn quadrature_residual(
    map: &RationalMap,
    data: &QuadratureData,
    tests: &[RealPoly2],
) -> Result<QuadratureReport> {
    quadrature_residual_at(map, data, tests, RADIAL_NODES, ANGULAR_NODES)
}

pub fn quadrature_residual_at(
    map: &RationalMap,
    data: &QuadratureData,
    tests: &[RealPoly2],
    radial: usize,
    angular: usize,
) -> Result<QuadratureReport> {
    check_harmonic(tests)?;
    let report = conformal_check(map, BOUNDARY_SAMPLES);
    if !report.ok {
        return Err(Error::InvalidInput(format!(
            "map is not conformal: {}",
            report.reasons.join("; ")
        )));
    }
    let (integrals, resolution_gap) = resolved_integrals(map, tests, radial, angular)?;
    let functionals: Vec<f64> = tests.iter().map(|h| data.apply(h)).collect();
    let residuals: Vec<f64> = integrals
        .iter()
        .zip(&functionals)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(QuadratureReport {
        integrals,
        functionals,
        residuals,
        max_residual,
        resolution_gap,
    })
}

/// Re z^k and Im z^k for k ≤ `deg`, as exact polynomials in x, y.
pub fn harmonic_basis(deg: u32) -> Vec<RealPoly2> {
    use num_traits::One;
    let mut out = Vec::new();
    for k in 0..=deg {
        // z^k expanded through (x + iy)^k.
        let mut re = RealPoly2::zero();
        let mut im = RealPoly2::zero();
        let mut binom = num_rational::BigRational::one();
        for j in 0..=k {
            let term = RealPoly2::monomial([k - j, j], binom.clone());
            match j % 4 {
                0 => re = &re + &term,
                1 => im = &im + &term,
                2 => re = &re - &term,
                _ => im = &im - &term,
            }
            binom = binom * crate::exact::int((k - j) as i64) / crate::exact::int((j + 1) as i64);
        }
        out.push(re);
        if k > 0 {
            out.push(im);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureFit {
    pub data: QuadratureData,
    /// Largest misfit over the fitting basis.
    pub fit_residual: f64,
}

/// Derives the quadrature nodes of φ(𝔻) from the poles of φ*(1/ζ) in the
/// disk and fits their weights by least squares on harmonic polynomials.
pub fn fit_quadrature(map: &RationalMap, basis_degree: u32) -> Result<QuadratureFit> {
    let poles = poles_in_disk(&map.schwarz_pullback())?;
    let mut nodes = Vec::new();
    for p in &poles {
        if p.order > 2 {
            return Err(Error::InvalidInput(format!(
                "quadrature node of order {} exceeds first-derivative functionals",
                p.order - 1
            )));
        }
        nodes.push(QuadNode {
            z: map.eval(p.location)?,
            mass: 0.0,
            dz_weight: Complex64::new(0.0, 0.0),
            derivative: p.order == 2,
        });
    }
    let basis = harmonic_basis(basis_degree);
    let (integrals, _) = resolved_integrals(map, &basis, RADIAL_NODES, ANGULAR_NODES)?;
    let unknowns: usize = nodes.iter().map(|n| if n.derivative { 3 } else { 1 }).sum();
    let mut a = DMatrix::<f64>::zeros(basis.len(), unknowns);
    for (row, h) in basis.iter().enumerate() {
        let mut col = 0;
        for n in &nodes {
            let p = [n.z.re, n.z.im];
            a[(row, col)] = h.eval_f64(&p);
            col += 1;
            if n.derivative {
                let d = dz_poly(h, p);
                a[(row, col)] = 2.0 * d.re;
                a[(row, col + 1)] = -2.0 * d.im;
                col += 2;
            }
        }
    }
    let b = DVector::from_vec(integrals.clone());
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidInput(format!("quadrature fit failed: {e}")))?;
    let mut col = 0;
    for n in nodes.iter_mut() {
        n.mass = x[col];
        col += 1;
        if n.derivative {
            n.dz_weight = Complex64::new(x[col], x[col + 1]);
            col += 2;
        }
    }
    let fit_residual = (&a * &x - &b).amax();
    Ok(QuadratureFit {
        data: QuadratureData { nodes },
        fit_residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwarzPoleJson {
    pub zeta: [f64; 2],
    pub order: usize,
    /// Pushforward φ(ζ_p), the pole of S in Ω.
    pub z: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeromorphyReport {
    /// "meromorphic" or "branched".
    pub kind: String,
    pub poles: Vec<SchwarzPoleJson>,
    pub mismatch: f64,
}

/// Poles of the Schwarz function of φ(𝔻), found on the pullback φ*(1/ζ).
pub fn meromorphy_report(map: &RationalMap) -> Result<MeromorphyReport> {
    let report = conformal_check(map, BOUNDARY_SAMPLES);
    if !report.ok {
        return Err(Error::InvalidInput(format!(
            "map is not conformal: {}",
            report.reasons.join("; ")
        )));
    }
    let poles = poles_in_disk(&map.schwarz_pullback())?
        .into_iter()
        .map(|p| {
            let z = map.eval(p.location)?;
            Ok(SchwarzPoleJson {
                zeta: [p.location.re, p.location.im],
                order: p.order,
                z: [z.re, z.im],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeromorphyReport {
        kind: "meromorphic".into(),
        poles,
        mismatch: 0.0,
    })
}

/// Ellipse counterpart of [`meromorphy_report`]: a loop around the right
/// focus decides between a branched and a single-valued Schwarz function.
pub fn ellipse_report(spec: EllipseSpec) -> Result<MeromorphyReport> {
    let c = spec.focal();
    let (center, radius) = if spec.is_circle() {
        (Complex64::new(0.0, 0.0), 0.5 * spec.a)
    } else {
        (Complex64::new(c, 0.0), (0.5f64).min(c))
    };
    let probe = monodromy_probe(spec, center, radius, DEFAULT_MONODROMY_STEPS)?;
    let branched = probe.mismatch > BRANCHED_THRESHOLD;
    let poles = if spec.is_circle() {
        vec![SchwarzPoleJson {
            zeta: [0.0, 0.0],
            order: 1,
            z: [0.0, 0.0],
        }]
    } else {
        Vec::new()
    };
    Ok(MeromorphyReport {
        kind: if branched { "branched" } else { "meromorphic" }.into(),
        poles,
        mismatch: probe.mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circle_schwarz() {
        let spec = EllipseSpec::new(1.0, 1.0).unwrap();
        let z = Complex64::from_polar(1.0, 0.7);
        let v = schwarz_ellipse(spec, z, 1).unwrap();
        assert!((v.value - z.conj()).norm() < 1e-15);
        assert!(matches!(
            schwarz_ellipse(spec, c(0.0, 0.0), 1),
            Err(Error::SchwarzPole(_))
        ));
        let spec = EllipseSpec::new(1.7, 1.7).unwrap();
        let z = c(0.3, -0.4);
        assert_eq!(schwarz_ellipse(spec, z, 1).unwrap().value, 1.7 * 1.7 / z);
    }

    #[test]
    fn ellipse_boundary_and_focus() {
        let spec = EllipseSpec::new(2.0, 1.0).unwrap();
        let s = EllipseSchwarz::new(spec).unwrap();
        assert!(s.boundary_residual() < 1e-10);
        let f = c(3f64.sqrt(), 0.0);
        assert!(matches!(s.eval(f, 1), Err(Error::BranchPoint(_))));
        assert!(EllipseSpec::new(1.0, 2.0).is_err());
    }

    #[test]
    fn nearly_circular_ellipse_approaches_circle() {
        let spec = EllipseSpec::new(1.0 + 1e-6, 1.0).unwrap();
        let z = c(0.5, 0.5);
        let v = schwarz_ellipse(spec, z, 1).unwrap().value;
        assert!((v - 1.0 / z).norm() < 1e-5);
    }

    #[test]
    fn monodromy_examples() {
        let spec = EllipseSpec::new(2.0, 1.0).unwrap();
        let focus = c(3f64.sqrt(), 0.0);
        assert!(monodromy_probe(spec, focus, 0.5, 720).unwrap().mismatch > 0.1);
        assert!(
            monodromy_probe(spec, c(0.0, 0.0), 0.5, 720)
                .unwrap()
                .mismatch
                < 1e-9
        );
        let circle = EllipseSpec::new(1.0, 1.0).unwrap();
        assert!(
            monodromy_probe(circle, c(0.0, 0.0), 0.5, 720)
                .unwrap()
                .mismatch
                < 1e-12
        );
        assert!(
            monodromy_probe(circle, c(0.2, 0.1), 0.3, 720)
                .unwrap()
                .mismatch
                < 1e-12
        );
        assert!(matches!(
            monodromy_probe(spec, focus, 0.5, 4),
            Err(Error::InvalidInput(_))
        ));
        // A loop through a focus is refused.
        assert!(monodromy_probe(spec, focus + 0.5, 0.5, 720).is_err());
    }

    #[test]
    fn monodromy_dichotomy_on_family() {
        for a in [1.0, 1.1, 1.5, 2.0] {
            let spec = EllipseSpec::new(a, 1.0).unwrap();
            let rep = ellipse_report(spec).unwrap();
            if a == 1.0 {
                assert!(rep.mismatch < 1e-9 && rep.kind == "meromorphic");
            } else {
                assert!(
                    rep.mismatch > 1e-9 && rep.kind == "branched",
                    "a = {a}: {rep:?}"
                );
            }
        }
    }

    #[test]
    fn rational_schwarz_boundary_identity() {
        for map in [
            RationalMap::identity(),
            RationalMap::quadratic(c(0.3, 0.0)),
            RationalMap::quadratic(c(0.1, 0.2)),
        ] {
            let s = RationalSchwarz::new(map).unwrap();
            assert!(s.boundary_residual(256).unwrap() < 1e-10);
        }
        let s = RationalSchwarz::new(RationalMap::quadratic(c(0.3, 0.0))).unwrap();
        let z = c(0.2, 0.3);
        let zeta = conformal_inverse(s.map(), z).unwrap();
        assert!((s.map().eval(zeta).unwrap() - z).norm() < 1e-13);
        // On the disk S = 1/z.
        let d = RationalSchwarz::new(RationalMap::identity()).unwrap();
        assert!((d.eval(z).unwrap() - 1.0 / z).norm() < 1e-13);
    }

    fn disk_tests() -> Vec<RealPoly2> {
        let x = RealPoly2::var(0);
        let y = RealPoly2::var(1);
        vec![
            RealPoly2::one(),
            x.clone(),
            y.clone(),
            &x.pow(2) - &y.pow(2),
            &x * &y,
        ]
    }

    #[test]
    fn disk_mean_value_identity() {
        let rep = quadrature_residual(
            &RationalMap::identity(),
            &QuadratureData::disk(c(0.0, 0.0), 1.0),
            &disk_tests(),
        )
        .unwrap();
        assert!(rep.max_residual < 1e-8, "{rep:?}");
        let wrong = QuadratureData {
            nodes: vec![QuadNode {
                z: c(0.0, 0.0),
                mass: PI / 2.0,
                dz_weight: c(0.0, 0.0),
                derivative: false,
            }],
        };
        let rep =
            quadrature_residual(&RationalMap::identity(), &wrong, &[RealPoly2::one()]).unwrap();
        assert!((rep.max_residual - PI / 2.0).abs() < 1e-10);
        let bad = quadrature_residual(
            &RationalMap::identity(),
            &wrong,
            &[RealPoly2::var(0).pow(2)],
        );
        assert!(matches!(bad, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn cardioid_weights_are_fitted_then_verified() {
        let cc = c(0.3, 0.0);
        let map = RationalMap::quadratic(cc);
        let fit = fit_quadrature(&map, 4).unwrap();
        assert_eq!(fit.data.nodes.len(), 1);
        let node = fit.data.nodes[0];
        assert!(node.z.norm() < 1e-14 && node.derivative);
        assert!((node.mass - PI * (1.0 + 2.0 * cc.norm_sqr())).abs() < 1e-9);
        assert!((node.dz_weight - PI * cc.conj()).norm() < 1e-9);
        let rep = quadrature_residual_at(
            &map,
            &fit.data,
            &disk_tests(),
            2 * RADIAL_NODES,
            2 * ANGULAR_NODES,
        )
        .unwrap();
        assert!(rep.max_residual < 1e-6);
    }

    #[test]
    fn harmonic_basis_is_harmonic() {
        let b = harmonic_basis(5);
        assert_eq!(b.len(), 11);
        assert!(b.iter().all(|h| h.laplacian().is_zero()));
        // Re z² = x² − y²
        assert_eq!(b[3], &RealPoly2::var(0).pow(2) - &RealPoly2::var(1).pow(2));
        assert_eq!(
            b[4],
            (&RealPoly2::var(0) * &RealPoly2::var(1)).scale(&int(2))
        );
    }

    #[test]
    fn meromorphy_examples() {
        let rep = meromorphy_report(&RationalMap::identity()).unwrap();
        assert_eq!(
            rep.poles,
            vec![SchwarzPoleJson {
                zeta: [0.0, 0.0],
                order: 1,
                z: [0.0, 0.0]
            }]
        );
        let rep = meromorphy_report(&RationalMap::quadratic(c(0.3, 0.0))).unwrap();
        assert_eq!(rep.poles.len(), 1);
        assert_eq!(rep.poles[0].order, 2);
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["kind"], "meromorphic");
        let rep = ellipse_report(EllipseSpec::new(2.0, 1.0).unwrap()).unwrap();
        assert_eq!(rep.kind, "branched");
    }
}

//! Almansi expansions of polyharmonic plane polynomials, the polyanalytic
//! splitting of U = ∂_z^N u, and the root test of Ψ(z, w) = Σ ψ_k(z) w^{k−1}
//! against a Schwarz function.

use std::collections::BTreeMap;

use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, Poly};
use crate::fieldlab::{complex_jet_at, jet_with, FdScheme, ScalarField2};
use crate::polyrat::{ExactPoly, GaussRational};

/// Σ c_ab x^a y^b with exact rational coefficients.
pub type RealPoly2 = Poly<2>;

/// Harmonic polynomials u₁..u_N of an Almansi expansion
/// u = Σ |z|^{2(j−1)} u_j.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StackJson")]
pub struct HarmonicStack {
    parts: Vec<RealPoly2>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StackJson {
    parts: Vec<RealPoly2>,
}

impl TryFrom<StackJson> for HarmonicStack {
    type Error = Error;

    fn try_from(v: StackJson) -> Result<Self> {
        HarmonicStack::new(v.parts)
    }
}

impl HarmonicStack {
    pub fn new(parts: Vec<RealPoly2>) -> Result<Self> {
        for (j, p) in parts.iter().enumerate() {
            let lap = p.laplacian();
            if !lap.is_zero() {
                return Err(Error::InvalidInput(format!(
                    "stack entry {} is not harmonic: Δ = {lap}",
                    j + 1
                )));
            }
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[RealPoly2] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.len()
    }
}

/// Splits an N-harmonic polynomial into its Almansi stack.
///
/// For a homogeneous harmonic h of degree m, Δ(r^{2k} h) = 4k(k+m) r^{2k−2} h,
/// so Δ^{N−1} u isolates the top entry degree by degree; subtracting
/// r^{2(N−1)} u_N leaves an (N−1)-harmonic remainder.
pub fn almansi_decompose(u: &RealPoly2, n: usize) -> Result<HarmonicStack> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "Almansi order must be at least 1".into(),
        ));
    }
    let top = u.laplacian_pow(n);
    if !top.is_zero() {
        return Err(Error::NotPolyharmonic {
            n,
            residual: top.to_string(),
        });
    }
    let mut rest = u.clone();
    let mut parts = vec![RealPoly2::zero(); n];
    for j in (1..=n).rev() {
        let k = (j - 1) as i64;
        let g = rest.laplacian_pow(j - 1);
        let mut uj = RealPoly2::zero();
        for m in 0..=g.degree() {
            let gm = g.homogeneous_part(m);
            if gm.is_zero() {
                continue;
            }
            let factor = (1..=k).fold(BigRational::one(), |acc, i| {
                acc * int(4 * i * (i + m as i64))
            });
            uj = &uj + &gm.scale(&(BigRational::one() / factor));
        }
        rest = &rest - &(&RealPoly2::r2().pow(k as u32) * &uj);
        parts[j - 1] = uj;
    }
    debug_assert!(rest.is_zero());
    HarmonicStack::new(parts)
}

/// Σ |z|^{2(j−1)} u_j.
pub fn almansi_reconstruct(stack: &HarmonicStack) -> RealPoly2 {
    let r2 = RealPoly2::r2();
    let mut weight = RealPoly2::one();
    let mut out = RealPoly2::zero();
    for p in stack.parts() {
        out = &out + &(&weight * p);
        weight = &weight * &r2;
    }
    out
}

/// A random N-harmonic polynomial of degree ≤ `deg` and its Almansi stack.
pub fn random_polyharmonic<R: Rng>(rng: &mut R, n: usize, deg: u32) -> (RealPoly2, HarmonicStack) {
    let parts: Vec<RealPoly2> = (0..n)
        .map(|j| {
            let budget = deg.saturating_sub(2 * j as u32);
            if j > 0 && rng.random_bool(0.15) {
                RealPoly2::zero()
            } else {
                RealPoly2::random_harmonic(rng, budget)
            }
        })
        .collect();
    let stack = HarmonicStack::new(parts).expect("generated entries are harmonic");
    (almansi_reconstruct(&stack), stack)
}

fn gzero() -> GaussRational {
    Complex::new(BigRational::zero(), BigRational::zero())
}

fn gto_f64(c: &GaussRational) -> Complex64 {
    Complex64::new(
        c.re.to_f64().unwrap_or(f64::NAN),
        c.im.to_f64().unwrap_or(f64::NAN),
    )
}

/// Σ c_pq z^p z̄^q with Gaussian-rational coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ZPoly {
    terms: BTreeMap<(u32, u32), GaussRational>,
}

impl ZPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(p: u32, q: u32, c: GaussRational) -> Self {
        let mut out = Self::zero();
        out.add_term(p, q, c);
        out
    }

    fn add_term(&mut self, p: u32, q: u32, c: GaussRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((p, q)).or_insert_with(gzero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.terms.remove(&(p, q));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, p: u32, q: u32) -> GaussRational {
        self.terms.get(&(p, q)).cloned().unwrap_or_else(gzero)
    }

    pub fn add(&self, other: &ZPoly) -> ZPoly {
        let mut out = self.clone();
        for (&(p, q), c) in &other.terms {
            out.add_term(p, q, c.clone());
        }
        out
    }

    pub fn mul(&self, other: &ZPoly) -> ZPoly {
        let mut out = ZPoly::zero();
        for (&(p1, q1), c1) in &self.terms {
            for (&(p2, q2), c2) in &other.terms {
                out.add_term(p1 + p2, q1 + q2, c1.clone() * c2.clone());
            }
        }
        out
    }

    /// Rewrites a real polynomial in x, y through x = (z + z̄)/2,
    /// y = (z − z̄)/(2i).
    pub fn from_real(u: &RealPoly2) -> ZPoly {
        let half = || BigRational::new(1.into(), 2.into());
        let x = ZPoly::monomial(1, 0, Complex::new(half(), BigRational::zero())).add(
            &ZPoly::monomial(0, 1, Complex::new(half(), BigRational::zero())),
        );
        let y = ZPoly::monomial(1, 0, Complex::new(BigRational::zero(), -half())).add(
            &ZPoly::monomial(0, 1, Complex::new(BigRational::zero(), half())),
        );
        let mut out = ZPoly::zero();
        for (e, c) in u.terms() {
            let mut term = ZPoly::monomial(0, 0, Complex::new(c.clone(), BigRational::zero()));
            for _ in 0..e[0] {
                term = term.mul(&x);
            }
            for _ in 0..e[1] {
                term = term.mul(&y);
            }
            out = out.add(&term);
        }
        out
    }

    pub fn dz(&self) -> ZPoly {
        let mut out = ZPoly::zero();
        for (&(p, q), c) in &self.terms {
            if p > 0 {
                out.add_term(
                    p - 1,
                    q,
                    c.clone() * Complex::new(int(p as i64), BigRational::zero()),
                );
            }
        }
        out
    }

    pub fn dzbar(&self) -> ZPoly {
        let mut out = ZPoly::zero();
        for (&(p, q), c) in &self.terms {
            if q > 0 {
                out.add_term(
                    p,
                    q - 1,
                    c.clone() * Complex::new(int(q as i64), BigRational::zero()),
                );
            }
        }
        out
    }

    pub fn max_zbar_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.1).max()
    }

    /// Holomorphic coefficient of z̄^q.
    pub fn zbar_coefficient(&self, q: u32) -> ExactPoly {
        let deg = self.terms.keys().filter(|k| k.1 == q).map(|k| k.0).max();
        let Some(deg) = deg else {
            return ExactPoly::new(vec![]);
        };
        ExactPoly::new((0..=deg).map(|p| self.coeff(p, q)).collect())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(p, q), c)| gto_f64(c) * z.powu(p) * z.conj().powu(q))
            .sum()
    }
}

/// U = ∂_z^N u, exactly.
pub fn symbolic_big_u(u: &RealPoly2, n: usize) -> ZPoly {
    (0..n).fold(ZPoly::from_real(u), |acc, _| acc.dz())
}

/// Exact polyanalytic split U = Σ z̄^{k−1} U_k of a polynomial in z, z̄.
pub fn symbolic_split(big_u: &ZPoly, n: usize) -> Result<Vec<ExactPoly>> {
    if let Some(q) = big_u.max_zbar_degree() {
        if q as usize >= n {
            let top = big_u.zbar_coefficient(q).to_float();
            return Err(Error::NotPolyanalytic {
                n,
                residual: top.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max),
                point: Complex64::new(0.0, 0.0),
            });
        }
    }
    Ok((0..n as u32).map(|q| big_u.zbar_coefficient(q)).collect())
}

/// Step and scheme used by the numerical split of a real field.
pub const SPLIT_STEP: f64 = 1e-2;
pub const SPLIT_SCHEME: FdScheme = FdScheme::WIDE;
/// Relative bound on ∂̄^N U accepted by the numerical split.
pub const POLYANALYTIC_TOL: f64 = 1e-5;

/// ∂_z^N u at `point` from a finite-difference jet (N ≤ 2).
pub fn big_u_from_u<F: ScalarField2 + ?Sized>(
    u: &F,
    n: usize,
    point: [f64; 2],
) -> Result<Complex64> {
    if n > 2 {
        return Err(Error::InvalidInput(format!(
            "numerical U = d_z^N u supports N <= 2, got {n}"
        )));
    }
    let jet = jet_with(u, point, n, SPLIT_STEP, SPLIT_SCHEME)?;
    Ok(jet.wirtinger_mixed(n, 0))
}

/// Values of U₁..U_N at one probe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitSample {
    pub z: Complex64,
    pub big_u: Complex64,
    pub parts: Vec<Complex64>,
    /// |∂̄^N U| relative to the largest |∂̄^j U|, j < N.
    pub polyanalytic_residual: f64,
    /// |U − Σ z̄^{k−1} U_k|.
    pub reconstruction_residual: f64,
}

/// Numerical polyanalytic stack evaluated at probe points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyanalyticValues {
    pub n: usize,
    pub samples: Vec<SplitSample>,
}

impl PolyanalyticValues {
    pub fn max_reconstruction_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.reconstruction_residual)
            .fold(0.0, f64::max)
    }
}

/// Solves ∂̄^j U = Σ_{k>j} (k−1)!/(k−1−j)! z̄^{k−1−j} U_k from the top down.
fn peel(z: Complex64, dbar: &[Complex64], n: usize) -> Vec<Complex64> {
    let zb = z.conj();
    let fact = |m: usize| (1..=m).map(|i| i as f64).product::<f64>();
    let mut parts = vec![Complex64::new(0.0, 0.0); n];
    for j in (0..n).rev() {
        let mut rhs = dbar[j];
        for k in (j + 2)..=n {
            rhs -= parts[k - 1] * zb.powu((k - 1 - j) as u32) * (fact(k - 1) / fact(k - 1 - j));
        }
        parts[j] = rhs / fact(j);
    }
    parts
}

fn split_sample(z: Complex64, dbar: &[Complex64], n: usize, tol: f64) -> Result<SplitSample> {
    let scale = dbar[..n].iter().map(|c| c.norm()).fold(1.0, f64::max);
    let residual = dbar[n].norm() / scale;
    if residual > tol {
        return Err(Error::NotPolyanalytic {
            n,
            residual,
            point: z,
        });
    }
    let parts = peel(z, dbar, n);
    let recon: Complex64 = parts
        .iter()
        .enumerate()
        .map(|(k, p)| p * z.conj().powu(k as u32))
        .sum();
    Ok(SplitSample {
        z,
        big_u: dbar[0],
        reconstruction_residual: (recon - dbar[0]).norm(),
        parts,
        polyanalytic_residual: residual,
    })
}

/// Splits a complex field U with ∂̄^N U = 0 into U₁..U_N at the probes.
pub fn polyanalytic_split<G>(
    big_u: G,
    n: usize,
    probes: &[Complex64],
    step: f64,
) -> Result<PolyanalyticValues>
where
    G: Fn(f64, f64) -> Complex64 + Sync,
{
    if n == 0 || n > 3 {
        return Err(Error::InvalidInput(format!(
            "numerical split supports 1 <= N <= 3, got {n}"
        )));
    }
    let samples = probes
        .par_iter()
        .map(|&z| {
            let jet = complex_jet_at(&big_u, [z.re, z.im], n, step)?;
            let dbar: Vec<Complex64> = (0..=n).map(|j| jet.wirtinger_mixed(0, j)).collect();
            split_sample(z, &dbar, n, POLYANALYTIC_TOL)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolyanalyticValues { n, samples })
}

/// Splits U = ∂_z^N u reading every ∂̄^j U = ∂_z^N ∂̄^j u off one jet of u,
/// so no finite difference is nested inside another.
pub fn polyanalytic_split_from_u<F: ScalarField2 + ?Sized>(
    u: &F,
    n: usize,
    probes: &[Complex64],
) -> Result<PolyanalyticValues> {
    if n == 0 || n > 2 {
        return Err(Error::InvalidInput(format!(
            "split from u supports 1 <= N <= 2, got {n}"
        )));
    }
    let samples = probes
        .par_iter()
        .map(|&z| {
            let jet = jet_with(u, [z.re, z.im], 2 * n, SPLIT_STEP, SPLIT_SCHEME)?;
            let dbar: Vec<Complex64> = (0..=n).map(|j| jet.wirtinger_mixed(n, j)).collect();
            split_sample(z, &dbar, n, POLYANALYTIC_TOL)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolyanalyticValues { n, samples })
}

/// Ψ(z, w) = Σ ψ_k(z) w^{k−1}, tabulated at probe points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiFunction {
    pub probes: Vec<Complex64>,
    /// coeffs[i][k − 1] = ψ_k(probes[i]).
    pub coeffs: Vec<Vec<Complex64>>,
    /// Largest k with ψ_k nontrivial (1-based), if any.
    pub top_index: Option<usize>,
}

/// Coefficients below this fraction of the largest one count as trivial.
const TRIVIAL_REL: f64 = 1e-9;

impl PsiFunction {
    pub fn new(probes: Vec<Complex64>, coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        if probes.len() != coeffs.len() {
            return Err(Error::InvalidInput(
                "one coefficient row per probe is required".into(),
            ));
        }
        let n = coeffs.first().map_or(0, |r| r.len());
        if coeffs.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(
                "coefficient rows differ in length".into(),
            ));
        }
        let col_max: Vec<f64> = (0..n)
            .map(|k| coeffs.iter().map(|r| r[k].norm()).fold(0.0, f64::max))
            .collect();
        let overall = col_max.iter().copied().fold(0.0, f64::max);
        let top_index = (0..n)
            .rev()
            .find(|&k| overall > 0.0 && col_max[k] > TRIVIAL_REL * overall)
            .map(|k| k + 1);
        Ok(Self {
            probes,
            coeffs,
            top_index,
        })
    }

    pub fn from_stack(stack: &PolyanalyticValues) -> Self {
        let probes = stack.samples.iter().map(|s| s.z).collect();
        let coeffs = stack.samples.iter().map(|s| s.parts.clone()).collect();
        Self::new(probes, coeffs).expect("stack rows are consistent")
    }

    pub fn n(&self) -> usize {
        self.coeffs.first().map_or(0, |r| r.len())
    }

    /// ∂_w^{j} Ψ(probes[i], w).
    pub fn dw(&self, i: usize, w: Complex64, j: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k0, c) in self.coeffs[i].iter().enumerate().skip(j) {
            let falling: f64 = ((k0 - j + 1)..=k0).map(|m| m as f64).product();
            acc += c * w.powu((k0 - j) as u32) * falling;
        }
        acc
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiRootReport {
    pub depth: usize,
    pub top_index: Option<usize>,
    pub max_abs: f64,
    /// max(|ψ_J| over probes, 1e−12).
    pub scale: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const PSI_ROOT_TOL: f64 = 1e-4;

/// Checks ∂_w^{j−1} Ψ(z, S(z)) = 0 for j = 1..=depth at every probe.
pub fn psi_root_check<S>(
    psi: &PsiFunction,
    schwarz: S,
    depth: usize,
    tolerance: f64,
) -> PsiRootReport
where
    S: Fn(Complex64) -> Complex64,
{
    let mut max_abs = 0.0f64;
    for (i, &z) in psi.probes.iter().enumerate() {
        let w = schwarz(z);
        for j in 0..depth {
            max_abs = max_abs.max(psi.dw(i, w, j).norm());
        }
    }
    let scale = psi
        .top_index
        .map(|k| {
            psi.coeffs
                .iter()
                .map(|r| r[k - 1].norm())
                .fold(0.0, f64::max)
        })
        .unwrap_or(0.0)
        .max(1e-12);
    let relative = max_abs / scale;
    PsiRootReport {
        depth,
        top_index: psi.top_index,
        max_abs,
        scale,
        relative,
        tolerance,
        pass: relative < tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::fieldlab::{CubicFlatKernel, FnField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x() -> RealPoly2 {
        RealPoly2::var(0)
    }
    fn y() -> RealPoly2 {
        RealPoly2::var(1)
    }

    #[test]
    fn decompose_examples() {
        let u = &x() * &RealPoly2::r2();
        let s = almansi_decompose(&u, 2).unwrap();
        assert!(s.parts()[0].is_zero());
        assert_eq!(s.parts()[1], x());

        let u = &RealPoly2::constant(int(3)) + &(&RealPoly2::r2() * &y().scale(&int(2)));
        let s = almansi_decompose(&u, 2).unwrap();
        assert_eq!(s.parts()[0], RealPoly2::constant(int(3)));
        assert_eq!(s.parts()[1], y().scale(&int(2)));
    }

    #[test]
    fn decompose_rejects_non_polyharmonic() {
        let u = x().pow(4);
        assert!(matches!(
            almansi_decompose(&u, 2),
            Err(Error::NotPolyharmonic { n: 2, .. })
        ));
        assert!(almansi_decompose(&u, 3).is_ok());
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=4 {
            let (u, stack) = random_polyharmonic(&mut rng, n, 10);
            let back = almansi_decompose(&u, n).unwrap();
            assert_eq!(back, stack);
            assert_eq!(almansi_reconstruct(&back), u);
        }
    }

    #[test]
    fn symbolic_big_u_examples() {
        // |z|^4 -> 2 z̄²
        let r4 = RealPoly2::r2().pow(2);
        let big = symbolic_big_u(&r4, 2);
        assert_eq!(big, ZPoly::monomial(0, 2, Complex::new(int(2), int(0))));
        let z = Complex64::new(1.0, 1.0);
        assert!((big.eval(z) - Complex64::new(0.0, -4.0)).norm() < 1e-14);
        // Re z² = (z² + z̄²)/2 -> 1
        let re2 = &x().pow(2) - &y().pow(2);
        assert_eq!(
            symbolic_big_u(&re2, 2),
            ZPoly::monomial(0, 0, Complex::new(int(1), int(0)))
        );
        let f = FnField::new(|a, b| a * a - b * b);
        let num = big_u_from_u(&f, 2, [0.4, -0.2]).unwrap();
        assert!((num - 1.0).norm() < 1e-9);
    }

    #[test]
    fn numerical_big_u_matches_symbolic() {
        let u = &x() * &RealPoly2::r2();
        let f = FnField::new(|a, b| a * (a * a + b * b));
        let sym = symbolic_big_u(&u, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let num = big_u_from_u(&f, 2, p).unwrap();
            assert!((num - sym.eval(Complex64::new(p[0], p[1]))).norm() < 1e-7);
        }
    }

    #[test]
    fn symbolic_split_reads_off_zbar_powers() {
        // U = z + z̄·2z²
        let one = || Complex::new(int(1), int(0));
        let big =
            ZPoly::monomial(1, 0, one()).add(&ZPoly::monomial(2, 1, Complex::new(int(2), int(0))));
        let parts = symbolic_split(&big, 2).unwrap();
        assert_eq!(parts[0], ExactPoly::new(vec![gzero(), one()]));
        assert_eq!(
            parts[1],
            ExactPoly::new(vec![gzero(), gzero(), Complex::new(int(2), int(0))])
        );
        assert!(symbolic_split(&big, 1).is_err());
    }

    #[test]
    fn numerical_split_examples() {
        let probes = [Complex64::new(0.3, 0.1), Complex64::new(-0.5, 0.4)];
        let v = polyanalytic_split(
            |a, b| {
                let z = Complex64::new(a, b);
                z + z.conj() * 2.0 * z * z
            },
            2,
            &probes,
            1e-3,
        )
        .unwrap();
        for s in &v.samples {
            assert!((s.parts[0] - s.z).norm() < 1e-7);
            assert!((s.parts[1] - 2.0 * s.z * s.z).norm() < 1e-7);
        }
        let v = polyanalytic_split(|_, _| Complex64::new(5.0, 0.0), 2, &probes, 1e-3).unwrap();
        assert!((v.samples[0].parts[0] - 5.0).norm() < 1e-9);
        assert!(v.samples[0].parts[1].norm() < 1e-9);
        let bad = polyanalytic_split(
            |a, b| Complex64::new(a * a + b * b, 0.0).powu(2),
            2,
            &probes,
            1e-3,
        );
        assert!(matches!(bad, Err(Error::NotPolyanalytic { .. })));
    }

    #[test]
    fn kernel_split_reconstructs() {
        let k = CubicFlatKernel::default();
        let probes: Vec<Complex64> = (0..12)
            .map(|i| Complex64::from_polar(0.65, 0.5 + i as f64 * 0.5))
            .collect();
        let v = polyanalytic_split_from_u(&k, 2, &probes).unwrap();
        assert!(v.max_reconstruction_residual() < 1e-5);
        let psi = PsiFunction::from_stack(&v);
        let rep = psi_root_check(&psi, |z| 1.0 / z, 1, 1e-3);
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.top_index, Some(2));
    }

    #[test]
    fn psi_examples() {
        let probes: Vec<Complex64> = (1..6)
            .map(|i| Complex64::new(0.1 * i as f64, 0.2))
            .collect();
        let s = |z: Complex64| 1.0 / z;
        let rows = probes.iter().map(|&z| vec![-s(z) * z * z, z * z]).collect();
        let psi = PsiFunction::new(probes.clone(), rows).unwrap();
        let rep = psi_root_check(&psi, s, 1, PSI_ROOT_TOL);
        assert!(rep.pass && rep.relative < 1e-14);
        // Passing depth R − N = 1 with a nontrivial stack forces J > 1.
        assert!(rep.top_index.unwrap() > 1);

        let rows = probes
            .iter()
            .map(|_| vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
            .collect();
        let psi = PsiFunction::new(probes, rows).unwrap();
        let rep = psi_root_check(&psi, s, 1, PSI_ROOT_TOL);
        assert!(!rep.pass);
        assert!((rep.relative - 1.0).abs() < 1e-15);
        assert_eq!(rep.top_index, Some(1));
    }

    #[test]
    fn stack_json_round_trip() {
        let s = HarmonicStack::new(vec![x().scale(&rat(1, 3)), y()]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: HarmonicStack = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let bad = serde_json::json!({"parts": [{"terms": [{"a": 2, "b": 0, "num": 1, "den": 1}]}]});
        assert!(serde_json::from_value::<HarmonicStack>(bad).is_err());
    }
}

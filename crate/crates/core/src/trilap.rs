//! Constant-coefficient 3×3 operator matrices in three variables, the
//! factorization 𝕃𝕃′ = 𝕃′𝕃 = Δ²·I, the Almansi split u = v + x₁w of a
//! biharmonic polynomial, and the matrix field X₁ = ℍ[w]⁻¹(−ℍ[v] + 𝔹[w]).

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exponents, int, solve_min_norm, solve_pivoting, Poly};

pub type RealPoly3 = Poly<3>;
pub type Triple = [RealPoly3; 3];

/// Σ q_abc ∂₁^a ∂₂^b ∂₃^c. Stored as a polynomial in the symbols ∂ᵢ, which
/// is faithful because constant-coefficient operators commute.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiffOpPoly(Poly<3>);

impl DiffOpPoly {
    pub fn zero() -> Self {
        Self(Poly::zero())
    }

    pub fn one() -> Self {
        Self(Poly::one())
    }

    /// ∂ᵢ, i ∈ {0, 1, 2} for ∂₁, ∂₂, ∂₃.
    pub fn d(i: usize) -> Self {
        Self(Poly::var(i))
    }

    pub fn term(exps: [u32; 3], c: BigRational) -> Self {
        Self(Poly::monomial(exps, c))
    }

    /// Δ = ∂₁² + ∂₂² + ∂₃².
    pub fn laplacian() -> Self {
        Self(Poly::r2())
    }

    pub fn symbol(&self) -> &Poly<3> {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self(&self.0 - &o.0)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self(&self.0 * &o.0)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self(self.0.scale(c))
    }

    pub fn pow(&self, k: u32) -> Self {
        Self(self.0.pow(k))
    }

    pub fn apply(&self, f: &RealPoly3) -> RealPoly3 {
        let mut out = RealPoly3::zero();
        for (e, c) in self.0.terms() {
            out = &out + &f.deriv_multi(e).scale(c);
        }
        out
    }

    /// Some rational c with self = c·other, if one exists.
    pub fn ratio_to(&self, other: &Self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        let (e, c) = other.0.terms().next()?;
        let r = self.0.coeff(e) / c;
        (other.scale(&r) == *self).then_some(r)
    }
}

impl fmt::Display for DiffOpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0.to_string();
        write!(f, "{}", s.replace('x', "d"))
    }
}

fn op(terms: &[([u32; 3], i64)]) -> DiffOpPoly {
    DiffOpPoly(Poly::from_terms(terms.iter().map(|&(e, c)| (e, int(c)))))
}

/// 3×3 matrix of constant-coefficient operators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpMatrix3 {
    pub entries: [[DiffOpPoly; 3]; 3],
}

const D11: [u32; 3] = [2, 0, 0];
const D22: [u32; 3] = [0, 2, 0];
const D33: [u32; 3] = [0, 0, 2];
const D12: [u32; 3] = [1, 1, 0];
const D13: [u32; 3] = [1, 0, 1];
const D23: [u32; 3] = [0, 1, 1];
const D1: [u32; 3] = [1, 0, 0];
const D2: [u32; 3] = [0, 1, 0];
const D3: [u32; 3] = [0, 0, 1];

/// Which sign pattern of 𝔹 to use in the X₁ system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BVariant {
    /// Assembled from the three lifted identities.
    #[default]
    Derived,
    /// As displayed next to the x₁ system in the source text.
    Printed,
}

impl OpMatrix3 {
    pub fn from_fn<F: Fn(usize, usize) -> DiffOpPoly>(f: F) -> Self {
        Self {
            entries: std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))),
        }
    }

    pub fn zero() -> Self {
        Self::from_fn(|_, _| DiffOpPoly::zero())
    }

    pub fn identity() -> Self {
        Self::diag(DiffOpPoly::one())
    }

    pub fn diag(d: DiffOpPoly) -> Self {
        Self::from_fn(|i, j| {
            if i == j {
                d.clone()
            } else {
                DiffOpPoly::zero()
            }
        })
    }

    pub fn l() -> Self {
        Self {
            entries: [
                [
                    op(&[(D11, 1), (D22, -1), (D33, -1)]),
                    op(&[(D12, 2)]),
                    op(&[(D13, 2)]),
                ],
                [
                    op(&[(D12, -2)]),
                    op(&[(D11, 1), (D22, -1), (D33, 1)]),
                    op(&[(D23, -2)]),
                ],
                [
                    op(&[(D13, -2)]),
                    op(&[(D23, -2)]),
                    op(&[(D11, 1), (D22, 1), (D33, -1)]),
                ],
            ],
        }
    }

    pub fn l_prime() -> Self {
        Self {
            entries: [
                [
                    op(&[(D11, 1), (D22, -1), (D33, -1)]),
                    op(&[(D12, -2)]),
                    op(&[(D13, -2)]),
                ],
                [
                    op(&[(D12, 2)]),
                    op(&[(D11, 1), (D22, -1), (D33, 1)]),
                    op(&[(D23, -2)]),
                ],
                [
                    op(&[(D13, 2)]),
                    op(&[(D23, -2)]),
                    op(&[(D11, 1), (D22, 1), (D33, -1)]),
                ],
            ],
        }
    }

    pub fn r() -> Self {
        Self {
            entries: [
                [op(&[(D11, 1)]), op(&[(D12, -1)]), op(&[(D13, -1)])],
                [op(&[(D12, 1)]), op(&[(D22, -1)]), op(&[(D23, -1)])],
                [op(&[(D13, 1)]), op(&[(D23, -1)]), op(&[(D33, -1)])],
            ],
        }
    }

    pub fn d_op() -> Self {
        Self {
            entries: [
                [op(&[(D1, 1)]), op(&[(D2, -1)]), op(&[(D3, -1)])],
                [op(&[(D2, 1)]), op(&[(D1, 1)]), DiffOpPoly::zero()],
                [op(&[(D3, 1)]), DiffOpPoly::zero(), op(&[(D1, 1)])],
            ],
        }
    }

    /// Hessian operator (∂ᵢ∂ⱼ).
    pub fn hessian() -> Self {
        Self::from_fn(|i, j| DiffOpPoly::d(i).mul(&DiffOpPoly::d(j)))
    }

    pub fn b(variant: BVariant) -> Self {
        match variant {
            BVariant::Derived => Self {
                entries: [
                    [op(&[(D1, -1)]), op(&[(D2, -1)]), op(&[(D3, -1)])],
                    [op(&[(D2, -1)]), op(&[(D1, 1)]), DiffOpPoly::zero()],
                    [op(&[(D3, -1)]), DiffOpPoly::zero(), op(&[(D1, 1)])],
                ],
            },
            BVariant::Printed => Self {
                entries: [
                    [op(&[(D1, -1)]), op(&[(D2, 1)]), op(&[(D3, 1)])],
                    [op(&[(D2, -1)]), op(&[(D1, -1)]), DiffOpPoly::zero()],
                    [op(&[(D3, -1)]), DiffOpPoly::zero(), op(&[(D1, -1)])],
                ],
            },
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| self.entries[i][j].add(&o.entries[i][j]))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| self.entries[i][j].sub(&o.entries[i][j]))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_fn(|i, j| self.entries[i][j].scale(c))
    }

    /// Applies the matrix to a vector field.
    pub fn apply(&self, f: &Triple) -> Triple {
        std::array::from_fn(|i| {
            (0..3).fold(RealPoly3::zero(), |acc, j| {
                &acc + &self.entries[i][j].apply(&f[j])
            })
        })
    }

    /// Entrywise application to one scalar field: (A_ij[w]).
    pub fn apply_entrywise(&self, w: &RealPoly3) -> PolyMatrix {
        PolyMatrix::from_fn(|i, j| self.entries[i][j].apply(w))
    }
}

pub fn op_mul(a: &OpMatrix3, b: &OpMatrix3) -> OpMatrix3 {
    OpMatrix3::from_fn(|i, j| {
        (0..3).fold(DiffOpPoly::zero(), |acc, k| {
            acc.add(&a.entries[i][k].mul(&b.entries[k][j]))
        })
    })
}

impl fmt::Display for OpMatrix3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// 3×3 matrix of polynomial fields.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyMatrix {
    pub entries: [[RealPoly3; 3]; 3],
}

impl PolyMatrix {
    pub fn from_fn<F: Fn(usize, usize) -> RealPoly3>(f: F) -> Self {
        Self {
            entries: std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| &self.entries[i][j] + &o.entries[i][j])
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| &self.entries[i][j] - &o.entries[i][j])
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| {
            (0..3).fold(RealPoly3::zero(), |acc, k| {
                &acc + &(&self.entries[i][k] * &o.entries[k][j])
            })
        })
    }

    pub fn mul_scalar(&self, p: &RealPoly3) -> Self {
        Self::from_fn(|i, j| &self.entries[i][j] * p)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.is_zero())
    }

    /// Substitutes x₁ = 0 in every entry.
    pub fn on_patch(&self) -> Self {
        Self::from_fn(|i, j| self.entries[i][j].restrict_zero(0))
    }

    fn minor(&self, r: [usize; 2], c: [usize; 2]) -> RealPoly3 {
        let e = &self.entries;
        &(&e[r[0]][c[0]] * &e[r[1]][c[1]]) - &(&e[r[0]][c[1]] * &e[r[1]][c[0]])
    }

    pub fn det(&self) -> RealPoly3 {
        let e = &self.entries;
        let mut out = RealPoly3::zero();
        for j in 0..3 {
            let others: Vec<usize> = (0..3).filter(|&k| k != j).collect();
            let m = self.minor([1, 2], [others[0], others[1]]);
            let t = &e[0][j] * &m;
            out = if j % 2 == 0 { &out + &t } else { &out - &t };
        }
        out
    }

    /// Adjugate, so that adj(A)·A = det(A)·I.
    pub fn adjugate(&self) -> Self {
        Self::from_fn(|i, j| {
            let rows: Vec<usize> = (0..3).filter(|&k| k != j).collect();
            let cols: Vec<usize> = (0..3).filter(|&k| k != i).collect();
            let m = self.minor([rows[0], rows[1]], [cols[0], cols[1]]);
            if (i + j) % 2 == 0 {
                m
            } else {
                -&m
            }
        })
    }

    /// Rank over the field of rational functions.
    pub fn rank(&self) -> usize {
        if !self.det().is_zero() {
            return 3;
        }
        let pairs = [[0, 1], [0, 2], [1, 2]];
        for r in pairs {
            for c in pairs {
                if !self.minor(r, c).is_zero() {
                    return 2;
                }
            }
        }
        if self.is_zero() {
            0
        } else {
            1
        }
    }

    pub fn eval_f64(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.entries[i][j].eval_f64(&x)))
    }
}

/// Result of checking 𝕃′ − 2ℝ and the x₁-lift identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionReport {
    /// Rational multiples of Δ on the diagonal of 𝕃′ − 2ℝ, if it has that form.
    pub laplacian_multiples: Option<[String; 3]>,
    pub polynomials_checked: usize,
    pub lifts_checked: usize,
    /// Polynomials (with lift index) violating either identity.
    pub counterexamples: Vec<(String, usize)>,
    pub pass: bool,
}

/// 𝕃′[x₁h] − 2𝔻[h] − 2x₁ℝ[h] for the lift of `h` into slot `j`.
pub fn lift_identity_residual(h: &RealPoly3, j: usize) -> Triple {
    let mut lift: Triple = std::array::from_fn(|_| RealPoly3::zero());
    lift[j] = h.clone();
    let x1 = RealPoly3::var(0);
    let x1_lift: Triple = std::array::from_fn(|k| &x1 * &lift[k]);
    let lhs = OpMatrix3::l_prime().apply(&x1_lift);
    let d = OpMatrix3::d_op().apply(&lift);
    let r = OpMatrix3::r().apply(&lift);
    let two = int(2);
    std::array::from_fn(|k| &(&lhs[k] - &d[k].scale(&two)) - &(&x1 * &r[k]).scale(&two))
}

/// 𝕃′[h] − 2ℝ[h] for the lift of `h` into slot `j`.
pub fn harmonic_identity_residual(h: &RealPoly3, j: usize) -> Triple {
    let mut lift: Triple = std::array::from_fn(|_| RealPoly3::zero());
    lift[j] = h.clone();
    let a = OpMatrix3::l_prime().apply(&lift);
    let b = OpMatrix3::r().apply(&lift);
    std::array::from_fn(|k| &a[k] - &b[k].scale(&int(2)))
}

pub fn harmonic_reduction_check<R: Rng>(rng: &mut R, count: usize, degree: u32) -> ReductionReport {
    let diff = OpMatrix3::l_prime().sub(&OpMatrix3::r().scale(&int(2)));
    let lap = DiffOpPoly::laplacian();
    let diagonal_form = (0..3).all(|i| (0..3).all(|j| i == j || diff.entries[i][j].is_zero()));
    let laplacian_multiples = if diagonal_form {
        let m: Option<Vec<String>> = (0..3)
            .map(|i| diff.entries[i][i].ratio_to(&lap).map(|r| r.to_string()))
            .collect();
        m.map(|v| [v[0].clone(), v[1].clone(), v[2].clone()])
    } else {
        None
    };
    let mut counterexamples = Vec::new();
    let mut lifts = 0;
    for _ in 0..count {
        let h = RealPoly3::random_harmonic(rng, degree);
        for j in 0..3 {
            lifts += 1;
            let ok = lift_identity_residual(&h, j).iter().all(|p| p.is_zero())
                && harmonic_identity_residual(&h, j)
                    .iter()
                    .all(|p| p.is_zero());
            if !ok {
                counterexamples.push((h.to_string(), j + 1));
            }
        }
    }
    ReductionReport {
        pass: laplacian_multiples.is_some() && counterexamples.is_empty(),
        laplacian_multiples,
        polynomials_checked: count,
        lifts_checked: lifts,
        counterexamples,
    }
}

/// Particular solution rule for Δ′P = ∂₁h(0, x′).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PoissonProfile {
    /// Gauss–Jordan over monomials in descending lexicographic order,
    /// free coefficients zero.
    #[default]
    Lexicographic,
    /// Minimum Euclidean norm of the coefficient vector. Symmetric in
    /// x₂, x₃ whenever the right-hand side is.
    Canonical,
}

/// Solves Δ′P = q in x′ = (x₂, x₃) over monomials of degree ≤ deg q + 2.
pub fn poisson_profile(q: &RealPoly3, profile: PoissonProfile) -> RealPoly3 {
    if q.is_zero() {
        return RealPoly3::zero();
    }
    let dq = q.degree();
    let mut unknowns: Vec<[u32; 3]> = exponents::<2>(dq + 2)
        .into_iter()
        .map(|[b, c]| [0, b, c])
        .collect();
    unknowns.sort_by(|a, b| b.cmp(a));
    let rows: Vec<[u32; 3]> = exponents::<2>(dq)
        .into_iter()
        .map(|[b, c]| [0, b, c])
        .collect();
    let images: Vec<RealPoly3> = unknowns
        .iter()
        .map(|e| {
            let m = RealPoly3::monomial(*e, BigRational::one());
            &m.deriv(1).deriv(1) + &m.deriv(2).deriv(2)
        })
        .collect();
    let a: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| images.iter().map(|img| img.coeff(r)).collect())
        .collect();
    let b: Vec<BigRational> = rows.iter().map(|r| q.coeff(r)).collect();
    let sol = match profile {
        PoissonProfile::Lexicographic => solve_pivoting(&a, &b),
        PoissonProfile::Canonical => solve_min_norm(&a, &b),
    }
    .expect("the planar Laplacian maps onto polynomials of lower degree");
    RealPoly3::from_terms(unknowns.into_iter().zip(sol))
}

/// Harmonic pair with u = v + x₁w.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Almansi3 {
    pub v: RealPoly3,
    pub w: RealPoly3,
    pub profile_p: RealPoly3,
}

/// h = Δu, w = ½(∫₀^{x₁} h dt − P) with Δ′P = ∂₁h(0, x′), v = u − x₁w.
pub fn almansi3(u: &RealPoly3, profile: PoissonProfile) -> Result<Almansi3> {
    let bilap = u.laplacian_pow(2);
    if !bilap.is_zero() {
        return Err(Error::NotBiharmonic(bilap.to_string()));
    }
    let h = u.laplacian();
    let q = h.deriv(0).restrict_zero(0);
    let p = poisson_profile(&q, profile);
    let half = BigRational::new(1.into(), 2.into());
    let w = (&h.antideriv(0) - &p).scale(&half);
    let v = u - &(&RealPoly3::var(0) * &w);
    debug_assert!(v.laplacian().is_zero() && w.laplacian().is_zero());
    Ok(Almansi3 { v, w, profile_p: p })
}

/// Every monomial carries x₁^k with k ≥ 3, i.e. all derivatives of order
/// ≤ 2 vanish on {x₁ = 0}.
pub fn flat3_check(u: &RealPoly3) -> bool {
    u.terms().all(|(e, _)| e[0] >= 3)
}

/// X₁ = adj(ℍ[w])·(−ℍ[v] + 𝔹[w]) / det ℍ[w].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatField3 {
    pub numerator: PolyMatrix,
    pub denominator: RealPoly3,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct X1Report {
    pub decomposition: Almansi3,
    pub b_variant: BVariant,
    pub hessian_w: PolyMatrix,
    /// −ℍ[v] + 𝔹[w].
    pub rhs: PolyMatrix,
    pub hessian_rank: usize,
    /// det ℍ[w] ≡ 0.
    pub degenerate: bool,
    pub field: Option<MatField3>,
    /// x₁ℍ[w] = −ℍ[v] + 𝔹[w] after substituting x₁ = 0.
    pub patch_identity: bool,
    /// X₁ − x₁I vanishes on {x₁ = 0} (requires a nondegenerate Hessian there).
    pub x1_identity_on_patch: Option<bool>,
}

pub fn x1_field(u: &RealPoly3, profile: PoissonProfile, b_variant: BVariant) -> Result<X1Report> {
    let decomposition = almansi3(u, profile)?;
    let hess = OpMatrix3::hessian();
    let hessian_w = hess.apply_entrywise(&decomposition.w);
    let hessian_v = hess.apply_entrywise(&decomposition.v);
    let rhs = OpMatrix3::b(b_variant)
        .apply_entrywise(&decomposition.w)
        .sub(&hessian_v);
    let x1 = RealPoly3::var(0);
    let patch_identity = hessian_w.mul_scalar(&x1).sub(&rhs).on_patch().is_zero();
    let det = hessian_w.det();
    let hessian_rank = hessian_w.rank();
    let degenerate = det.is_zero();
    let (field, x1_identity_on_patch) = if degenerate {
        (None, None)
    } else {
        let numerator = hessian_w.adjugate().mul(&rhs);
        // X₁ = x₁I on the patch ⇔ numerator − x₁·det·I vanishes there,
        // provided det does not vanish identically on the patch.
        let target = PolyMatrix::from_fn(|i, j| {
            if i == j {
                &x1 * &det
            } else {
                RealPoly3::zero()
            }
        });
        let ok =
            (!det.restrict_zero(0).is_zero()).then(|| numerator.sub(&target).on_patch().is_zero());
        (
            Some(MatField3 {
                numerator,
                denominator: det,
            }),
            ok,
        )
    };
    Ok(X1Report {
        decomposition,
        b_variant,
        hessian_w,
        rhs,
        hessian_rank,
        degenerate,
        field,
        patch_identity,
        x1_identity_on_patch,
    })
}

/// ∇[w + ∂₁v] + x₁∇[∂₁v] restricted to {x₁ = 0}.
pub fn gradient_identity_residual(d: &Almansi3) -> Triple {
    let d1v = d.v.deriv(0);
    let s = &d.w + &d1v;
    let x1 = RealPoly3::var(0);
    std::array::from_fn(|i| (&s.deriv(i) + &(&x1 * &d1v.deriv(i))).restrict_zero(0))
}

/// The biharmonic polynomial Σ_m x₁^m a_m(x′) with a₀ = a₁ = a₂ = 0 and
/// a₃ = f, which is flat to order 2 on {x₁ = 0}. The coefficients follow
/// from (m+4)(m+3)(m+2)(m+1)a_{m+4} + 2(m+2)(m+1)Δ′a_{m+2} + Δ′²a_m = 0.
pub fn flat_biharmonic(f: &RealPoly3) -> Result<RealPoly3> {
    if f.terms().any(|(e, _)| e[0] != 0) {
        return Err(Error::InvalidInput("profile must not depend on x1".into()));
    }
    let lap2 = |p: &RealPoly3| &p.deriv(1).deriv(1) + &p.deriv(2).deriv(2);
    let mut a: Vec<RealPoly3> = vec![
        RealPoly3::zero(),
        RealPoly3::zero(),
        RealPoly3::zero(),
        f.clone(),
    ];
    let mut m = 0usize;
    loop {
        let mi = m as i64;
        let lead = int((mi + 4) * (mi + 3) * (mi + 2) * (mi + 1));
        let mid = lap2(&a[m + 2]).scale(&int(2 * (mi + 2) * (mi + 1)));
        let low = lap2(&lap2(&a[m]));
        let next = (&mid + &low).scale(&(-BigRational::one() / lead));
        a.push(next);
        m += 1;
        if m + 3 >= a.len() && a[a.len() - 4..].iter().all(|p| p.is_zero()) {
            break;
        }
        if a.len() > 4 * (f.degree() as usize + 4) {
            break;
        }
    }
    let x1 = RealPoly3::var(0);
    let mut u = RealPoly3::zero();
    for (k, ak) in a.iter().enumerate() {
        u = &u + &(&x1.pow(k as u32) * ak);
    }
    debug_assert!(u.laplacian_pow(2).is_zero());
    Ok(u)
}

/// u = v₀ + x₁w₀ for random harmonic v₀ (degree ≤ deg) and w₀ (≤ deg − 1).
pub fn random_biharmonic<R: Rng>(rng: &mut R, deg: u32) -> (RealPoly3, RealPoly3, RealPoly3) {
    let v0 = RealPoly3::random_harmonic(rng, deg);
    let w0 = RealPoly3::random_harmonic(rng, deg.saturating_sub(1));
    let u = &v0 + &(&RealPoly3::var(0) * &w0);
    (u, v0, w0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x(i: usize) -> RealPoly3 {
        RealPoly3::var(i)
    }

    #[test]
    fn factorization() {
        let bilap = OpMatrix3::diag(DiffOpPoly::laplacian().pow(2));
        assert_eq!(op_mul(&OpMatrix3::l(), &OpMatrix3::l_prime()), bilap);
        assert_eq!(op_mul(&OpMatrix3::l_prime(), &OpMatrix3::l()), bilap);
        let a = OpMatrix3::r();
        assert_eq!(op_mul(&OpMatrix3::identity(), &a), a);
    }

    #[test]
    fn reduction_symbolic_form() {
        let diff = OpMatrix3::l_prime().sub(&OpMatrix3::r().scale(&int(2)));
        let lap = DiffOpPoly::laplacian();
        let expect = OpMatrix3::from_fn(|i, j| match (i, j) {
            (0, 0) => lap.scale(&int(-1)),
            (a, b) if a == b => lap.clone(),
            _ => DiffOpPoly::zero(),
        });
        assert_eq!(diff, expect);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rep = harmonic_reduction_check(&mut rng, 5, 4);
        assert!(rep.pass, "{rep:?}");
        assert_eq!(
            rep.laplacian_multiples.unwrap(),
            ["-1".to_string(), "1".into(), "1".into()]
        );
    }

    #[test]
    fn lift_identity_examples() {
        for j in 0..3 {
            assert!(lift_identity_residual(&x(1), j).iter().all(|p| p.is_zero()));
        }
        let bad = x(0).pow(2);
        assert!((0..3).any(|j| lift_identity_residual(&bad, j).iter().any(|p| !p.is_zero())));
        let h = &x(0) * &x(1);
        assert!(harmonic_identity_residual(&h, 0)
            .iter()
            .all(|p| p.is_zero()));
    }

    #[test]
    fn apply_examples() {
        let w = RealPoly3::from_terms([
            ([2, 0, 0], rat(3, 2)),
            ([0, 2, 0], rat(-3, 4)),
            ([0, 0, 2], rat(-3, 4)),
        ]);
        let h = OpMatrix3::hessian().apply_entrywise(&w);
        for i in 0..3 {
            for j in 0..3 {
                let expect = match (i, j) {
                    (0, 0) => int(3),
                    (a, b) if a == b => rat(-3, 2),
                    _ => int(0),
                };
                assert_eq!(h.entries[i][j], RealPoly3::constant(expect));
            }
        }
        let zero: Triple = std::array::from_fn(|_| RealPoly3::zero());
        assert!(OpMatrix3::l().apply(&zero).iter().all(|p| p.is_zero()));
    }

    #[test]
    fn factorization_commutes_with_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let f: Triple = std::array::from_fn(|_| RealPoly3::random(&mut rng, 6, 0.3));
            let lhs = OpMatrix3::l().apply(&OpMatrix3::l_prime().apply(&f));
            for k in 0..3 {
                assert_eq!(lhs[k], f[k].laplacian_pow(2));
            }
        }
    }

    #[test]
    fn almansi3_examples() {
        let u = x(0).pow(3);
        let d = almansi3(&u, PoissonProfile::Canonical).unwrap();
        let expect_w = RealPoly3::from_terms([
            ([2, 0, 0], rat(3, 2)),
            ([0, 2, 0], rat(-3, 4)),
            ([0, 0, 2], rat(-3, 4)),
        ]);
        assert_eq!(d.w, expect_w);
        assert_eq!(
            d.profile_p,
            RealPoly3::from_terms([([0, 2, 0], rat(3, 2)), ([0, 0, 2], rat(3, 2))])
        );
        assert_eq!(&d.v + &(&x(0) * &d.w), u);

        let u = &x(0).pow(3) * &x(1);
        let d = almansi3(&u, PoissonProfile::Lexicographic).unwrap();
        let expect_w = RealPoly3::from_terms([([2, 1, 0], rat(3, 2)), ([0, 3, 0], rat(-1, 2))]);
        assert_eq!(d.w, expect_w);

        let harmonic = &x(0) * &x(1);
        let d = almansi3(&harmonic, PoissonProfile::default()).unwrap();
        assert!(d.w.is_zero());
        assert_eq!(d.v, harmonic);

        assert!(matches!(
            almansi3(&x(0).pow(4), PoissonProfile::default()),
            Err(Error::NotBiharmonic(_))
        ));
    }

    #[test]
    fn almansi3_random_generator_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let (u, _v0, w0) = random_biharmonic(&mut rng, 6);
            for profile in [PoissonProfile::Lexicographic, PoissonProfile::Canonical] {
                let d = almansi3(&u, profile).unwrap();
                assert!(d.v.laplacian().is_zero() && d.w.laplacian().is_zero());
                assert_eq!(&d.v + &(&x(0) * &d.w), u);
                assert!((&d.w - &w0).deriv(0).is_zero());
            }
        }
    }

    #[test]
    fn flat_checks_and_generator() {
        assert!(flat3_check(&x(0).pow(3)));
        assert!(flat3_check(&(&x(0).pow(3) * &x(1))));
        assert!(!flat3_check(&(&x(0).pow(2) * &x(1))));
        assert_eq!(flat_biharmonic(&RealPoly3::one()).unwrap(), x(0).pow(3));
        assert_eq!(flat_biharmonic(&x(1)).unwrap(), &x(0).pow(3) * &x(1));
        let f = &x(1).pow(3) + &(&x(1) * &x(2)).scale(&int(2));
        let u = flat_biharmonic(&f).unwrap();
        assert!(flat3_check(&u));
        assert!(u.laplacian_pow(2).is_zero());
    }

    #[test]
    fn x1_field_on_cubic() {
        let u = x(0).pow(3);
        let rep = x1_field(&u, PoissonProfile::Canonical, BVariant::Derived).unwrap();
        assert!(!rep.degenerate);
        assert_eq!(rep.hessian_rank, 3);
        assert!(rep.patch_identity);
        assert_eq!(rep.x1_identity_on_patch, Some(true));
        let field = rep.field.unwrap();
        assert!(field.numerator.on_patch().is_zero());
        assert_eq!(field.denominator, RealPoly3::constant(rat(27, 4)));
        assert!(gradient_identity_residual(&rep.decomposition)
            .iter()
            .all(|p| p.is_zero()));
        assert!((&rep.decomposition.w + &rep.decomposition.v.deriv(0)).is_zero());

        let printed = x1_field(&u, PoissonProfile::Canonical, BVariant::Printed).unwrap();
        assert!(!printed.patch_identity);
    }

    #[test]
    fn x1_field_degenerate_case() {
        let u = &x(0).pow(3) * &x(1);
        let rep = x1_field(&u, PoissonProfile::Lexicographic, BVariant::Derived).unwrap();
        assert!(rep.degenerate);
        assert_eq!(rep.hessian_rank, 2);
        assert!(rep.hessian_w.entries[2].iter().all(|p| p.is_zero()));
        assert!(rep.field.is_none());
        assert!(rep.patch_identity);
    }

    #[test]
    fn patch_identity_for_flat_family() {
        for f in [
            RealPoly3::one(),
            x(1),
            x(2),
            &x(1).pow(2) - &x(2).pow(2),
            &x(1) * &x(2),
        ] {
            let u = flat_biharmonic(&f).unwrap();
            for profile in [PoissonProfile::Lexicographic, PoissonProfile::Canonical] {
                let rep = x1_field(&u, profile, BVariant::Derived).unwrap();
                assert!(rep.patch_identity, "u = {u}");
            }
        }
    }

    #[test]
    fn op_matrix_json_round_trip() {
        let l = OpMatrix3::l();
        let text = serde_json::to_string(&l).unwrap();
        let back: OpMatrix3 = serde_json::from_str(&text).unwrap();
        assert_eq!(back, l);
    }
}

//! Command-line front end: JSON-configured runs that emit a versioned
//! report plus CSV artifacts.
//!
//! Every run writes `<out>/report.json`. The exit code is 0 when every
//! check passes, 1 when a check fails or a computation errors out, and 2
//! for invalid input (unknown fields, malformed JSON, bad parameters).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::almansi2d::{
    almansi_decompose, almansi_reconstruct, polyanalytic_split_from_u, psi_root_check,
    random_polyharmonic, PsiFunction,
};
use crate::arcflat::{self, ArcFlatSolution, ArcFlatVerification, ArcSpec, StoredSolution};
use crate::error::Error;
use crate::exact::{rat, Poly};
use crate::fieldlab::{
    bilaplacian_residual, disk_grid, flatness_decay, geometric_ladder, inscribed_grid,
    CubicFlatKernel, CurveArc, DecayReport,
};
use crate::polyrat::RationalMap;
use crate::schwarz::{
    ellipse_report, fit_quadrature, meromorphy_report, monodromy_probe, quadrature_residual,
    quadrature_residual_at, EllipseSchwarz, EllipseSpec, QuadratureData, RationalSchwarz,
    ANGULAR_NODES, DEFAULT_MONODROMY_STEPS, RADIAL_NODES,
};
use crate::trilap::{
    almansi3, flat3_check, gradient_identity_residual, harmonic_reduction_check, op_mul,
    random_biharmonic, x1_field, BVariant, DiffOpPoly, OpMatrix3, PoissonProfile, RealPoly3,
};

pub const SCHEMA_VERSION: &str = "1";
pub const DEFAULT_SEED: u64 = 0;
pub const REPORT_FILE: &str = "report.json";

/// Which computation to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Factorize3d,
    Almansi2,
    Almansi3,
    KernelVerify,
    SchwarzEllipse,
    SchwarzRational,
    Quadcheck,
    ArcflatBuild,
    ArcflatVerify,
    X1field,
    Suite,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_out() -> PathBuf {
    PathBuf::from("holmgren-out")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Task,
    #[serde(default)]
    pub input: Value,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub tol: BTreeMap<String, f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Below,
    AtLeast,
    Above,
    /// A count of exact mismatches that must not exceed the tolerance.
    AtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// None when the quantity sits at the numerical noise floor.
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub subcommand: Task,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    pub wall_time: f64,
    pub artifacts: Vec<String>,
    pub details: BTreeMap<String, Value>,
}

impl RunReport {
    /// The report with the wall time zeroed, for reproducibility comparisons.
    pub fn without_wall_time(&self) -> Self {
        Self {
            wall_time: 0.0,
            ..self.clone()
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// Input rejected before any computation ran.
#[derive(Debug, thiserror::Error)]
#[error("invalid input: {0}")]
pub struct InvalidInput(pub String);

struct Ctx {
    tol: BTreeMap<String, f64>,
    seed: u64,
    out: PathBuf,
    prefix: String,
    checks: Vec<CheckRecord>,
    artifacts: Vec<String>,
    details: BTreeMap<String, Value>,
}

impl Ctx {
    fn name(&self, n: &str) -> String {
        format!("{}{n}", self.prefix)
    }

    fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tol.get(name).copied().unwrap_or(default)
    }

    fn record(
        &mut self,
        name: &str,
        measured: Option<f64>,
        default_tol: f64,
        comparison: Comparison,
        note: Option<String>,
    ) {
        let name = self.name(name);
        let tolerance = self.tolerance(&name, default_tol);
        let verdict = match (measured, comparison) {
            (None, _) => true,
            (Some(m), Comparison::Below) => m < tolerance,
            (Some(m), Comparison::AtLeast) => m >= tolerance,
            (Some(m), Comparison::Above) => m > tolerance,
            (Some(m), Comparison::AtMost) => m <= tolerance,
        };
        self.checks.push(CheckRecord {
            name,
            measured,
            tolerance,
            comparison,
            verdict,
            note,
        });
    }

    fn below(&mut self, name: &str, measured: f64, tol: f64) {
        self.record(name, Some(measured), tol, Comparison::Below, None);
    }

    fn above(&mut self, name: &str, measured: f64, tol: f64) {
        self.record(name, Some(measured), tol, Comparison::Above, None);
    }

    fn exact(&mut self, name: &str, mismatches: usize) {
        self.record(name, Some(mismatches as f64), 0.0, Comparison::AtMost, None);
    }

    fn failure(&mut self, name: &str, err: &Error) {
        self.record(
            name,
            Some(1.0),
            0.0,
            Comparison::AtMost,
            Some(err.to_string()),
        );
    }

    fn detail<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.details.insert(self.name(key), v);
    }

    fn artifact(&mut self, file: &str) -> PathBuf {
        let name = format!("{}{file}", self.prefix.replace('.', "_"));
        self.artifacts.push(name.clone());
        self.out.join(name)
    }

    fn decay_checks(&mut self, report: &DecayReport) {
        for (k, label) in ["decay_u", "decay_dnu", "decay_dn2u"].iter().enumerate() {
            let note = report.exponents[k]
                .is_none()
                .then(|| "at noise floor".to_string());
            self.record(
                label,
                report.exponents[k],
                report.thresholds[k],
                Comparison::AtLeast,
                note,
            );
        }
    }
}

fn parse_input<T: DeserializeOwned + Default>(input: &Value) -> Result<T, InvalidInput> {
    if input.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(input.clone()).map_err(|e| InvalidInput(format!("input: {e}")))
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidInput(_) | Error::Json(_) | Error::Normalization(_)
    )
}

/// Runs one configuration. Input errors are returned before any check is
/// recorded. Other computational errors become failed checks.
pub fn run(config: &RunConfig) -> Result<RunReport, InvalidInput> {
    let start = Instant::now();
    let mut ctx = Ctx {
        tol: config.tol.clone(),
        seed: config.seed,
        out: config.out.clone(),
        prefix: String::new(),
        checks: Vec::new(),
        artifacts: Vec::new(),
        details: BTreeMap::new(),
    };
    fs::create_dir_all(&config.out)
        .map_err(|e| InvalidInput(format!("cannot create {}: {e}", config.out.display())))?;
    dispatch(config.subcommand, &config.input, &mut ctx)?;
    let pass = !ctx.checks.is_empty() && ctx.checks.iter().all(|c| c.verdict);
    Ok(RunReport {
        schema: SCHEMA_VERSION.into(),
        subcommand: config.subcommand,
        seed: config.seed,
        pass,
        checks: ctx.checks,
        wall_time: start.elapsed().as_secs_f64(),
        artifacts: ctx.artifacts,
        details: ctx.details,
    })
}

fn dispatch(task: Task, input: &Value, ctx: &mut Ctx) -> Result<(), InvalidInput> {
    let outcome = match task {
        Task::Factorize3d => factorize3d(parse_input(input)?, ctx),
        Task::Almansi2 => almansi2(parse_input(input)?, ctx),
        Task::Almansi3 => almansi3_task(parse_input(input)?, ctx),
        Task::KernelVerify => kernel_verify(parse_input(input)?, ctx),
        Task::SchwarzEllipse => schwarz_ellipse(parse_input(input)?, ctx),
        Task::SchwarzRational => schwarz_rational(parse_input(input)?, ctx),
        Task::Quadcheck => quadcheck(parse_input(input)?, ctx),
        Task::ArcflatBuild => arcflat_build(parse_input(input)?, ctx),
        Task::ArcflatVerify => {
            if input.is_null() {
                return Err(InvalidInput(
                    "arcflat verify needs a stored solution as --config".into(),
                ));
            }
            let stored: StoredSolution = serde_json::from_value(input.clone())
                .map_err(|e| InvalidInput(format!("input: {e}")))?;
            arcflat_verify(stored, ctx)
        }
        Task::X1field => x1field(parse_input(input)?, ctx),
        Task::Suite => {
            let _: Empty = parse_input(input)?;
            suite(ctx);
            Ok(())
        }
    };
    match outcome {
        Ok(()) => Ok(()),
        Err(e) if is_input_error(&e) => Err(InvalidInput(e.to_string())),
        Err(e) => {
            ctx.failure("error", &e);
            Ok(())
        }
    }
}

type TaskResult = Result<(), Error>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Empty {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FactorizeInput {
    harmonic_count: usize,
    harmonic_degree: u32,
}

impl Default for FactorizeInput {
    fn default() -> Self {
        Self {
            harmonic_count: 20,
            harmonic_degree: 5,
        }
    }
}

fn factorize3d(input: FactorizeInput, ctx: &mut Ctx) -> TaskResult {
    let bilap = OpMatrix3::diag(DiffOpPoly::laplacian().pow(2));
    let lr = op_mul(&OpMatrix3::l(), &OpMatrix3::l_prime());
    let rl = op_mul(&OpMatrix3::l_prime(), &OpMatrix3::l());
    let mismatches = |m: &OpMatrix3| {
        (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| m.entries[i][j] != bilap.entries[i][j])
            .count()
    };
    ctx.exact("l_lprime_equals_bilaplacian", mismatches(&lr));
    ctx.exact("lprime_l_equals_bilaplacian", mismatches(&rl));
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let red = harmonic_reduction_check(&mut rng, input.harmonic_count, input.harmonic_degree);
    let symbolic_ok = red
        .laplacian_multiples
        .as_ref()
        .is_some_and(|m| m == &["-1".to_string(), "1".into(), "1".into()]);
    ctx.exact("reduction_symbolic", usize::from(!symbolic_ok));
    ctx.exact("reduction_lifts", red.counterexamples.len());
    ctx.detail("l_lprime", &lr.to_string());
    ctx.detail("lprime_l", &rl.to_string());
    ctx.detail("reduction", &red);
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct AlmansiInput {
    count: usize,
    max_n: usize,
    max_degree: u32,
    /// A specific polynomial to decompose instead of the random suite.
    poly: Option<Value>,
    n: Option<usize>,
    profile: PoissonProfile,
}

impl Default for AlmansiInput {
    fn default() -> Self {
        Self {
            count: 50,
            max_n: 4,
            max_degree: 12,
            poly: None,
            n: None,
            profile: PoissonProfile::default(),
        }
    }
}

fn almansi2(input: AlmansiInput, ctx: &mut Ctx) -> TaskResult {
    if let Some(p) = &input.poly {
        let u: Poly<2> = serde_json::from_value(p.clone())?;
        let n = input
            .n
            .ok_or_else(|| Error::InvalidInput("a 2D polynomial needs its order n".into()))?;
        let stack = almansi_decompose(&u, n)?;
        ctx.exact(
            "reconstruction",
            usize::from(almansi_reconstruct(&stack) != u),
        );
        ctx.detail("stack", &stack);
        return Ok(());
    }
    if input.max_n == 0 {
        return Err(Error::InvalidInput("max_n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut failures = 0;
    let mut harmonic_failures = 0;
    for _ in 0..input.count {
        let n = rng.random_range(1..=input.max_n);
        let (u, _) = random_polyharmonic(&mut rng, n, input.max_degree);
        match almansi_decompose(&u, n) {
            Ok(stack) => {
                harmonic_failures += stack
                    .parts()
                    .iter()
                    .filter(|h| !h.laplacian().is_zero())
                    .count();
                failures += usize::from(almansi_reconstruct(&stack) != u);
            }
            Err(_) => failures += 1,
        }
    }
    ctx.exact("reconstruction", failures);
    ctx.exact("harmonic_parts", harmonic_failures);
    ctx.detail("count", &input.count);
    Ok(())
}

fn almansi3_task(mut input: AlmansiInput, ctx: &mut Ctx) -> TaskResult {
    if let Some(p) = &input.poly {
        let u: RealPoly3 = serde_json::from_value(p.clone())?;
        let d = almansi3(&u, input.profile)?;
        let recon = &d.v + &(&RealPoly3::var(0) * &d.w);
        ctx.exact("reconstruction", usize::from(recon != u));
        ctx.exact(
            "harmonic_parts",
            usize::from(!d.v.laplacian().is_zero()) + usize::from(!d.w.laplacian().is_zero()),
        );
        ctx.detail("v", &d.v.to_string());
        ctx.detail("w", &d.w.to_string());
        return Ok(());
    }
    if input.max_degree == AlmansiInput::default().max_degree {
        input.max_degree = 8;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut failures = 0;
    let mut harmonic_failures = 0;
    for _ in 0..input.count {
        let (u, _, _) = random_biharmonic(&mut rng, input.max_degree);
        match almansi3(&u, input.profile) {
            Ok(d) => {
                harmonic_failures += usize::from(!d.v.laplacian().is_zero())
                    + usize::from(!d.w.laplacian().is_zero());
                failures += usize::from(&d.v + &(&RealPoly3::var(0) * &d.w) != u);
            }
            Err(_) => failures += 1,
        }
    }
    ctx.exact("reconstruction", failures);
    ctx.exact("harmonic_parts", harmonic_failures);
    ctx.detail("count", &input.count);
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct KernelInput {
    theta: f64,
    grid: usize,
    radius: f64,
    step: f64,
}

impl Default for KernelInput {
    fn default() -> Self {
        Self {
            theta: 0.0,
            grid: 20,
            radius: 0.8,
            step: 1e-2,
        }
    }
}

/// Sixteen probes spread over the annulus `inner <= |z| <= outer`.
pub fn annulus_probes(inner: f64, outer: f64) -> Vec<Complex64> {
    (0..16)
        .map(|k| {
            Complex64::from_polar(
                inner + (outer - inner) * (k % 4) as f64 / 3.0,
                2.0 * PI * k as f64 / 16.0 + 0.2,
            )
        })
        .collect()
}

fn kernel_verify(input: KernelInput, ctx: &mut Ctx) -> TaskResult {
    let kernel = CubicFlatKernel::new(input.theta);
    let rep = bilaplacian_residual(
        &kernel,
        &inscribed_grid(input.grid, input.radius),
        input.step,
    )?;
    ctx.below("bilaplacian_max", rep.max_abs, 1e-4);
    let cropped = bilaplacian_residual(&kernel, &disk_grid(input.grid, input.radius), input.step)?;
    ctx.detail("bilaplacian_cropped_grid_info", &cropped.max_abs);
    let arc = CurveArc::circle(
        [0.0, 0.0],
        1.0,
        input.theta + PI / 2.0,
        input.theta + 3.0 * PI / 2.0,
    );
    let decay = flatness_decay(
        &kernel,
        &arc,
        &geometric_ladder(arcflat::DECAY_T0, arcflat::DECAY_POINTS),
        3,
    )?;
    ctx.decay_checks(&decay);
    decay.save_csv(&ctx.artifact("kernel_decay.csv"))?;
    ctx.detail("decay", &decay.summary_json());
    let rot = Complex64::from_polar(1.0, input.theta);
    let stack = polyanalytic_split_from_u(&kernel, 2, &annulus_probes(0.55, 0.75))?;
    let psi = psi_root_check(&PsiFunction::from_stack(&stack), |z| 1.0 / z, 1, 1e-3);
    let _ = rot;
    ctx.below("psi_root_relative", psi.relative, psi.tolerance);
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EllipseInput {
    a: f64,
    b: f64,
    steps: usize,
}

impl Default for EllipseInput {
    fn default() -> Self {
        Self {
            a: 2.0,
            b: 1.0,
            steps: DEFAULT_MONODROMY_STEPS,
        }
    }
}

fn schwarz_ellipse(input: EllipseInput, ctx: &mut Ctx) -> TaskResult {
    let spec = EllipseSpec::new(input.a, input.b)?;
    let s = EllipseSchwarz::new(spec)?;
    ctx.below("boundary_residual", s.boundary_residual(), 1e-10);
    if spec.is_circle() {
        let a = spec.a();
        let loops = [
            (Complex64::new(0.0, 0.0), 0.5 * a),
            (Complex64::new(0.2 * a, 0.1 * a), 0.3 * a),
            (Complex64::new(0.5 * a, 0.0), 0.2 * a),
            (Complex64::new(0.0, 0.0), 2.0 * a),
        ];
        let mut worst = 0.0f64;
        for (center, radius) in loops {
            worst = worst.max(monodromy_probe(spec, center, radius, input.steps)?.mismatch);
        }
        ctx.below("monodromy_max", worst, 1e-9);
    } else {
        let c = spec.focal();
        let focus = monodromy_probe(spec, Complex64::new(c, 0.0), 0.5f64.min(c), input.steps)?;
        ctx.above("monodromy_focus", focus.mismatch, 0.1);
        let origin = monodromy_probe(
            spec,
            Complex64::new(0.0, 0.0),
            0.5f64.min(0.5 * c),
            input.steps,
        )?;
        ctx.below("monodromy_single_sheet", origin.mismatch, 1e-9);
    }
    ctx.detail("report", &ellipse_report(spec)?);
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MapInput {
    map: Option<RationalMap>,
    c: [f64; 2],
}

impl Default for MapInput {
    fn default() -> Self {
        Self {
            map: None,
            c: [0.3, 0.0],
        }
    }
}

impl MapInput {
    fn resolve(&self) -> RationalMap {
        self.map
            .clone()
            .unwrap_or_else(|| RationalMap::quadratic(Complex64::new(self.c[0], self.c[1])))
    }
}

fn schwarz_rational(input: MapInput, ctx: &mut Ctx) -> TaskResult {
    let map = input.resolve();
    let s = RationalSchwarz::new(map.clone())?;
    ctx.below("boundary_residual", s.boundary_residual(256)?, 1e-10);
    ctx.detail("report", &meromorphy_report(&map)?);
    Ok(())
}

fn quad_tests() -> Vec<Poly<2>> {
    let x = Poly::<2>::var(0);
    let y = Poly::<2>::var(1);
    vec![
        Poly::one(),
        x.clone(),
        y.clone(),
        &x.pow(2) - &y.pow(2),
        &x * &y,
    ]
}

fn quadcheck(input: MapInput, ctx: &mut Ctx) -> TaskResult {
    let tests = quad_tests();
    let disk = quadrature_residual(
        &RationalMap::identity(),
        &QuadratureData::disk(Complex64::new(0.0, 0.0), 1.0),
        &tests,
    )?;
    ctx.below("disk_mean_value", disk.max_residual, 1e-8);
    let map = input.resolve();
    let fit = fit_quadrature(&map, 4)?;
    let rep = quadrature_residual_at(&map, &fit.data, &tests, 2 * RADIAL_NODES, 2 * ANGULAR_NODES)?;
    ctx.below("fitted_identity", rep.max_residual, 1e-6);
    ctx.detail("nodes", &fit.data);
    ctx.detail("fit_residual", &fit.fit_residual);
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ArcflatInput {
    map: Option<RationalMap>,
    c: Option<[f64; 2]>,
    arc: ArcSpec,
    atoms: usize,
}

impl Default for ArcflatInput {
    fn default() -> Self {
        Self {
            map: None,
            c: None,
            arc: ArcSpec::new(-3.0 * PI / 4.0, 3.0 * PI / 4.0).expect("valid default arc"),
            atoms: arcflat::DEFAULT_ATOMS,
        }
    }
}

fn verification_checks(
    sol: &ArcFlatSolution,
    v: &ArcFlatVerification,
    ctx: &mut Ctx,
) -> TaskResult {
    ctx.decay_checks(&v.decay);
    ctx.below(
        "constraint_residual",
        v.constraint_residual,
        arcflat::CONSTRAINT_TOL,
    );
    ctx.below("path_independence", v.path_independence, arcflat::PATH_TOL);
    ctx.above(
        "nontriviality",
        v.nontriviality.relative,
        arcflat::NONTRIVIAL_TOL,
    );
    ctx.below(
        "biharmonic_relative",
        v.biharmonic_relative,
        arcflat::BIHARMONIC_REL_TOL,
    );
    v.decay.save_csv(&ctx.artifact("arcflat_decay.csv"))?;
    ctx.detail("verification", v);
    let schwarz = RationalSchwarz::new(sol.parts().map().clone())?;
    let (inner, outer) = if *sol.parts().map() == RationalMap::identity() {
        (0.55, 0.75)
    } else {
        (0.3, 0.5)
    };
    let probes: Vec<Complex64> = annulus_probes(inner, outer)
        .into_iter()
        .map(|zeta| sol.parts().map().eval(zeta))
        .collect::<Result<_, _>>()?;
    let stack = polyanalytic_split_from_u(sol, 2, &probes)?;
    let psi = psi_root_check(
        &PsiFunction::from_stack(&stack),
        |z| schwarz.eval(z).unwrap_or(Complex64::new(f64::NAN, 0.0)),
        1,
        1e-3,
    );
    ctx.below("psi_root_relative", psi.relative, psi.tolerance);
    Ok(())
}

fn arcflat_build(input: ArcflatInput, ctx: &mut Ctx) -> TaskResult {
    let map = match (&input.map, input.c) {
        (Some(m), None) => m.clone(),
        (None, Some(c)) => RationalMap::quadratic(Complex64::new(c[0], c[1])),
        (None, None) => RationalMap::identity(),
        (Some(_), Some(_)) => {
            return Err(Error::InvalidInput("give either map or c, not both".into()))
        }
    };
    let sol = match arcflat::build(map, input.arc, input.atoms) {
        Ok(s) => s,
        Err(Error::Assembly { reason, report }) => {
            if let Some(r) = &report {
                r.save_csv(&ctx.artifact("arcflat_decay.csv"))?;
                ctx.decay_checks(r);
            }
            ctx.failure(
                "assembly",
                &Error::Assembly {
                    reason,
                    report: None,
                },
            );
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let path = ctx.artifact("arcflat_solution.json");
    fs::write(&path, serde_json::to_string_pretty(&sol.to_stored())?)?;
    ctx.detail("diagnostics", sol.diagnostics());
    let v = arcflat::verify(&sol)?;
    verification_checks(&sol, &v, ctx)
}

fn arcflat_verify(stored: StoredSolution, ctx: &mut Ctx) -> TaskResult {
    let sol = ArcFlatSolution::from_stored(stored)?;
    let v = arcflat::verify(&sol)?;
    verification_checks(&sol, &v, ctx)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct X1Input {
    u: Option<RealPoly3>,
    profile: Option<PoissonProfile>,
    b: BVariant,
}

fn x1field(input: X1Input, ctx: &mut Ctx) -> TaskResult {
    let x1 = RealPoly3::var(0);
    if let Some(u) = input.u {
        let rep = x1_field(&u, input.profile.unwrap_or_default(), input.b)?;
        if flat3_check(&u) {
            ctx.exact("patch_identity", usize::from(!rep.patch_identity));
        }
        ctx.detail("flat3", &flat3_check(&u));
        ctx.detail("degenerate", &rep.degenerate);
        ctx.detail("hessian_rank", &rep.hessian_rank);
        ctx.detail("x1_identity_on_patch", &rep.x1_identity_on_patch);
        ctx.detail("w", &rep.decomposition.w.to_string());
        ctx.detail("v", &rep.decomposition.v.to_string());
        return Ok(());
    }
    let cubic = x1.pow(3);
    let rep = x1_field(
        &cubic,
        input.profile.unwrap_or(PoissonProfile::Canonical),
        input.b,
    )?;
    let half = rat(-3, 2);
    let expect_h = |i: usize, j: usize| match (i, j) {
        (0, 0) => RealPoly3::constant(rat(3, 1)),
        (a, b) if a == b => RealPoly3::constant(half.clone()),
        _ => RealPoly3::zero(),
    };
    let h_mismatch = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .filter(|&(i, j)| rep.hessian_w.entries[i][j] != expect_h(i, j))
        .count();
    ctx.exact("cubic_hessian_diag", h_mismatch);
    ctx.exact("cubic_nondegenerate", usize::from(rep.degenerate));
    let zero_on_patch = rep
        .field
        .as_ref()
        .is_some_and(|f| f.numerator.on_patch().is_zero());
    ctx.exact("cubic_x1_zero_on_patch", usize::from(!zero_on_patch));
    let gradient = gradient_identity_residual(&rep.decomposition)
        .iter()
        .filter(|p| !p.is_zero())
        .count();
    ctx.exact("cubic_gradient_identity", gradient);
    let second = &x1.pow(3) * &RealPoly3::var(1);
    let deg = x1_field(
        &second,
        input.profile.unwrap_or(PoissonProfile::Lexicographic),
        input.b,
    )?;
    ctx.exact("cubic_x2_degenerate", usize::from(!deg.degenerate));
    ctx.exact("cubic_x2_rank_two", usize::from(deg.hessian_rank != 2));
    ctx.detail("cubic_w", &rep.decomposition.w.to_string());
    ctx.detail("cubic_x2_w", &deg.decomposition.w.to_string());
    Ok(())
}

fn suite(ctx: &mut Ctx) {
    let parts: [(&str, Task, Value); 11] = [
        ("c1_c2.", Task::Factorize3d, Value::Null),
        ("c3.", Task::Almansi3, Value::Null),
        ("c4.", Task::X1field, Value::Null),
        ("c5.", Task::Almansi2, Value::Null),
        ("c6_c8.", Task::KernelVerify, Value::Null),
        ("c7_c8_disk.", Task::ArcflatBuild, Value::Null),
        (
            "c7_quadratic.",
            Task::ArcflatBuild,
            json!({"c": [0.3, 0.0]}),
        ),
        ("c9_ellipse.", Task::SchwarzEllipse, Value::Null),
        (
            "c9_circle.",
            Task::SchwarzEllipse,
            json!({"a": 1.0, "b": 1.0}),
        ),
        ("c10.", Task::Quadcheck, Value::Null),
        ("schwarz_rational.", Task::SchwarzRational, Value::Null),
    ];
    for (prefix, task, input) in parts {
        ctx.prefix = prefix.into();
        if let Err(e) = dispatch(task, &input, ctx) {
            ctx.record("input", Some(1.0), 0.0, Comparison::AtMost, Some(e.0));
        }
    }
    ctx.prefix.clear();
}

/// Writes `<out>/report.json`.
pub fn write_report(report: &RunReport, out: &Path) -> std::io::Result<PathBuf> {
    let path = out.join(REPORT_FILE);
    let mut text = serde_json::to_string_pretty(report).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

#[derive(Debug, Parser)]
#[command(
    name = "holmgren",
    version,
    about = "Constructions and checks for flat polyharmonic functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON input for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for the report and artifacts.
    #[arg(long, global = true, default_value = "holmgren-out")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Tolerance override, e.g. `--tol bilaplacian_max=2e-4`.
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Operator factorization and the harmonic reduction identities.
    Factorize3d,
    /// Almansi decompositions in two or three dimensions.
    Almansi {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
        dim: u8,
    },
    /// The explicit flat kernel on the unit disk.
    KernelVerify,
    Schwarz {
        #[command(subcommand)]
        kind: SchwarzKind,
    },
    /// Quadrature identities for the disk and a quadratic map.
    Quadcheck,
    Arcflat {
        #[command(subcommand)]
        action: ArcflatAction,
    },
    /// Hessian system of the 3D Almansi split on {x1 = 0}.
    X1field,
    /// Every acceptance criterion.
    Suite,
}

#[derive(Debug, Subcommand)]
pub enum SchwarzKind {
    Ellipse,
    Rational,
}

#[derive(Debug, Subcommand)]
pub enum ArcflatAction {
    Build,
    Verify,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v: f64 = value
        .parse()
        .map_err(|e| format!("tolerance {name}: {e}"))?;
    Ok((name.to_string(), v))
}

impl Cli {
    pub fn task(&self) -> Task {
        match &self.command {
            Command::Factorize3d => Task::Factorize3d,
            Command::Almansi { dim: 3 } => Task::Almansi3,
            Command::Almansi { .. } => Task::Almansi2,
            Command::KernelVerify => Task::KernelVerify,
            Command::Schwarz {
                kind: SchwarzKind::Ellipse,
            } => Task::SchwarzEllipse,
            Command::Schwarz {
                kind: SchwarzKind::Rational,
            } => Task::SchwarzRational,
            Command::Quadcheck => Task::Quadcheck,
            Command::Arcflat {
                action: ArcflatAction::Build,
            } => Task::ArcflatBuild,
            Command::Arcflat {
                action: ArcflatAction::Verify,
            } => Task::ArcflatVerify,
            Command::X1field => Task::X1field,
            Command::Suite => Task::Suite,
        }
    }

    pub fn into_config(self) -> Result<RunConfig, InvalidInput> {
        let input = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| InvalidInput(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| InvalidInput(format!("{}: {e}", p.display())))?
            }
            None => Value::Null,
        };
        Ok(RunConfig {
            subcommand: self.task(),
            input,
            out: self.out,
            tol: self.tol.into_iter().collect(),
            seed: self.seed,
        })
    }
}

/// Entry point shared by the binary: returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let config = match cli.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    if let Err(e) = write_report(&report, &config.out) {
        eprintln!("cannot write report: {e}");
        return 2;
    }
    for c in &report.checks {
        let measured = c
            .measured
            .map_or("noise-floor".to_string(), |m| format!("{m:e}"));
        println!(
            "{} {} measured={} tolerance={:e} ({:?})",
            if c.verdict { "PASS" } else { "FAIL" },
            c.name,
            measured,
            c.tolerance,
            c.comparison
        );
        if let Some(n) = &c.note {
            println!("    {n}");
        }
    }
    println!(
        "{} ({:.2}s)",
        if report.pass { "PASS" } else { "FAIL" },
        report.wall_time
    );
    report.exit_code()
}

//! Python bindings for `holmgren-core`.
//!
//! Structured results cross the boundary as JSON strings, so the Python
//! side only needs `json.loads`.

use std::f64::consts::PI;
use std::path::PathBuf;

use holmgren_core::almansi2d::{almansi_decompose, almansi_reconstruct};
use holmgren_core::arcflat::{self, ArcFlatSolution, ArcSpec, StoredSolution};
use holmgren_core::cli::{self, RunConfig, Task};
use holmgren_core::error::Error;
use holmgren_core::exact::Poly;
use holmgren_core::fieldlab::{
    flatness_decay, geometric_ladder, CubicFlatKernel, CurveArc, ScalarField2,
};
use holmgren_core::polyrat::RationalMap;
use holmgren_core::schwarz::{self as sw, EllipseSchwarz, EllipseSpec, RationalSchwarz};
use holmgren_core::trilap::{self, op_mul, OpMatrix3, PoissonProfile, RealPoly3};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::Json(_) | Error::Normalization(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

fn from_json<T: serde::de::DeserializeOwned>(s: &str) -> PyResult<T> {
    serde_json::from_str(s).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Ellipse with semi-axes `a >= b` and its algebraic Schwarz function.
#[pyclass(frozen)]
struct Ellipse {
    spec: EllipseSpec,
    schwarz: EllipseSchwarz,
}

#[pymethods]
impl Ellipse {
    #[new]
    fn new(a: f64, b: f64) -> PyResult<Self> {
        let spec = EllipseSpec::new(a, b).map_err(py_err)?;
        let schwarz = EllipseSchwarz::new(spec).map_err(py_err)?;
        Ok(Self { spec, schwarz })
    }

    #[getter]
    fn is_circle(&self) -> bool {
        self.spec.is_circle()
    }

    #[getter]
    fn focal(&self) -> f64 {
        self.spec.focal()
    }

    fn boundary_residual(&self) -> f64 {
        self.schwarz.boundary_residual()
    }

    #[pyo3(signature = (center, radius, steps = sw::DEFAULT_MONODROMY_STEPS))]
    fn monodromy(&self, center: Complex64, radius: f64, steps: usize) -> PyResult<f64> {
        Ok(sw::monodromy_probe(self.spec, center, radius, steps)
            .map_err(py_err)?
            .mismatch)
    }

    fn report(&self) -> PyResult<String> {
        to_json(&sw::ellipse_report(self.spec).map_err(py_err)?)
    }
}

/// Image of the unit disk under a rational conformal map.
#[pyclass(frozen)]
struct QuadratureDomain {
    map: RationalMap,
    schwarz: RationalSchwarz,
}

#[pymethods]
impl QuadratureDomain {
    /// φ(ζ) = ζ + cζ², univalent for |c| < 1/2.
    #[staticmethod]
    fn quadratic(c: Complex64) -> PyResult<Self> {
        Self::from_map(RationalMap::quadratic(c))
    }

    #[staticmethod]
    fn from_json(map_json: &str) -> PyResult<Self> {
        Self::from_map(from_json(map_json)?)
    }

    fn phi(&self, zeta: Complex64) -> PyResult<Complex64> {
        self.map.eval(zeta).map_err(py_err)
    }

    fn schwarz(&self, z: Complex64) -> PyResult<Complex64> {
        self.schwarz.eval(z).map_err(py_err)
    }

    #[pyo3(signature = (samples = 256))]
    fn boundary_residual(&self, samples: usize) -> PyResult<f64> {
        self.schwarz.boundary_residual(samples).map_err(py_err)
    }

    /// Quadrature nodes and weights as JSON, with the fit residual.
    #[pyo3(signature = (basis_degree = 4))]
    fn fit_quadrature(&self, basis_degree: u32) -> PyResult<(String, f64)> {
        let fit = sw::fit_quadrature(&self.map, basis_degree).map_err(py_err)?;
        Ok((to_json(&fit.data)?, fit.fit_residual))
    }

    fn meromorphy_report(&self) -> PyResult<String> {
        to_json(&sw::meromorphy_report(&self.map).map_err(py_err)?)
    }
}

impl QuadratureDomain {
    fn from_map(map: RationalMap) -> PyResult<Self> {
        let schwarz = RationalSchwarz::new(map.clone()).map_err(py_err)?;
        Ok(Self { map, schwarz })
    }
}

/// The explicit biharmonic kernel flat on the half circle facing `theta + π`.
#[pyclass(frozen)]
struct CubicKernel {
    inner: CubicFlatKernel,
    theta: f64,
}

#[pymethods]
impl CubicKernel {
    #[new]
    #[pyo3(signature = (theta = 0.0))]
    fn new(theta: f64) -> Self {
        Self {
            inner: CubicFlatKernel::new(theta),
            theta,
        }
    }

    fn __call__(&self, x: f64, y: f64) -> f64 {
        self.inner.eval(x, y)
    }

    /// Fitted decay exponents of u, ∂ₙu, ∂ₙ²u toward the flat arc.
    fn decay_exponents(&self) -> PyResult<Vec<Option<f64>>> {
        let arc = CurveArc::circle(
            [0.0, 0.0],
            1.0,
            self.theta + PI / 2.0,
            self.theta + 3.0 * PI / 2.0,
        );
        let ladder = geometric_ladder(arcflat::DECAY_T0, arcflat::DECAY_POINTS);
        let rep = flatness_decay(&self.inner, &arc, &ladder, 3).map_err(py_err)?;
        Ok(rep.exponents.to_vec())
    }
}

/// Biharmonic function flat to order three on a boundary arc of φ(𝔻).
#[pyclass(frozen)]
struct ArcFlat {
    sol: ArcFlatSolution,
}

#[pymethods]
impl ArcFlat {
    /// Builds on φ(ζ) = ζ + cζ² (c = 0 gives the disk) with the flat arc
    /// `theta0 < θ < theta1` of the unit circle.
    #[staticmethod]
    #[pyo3(signature = (c = Complex64::new(0.0, 0.0), theta0 = -0.75 * PI, theta1 = 0.75 * PI, atoms = arcflat::DEFAULT_ATOMS))]
    fn build(c: Complex64, theta0: f64, theta1: f64, atoms: usize) -> PyResult<Self> {
        let map = if c == Complex64::new(0.0, 0.0) {
            RationalMap::identity()
        } else {
            RationalMap::quadratic(c)
        };
        let arc = ArcSpec::new(theta0, theta1).map_err(py_err)?;
        Ok(Self {
            sol: arcflat::build(map, arc, atoms).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        let stored: StoredSolution = from_json(s)?;
        Ok(Self {
            sol: ArcFlatSolution::from_stored(stored).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.sol.to_stored())
    }

    fn __call__(&self, z: Complex64) -> PyResult<f64> {
        self.sol.value(z).map_err(py_err)
    }

    /// Δu at the preimage point ζ.
    fn laplacian(&self, zeta: Complex64) -> f64 {
        self.sol.parts().laplacian(zeta)
    }

    fn diagnostics(&self) -> PyResult<String> {
        to_json(self.sol.diagnostics())
    }

    fn verify(&self) -> PyResult<String> {
        to_json(&arcflat::verify(&self.sol).map_err(py_err)?)
    }
}

/// Harmonic parts u₁..u_N of an N-harmonic polynomial given as JSON.
#[pyfunction]
fn almansi2(poly_json: &str, n: usize) -> PyResult<Vec<String>> {
    let u: Poly<2> = from_json(poly_json)?;
    let stack = almansi_decompose(&u, n).map_err(py_err)?;
    debug_assert_eq!(almansi_reconstruct(&stack), u);
    stack.parts().iter().map(to_json).collect()
}

/// Harmonic pair (v, w) with u = v + x₁w for a biharmonic polynomial.
#[pyfunction]
#[pyo3(signature = (poly_json, canonical = false))]
fn almansi3(poly_json: &str, canonical: bool) -> PyResult<(String, String)> {
    let u: RealPoly3 = from_json(poly_json)?;
    let profile = if canonical {
        PoissonProfile::Canonical
    } else {
        PoissonProfile::Lexicographic
    };
    let d = trilap::almansi3(&u, profile).map_err(py_err)?;
    Ok((to_json(&d.v)?, to_json(&d.w)?))
}

/// Both operator products, rendered as text.
#[pyfunction]
fn factorize3d() -> (String, String) {
    let l = OpMatrix3::l();
    let lp = OpMatrix3::l_prime();
    (op_mul(&l, &lp).to_string(), op_mul(&lp, &l).to_string())
}

/// Runs a CLI task in-process and returns the report JSON.
#[pyfunction]
#[pyo3(signature = (subcommand, input_json = "null", out = "holmgren-out", seed = 0))]
fn run(subcommand: &str, input_json: &str, out: &str, seed: u64) -> PyResult<String> {
    let task: Task = from_json(&format!("\"{subcommand}\""))?;
    let config = RunConfig {
        subcommand: task,
        input: from_json(input_json)?,
        out: PathBuf::from(out),
        tol: Default::default(),
        seed,
    };
    let report = cli::run(&config).map_err(|e| PyValueError::new_err(e.to_string()))?;
    cli::write_report(&report, &config.out).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_json(&report)
}

#[pymodule]
fn holmgren(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Ellipse>()?;
    m.add_class::<QuadratureDomain>()?;
    m.add_class::<CubicKernel>()?;
    m.add_class::<ArcFlat>()?;
    m.add_function(wrap_pyfunction!(almansi2, m)?)?;
    m.add_function(wrap_pyfunction!(almansi3, m)?)?;
    m.add_function(wrap_pyfunction!(factorize3d, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}

use num_complex::Complex64;
use thiserror::Error;

use crate::fieldlab::DecayReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rational function evaluated at a pole: {0}")]
    PoleEvaluation(Complex64),

    #[error("root finder did not converge for polynomial {coefficients:?}")]
    RootFinding { coefficients: Vec<Complex64> },

    #[error("finite-difference stencil at ({x}, {y}) touches singular point ({sx}, {sy})")]
    Stencil { x: f64, y: f64, sx: f64, sy: f64 },

    #[error("jet order {0} exceeds the supported maximum of 4")]
    JetOrder(usize),

    #[error("input is not {n}-harmonic: the {n}-th power of the Laplacian is {residual}")]
    NotPolyharmonic { n: usize, residual: String },

    #[error("input is not biharmonic: bilaplacian is {0}")]
    NotBiharmonic(String),

    #[error("field is not polyanalytic of order {n}: residual {residual:e} at {point}")]
    NotPolyanalytic {
        n: usize,
        residual: f64,
        point: Complex64,
    },

    #[error("Schwarz function evaluated at a branch point {0}")]
    BranchPoint(Complex64),

    #[error("Schwarz function evaluated at its pole {0}")]
    SchwarzPole(Complex64),

    #[error("ellipse Schwarz closed form failed its boundary check: residual {0:e}")]
    SchwarzBoundary(f64),

    #[error("analytic continuation step too coarse at step {step}: jump {jump:e}")]
    Continuation { step: usize, jump: f64 },

    #[error("quadrature not resolved: {coarse} vs {fine} disagree by {diff:e}")]
    Resolution { coarse: f64, fine: f64, diff: f64 },

    #[error("conformal map must satisfy phi(0) = 0, got {0}")]
    Normalization(Complex64),

    #[error("measure constraint system has trivial nullspace (smallest singular value {0:e})")]
    Infeasible(f64),

    #[error("integration path passes within {distance:e} of singularity {point}")]
    Path { point: Complex64, distance: f64 },

    #[error("adaptive quadrature did not reach tolerance on [{a}, {b}]")]
    Quadrature { a: Complex64, b: Complex64 },

    #[error("pole of c(zeta) at {0} is not suppressed by the measure")]
    PoleSuppression(Complex64),

    #[error("inverse conformal map did not converge at {0}")]
    InverseMap(Complex64),

    #[error("arc-flat assembly failed: {reason}")]
    Assembly {
        reason: String,
        report: Option<Box<DecayReport>>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

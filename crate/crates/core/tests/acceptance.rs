//! Acceptance suite: one line per criterion, tolerances pinned below.
//!
//! Each criterion runs through the same entry point as the `holmgren`
//! binary, then every recorded check is compared against the tolerance
//! pinned here so that a drifting default cannot silently loosen a gate.

use std::process::ExitCode;
use std::time::Instant;

use holmgren_core::cli::{run, CheckRecord, Comparison, RunConfig, Task};
use serde_json::{json, Value};

struct Pinned {
    name: &'static str,
    tolerance: f64,
    comparison: Comparison,
}

const fn pin(name: &'static str, tolerance: f64, comparison: Comparison) -> Pinned {
    Pinned {
        name,
        tolerance,
        comparison,
    }
}

const EXACT: Comparison = Comparison::AtMost;

const DECAY: [Pinned; 3] = [
    pin("decay_u", 2.8, Comparison::AtLeast),
    pin("decay_dnu", 1.8, Comparison::AtLeast),
    pin("decay_dn2u", 0.8, Comparison::AtLeast),
];

struct Run {
    task: Task,
    input: Value,
    pins: Vec<Pinned>,
}

struct Criterion {
    id: u32,
    title: &'static str,
    runs: Vec<Run>,
    budget_secs: f64,
}

fn arcflat_pins() -> Vec<Pinned> {
    let mut p: Vec<Pinned> = DECAY.into_iter().collect();
    p.push(pin("constraint_residual", 1e-10, Comparison::Below));
    p.push(pin("path_independence", 1e-9, Comparison::Below));
    p.push(pin("nontriviality", 1e-8, Comparison::Above));
    p
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            id: 1,
            title: "bilaplacian factorization",
            runs: vec![Run {
                task: Task::Factorize3d,
                input: Value::Null,
                pins: vec![
                    pin("l_lprime_equals_bilaplacian", 0.0, EXACT),
                    pin("lprime_l_equals_bilaplacian", 0.0, EXACT),
                ],
            }],
            budget_secs: 1.0,
        },
        Criterion {
            id: 2,
            title: "harmonic reduction",
            runs: vec![Run {
                task: Task::Factorize3d,
                input: json!({"harmonic_count": 20, "harmonic_degree": 5}),
                pins: vec![
                    pin("reduction_symbolic", 0.0, EXACT),
                    pin("reduction_lifts", 0.0, EXACT),
                ],
            }],
            budget_secs: 5.0,
        },
        Criterion {
            id: 3,
            title: "3D Almansi decomposition",
            runs: vec![Run {
                task: Task::Almansi3,
                input: json!({"count": 50, "max_degree": 8}),
                pins: vec![
                    pin("reconstruction", 0.0, EXACT),
                    pin("harmonic_parts", 0.0, EXACT),
                ],
            }],
            budget_secs: 30.0,
        },
        Criterion {
            id: 4,
            title: "X1 patch identity",
            runs: vec![Run {
                task: Task::X1field,
                input: Value::Null,
                pins: vec![
                    pin("cubic_hessian_diag", 0.0, EXACT),
                    pin("cubic_nondegenerate", 0.0, EXACT),
                    pin("cubic_x1_zero_on_patch", 0.0, EXACT),
                    pin("cubic_gradient_identity", 0.0, EXACT),
                    pin("cubic_x2_degenerate", 0.0, EXACT),
                    pin("cubic_x2_rank_two", 0.0, EXACT),
                ],
            }],
            budget_secs: 5.0,
        },
        Criterion {
            id: 5,
            title: "2D Almansi round trip",
            runs: vec![Run {
                task: Task::Almansi2,
                input: json!({"count": 50, "max_n": 4, "max_degree": 12}),
                pins: vec![
                    pin("reconstruction", 0.0, EXACT),
                    pin("harmonic_parts", 0.0, EXACT),
                ],
            }],
            budget_secs: 30.0,
        },
        Criterion {
            id: 6,
            title: "explicit kernel",
            runs: vec![Run {
                task: Task::KernelVerify,
                input: json!({"grid": 20, "step": 1e-2}),
                pins: std::iter::once(pin("bilaplacian_max", 1e-4, Comparison::Below))
                    .chain(DECAY)
                    .collect(),
            }],
            budget_secs: 10.0,
        },
        Criterion {
            id: 7,
            title: "arc-flat pipeline, disk and quadratic map",
            runs: vec![
                Run {
                    task: Task::ArcflatBuild,
                    input: json!({"arc": {"theta0": -0.75 * std::f64::consts::PI, "theta1": 0.75 * std::f64::consts::PI}}),
                    pins: arcflat_pins(),
                },
                Run {
                    task: Task::ArcflatBuild,
                    input: json!({"c": [0.3, 0.0]}),
                    pins: arcflat_pins(),
                },
            ],
            budget_secs: 120.0,
        },
        Criterion {
            id: 8,
            title: "U1 + S U2 = 0 with S = 1/z",
            runs: vec![
                Run {
                    task: Task::ArcflatBuild,
                    input: Value::Null,
                    pins: vec![pin("psi_root_relative", 1e-3, Comparison::Below)],
                },
                Run {
                    task: Task::KernelVerify,
                    input: Value::Null,
                    pins: vec![pin("psi_root_relative", 1e-3, Comparison::Below)],
                },
            ],
            budget_secs: 20.0,
        },
        Criterion {
            id: 9,
            title: "ellipse obstruction",
            runs: vec![
                Run {
                    task: Task::SchwarzEllipse,
                    input: json!({"a": 2.0, "b": 1.0}),
                    pins: vec![
                        pin("boundary_residual", 1e-10, Comparison::Below),
                        pin("monodromy_focus", 0.1, Comparison::Above),
                    ],
                },
                Run {
                    task: Task::SchwarzEllipse,
                    input: json!({"a": 1.0, "b": 1.0}),
                    pins: vec![
                        pin("boundary_residual", 1e-10, Comparison::Below),
                        pin("monodromy_max", 1e-9, Comparison::Below),
                    ],
                },
            ],
            budget_secs: 10.0,
        },
        Criterion {
            id: 10,
            title: "quadrature identities",
            runs: vec![Run {
                task: Task::Quadcheck,
                input: json!({"c": [0.3, 0.0]}),
                pins: vec![
                    pin("disk_mean_value", 1e-8, Comparison::Below),
                    pin("fitted_identity", 1e-6, Comparison::Below),
                ],
            }],
            budget_secs: 30.0,
        },
    ]
}

fn holds(p: &Pinned, c: &CheckRecord) -> bool {
    let m = match c.measured {
        Some(m) => m,
        None => return p.comparison == Comparison::AtLeast,
    };
    match p.comparison {
        Comparison::Below => m < p.tolerance,
        Comparison::Above => m > p.tolerance,
        Comparison::AtLeast => m >= p.tolerance - 1e-12,
        Comparison::AtMost => m <= p.tolerance,
    }
}

fn fmt_measured(c: &CheckRecord) -> String {
    c.measured
        .map_or("noise-floor".into(), |m| format!("{m:.3e}"))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut all = true;
    for crit in criteria() {
        let start = Instant::now();
        let mut ok = true;
        let mut parts = Vec::new();
        for (k, r) in crit.runs.iter().enumerate() {
            let config = RunConfig {
                subcommand: r.task,
                input: r.input.clone(),
                out: dir.path().join(format!("c{}_{k}", crit.id)),
                tol: Default::default(),
                seed: 0,
            };
            let report = match run(&config) {
                Ok(rep) => rep,
                Err(e) => {
                    ok = false;
                    parts.push(format!("rejected: {e}"));
                    continue;
                }
            };
            for c in report
                .checks
                .iter()
                .filter(|c| c.note.is_some() && c.measured == Some(1.0))
            {
                ok = false;
                parts.push(format!(
                    "{}: {}",
                    c.name,
                    c.note.as_deref().unwrap_or_default()
                ));
            }
            for p in &r.pins {
                match report.checks.iter().find(|c| c.name == p.name) {
                    Some(c) => {
                        let pass = holds(p, c) && c.comparison == p.comparison;
                        ok &= pass;
                        parts.push(format!(
                            "{}={} ({:?} {:e})",
                            p.name,
                            fmt_measured(c),
                            p.comparison,
                            p.tolerance
                        ));
                    }
                    None => {
                        ok = false;
                        parts.push(format!("{} missing", p.name));
                    }
                }
            }
        }
        let secs = start.elapsed().as_secs_f64();
        let in_budget = secs < crit.budget_secs;
        ok &= in_budget;
        all &= ok;
        println!(
            "[{}] criterion {:>2} {}: {} | {:.2}s (budget {}s)",
            if ok { "PASS" } else { "FAIL" },
            crit.id,
            crit.title,
            parts.join(", "),
            secs,
            crit.budget_secs
        );
    }
    println!(
        "acceptance: {}",
        if all { "all criteria pass" } else { "FAILED" }
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

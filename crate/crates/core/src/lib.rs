//! Universal first-order methods for composite convex (and nonconvex smooth) minimization,
//! together with the global curvature bound that predicts and audits their complexity.
//!
//! * [`curvature`] — the bound `μ̂(t)`, its integral `σ̂`, gauges and an empirical estimator.
//! * [`problems`] — composite problems `f + Ψ`, prox geometry and a catalog of instances.
//! * [`mappings`] — closed-form prox subproblems, gradient and Bregman mappings.
//! * [`solvers`] — GGM, PGM, DGM and UFGM with doubling line searches and per-iteration traces.
//! * [`harness`] — complexity bounds, trace verification and benchmark sweeps.

// `!(x > 0.0)` is how NaN gets rejected throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mappings;
pub mod problems;
pub mod solvers;

pub use curvature::{CurvatureKind, CurvatureModel, EmpiricalCurve, GaugeConfig};
pub use error::{Error, Result};
pub use linalg::Metric;
pub use mappings::MappingResult;
pub use problems::{CompositeProblem, ProxGeometry, ProxKind, PsiSpec, QSet};
pub use harness::{BoundMethod, BoundReport, Violation};
pub use solvers::{Method, RunReport, SolverConfig, TerminationReason, Trace};

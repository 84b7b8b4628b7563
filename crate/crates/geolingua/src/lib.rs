//! GeoLingua: a formal language and solver toolchain for plane-geometry
//! diagram generation.
//!
//! The pipeline turns a GeoLingua program (or, with an LLM endpoint, a
//! natural-language description) into precise point coordinates and a
//! vector diagram:
//!
//! 1. [`parse`] — text/JSON program forms, canonical serialization.
//! 2. [`validate`] — semantic checks producing diagnostics as data; also
//!    the predicate behind the autoformalization filter.
//! 3. [`compile`] — lowering into a [`scene::Scene`]: free parameters,
//!    dependent-point resolvers in topological order, scalar constraints.
//! 4. [`solver`] — seeded Monte Carlo search minimizing the worst
//!    constraint deviation.
//! 5. [`eval`] / [`metrics`] — per-constraint scores in `[0,1]` and the
//!    aggregate LCI/ADI indices.
//! 6. [`render`] — adaptive-canvas SVG output.
//! 7. [`formalize`] — chat-endpoint autoformalization with a three-attempt
//!    validation filter.
//!
//! Determinism is a design rule: identical inputs and seeds give
//! byte-identical artifacts, independent of thread count.

pub mod artifacts;
pub mod ast;
pub mod compile;
pub mod eval;
pub mod formalize;
pub mod geometry;
pub mod metrics;
pub mod parse;
pub mod render;
pub mod scene;
pub mod solver;
pub mod validate;

pub use ast::{FormalProgram, Head, Section, Statement};
pub use compile::{compile, CompileError};
pub use eval::{evaluate, Loss, ScoreVector};
pub use formalize::{build_prompt, formalize, FormalizationOutcome, PromptTemplate};
pub use metrics::{compute_adi, compute_lci, report, EvalReport};
pub use parse::{parse_json, parse_text, serialize, ParseError};
pub use render::{adaptive_canvas, render_svg, CanvasSpec, Diagram, RenderError, RenderOptions};
pub use scene::{resolve_dependents, topo_order, Assignment, Scene};
pub use solver::{initialize, perturb, solve, solve_with_jobs, SolveResult, SolverConfig};
pub use validate::{validate, ValidationReport};

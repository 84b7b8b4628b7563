//! Monte Carlo coordinate solver.
//!
//! Each restart starts from a fresh random configuration and runs up to `T`
//! outer iterations. An outer iteration samples `Q` candidate perturbations
//! of the current state, fully re-resolves dependent points for every
//! candidate, and keeps the strictly best one; the outer loop commits it and
//! updates the global best. The search stops early once the loss falls to
//! the tolerance. The perturbation scale anneals linearly from
//! `sigma_initial` to `sigma_final` (as fractions of the canvas span), which
//! trades global exploration early for local refinement late.
//!
//! Runs are deterministic: every restart draws from its own counter-based
//! RNG stream derived from (seed, restart index), and the merge across
//! restarts picks the lowest loss with ties broken by restart index, so
//! results do not depend on whether restarts run sequentially or in
//! parallel.

use crate::eval::{self, Loss, ScoreVector};
use crate::geometry::Point;
use crate::scene::{
    resolve_dependents_into, Assignment, InitHint, ParamKind, Scene, CANVAS_SPAN,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::io::Write;
use std::time::{Duration, Instant};

/// Solver hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Loss tolerance for convergence.
    pub alpha: f64,
    /// Inner-loop candidates per outer iteration (Q).
    pub inner_iterations: usize,
    /// Outer iterations per restart (T).
    pub outer_iterations: usize,
    /// Independent restarts (R). 1 disables restarting.
    pub restarts: usize,
    /// Initial perturbation scale, as a fraction of the canvas span.
    pub sigma_initial: f64,
    /// Final perturbation scale, as a fraction of the canvas span.
    pub sigma_final: f64,
    pub seed: u64,
    /// Optional wall-clock cap per solve call. Using it trades determinism
    /// for latency; leave `None` for reproducible runs.
    pub time_budget: Option<Duration>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha: 0.05,
            inner_iterations: 1000,
            outer_iterations: 1000,
            restarts: 3,
            sigma_initial: 0.10,
            sigma_final: 0.005,
            seed: 42,
            time_budget: None,
        }
    }
}

impl SolverConfig {
    fn check(&self) {
        assert!(self.alpha > 0.0 && self.alpha < 1.0, "alpha must lie in (0,1)");
        assert!(self.inner_iterations >= 1, "inner_iterations must be >= 1");
        assert!(self.outer_iterations >= 1, "outer_iterations must be >= 1");
        assert!(self.restarts >= 1, "restarts must be >= 1");
        assert!(
            self.sigma_final <= self.sigma_initial,
            "sigma_final must not exceed sigma_initial"
        );
    }
}

/// Run statistics. `wall_time` is the only non-deterministic field and is
/// never serialized into solution artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct Telemetry {
    /// Outer iterations executed, per restart.
    pub outer_iterations: Vec<usize>,
    /// Total constraint-set evaluations across all restarts.
    pub evaluations: u64,
    pub wall_time: Duration,
    pub winning_restart: usize,
    /// Per-outer-iteration global-best loss of the winning restart,
    /// starting with the initial configuration's loss.
    pub trace: Vec<f64>,
}

/// Best configuration found by [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub assignment: Assignment,
    /// Resolved coordinates for every scene point.
    pub coords: Vec<Point>,
    pub degenerate: Vec<bool>,
    /// Loss recomputed from `assignment`; equals the tracked best.
    pub final_loss: f64,
    pub scores: ScoreVector,
    pub converged: bool,
    pub alpha: f64,
    pub telemetry: Telemetry,
}

/// Draw a fresh random assignment. Shape-template vertices start on a ring
/// around the canvas center, circle centers near the center, everything else
/// uniform over the canvas; scalars are uniform in their range.
pub fn initialize(scene: &Scene, rng: &mut impl Rng) -> Assignment {
    let jitter = Normal::new(0.0, 2.0).expect("valid normal");
    let mut values = Vec::with_capacity(scene.n_slots);
    for param in &scene.params {
        match param.kind {
            ParamKind::Point { .. } => {
                let center = CANVAS_SPAN / 2.0;
                let (x, y) = match param.hint {
                    InitHint::Ring(angle_deg) => {
                        let dir = crate::geometry::dir_deg(angle_deg);
                        (
                            center + 30.0 * dir.x + jitter.sample(rng),
                            center + 30.0 * dir.y + jitter.sample(rng),
                        )
                    }
                    InitHint::Center => (
                        center + 2.5 * jitter.sample(rng),
                        center + 2.5 * jitter.sample(rng),
                    ),
                    InitHint::None => (
                        rng.random_range(0.0..CANVAS_SPAN),
                        rng.random_range(0.0..CANVAS_SPAN),
                    ),
                };
                values.push(x.clamp(0.0, CANVAS_SPAN));
                values.push(y.clamp(0.0, CANVAS_SPAN));
            }
            ParamKind::Scalar { lo, hi, .. } => {
                if lo == hi {
                    values.push(lo);
                } else {
                    values.push(rng.random_range(lo..hi));
                }
            }
        }
    }
    Assignment { values }
}

/// Wrap an angle in degrees into [0, 360).
pub fn wrap_angle(deg: f64) -> f64 {
    deg.rem_euclid(360.0)
}

fn perturb_into(
    scene: &Scene,
    src: &Assignment,
    dst: &mut Assignment,
    sigma: f64,
    rng: &mut impl Rng,
) {
    dst.values.clear();
    dst.values.extend_from_slice(&src.values);
    let point_noise = Normal::new(0.0, sigma).expect("valid normal");
    let mut slot = 0;
    for param in &scene.params {
        match param.kind {
            ParamKind::Point { .. } => {
                dst.values[slot] += point_noise.sample(rng);
                dst.values[slot + 1] += point_noise.sample(rng);
                slot += 2;
            }
            ParamKind::Scalar { role, lo, hi } => {
                if lo < hi {
                    let scale = sigma / CANVAS_SPAN * (hi - lo);
                    let noise = Normal::new(0.0, scale).expect("valid normal").sample(rng);
                    let v = dst.values[slot] + noise;
                    dst.values[slot] = if role.wraps() {
                        wrap_angle(v)
                    } else {
                        v.clamp(lo, hi)
                    };
                }
                slot += 1;
            }
        }
    }
}

/// Gaussian perturbation of every free parameter. Point coordinates receive
/// zero-mean noise with standard deviation `sigma` (canvas units); scalars
/// receive noise scaled to their range, then wrap (angles) or clamp. The
/// input is left unmodified.
pub fn perturb(scene: &Scene, assignment: &Assignment, sigma: f64, rng: &mut impl Rng) -> Assignment {
    let mut out = Assignment { values: Vec::new() };
    perturb_into(scene, assignment, &mut out, sigma, rng);
    out
}

struct RestartOutcome {
    assignment: Assignment,
    loss: f64,
    trace: Vec<f64>,
    outer_iterations: usize,
    evaluations: u64,
}

fn run_restart(
    scene: &Scene,
    config: &SolverConfig,
    restart: usize,
    deadline: Option<Instant>,
) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);

    let mut coords: Vec<Point> = Vec::new();
    let mut degenerate: Vec<bool> = Vec::new();
    let mut evaluations = 0u64;
    let eval_assignment = |a: &Assignment, coords: &mut Vec<Point>, degenerate: &mut Vec<bool>, evaluations: &mut u64| {
        resolve_dependents_into(scene, a, coords, degenerate);
        *evaluations += 1;
        eval::evaluate_loss(scene, coords, degenerate)
    };

    let initial = initialize(scene, &mut rng);
    let initial_loss = eval_assignment(&initial, &mut coords, &mut degenerate, &mut evaluations);

    let mut global = initial.clone();
    let mut global_loss = initial_loss;
    let mut trace = vec![global_loss];

    let mut outer_state = initial;
    let mut outer_loss = initial_loss;
    let mut candidate = Assignment { values: Vec::new() };
    let mut local_best = Assignment { values: Vec::new() };

    let t_max = config.outer_iterations;
    let mut t = 0;
    while t < t_max && global_loss > config.alpha {
        if let Some(deadline) = deadline {
            if Instant::now() >= deadline {
                break;
            }
        }
        let frac = if t_max > 1 { t as f64 / (t_max - 1) as f64 } else { 0.0 };
        let sigma =
            CANVAS_SPAN * (config.sigma_initial + (config.sigma_final - config.sigma_initial) * frac);

        let mut local_loss = outer_loss;
        let mut improved = false;
        for _ in 0..config.inner_iterations {
            perturb_into(scene, &outer_state, &mut candidate, sigma, &mut rng);
            let loss = eval_assignment(&candidate, &mut coords, &mut degenerate, &mut evaluations);
            if loss < local_loss {
                local_loss = loss;
                local_best.values.clear();
                local_best.values.extend_from_slice(&candidate.values);
                improved = true;
            }
        }
        if improved {
            std::mem::swap(&mut outer_state, &mut local_best);
            outer_loss = local_loss;
        }
        if outer_loss < global_loss {
            global_loss = outer_loss;
            global = outer_state.clone();
        }
        trace.push(global_loss);
        t += 1;
    }

    RestartOutcome {
        assignment: global,
        loss: global_loss,
        trace,
        outer_iterations: t,
        evaluations,
    }
}

/// Solve with restarts executed sequentially.
pub fn solve(scene: &Scene, config: &SolverConfig) -> SolveResult {
    solve_with_jobs(scene, config, 1)
}

/// Solve with up to `jobs` restarts in flight at once. The result is
/// bit-identical to the sequential run for any `jobs`.
pub fn solve_with_jobs(scene: &Scene, config: &SolverConfig, jobs: usize) -> SolveResult {
    config.check();
    let start = Instant::now();
    let deadline = config.time_budget.map(|b| start + b);

    let outcomes: Vec<RestartOutcome> = if jobs <= 1 || config.restarts == 1 {
        (0..config.restarts)
            .map(|r| run_restart(scene, config, r, deadline))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.min(config.restarts))
            .build()
            .expect("thread pool");
        pool.install(|| {
            (0..config.restarts)
                .into_par_iter()
                .map(|r| run_restart(scene, config, r, deadline))
                .collect()
        })
    };

    let mut winner = 0;
    for (i, outcome) in outcomes.iter().enumerate() {
        if outcome.loss < outcomes[winner].loss {
            winner = i;
        }
    }
    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let outer_iterations = outcomes.iter().map(|o| o.outer_iterations).collect();
    let best = &outcomes[winner];

    // Recompute the final state from the winning assignment so the reported
    // loss and scores are reproducible from the artifact alone.
    let (coords, degenerate) = crate::scene::resolve_dependents(scene, &best.assignment);
    let (scores, loss) = eval::evaluate(scene, &coords, &degenerate);
    debug_assert!((loss.value - best.loss).abs() < 1e-12);

    SolveResult {
        assignment: best.assignment.clone(),
        coords,
        degenerate,
        final_loss: loss.value,
        converged: loss.value <= config.alpha,
        alpha: config.alpha,
        scores,
        telemetry: Telemetry {
            outer_iterations,
            evaluations,
            wall_time: start.elapsed(),
            winning_restart: winner,
            trace: best.trace.clone(),
        },
    }
}

impl SolveResult {
    /// Worst-scoring constraint first.
    pub fn worst_constraint(&self) -> Option<Loss> {
        Some(Loss::from_scores(&self.scores))
    }

    /// Resolved coordinates keyed by point name, sorted.
    pub fn point_coords(&self, scene: &Scene) -> std::collections::BTreeMap<String, (f64, f64)> {
        scene
            .point_names
            .iter()
            .zip(&self.coords)
            .map(|(name, p)| (name.clone(), (p.x, p.y)))
            .collect()
    }
}

/// Write a loss trace as CSV (`iteration,best_loss`).
pub fn write_trace_csv<W: Write>(mut w: W, trace: &[f64]) -> std::io::Result<()> {
    writeln!(w, "iteration,best_loss")?;
    for (i, loss) in trace.iter().enumerate() {
        writeln!(w, "{i},{loss}")?;
    }
    Ok(())
}

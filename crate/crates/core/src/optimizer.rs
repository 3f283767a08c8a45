//! Spectral-norm minimization of consensus weights.
//!
//! Both problems minimize `f(w) = ||P(w) - (1/M) 11^T||_2` over per-edge
//! weights `w`, where `P(w) = I - B diag(w) B^T` is symmetric with unit row
//! sums and supported on the graph for every `w`:
//!
//! * `fdla` leaves `w` unconstrained (entries of `P` may go negative);
//! * `fmmc` additionally requires `P >= 0`, i.e. `w >= 0` and, per vertex,
//!   a total incident weight of at most 1.
//!
//! `f` is convex but nonsmooth. A subgradient is available directly from an
//! extreme eigenpair of `P(w) - (1/M) 11^T`: if `u` is a unit eigenvector of
//! the binding extreme eigenvalue, the component for edge `l = (i, j)` is
//! `-(u_i - u_j)^2` when the largest eigenvalue binds and `+(u_i - u_j)^2`
//! when the smallest binds. The solver iterates subgradient steps from the
//! (always feasible) maximum-degree weights, projecting onto the `fmmc`
//! polytope with Dykstra's alternating projections when constrained.
//!
//! The default step rule is a Polyak-type step against a shrinking target
//! level: step `(f(w) - (f_best - delta)) / ||g||^2`, halving `delta`
//! whenever no significant progress is made for `patience` iterations. These
//! objectives have sharp minima (the map from `w` to `P(w)` is injective),
//! where this rule converges geometrically; the classic `a/sqrt(t)` rule is
//! also available but stalls near optima — its best-iterate error decays like
//! `1/sqrt(t)`, far short of the reproduction tolerances here.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::matrix::Matrix;
use crate::spectral;
use crate::weights::{self, WeightMatrix, WeightMethod};
use crate::{Error, Result};

/// Step-size schedule for the subgradient iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Polyak step toward `f_best - delta`, with `delta` scaled by `shrink`
    /// after `patience` iterations without significant progress.
    AdaptiveTarget { shrink: f64, patience: usize },
    /// Classic diminishing step `scale / sqrt(t)`.
    DiminishingSqrt { scale: f64 },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::AdaptiveTarget { shrink: 0.5, patience: 60 }
    }
}

/// Solver configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Iteration budget.
    pub max_iters: usize,
    /// Target suboptimality gap; the adaptive rule stops once its shrinking
    /// gap estimate falls below this.
    pub tol: f64,
    pub step_rule: StepRule,
    /// Record the best-so-far objective at every iteration.
    pub record_trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 50_000,
            tol: 1e-9,
            step_rule: StepRule::default(),
            record_trace: false,
        }
    }
}

/// Outcome of a solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub weights: WeightMatrix,
    /// `(iteration, best objective so far)` pairs when tracing was requested;
    /// non-increasing in the objective.
    pub trace: Option<Vec<(usize, f64)>>,
    pub iterations: usize,
    /// Best achieved convergence factor; equals `weights.rho()`.
    pub best_objective: f64,
    /// False when the iteration budget ran out before the stopping rule.
    pub converged: bool,
}

/// Objective `max(lambda_max, -lambda_min)` of `P(w) - (1/M) 11^T` and one
/// subgradient with respect to the edge weights.
///
/// When both extremes bind within `1e-12` the largest-eigenvalue branch is
/// used, and eigenvector ties are resolved by the deterministic Jacobi
/// ordering, so the result is a pure function of `(g, w)`.
pub fn objective_and_subgradient(g: &Graph, w: &[f64]) -> Result<(f64, Vec<f64>)> {
    if w.len() != g.edge_count() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} edge weights", g.edge_count()),
            got: format!("{}", w.len()),
        });
    }
    let a = deviation_matrix(g, w);
    let spectrum = spectral::sym_eigs(&a, true)?;
    let m = g.vertex_count();
    let lambda_max = spectrum.largest();
    let lambda_min = spectrum.smallest();
    let value = lambda_max.max(-lambda_min);
    let min_binds = -lambda_min > lambda_max + 1e-12;
    let column = if min_binds { m - 1 } else { 0 };
    let sign = if min_binds { 1.0 } else { -1.0 };
    let u = spectrum.vector(column).expect("vectors were requested");
    let grad = g
        .edges()
        .iter()
        .map(|&(i, j)| {
            let d = u[i] - u[j];
            sign * d * d
        })
        .collect();
    Ok((value, grad))
}

/// `P(w) - (1/M) 11^T`, assembled directly from the edge weights.
fn deviation_matrix(g: &Graph, w: &[f64]) -> Matrix {
    let m = g.vertex_count();
    let uniform = 1.0 / m as f64;
    let mut a = Matrix::from_fn(m, m, |i, j| if i == j { 1.0 - uniform } else { -uniform });
    for (&(i, j), &wl) in g.edges().iter().zip(w) {
        a[(i, j)] += wl;
        a[(j, i)] += wl;
        a[(i, i)] -= wl;
        a[(j, j)] -= wl;
    }
    a
}

/// Euclidean projection onto the `fmmc` feasible set
/// `{w >= 0} ∩ {sum of weights incident to i <= 1 for every vertex i}`.
///
/// Dykstra's alternating projections over the `|V| + 1` pieces (one
/// half-space per vertex, then the nonnegative orthant), iterated until the
/// per-cycle movement drops below `1e-12` or 500 cycles. Keeping the orthant
/// last makes the returned point exactly nonnegative.
pub fn project_feasible(g: &Graph, w: &[f64]) -> Vec<f64> {
    let m = g.vertex_count();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (l, &(i, j)) in g.edges().iter().enumerate() {
        incident[i].push(l);
        incident[j].push(l);
    }

    let mut x = w.to_vec();
    // Dykstra corrections: per-vertex ones live on the incident edges only.
    let mut vertex_corr: Vec<Vec<f64>> = incident.iter().map(|e| vec![0.0; e.len()]).collect();
    let mut orthant_corr = vec![0.0; x.len()];

    for _cycle in 0..500 {
        let before = x.clone();
        for (v, edges) in incident.iter().enumerate() {
            if edges.is_empty() {
                continue;
            }
            let corr = &mut vertex_corr[v];
            for (slot, &l) in edges.iter().enumerate() {
                x[l] += corr[slot];
            }
            let total: f64 = edges.iter().map(|&l| x[l]).sum();
            let shift = if total > 1.0 { (total - 1.0) / edges.len() as f64 } else { 0.0 };
            for (slot, &l) in edges.iter().enumerate() {
                let y = x[l];
                x[l] = y - shift;
                corr[slot] = shift;
            }
        }
        for (l, corr) in orthant_corr.iter_mut().enumerate() {
            let y = x[l] + *corr;
            x[l] = y.max(0.0);
            *corr = y - x[l];
        }
        let movement = x
            .iter()
            .zip(&before)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max);
        if movement < 1e-12 {
            break;
        }
    }
    x
}

/// Minimizes the convergence factor without a sign constraint on `P`.
pub fn solve_fdla(g: &Graph, opts: &SolveOptions) -> Result<SolveResult> {
    solve(g, opts, WeightMethod::Fdla)
}

/// Minimizes the convergence factor subject to `P >= 0`.
pub fn solve_fmmc(g: &Graph, opts: &SolveOptions) -> Result<SolveResult> {
    solve(g, opts, WeightMethod::Fmmc)
}

fn solve(g: &Graph, opts: &SolveOptions, method: WeightMethod) -> Result<SolveResult> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if opts.max_iters < 1 || opts.tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "opts",
            message: "max_iters must be >= 1 and tol > 0".into(),
        });
    }
    let constrained = method == WeightMethod::Fmmc;

    // Maximum-degree weights are feasible for both problems and give a
    // finite starting objective.
    let mut w = weights::max_degree_weights(g)?.edge_weights();
    let (mut f, mut grad) = objective_and_subgradient(g, &w)?;
    let mut best_f = f;
    let mut best_w = w.clone();

    let mut trace = opts.record_trace.then(|| vec![(0usize, best_f)]);
    let mut delta = (0.25 * f).max(opts.tol);
    let mut stalled = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;

    for t in 1..=opts.max_iters {
        iterations = t;
        let grad_norm2: f64 = grad.iter().map(|v| v * v).sum();
        if grad_norm2 <= 1e-24 {
            // Zero subgradient: w is a minimizer.
            converged = true;
            break;
        }
        let step = match opts.step_rule {
            StepRule::DiminishingSqrt { scale } => scale / libm::sqrt(t as f64),
            StepRule::AdaptiveTarget { .. } => {
                let target = best_f - delta;
                let raw = (f - target) / grad_norm2;
                // Cap the displacement; a near-flat subgradient would
                // otherwise launch the iterate far outside the region of
                // interest.
                raw.min(2.0 / libm::sqrt(grad_norm2))
            }
        };
        for (wl, gl) in w.iter_mut().zip(&grad) {
            *wl -= step * gl;
        }
        if constrained {
            w = project_feasible(g, &w);
        }
        let (new_f, new_grad) = objective_and_subgradient(g, &w)?;
        f = new_f;
        grad = new_grad;

        let significant = f < best_f - 0.25 * delta;
        if f < best_f {
            best_f = f;
            best_w.copy_from_slice(&w);
        }
        match opts.step_rule {
            StepRule::AdaptiveTarget { shrink, patience } => {
                if significant {
                    stalled = 0;
                } else {
                    stalled += 1;
                    if stalled >= patience {
                        stalled = 0;
                        delta *= shrink;
                        if delta < opts.tol {
                            converged = true;
                        }
                    }
                }
            }
            StepRule::DiminishingSqrt { .. } => {
                if significant {
                    stalled = 0;
                } else {
                    stalled += 1;
                    // No gap estimate here; stop once progress at the tol
                    // scale has been absent for a long stretch.
                    if stalled >= 2_000 {
                        converged = true;
                    }
                }
                delta = (0.25 * best_f).max(opts.tol);
            }
        }
        if let Some(trace) = trace.as_mut() {
            trace.push((t, best_f));
        }
        if converged {
            break;
        }
    }

    let weights = WeightMatrix::from_edge_weights(g, &best_w, method, None)?;
    debug_assert!(libm::fabs(weights.rho() - best_f) <= 1e-9);
    Ok(SolveResult { weights, trace, iterations, best_objective: best_f, converged })
}

//! Closed-form consensus weight constructions.
//!
//! Every method produces a symmetric doubly stochastic matrix `P` supported
//! on the graph (plus the diagonal), stored together with its provenance and
//! the achieved convergence metrics:
//!
//! * `kappa`: `P = I - (kappa / d_max) L`, the Laplacian step-size rule.
//! * `best_constant`: `P = I - alpha L` with the spectrally optimal constant
//!   `alpha = 2 / (lambda_1(L) + lambda_{M-1}(L))`.
//! * `max_degree`: the constant rule with `alpha = 1 / d_max`.
//! * `local_degree`: `P_ij = 1 / max(d_i, d_j)` per edge.
//!
//! The `fmmc` and `fdla` tags are produced by the solvers in
//! [`crate::optimizer`]; `fdla` is the only method allowed to carry negative
//! entries.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::matrix::Matrix;
use crate::spectral::{self, ConvergenceTime};
use crate::{Error, Result};

/// Violations at or below this level pass validation.
pub const VALIDATION_TOL: f64 = 1e-8;

/// Provenance tag for a weight matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightMethod {
    Kappa,
    BestConstant,
    MaxDegree,
    LocalDegree,
    Fmmc,
    Fdla,
}

impl WeightMethod {
    pub fn tag(self) -> &'static str {
        match self {
            WeightMethod::Kappa => "kappa",
            WeightMethod::BestConstant => "best_constant",
            WeightMethod::MaxDegree => "max_degree",
            WeightMethod::LocalDegree => "local_degree",
            WeightMethod::Fmmc => "fmmc",
            WeightMethod::Fdla => "fdla",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "kappa" => WeightMethod::Kappa,
            "best_constant" => WeightMethod::BestConstant,
            "max_degree" => WeightMethod::MaxDegree,
            "local_degree" => WeightMethod::LocalDegree,
            "fmmc" => WeightMethod::Fmmc,
            "fdla" => WeightMethod::Fdla,
            _ => return None,
        })
    }

    /// Whether matrices from this method are guaranteed entrywise
    /// nonnegative. `fdla` drops the sign constraint by design, and the
    /// optimal constant of `best_constant` can exceed `1/d_max` (it does on
    /// the star), which drives high-degree diagonal entries negative.
    pub fn requires_nonnegative(self) -> bool {
        !matches!(self, WeightMethod::Fdla | WeightMethod::BestConstant)
    }
}

impl core::fmt::Display for WeightMethod {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Which sign constraint [`WeightMatrix::validate`] enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationMode {
    /// All entries must be nonnegative.
    NonNegative,
    /// Negative entries are allowed.
    Signed,
}

/// Worst-case violations of the weight matrix structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    /// max |P_ij - P_ji|
    pub symmetry: f64,
    /// max_i |sum_j P_ij - 1|
    pub row_sum: f64,
    /// max |P_ij| over non-edges (i != j)
    pub sparsity: f64,
    /// max(0, -min_ij P_ij); zero in signed mode
    pub negativity: f64,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.symmetry <= VALIDATION_TOL
            && self.row_sum <= VALIDATION_TOL
            && self.sparsity <= VALIDATION_TOL
            && self.negativity <= VALIDATION_TOL
    }

    pub fn worst(&self) -> f64 {
        self.symmetry.max(self.row_sum).max(self.sparsity).max(self.negativity)
    }
}

/// A consensus matrix with provenance and achieved convergence metrics.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    graph: Graph,
    matrix: Matrix,
    method: WeightMethod,
    param: Option<f64>,
    rho: f64,
    tau: ConvergenceTime,
}

impl WeightMatrix {
    fn build(graph: &Graph, matrix: Matrix, method: WeightMethod, param: Option<f64>) -> Result<Self> {
        let rho = spectral::convergence_factor(&matrix)?;
        let tau = spectral::convergence_time(rho);
        Ok(WeightMatrix { graph: graph.clone(), matrix, method, param, rho, tau })
    }

    /// Assembles `P = I - B diag(w) B^T` from per-edge weights.
    ///
    /// The parametrization is symmetric with unit row sums by construction
    /// and supported exactly on the graph: `P_ij = w_l` for edge `l = (i, j)`
    /// and `P_ii = 1 - sum of incident weights`.
    pub fn from_edge_weights(
        graph: &Graph,
        w: &[f64],
        method: WeightMethod,
        param: Option<f64>,
    ) -> Result<Self> {
        if w.len() != graph.edge_count() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} edge weights", graph.edge_count()),
                got: format!("{}", w.len()),
            });
        }
        let m = graph.vertex_count();
        let mut p = Matrix::identity(m);
        for (&(i, j), &wl) in graph.edges().iter().zip(w) {
            p[(i, j)] = wl;
            p[(j, i)] = wl;
            p[(i, i)] -= wl;
            p[(j, j)] -= wl;
        }
        Self::build(graph, p, method, param)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn method(&self) -> WeightMethod {
        self.method
    }

    /// Method parameter (`kappa` for the step-size rule, `alpha` for the
    /// constant rules); `None` for the optimizer outputs.
    pub fn param(&self) -> Option<f64> {
        self.param
    }

    /// Achieved convergence factor, computed at construction.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Achieved convergence time, computed at construction.
    pub fn tau(&self) -> ConvergenceTime {
        self.tau
    }

    /// Edge weights `w_l = P_ij` in canonical edge order.
    pub fn edge_weights(&self) -> Vec<f64> {
        self.graph.edges().iter().map(|&(i, j)| self.matrix[(i, j)]).collect()
    }

    pub fn validate(&self, mode: ValidationMode) -> ValidationReport {
        validate_matrix(&self.matrix, &self.graph, mode)
    }
}

/// Checks a candidate matrix against the weight structure of a graph.
pub fn validate_matrix(p: &Matrix, g: &Graph, mode: ValidationMode) -> ValidationReport {
    let m = g.vertex_count();
    let mut sparsity = 0.0f64;
    let mut negativity = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let v = p[(i, j)];
            if i != j && !g.has_edge(i, j) {
                sparsity = sparsity.max(libm::fabs(v));
            }
            if mode == ValidationMode::NonNegative {
                negativity = negativity.max(-v);
            }
        }
    }
    ValidationReport {
        symmetry: p.symmetry_deviation(),
        row_sum: p.row_sum_deviation(),
        sparsity,
        negativity: negativity.max(0.0),
    }
}

fn require_connected(g: &Graph) -> Result<()> {
    if g.is_connected() {
        Ok(())
    } else {
        Err(Error::Disconnected)
    }
}

/// Constant-edge matrix `P = I - alpha L` for a given `alpha`.
fn constant_edge(g: &Graph, alpha: f64, method: WeightMethod, param: Option<f64>) -> Result<WeightMatrix> {
    let w: Vec<f64> = core::iter::repeat(alpha).take(g.edge_count()).collect();
    WeightMatrix::from_edge_weights(g, &w, method, param)
}

/// Laplacian step-size rule `P = I - (kappa / d_max) L`, `kappa` in `(0, 1]`.
pub fn kappa_weights(g: &Graph, kappa: f64) -> Result<WeightMatrix> {
    require_connected(g)?;
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            message: format!("must be in (0, 1], got {kappa}"),
        });
    }
    constant_edge(g, kappa / g.max_degree() as f64, WeightMethod::Kappa, Some(kappa))
}

/// Constant-edge rule with the optimal constant
/// `alpha = 2 / (lambda_1(L) + lambda_{M-1}(L))`.
///
/// Among all constants this minimizes the convergence factor, which lands at
/// `(lambda_1 - lambda_{M-1}) / (lambda_1 + lambda_{M-1})`.
pub fn best_constant_weights(g: &Graph) -> Result<WeightMatrix> {
    require_connected(g)?;
    let spectrum = spectral::sym_eigs(&g.laplacian(), false)?;
    let m = g.vertex_count();
    if m == 1 {
        return Err(Error::InvalidParameter {
            name: "g",
            message: "graph must have at least 2 vertices".to_string(),
        });
    }
    let lambda_1 = spectrum.values()[0];
    let lambda_second_smallest = spectrum.values()[m - 2];
    let alpha = 2.0 / (lambda_1 + lambda_second_smallest);
    constant_edge(g, alpha, WeightMethod::BestConstant, Some(alpha))
}

/// Constant-edge rule with `alpha = 1 / d_max`.
pub fn max_degree_weights(g: &Graph) -> Result<WeightMatrix> {
    require_connected(g)?;
    let alpha = 1.0 / g.max_degree() as f64;
    constant_edge(g, alpha, WeightMethod::MaxDegree, Some(alpha))
}

/// Per-edge rule `P_ij = 1 / max(d_i, d_j)`.
///
/// The diagonal `P_ii = 1 - sum_j P_ij` stays nonnegative because each of the
/// `d_i` incident weights is at most `1 / d_i`.
pub fn local_degree_weights(g: &Graph) -> Result<WeightMatrix> {
    require_connected(g)?;
    let w: Vec<f64> = g
        .edges()
        .iter()
        .map(|&(i, j)| 1.0 / g.degree(i).max(g.degree(j)) as f64)
        .collect();
    WeightMatrix::from_edge_weights(g, &w, WeightMethod::LocalDegree, None)
}

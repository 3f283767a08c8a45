//! Cross-module properties of the weight constructions and solvers.

use fastmix_core::graph::{ClusterShape, Graph};
use fastmix_core::optimizer::{solve_fdla, solve_fmmc, SolveOptions};
use fastmix_core::spectral::{convergence_factor, convergence_time, sym_eigs};
use fastmix_core::weights::{
    best_constant_weights, kappa_weights, local_degree_weights, max_degree_weights,
    ValidationMode,
};
use fastmix_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_connected_graph(rng: &mut ChaCha8Rng, max_m: usize) -> Graph {
    let m = rng.gen_range(2..=max_m);
    let mut edges: Vec<(usize, usize)> = (1..m).map(|v| (rng.gen_range(0..v), v)).collect();
    for i in 0..m {
        for j in (i + 1)..m {
            if !edges.contains(&(i, j)) && rng.gen_bool(0.35) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(m, &edges).unwrap()
}

/// Heuristic baselines for solver dominance checks.
///
/// Every heuristic is feasible for the unconstrained problem. The constant
/// rules with `alpha > 1/d_max` can carry negative entries, in which case
/// they are *not* feasible for the sign-constrained problem and do not bound
/// it (the star is the canonical example: the optimal constant beats the
/// best nonnegative matrix).
fn heuristic_baselines(g: &Graph) -> (f64, f64) {
    let bc = best_constant_weights(g).unwrap();
    let md = max_degree_weights(g).unwrap();
    let ld = local_degree_weights(g).unwrap();
    let fdla_bound = bc.rho().min(md.rho()).min(ld.rho());
    let mut fmmc_bound = md.rho().min(ld.rho());
    if bc.validate(ValidationMode::NonNegative).passes() {
        fmmc_bound = fmmc_bound.min(bc.rho());
    }
    (fdla_bound, fmmc_bound)
}

#[test]
fn solvers_dominate_heuristics_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let opts = SolveOptions::default();
    for trial in 0..15 {
        let g = random_connected_graph(&mut rng, 8);
        let fmmc = solve_fmmc(&g, &opts).unwrap();
        let fdla = solve_fdla(&g, &opts).unwrap();
        assert!(
            fdla.best_objective <= fmmc.best_objective + 1e-4,
            "trial {trial}: fdla {} > fmmc {}",
            fdla.best_objective,
            fmmc.best_objective
        );
        let (fdla_bound, fmmc_bound) = heuristic_baselines(&g);
        assert!(
            fdla.best_objective <= fdla_bound + 1e-3,
            "trial {trial}: fdla {} > heuristic bound {fdla_bound}",
            fdla.best_objective
        );
        assert!(
            fmmc.best_objective <= fmmc_bound + 1e-3,
            "trial {trial}: fmmc {} > feasible heuristic bound {fmmc_bound}",
            fmmc.best_objective
        );
        assert!(fmmc.weights.validate(ValidationMode::NonNegative).passes());
        assert!(fdla.weights.validate(ValidationMode::Signed).passes());
    }
}

#[test]
fn solvers_dominate_heuristics_on_clustered_networks() {
    let opts = SolveOptions::default();
    for k in [2usize, 3] {
        let g = Graph::clustered(k, 4, ClusterShape::Complete).unwrap();
        let fmmc = solve_fmmc(&g, &opts).unwrap();
        let fdla = solve_fdla(&g, &opts).unwrap();
        assert!(fdla.best_objective <= fmmc.best_objective + 1e-4);
        let (fdla_bound, fmmc_bound) = heuristic_baselines(&g);
        assert!(fdla.best_objective <= fdla_bound + 1e-3);
        assert!(fmmc.best_objective <= fmmc_bound + 1e-3);
    }
}

#[test]
fn stochastic_matrices_of_connected_graphs_mix() {
    // Any symmetric doubly stochastic matrix of a connected graph with a
    // strictly positive diagonal has convergence factor below one.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..30 {
        let g = random_connected_graph(&mut rng, 9);
        let kappa = rng.gen_range(0.05..0.95);
        let wm = kappa_weights(&g, kappa).unwrap();
        let diag_min = (0..g.vertex_count())
            .map(|i| wm.matrix()[(i, i)])
            .fold(f64::INFINITY, f64::min);
        assert!(diag_min > 0.0);
        assert!(wm.rho() < 1.0, "rho {} for kappa {kappa}", wm.rho());
    }
}

#[test]
fn eigensolver_agrees_with_characteristic_polynomial_roots() {
    // Brute-force oracle: scan det(A - x I) for sign changes and bisect.
    // Valid when the eigenvalues are simple, so nearly-degenerate draws are
    // rejected.
    fn det(m: &Matrix) -> f64 {
        // LU with partial pivoting.
        let n = m.rows();
        let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
        let mut sign = 1.0;
        let mut result = 1.0;
        for col in 0..n {
            let (pivot, _) = a
                .iter()
                .enumerate()
                .skip(col)
                .map(|(r, row)| (r, row[col].abs()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .unwrap();
            if a[pivot][col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                a.swap(pivot, col);
                sign = -sign;
            }
            result *= a[col][col];
            for r in (col + 1)..n {
                let factor = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= factor * a[col][c];
                }
            }
        }
        sign * result
    }

    fn char_poly_roots(a: &Matrix) -> Option<Vec<f64>> {
        let n = a.rows();
        // Gershgorin bound.
        let radius = (0..n)
            .map(|i| (0..n).map(|j| a[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
            + 1.0;
        let p = |x: f64| {
            let mut shifted = a.clone();
            for i in 0..n {
                shifted[(i, i)] -= x;
            }
            det(&shifted)
        };
        let grid = 4000;
        let mut roots = Vec::new();
        let mut prev_x = -radius;
        let mut prev_v = p(prev_x);
        for step in 1..=grid {
            let x = -radius + 2.0 * radius * step as f64 / grid as f64;
            let v = p(x);
            if prev_v == 0.0 {
                roots.push(prev_x);
            } else if prev_v.signum() != v.signum() {
                let (mut lo, mut hi) = (prev_x, x);
                let mut flo = prev_v;
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    let fmid = p(mid);
                    if fmid == 0.0 || (hi - lo) < 1e-14 {
                        lo = mid;
                        break;
                    }
                    if flo.signum() != fmid.signum() {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fmid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev_x = x;
            prev_v = v;
        }
        (roots.len() == n).then(|| {
            roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
            roots
        })
    }

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut accepted = 0;
    while accepted < 100 {
        let n = rng.gen_range(2..=4);
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.gen_range(-3.0..3.0);
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        let Some(roots) = char_poly_roots(&a) else { continue };
        // Reject near-multiple roots where bisection loses accuracy.
        if roots.windows(2).any(|w| (w[0] - w[1]).abs() < 1e-3) {
            continue;
        }
        accepted += 1;
        let spectrum = sym_eigs(&a, false).unwrap();
        for (got, want) in spectrum.values().iter().zip(&roots) {
            assert!(
                (got - want).abs() <= 1e-8,
                "eigenvalue {got} vs root {want} (n = {n})"
            );
        }
    }
}

#[test]
fn eigenvalue_products_match_determinants() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for _ in 0..40 {
        let n = rng.gen_range(2..=6);
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.gen_range(-2.0..2.0);
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        // LU determinant (partial pivoting).
        let mut lu: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
        let mut detval = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| lu[x][col].abs().partial_cmp(&lu[y][col].abs()).unwrap())
                .unwrap();
            if pivot != col {
                lu.swap(pivot, col);
                detval = -detval;
            }
            if lu[col][col] == 0.0 {
                detval = 0.0;
                break;
            }
            detval *= lu[col][col];
            for r in (col + 1)..n {
                let factor = lu[r][col] / lu[col][col];
                for c in col..n {
                    lu[r][c] -= factor * lu[col][c];
                }
            }
        }
        let product: f64 = sym_eigs(&a, false).unwrap().values().iter().product();
        let scale = detval.abs().max(1.0);
        assert!(
            (product - detval).abs() <= 1e-8 * scale,
            "product {product} vs determinant {detval}"
        );
    }
}

#[test]
fn printed_convergence_pairs_are_log_consistent() {
    // (rho, tau) pairs printed for the exactly-known 5-vertex networks.
    let pairs = [
        (0.975, 39.498),
        (0.250, 0.721),
        (0.995, 199.5),
        (0.667, 2.466),
        (0.750, 3.476),
    ];
    for (rho, tau) in pairs {
        let computed = convergence_time(rho).value().unwrap();
        assert!(
            (computed - tau).abs() <= 5e-3 * tau,
            "rho {rho}: tau {computed} vs printed {tau}"
        );
    }
}

#[test]
fn convergence_factor_matches_weight_matrix_metadata() {
    let g = Graph::clustered(2, 4, ClusterShape::Star).unwrap();
    for wm in [
        kappa_weights(&g, 0.02).unwrap(),
        best_constant_weights(&g).unwrap(),
        max_degree_weights(&g).unwrap(),
        local_degree_weights(&g).unwrap(),
    ] {
        let direct = convergence_factor(wm.matrix()).unwrap();
        assert_eq!(direct, wm.rho());
    }
}

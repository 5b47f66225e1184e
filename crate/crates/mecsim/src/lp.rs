//! Bounded-variable linear programming by primal simplex.
//!
//! Problems are maximizations over `A·x <= b` with `b >= 0` and box bounds
//! `0 <= x_j <= 1`. The upper bounds are handled as explicit rows, so the
//! all-slack basis is always primal feasible and no phase-1 is needed.
//! Pivoting uses Bland's rule: deterministic and cycle-free, which matters
//! more than speed at the instance sizes seen here.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("invalid LP: {0}")]
    Invalid(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
}

/// max c·x  s.t.  A·x <= b,  0 <= x <= 1,  b >= 0.
#[derive(Clone, Debug, Default)]
pub struct LpProblem {
    /// Objective coefficients, one per variable.
    pub objective: Vec<f64>,
    /// Dense constraint rows (coefficients, rhs).
    pub constraints: Vec<(Vec<f64>, f64)>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values, one per variable; empty when unbounded.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row duals: one per constraint row, then one per upper-bound row.
    pub duals: Vec<f64>,
}

const EPS: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;

/// Solve the problem; deterministic for identical input.
pub fn solve(problem: &LpProblem) -> Result<LpSolution, LpError> {
    let n = problem.objective.len();
    for c in &problem.objective {
        if !c.is_finite() {
            return Err(LpError::Invalid("non-finite objective coefficient".into()));
        }
    }
    for (row, rhs) in &problem.constraints {
        if row.len() != n {
            return Err(LpError::Invalid(format!(
                "constraint has {} coefficients, expected {}",
                row.len(),
                n
            )));
        }
        if row.iter().any(|a| !a.is_finite()) || !rhs.is_finite() {
            return Err(LpError::Invalid("non-finite constraint".into()));
        }
        if *rhs < 0.0 {
            return Err(LpError::Invalid(format!("negative rhs {rhs}")));
        }
    }

    let m = problem.constraints.len() + n; // explicit x <= 1 rows appended
    let cols = n + m + 1; // structural, slacks, rhs
    let rhs_col = cols - 1;

    // Tableau rows 0..m are constraints, row m is the objective in
    // (z_j - c_j) form. Slack basis start.
    let mut t = vec![vec![0.0f64; cols]; m + 1];
    for (i, (row, rhs)) in problem.constraints.iter().enumerate() {
        t[i][..n].copy_from_slice(row);
        t[i][n + i] = 1.0;
        t[i][rhs_col] = *rhs;
    }
    for j in 0..n {
        let i = problem.constraints.len() + j;
        t[i][j] = 1.0;
        t[i][n + i] = 1.0;
        t[i][rhs_col] = 1.0;
    }
    for j in 0..n {
        t[m][j] = -problem.objective[j];
    }

    let mut basis: Vec<usize> = (n..n + m).collect();
    let max_iters = 50 * (n + m) + 10_000;

    for _ in 0..max_iters {
        // Bland: entering = lowest-index column with negative reduced cost.
        let entering = match (0..n + m).find(|&j| t[m][j] < -EPS) {
            Some(j) => j,
            None => {
                // Optimal.
                let mut x = vec![0.0; n];
                for (i, &b) in basis.iter().enumerate() {
                    if b < n {
                        x[b] = t[i][rhs_col];
                    }
                }
                let duals = (0..m).map(|i| t[m][n + i]).collect();
                let objective = problem
                    .objective
                    .iter()
                    .zip(&x)
                    .map(|(c, v)| c * v)
                    .sum();
                return Ok(LpSolution {
                    status: LpStatus::Optimal,
                    x,
                    objective,
                    duals,
                });
            }
        };

        // Ratio test; ties go to the smallest basic variable index (Bland).
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i][entering];
            if a > PIVOT_TOL {
                let ratio = t[i][rhs_col] / a;
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - EPS || (ratio < lr + EPS && basis[i] < basis[li]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let (pivot_row, _) = match leave {
            Some(l) => l,
            None => {
                return Ok(LpSolution {
                    status: LpStatus::Unbounded,
                    x: Vec::new(),
                    objective: f64::INFINITY,
                    duals: Vec::new(),
                });
            }
        };

        let pivot = t[pivot_row][entering];
        if !(pivot > PIVOT_TOL) || !pivot.is_finite() {
            return Err(LpError::NumericalBreakdown(format!(
                "degenerate pivot element {pivot}"
            )));
        }
        let inv = 1.0 / pivot;
        for v in t[pivot_row].iter_mut() {
            *v *= inv;
        }
        let prow = t[pivot_row].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == pivot_row {
                continue;
            }
            let f = row[entering];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&prow) {
                    *v -= f * p;
                }
                row[entering] = 0.0;
            }
        }
        basis[pivot_row] = entering;
    }

    Err(LpError::NumericalBreakdown(
        "iteration limit exceeded".into(),
    ))
}

/// Feasibility of a point within tolerance; used by tests and callers that
/// need to sanity-check candidate solutions.
pub fn feasible(problem: &LpProblem, x: &[f64], tol: f64) -> bool {
    if x.len() != problem.objective.len() {
        return false;
    }
    if x.iter().any(|&v| v < -tol || v > 1.0 + tol) {
        return false;
    }
    problem
        .constraints
        .iter()
        .all(|(row, rhs)| row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() <= rhs + tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(objective: Vec<f64>, constraints: Vec<(Vec<f64>, f64)>) -> LpProblem {
        LpProblem {
            objective,
            constraints,
        }
    }

    #[test]
    fn single_constraint_example() {
        let s = solve(&lp(vec![1.0], vec![(vec![1.0], 0.5)])).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 0.5).abs() < 1e-9);
        assert!((s.x[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn shared_budget_example() {
        let s = solve(&lp(vec![1.0, 1.0], vec![(vec![1.0, 1.0], 1.0)])).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9);
    }

    /// Vertex-enumeration oracle over the 2-D polytope
    /// {0<=x<=1, 0<=y<=1, x+y<=1.5}.
    #[test]
    fn two_var_vertex_oracle() {
        let obj = [3.0, 2.0];
        // Lines: x=0, x=1, y=0, y=1, x+y=1.5 as (a, b, c) with a·x + b·y = c.
        let lines = [
            (1.0, 0.0, 0.0),
            (1.0, 0.0, 1.0),
            (0.0, 1.0, 0.0),
            (0.0, 1.0, 1.0),
            (1.0, 1.0, 1.5),
        ];
        let mut best = f64::NEG_INFINITY;
        let mut best_pt = (0.0, 0.0);
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1, c1) = lines[i];
                let (a2, b2, c2) = lines[j];
                let det = a1 * b2 - a2 * b1;
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = (c1 * b2 - c2 * b1) / det;
                let y = (a1 * c2 - a2 * c1) / det;
                let ok = (0.0..=1.0).contains(&x)
                    && (0.0..=1.0).contains(&y)
                    && x + y <= 1.5 + 1e-12;
                if ok {
                    let v = obj[0] * x + obj[1] * y;
                    if v > best {
                        best = v;
                        best_pt = (x, y);
                    }
                }
            }
        }
        assert!((best - 4.0).abs() < 1e-12);
        assert!((best_pt.0 - 1.0).abs() < 1e-12 && (best_pt.1 - 0.5).abs() < 1e-12);

        let s = solve(&lp(obj.to_vec(), vec![(vec![1.0, 1.0], 1.5)])).unwrap();
        assert!((s.objective - best).abs() < 1e-9);
        assert!((s.x[0] - 1.0).abs() < 1e-9);
        assert!((s.x[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn box_only_clamps_at_one() {
        let s = solve(&lp(vec![2.0, -3.0], vec![])).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-9);
        assert!((s.x[0] - 1.0).abs() < 1e-9);
        assert!(s.x[1].abs() < 1e-9);
    }

    #[test]
    fn zero_rhs_pins_variable() {
        let s = solve(&lp(vec![5.0], vec![(vec![1.0], 0.0)])).unwrap();
        assert!(s.objective.abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_is_invalid() {
        assert!(matches!(
            solve(&lp(vec![1.0], vec![(vec![1.0], -1.0)])),
            Err(LpError::Invalid(_))
        ));
    }

    #[test]
    fn deterministic_resolve() {
        let p = lp(
            vec![3.0, 1.0, 4.0, 1.5],
            vec![
                (vec![2.0, 1.0, 3.0, 1.0], 3.5),
                (vec![1.0, 0.0, 1.0, 2.0], 2.0),
            ],
        );
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn duals_give_weak_duality_bound() {
        let p = lp(
            vec![3.0, 2.0, 1.0],
            vec![
                (vec![1.0, 1.0, 1.0], 1.8),
                (vec![2.0, 0.5, 0.0], 1.2),
            ],
        );
        let s = solve(&p).unwrap();
        // Dual feasibility: y >= 0 and yᵀA_j >= c_j for every column, where A
        // includes the upper-bound rows.
        let n = p.objective.len();
        for &y in &s.duals {
            assert!(y >= -1e-9);
        }
        for j in 0..n {
            let mut lhs = 0.0;
            for (i, (row, _)) in p.constraints.iter().enumerate() {
                lhs += s.duals[i] * row[j];
            }
            lhs += s.duals[p.constraints.len() + j]; // bound row x_j <= 1
            assert!(lhs >= p.objective[j] - 1e-6);
        }
        // Weak duality: primal objective <= yᵀb.
        let mut yb = 0.0;
        for (i, (_, rhs)) in p.constraints.iter().enumerate() {
            yb += s.duals[i] * rhs;
        }
        for j in 0..n {
            yb += s.duals[p.constraints.len() + j];
        }
        assert!(s.objective <= yb + 1e-6);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_problem() -> impl Strategy<Value = LpProblem> {
            (1usize..6, 0usize..4).prop_flat_map(|(n, m)| {
                let obj = proptest::collection::vec(-5.0f64..10.0, n);
                let rows = proptest::collection::vec(
                    (proptest::collection::vec(0.0f64..8.0, n), 0.0f64..12.0),
                    m,
                );
                (obj, rows).prop_map(|(objective, constraints)| LpProblem {
                    objective,
                    constraints,
                })
            })
        }

        proptest! {
            /// No feasible point beats the reported optimum.
            #[test]
            fn dominates_feasible_points(p in arb_problem(), point in proptest::collection::vec(0.0f64..1.0, 8)) {
                let s = solve(&p).unwrap();
                prop_assert_eq!(s.status, LpStatus::Optimal);
                prop_assert!(feasible(&p, &s.x, 1e-7));
                let x: Vec<f64> = point.iter().take(p.objective.len()).copied().collect();
                if x.len() == p.objective.len() && feasible(&p, &x, 0.0) {
                    let v: f64 = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                    prop_assert!(v <= s.objective + 1e-6);
                }
            }
        }
    }
}

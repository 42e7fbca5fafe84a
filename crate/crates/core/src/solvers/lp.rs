use crate::coverage::CoveragePolicy;
use crate::error::Result;
use crate::evaluate::{effective_loss, evaluate_policy};
use crate::model::MdpModel;
use crate::policy::ValueVector;

use super::simplex::{self, SimplexError};
use super::{policy_from_values, SolveResult};

/// Standard-form LP of the discounted MDP:
/// `min dᵀη  s.t.  Oη = b, η ≥ 0` with `O = E - δP`.
///
/// Columns are state-major: column `n * M + m` is the pair `(S_n, A_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub num_states: usize,
    pub num_actions: usize,
    /// `d`, per-pair effective losses.
    pub cost_vector: Vec<f64>,
    /// `b`, all ones.
    pub rhs: Vec<f64>,
    /// `O`, `N` rows of `N·M` entries.
    pub constraint_matrix: Vec<Vec<f64>>,
}

impl LpProblem {
    pub fn column(&self, state: usize, action: usize) -> usize {
        state * self.num_actions + action
    }
}

pub fn build_lp(model: &MdpModel, coverage: &CoveragePolicy) -> LpProblem {
    let n = model.num_states();
    let m = model.num_actions();
    let delta = model.discount();
    let mut cost_vector = vec![0.0; n * m];
    let mut constraint_matrix = vec![vec![0.0; n * m]; n];
    for s in 0..n {
        for a in 0..m {
            let col = s * m + a;
            cost_vector[col] = effective_loss(model, s, a, coverage);
            for (next, row) in constraint_matrix.iter_mut().enumerate() {
                let e = if next == s { 1.0 } else { 0.0 };
                row[col] = e - delta * model.prob(s, a, next);
            }
        }
    }
    LpProblem {
        num_states: n,
        num_actions: m,
        cost_vector,
        rhs: vec![1.0; n],
        constraint_matrix,
    }
}

fn dual(problem: &LpProblem) -> Result<(ValueVector, usize), SimplexError> {
    let n = problem.num_states;
    let cols = problem.cost_vector.len();
    if problem.constraint_matrix.len() != n || problem.rhs.len() != n {
        return Err(SimplexError::Dimension("O and b must have one row per state".into()));
    }
    // θ is free: split θ = θ⁺ - θ⁻. One inequality (Oᵀθ)_j ≤ d_j per column.
    let objective: Vec<f64> = problem.rhs.iter().copied().chain(problem.rhs.iter().map(|b| -b)).collect();
    let constraints: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let col: Vec<f64> = problem.constraint_matrix.iter().map(|row| row[j]).collect();
            col.iter().copied().chain(col.iter().map(|v| -v)).collect()
        })
        .collect();
    let solution = simplex::maximize(&objective, &constraints, &problem.cost_vector)?;
    let theta = (0..n).map(|i| solution.x[i] - solution.x[n + i]).collect();
    Ok((ValueVector::new(theta), solution.pivots))
}

/// Solves `max bᵀθ  s.t.  d - Oᵀθ ≥ 0`; the optimum is the optimal value vector.
pub fn solve_lp_dual(problem: &LpProblem) -> Result<ValueVector> {
    Ok(dual(problem)?.0)
}

/// LP route: dual values, then greedy extraction. Reported values are the
/// exact evaluation of the extracted policy; `residual` is `|θ - V|`.
pub fn solve_lp(model: &MdpModel, coverage: &CoveragePolicy) -> Result<SolveResult> {
    let (theta, pivots) = dual(&build_lp(model, coverage))?;
    let policy = policy_from_values(model, coverage, &theta);
    let values = evaluate_policy(model, &policy, coverage);
    Ok(SolveResult {
        residual: theta.max_abs_diff(&values),
        policy,
        values,
        iterations: pivots,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::model::{ActionSpec, StateSpec};
    use crate::solvers::solve_value_iteration;

    #[test]
    fn one_by_one() {
        let m = MdpModel::new(
            vec![StateSpec { name: "s".into(), loss: 4.0 }],
            vec![ActionSpec { name: "a".into(), cost: 1.0 }],
            vec![vec![vec![1.0]]],
            0.75,
            0,
        )
        .unwrap();
        let lp = build_lp(&m, &CoveragePolicy::Zero);
        assert_eq!(lp.constraint_matrix, vec![vec![0.25]]);
        assert_eq!(lp.cost_vector, vec![5.0]);
        let theta = solve_lp_dual(&lp).unwrap();
        assert!((theta[0] - 20.0).abs() < 1e-10);
    }

    #[test]
    fn two_state_matrices() {
        let m = bundled::two_state();
        let lp = build_lp(&m, &CoveragePolicy::Zero);
        assert_eq!(lp.constraint_matrix.len(), 2);
        assert_eq!(lp.constraint_matrix[0].len(), 4);
        let (g, b, h) = (0, 1, m.action_index("A_H").unwrap());
        let col = lp.column(g, h);
        assert!((lp.constraint_matrix[0][col] - 0.28).abs() < 1e-15);
        assert!((lp.constraint_matrix[1][col] + 0.18).abs() < 1e-15);
        assert_eq!(lp.cost_vector[lp.column(b, h)], 11.0);
        assert_eq!(lp.rhs, vec![1.0, 1.0]);
        // Each column of E has exactly one 1, in its own state's row.
        for s in 0..2 {
            for a in 0..2 {
                let c = lp.column(s, a);
                let e: f64 = (0..2).map(|r| lp.constraint_matrix[r][c] + 0.9 * m.prob(s, a, r)).sum();
                assert!((e - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_state_dual_values() {
        let m = bundled::two_state();
        let theta = solve_lp_dual(&build_lp(&m, &CoveragePolicy::Zero)).unwrap();
        assert!((theta[0] - 1.8 / 0.082 - 0.82 / 0.082).abs() < 1e-8);
    }

    #[test]
    fn four_state_dual_matches_value_iteration_on_grid() {
        let m = bundled::four_state();
        for i in 0..=20 {
            let c = CoveragePolicy::Linear { level: i as f64 / 20.0 };
            let theta = solve_lp_dual(&build_lp(&m, &c)).unwrap();
            let vi = solve_value_iteration(&m, &c, 1e-10, 100_000).unwrap();
            assert!(theta.max_abs_diff(&vi.values) < 1e-6);
            let lp = solve_lp(&m, &c).unwrap();
            assert!(lp.residual < 1e-8, "{}", lp.residual);
        }
    }
}

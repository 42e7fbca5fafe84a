use crate::coverage::CoveragePolicy;
use crate::error::{Error, Result};
use crate::evaluate::evaluate_policy;
use crate::model::MdpModel;
use crate::policy::{ProtectionPolicy, ValueVector};

use super::{bellman_residual, tie_key, ties, SolveResult};

/// Upper bound on `M^N` for brute-force enumeration.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

/// Evaluates every stationary policy exactly and returns the optimal one.
///
/// An optimal stationary policy minimizes the value in every state at once,
/// so candidates are the policies that attain the componentwise minimum
/// (within the tie tolerance). Among those the per-state preference is
/// cheaper action, then lower index, compared state by state.
pub fn solve_policy_enumeration(model: &MdpModel, coverage: &CoveragePolicy) -> Result<SolveResult> {
    let n = model.num_states();
    let m = model.num_actions();
    let count = (m as f64).powi(n as i32);
    if count > ENUMERATION_LIMIT as f64 {
        return Err(Error::TooLarge {
            policies: count,
            limit: ENUMERATION_LIMIT,
        });
    }

    // Policy `code` in base M, first state most significant.
    let evaluated: Vec<(ProtectionPolicy, ValueVector)> = (0..count as usize)
        .map(|code| {
            let mut rest = code;
            let mut assignment = vec![0usize; n];
            for slot in assignment.iter_mut().rev() {
                *slot = rest % m;
                rest /= m;
            }
            let policy = ProtectionPolicy::from_vec_unchecked(assignment);
            let values = evaluate_policy(model, &policy, coverage);
            (policy, values)
        })
        .collect();

    let best: Vec<f64> = (0..n)
        .map(|s| evaluated.iter().map(|(_, v)| v[s]).fold(f64::INFINITY, f64::min))
        .collect();
    let key = |p: &ProtectionPolicy| -> Vec<(f64, usize)> {
        p.actions().iter().map(|&a| tie_key(model, a)).collect()
    };
    let (policy, values) = evaluated
        .into_iter()
        .filter(|(_, v)| (0..n).all(|s| ties(v[s], best[s])))
        .min_by(|(a, _), (b, _)| {
            key(a)
                .partial_cmp(&key(b))
                .expect("costs are finite")
        })
        .expect("an optimal stationary policy exists");

    let residual = bellman_residual(model, coverage, &values);
    Ok(SolveResult {
        policy,
        values,
        iterations: count as usize,
        residual,
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
    fn two_state_no_coverage() {
        let m = bundled::two_state();
        let r = solve_policy_enumeration(&m, &CoveragePolicy::Zero).unwrap();
        assert_eq!(r.policy.label(&m), "A_H|A_H");
        assert_eq!(r.iterations, 4);
        let vi = solve_value_iteration(&m, &CoveragePolicy::Zero, 1e-10, 10_000).unwrap();
        assert_eq!(vi.policy, r.policy);
    }

    #[test]
    fn four_state_matches_value_iteration() {
        let m = bundled::four_state();
        for level in [0.0, 0.2, 0.33, 0.5, 0.8, 0.885, 0.9, 1.0] {
            let c = CoveragePolicy::Linear { level };
            let r = solve_policy_enumeration(&m, &c).unwrap();
            assert_eq!(r.iterations, 81);
            let vi = solve_value_iteration(&m, &c, 1e-10, 100_000).unwrap();
            assert_eq!(vi.policy, r.policy, "R = {level}");
            assert!(vi.values.max_abs_diff(&r.values) < 1e-9);
        }
    }

    #[test]
    fn single_policy_model() {
        let m = MdpModel::new(
            vec![StateSpec { name: "s".into(), loss: 1.0 }],
            vec![ActionSpec { name: "a".into(), cost: 0.0 }],
            vec![vec![vec![1.0]]],
            0.5,
            0,
        )
        .unwrap();
        let r = solve_policy_enumeration(&m, &CoveragePolicy::Zero).unwrap();
        assert_eq!(r.policy.actions(), &[0]);
        assert!((r.values[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn guard_rejects_huge_spaces() {
        let n = 21;
        let states = (0..n).map(|i| StateSpec { name: format!("s{i}"), loss: 0.0 }).collect();
        let actions = (0..2).map(|i| ActionSpec { name: format!("a{i}"), cost: 0.0 }).collect();
        let row: Vec<f64> = (0..n).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect();
        let m = MdpModel::new(states, actions, vec![vec![row; n]; 2], 0.5, 0).unwrap();
        assert!(matches!(
            solve_policy_enumeration(&m, &CoveragePolicy::Zero),
            Err(Error::TooLarge { .. })
        ));
    }
}

//! Optimal protection policies by value iteration, linear programming and
//! exhaustive enumeration. The three routes are independent and are used as
//! oracles for each other.

mod enumeration;
mod lp;
pub mod simplex;
mod value_iteration;

pub use enumeration::{solve_policy_enumeration, ENUMERATION_LIMIT};
pub use lp::{build_lp, solve_lp, solve_lp_dual, LpProblem};
pub use value_iteration::{bellman_update, solve_value_iteration};

use crate::coverage::CoveragePolicy;
use crate::evaluate::effective_loss;
use crate::model::MdpModel;
use crate::policy::{ProtectionPolicy, ValueVector};

/// Relative tolerance under which two action values count as tied.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub policy: ProtectionPolicy,
    pub values: ValueVector,
    pub iterations: usize,
    /// Solver-specific residual: Bellman residual for value iteration and
    /// enumeration, `|θ - V|` for the LP route.
    pub residual: f64,
    pub converged: bool,
}

/// `l(s, a, r) + δ Σ_{s'} p(s, a, s') V(s')`.
pub fn q_value(
    model: &MdpModel,
    coverage: &CoveragePolicy,
    values: &[f64],
    state: usize,
    action: usize,
) -> f64 {
    let next: f64 = model
        .row(state, action)
        .iter()
        .zip(values)
        .map(|(p, v)| p * v)
        .sum();
    effective_loss(model, state, action, coverage) + model.discount() * next
}

pub(crate) fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Ordering key for the tie-break: cheaper action first, then lower index.
pub(crate) fn tie_key(model: &MdpModel, action: usize) -> (f64, usize) {
    (model.cost(action), action)
}

fn prefer(model: &MdpModel, a: usize, b: usize) -> bool {
    let (ca, ia) = tie_key(model, a);
    let (cb, ib) = tie_key(model, b);
    ca < cb || (ca == cb && ia < ib)
}

/// Greedy policy with respect to `values`.
///
/// Actions whose value lies within [`TIE_TOL`] of the minimum are tied; among
/// those the cheaper action wins, then the lower index.
pub fn policy_from_values(
    model: &MdpModel,
    coverage: &CoveragePolicy,
    values: &ValueVector,
) -> ProtectionPolicy {
    let assignment = (0..model.num_states())
        .map(|s| {
            let q: Vec<f64> = (0..model.num_actions())
                .map(|a| q_value(model, coverage, values.as_slice(), s, a))
                .collect();
            let best = q.iter().copied().fold(f64::INFINITY, f64::min);
            (0..model.num_actions())
                .filter(|&a| ties(q[a], best))
                .reduce(|chosen, a| if prefer(model, a, chosen) { a } else { chosen })
                .expect("at least one action")
        })
        .collect();
    ProtectionPolicy::from_vec_unchecked(assignment)
}

/// `max_s |V(s) - min_a Q(s, a)|`.
pub fn bellman_residual(model: &MdpModel, coverage: &CoveragePolicy, values: &ValueVector) -> f64 {
    let updated = bellman_update(model, coverage, values.as_slice());
    updated
        .iter()
        .zip(values.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::evaluate::evaluate_policy;
    use crate::model::{ActionSpec, StateSpec};

    #[test]
    fn identical_actions_pick_first_index() {
        let m = MdpModel::new(
            vec![
                StateSpec { name: "a".into(), loss: 1.0 },
                StateSpec { name: "b".into(), loss: 2.0 },
            ],
            vec![
                ActionSpec { name: "x".into(), cost: 0.5 },
                ActionSpec { name: "y".into(), cost: 0.5 },
            ],
            vec![vec![vec![0.3, 0.7], vec![0.6, 0.4]]; 2],
            0.7,
            0,
        )
        .unwrap();
        let v = solve_lp_dual(&build_lp(&m, &CoveragePolicy::Zero)).unwrap();
        let p = policy_from_values(&m, &CoveragePolicy::Zero, &v);
        assert_eq!(p.actions(), &[0, 0]);
    }

    #[test]
    fn exact_switch_level_ties_to_weak_action_in_bad_state() {
        let m = bundled::two_state();
        // R_B from the closed form: 1 - 0.82 / 0.9.
        let r_b = 1.0 - 0.82 / 0.9;
        let cov = CoveragePolicy::Linear { level: r_b };
        let hh = ProtectionPolicy::uniform(&m, 0).unwrap();
        let v = evaluate_policy(&m, &hh, &cov);
        let p = policy_from_values(&m, &cov, &v);
        assert_eq!(p.label(&m), "A_H|A_L");
    }

    #[test]
    fn greedy_from_lp_values_is_all_strong() {
        let m = bundled::two_state();
        let v = solve_lp_dual(&build_lp(&m, &CoveragePolicy::Zero)).unwrap();
        let p = policy_from_values(&m, &CoveragePolicy::Zero, &v);
        assert_eq!(p.label(&m), "A_H|A_H");
    }
}

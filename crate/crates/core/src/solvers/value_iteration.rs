use crate::coverage::CoveragePolicy;
use crate::error::{Error, Result};
use crate::evaluate::evaluate_policy;
use crate::model::MdpModel;
use crate::policy::ValueVector;

use super::{bellman_residual, policy_from_values, q_value, SolveResult};

/// One application of the min-operator `(TV)(s) = min_a Q(s, a)`.
pub fn bellman_update(model: &MdpModel, coverage: &CoveragePolicy, values: &[f64]) -> Vec<f64> {
    (0..model.num_states())
        .map(|s| {
            (0..model.num_actions())
                .map(|a| q_value(model, coverage, values, s, a))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Value iteration from `V = 0`.
///
/// Stops once successive iterates differ by at most `tol (1 - δ) / (2δ)` in
/// sup-norm, which bounds the error of the greedy policy's value by `tol`.
/// The greedy policy is then re-extracted against its own exact values until
/// it is stable, so the returned policy is greedy for the returned values.
/// If `max_iter` is exhausted the last iterate's greedy policy is returned
/// with `converged = false`.
pub fn solve_value_iteration(
    model: &MdpModel,
    coverage: &CoveragePolicy,
    tol: f64,
    max_iter: usize,
) -> Result<SolveResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let delta = model.discount();
    let stop = if delta > 0.0 {
        tol * (1.0 - delta) / (2.0 * delta)
    } else {
        f64::INFINITY
    };

    let mut values = vec![0.0; model.num_states()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let next = bellman_update(model, coverage, &values);
        iterations += 1;
        let change = next
            .iter()
            .zip(&values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        values = next;
        if change <= stop {
            converged = true;
            break;
        }
    }

    let mut policy = policy_from_values(model, coverage, &ValueVector::new(values));
    let mut exact = evaluate_policy(model, &policy, coverage);
    // Each pass is a policy-improvement step, so this terminates; the bound
    // only guards against tie flip-flops at the tolerance edge.
    for _ in 0..=model.num_states() * model.num_actions() {
        let improved = policy_from_values(model, coverage, &exact);
        if improved == policy {
            break;
        }
        policy = improved;
        exact = evaluate_policy(model, &policy, coverage);
    }
    let residual = bellman_residual(model, coverage, &exact);
    Ok(SolveResult {
        policy,
        values: exact,
        iterations,
        residual,
        converged,
    })
}

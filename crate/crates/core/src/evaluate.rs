//! Exact policy evaluation by dense linear solve of `(I - δ P_π) V = l_π`.

use nalgebra::{DMatrix, DVector};

use crate::coverage::CoveragePolicy;
use crate::model::MdpModel;
use crate::policy::{ProtectionPolicy, ValueVector};

/// Per-stage effective loss `X_s - r(X_s) + c(a)`.
pub fn effective_loss(model: &MdpModel, state: usize, action: usize, coverage: &CoveragePolicy) -> f64 {
    let x = model.loss(state);
    x - coverage.apply(x) + model.cost(action)
}

/// Expected cumulative discounted effective loss of `policy` from every state.
pub fn evaluate_policy(
    model: &MdpModel,
    policy: &ProtectionPolicy,
    coverage: &CoveragePolicy,
) -> ValueVector {
    evaluate_with_stage(model, policy, |s, a| effective_loss(model, s, a, coverage))
}

/// Policy evaluation with an arbitrary stage term `stage(state, action)`.
pub fn evaluate_with_stage(
    model: &MdpModel,
    policy: &ProtectionPolicy,
    stage: impl Fn(usize, usize) -> f64,
) -> ValueVector {
    let n = model.num_states();
    let delta = model.discount();
    let system = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - delta * model.prob(i, policy[i], j)
    });
    let rhs = DVector::from_fn(n, |i, _| stage(i, policy[i]));
    // (I - δP) is strictly diagonally dominant by rows for δ < 1.
    let solution = system
        .lu()
        .solve(&rhs)
        .expect("I - δP is nonsingular for δ < 1");
    ValueVector::new(solution.iter().copied().collect())
}

/// Splits the no-coverage value into the direct-loss stream and the
/// protection-cost stream.
pub fn decompose_value(model: &MdpModel, policy: &ProtectionPolicy) -> (ValueVector, ValueVector) {
    let direct = evaluate_with_stage(model, policy, |s, _| model.loss(s));
    let cost = evaluate_with_stage(model, policy, |_, a| model.cost(a));
    (direct, cost)
}

/// `max_s |V(s) - l(s, π(s)) - δ Σ p V|`.
pub fn fixed_point_residual(
    model: &MdpModel,
    policy: &ProtectionPolicy,
    coverage: &CoveragePolicy,
    values: &ValueVector,
) -> f64 {
    (0..model.num_states())
        .map(|s| {
            let a = policy[s];
            let next: f64 = model.row(s, a).iter().zip(values.as_slice()).map(|(p, v)| p * v).sum();
            (values[s] - effective_loss(model, s, a, coverage) - model.discount() * next).abs()
        })
        .fold(0.0, f64::max)
}

//! Random instance generators shared by unit, property and acceptance tests.

use rand::{Rng, RngExt};

use crate::analytic::TwoStateModel;
use crate::coverage::CoveragePolicy;
use crate::model::{ActionSpec, MdpModel, StateSpec};
use crate::policy::ProtectionPolicy;

fn random_row<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        let k = rng.random_range(0..n);
        w[k] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Random valid model with `1..=max_states` states and `1..=max_actions`
/// actions. Occasionally duplicates an action to create exact ties.
pub fn random_model<R: Rng>(
    rng: &mut R,
    max_states: usize,
    max_actions: usize,
    min_discount: f64,
    max_discount: f64,
) -> MdpModel {
    let n = rng.random_range(1..=max_states);
    let m = rng.random_range(1..=max_actions);
    let states = (0..n)
        .map(|i| StateSpec {
            name: format!("S{i}"),
            loss: if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..20.0) },
        })
        .collect();
    let mut actions: Vec<ActionSpec> = (0..m)
        .map(|i| ActionSpec {
            name: format!("A{i}"),
            cost: if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..3.0) },
        })
        .collect();
    let mut transitions: Vec<Vec<Vec<f64>>> =
        (0..m).map(|_| (0..n).map(|_| random_row(rng, n)).collect()).collect();
    if m > 1 && rng.random_bool(0.1) {
        transitions[m - 1] = transitions[0].clone();
        actions[m - 1].cost = actions[0].cost;
    }
    let discount = rng.random_range(min_discount..=max_discount);
    let initial = rng.random_range(0..n);
    MdpModel::new(states, actions, transitions, discount, initial).expect("generated model is valid")
}

pub fn random_policy<R: Rng>(rng: &mut R, model: &MdpModel) -> ProtectionPolicy {
    let assignment = (0..model.num_states())
        .map(|_| rng.random_range(0..model.num_actions()))
        .collect();
    ProtectionPolicy::new(model, assignment).expect("in range")
}

/// Zero, linear or threshold coverage with random parameters.
pub fn random_coverage<R: Rng>(rng: &mut R, max_loss: f64) -> CoveragePolicy {
    match rng.random_range(0..3) {
        0 => CoveragePolicy::Zero,
        1 => CoveragePolicy::Linear {
            level: rng.random::<f64>(),
        },
        _ => {
            let a = rng.random::<f64>();
            let b = rng.random::<f64>();
            CoveragePolicy::Threshold {
                cutoff: rng.random_range(0.0..=max_loss.max(1.0)),
                low_level: a.min(b),
                high_level: a.max(b),
            }
        }
    }
}

/// Random two-state model satisfying the strict protection/loss/cost ordering.
pub fn random_two_state<R: Rng>(rng: &mut R) -> TwoStateModel {
    let discount = rng.random_range(0.05..0.99);
    let loss_good = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..5.0) };
    let loss_bad = loss_good + rng.random_range(0.5..20.0);
    let cost_weak = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..1.0) };
    let cost_strong = cost_weak + rng.random_range(0.05..3.0);
    // Probability of moving to the bad state: strong < weak, in both states.
    let to_bad = |rng: &mut R| {
        let strong = rng.random_range(0.0..0.9);
        let weak = rng.random_range(strong + 0.02..=1.0);
        (strong, weak)
    };
    let (g_strong, g_weak) = to_bad(rng);
    let (b_strong, b_weak) = to_bad(rng);
    TwoStateModel::new(
        discount,
        [loss_good, loss_bad],
        [cost_strong, cost_weak],
        [[1.0 - g_strong, 1.0 - b_strong], [1.0 - g_weak, 1.0 - b_weak]],
    )
    .expect("generated two-state model is valid")
}

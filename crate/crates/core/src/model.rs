//! The user's risk model: states with direct losses, protective actions with
//! costs, an action-indexed transition kernel and a discount factor.

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

/// Tolerance on transition row sums.
pub const ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub name: String,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub name: String,
    pub cost: f64,
}

/// Unvalidated model description, as read from a model file.
///
/// `transitions` is indexed `[action][from][to]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawModel {
    pub discount: f64,
    pub initial_state: String,
    pub states: Vec<StateSpec>,
    pub actions: Vec<ActionSpec>,
    pub transitions: Vec<Vec<Vec<f64>>>,
}

/// A validated discounted MDP. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpModel {
    states: Vec<StateSpec>,
    actions: Vec<ActionSpec>,
    transitions: Vec<Vec<Vec<f64>>>,
    discount: f64,
    initial_state: usize,
}

impl MdpModel {
    /// Builds a model from index-addressed parts, validating every invariant.
    pub fn new(
        states: Vec<StateSpec>,
        actions: Vec<ActionSpec>,
        transitions: Vec<Vec<Vec<f64>>>,
        discount: f64,
        initial_state: usize,
    ) -> Result<Self, ValidationError> {
        let initial = states
            .get(initial_state)
            .map(|s| s.name.clone())
            .ok_or_else(|| {
                ValidationError::single(format!(
                    "initial state index {initial_state} out of range ({} states)",
                    states.len()
                ))
            })?;
        validate_model(RawModel {
            discount,
            initial_state: initial,
            states,
            actions,
            transitions,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn states(&self) -> &[StateSpec] {
        &self.states
    }

    pub fn actions(&self) -> &[ActionSpec] {
        &self.actions
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn loss(&self, state: usize) -> f64 {
        self.states[state].loss
    }

    pub fn cost(&self, action: usize) -> f64 {
        self.actions[action].cost
    }

    /// `p(from, action, to)`.
    pub fn prob(&self, from: usize, action: usize, to: usize) -> f64 {
        self.transitions[action][from][to]
    }

    /// Distribution over next states for `(from, action)`.
    pub fn row(&self, from: usize, action: usize) -> &[f64] {
        &self.transitions[action][from]
    }

    pub fn max_loss(&self) -> f64 {
        self.states.iter().map(|s| s.loss).fold(0.0, f64::max)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    /// Same model with a different initial state.
    pub fn with_initial_state(&self, initial_state: usize) -> Result<Self, ValidationError> {
        if initial_state >= self.num_states() {
            return Err(ValidationError::single(format!(
                "initial state index {initial_state} out of range"
            )));
        }
        Ok(Self {
            initial_state,
            ..self.clone()
        })
    }

    pub fn to_raw(&self) -> RawModel {
        RawModel {
            discount: self.discount,
            initial_state: self.states[self.initial_state].name.clone(),
            states: self.states.clone(),
            actions: self.actions.clone(),
            transitions: self.transitions.clone(),
        }
    }
}

/// Checks every model invariant and collects all violations.
pub fn validate_model(raw: RawModel) -> Result<MdpModel, ValidationError> {
    let mut issues = Vec::new();
    let n = raw.states.len();
    let m = raw.actions.len();

    if n == 0 {
        issues.push("model has no states".to_string());
    }
    if m == 0 {
        issues.push("model has no actions".to_string());
    }
    if !(raw.discount.is_finite() && (0.0..1.0).contains(&raw.discount)) {
        issues.push(format!("discount {} outside [0, 1)", raw.discount));
    }
    for (i, s) in raw.states.iter().enumerate() {
        if s.name.is_empty() {
            issues.push(format!("state #{i} has an empty name"));
        }
        if !(s.loss.is_finite() && s.loss >= 0.0) {
            issues.push(format!("state '{}' has invalid loss {}", s.name, s.loss));
        }
        if raw.states[..i].iter().any(|o| o.name == s.name) {
            issues.push(format!("duplicate state name '{}'", s.name));
        }
    }
    for (i, a) in raw.actions.iter().enumerate() {
        if a.name.is_empty() {
            issues.push(format!("action #{i} has an empty name"));
        }
        if !(a.cost.is_finite() && a.cost >= 0.0) {
            issues.push(format!("action '{}' has invalid cost {}", a.name, a.cost));
        }
        if raw.actions[..i].iter().any(|o| o.name == a.name) {
            issues.push(format!("duplicate action name '{}'", a.name));
        }
    }

    let initial = raw.states.iter().position(|s| s.name == raw.initial_state);
    if initial.is_none() {
        issues.push(format!("initial state '{}' is not a declared state", raw.initial_state));
    }

    if raw.transitions.len() != m {
        issues.push(format!(
            "transitions: expected {m} action blocks, found {}",
            raw.transitions.len()
        ));
    } else {
        for (a, block) in raw.transitions.iter().enumerate() {
            let aname = &raw.actions[a].name;
            if block.len() != n {
                issues.push(format!(
                    "transitions for action '{aname}': expected {n} rows, found {}",
                    block.len()
                ));
                continue;
            }
            for (s, row) in block.iter().enumerate() {
                let sname = &raw.states[s].name;
                if row.len() != n {
                    issues.push(format!(
                        "transitions for action '{aname}', state '{sname}': expected {n} entries, found {}",
                        row.len()
                    ));
                    continue;
                }
                if let Some(bad) = row.iter().find(|p| !(p.is_finite() && (0.0..=1.0).contains(*p))) {
                    issues.push(format!(
                        "transitions for action '{aname}', state '{sname}': probability {bad} outside [0, 1]"
                    ));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    issues.push(format!(
                        "transitions for action '{aname}', state '{sname}': row sums to {sum}, expected 1"
                    ));
                }
            }
        }
    }

    if !issues.is_empty() {
        return Err(ValidationError { issues });
    }
    Ok(MdpModel {
        states: raw.states,
        actions: raw.actions,
        transitions: raw.transitions,
        discount: raw.discount,
        initial_state: initial.expect("checked above"),
    })
}

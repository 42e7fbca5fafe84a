use std::ops::Index;

use crate::error::Error;
use crate::model::MdpModel;

/// Stationary protection policy: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProtectionPolicy(Vec<usize>);

impl ProtectionPolicy {
    pub fn new(model: &MdpModel, assignment: Vec<usize>) -> Result<Self, Error> {
        if assignment.len() != model.num_states() {
            return Err(Error::InvalidArgument(format!(
                "policy has {} entries, model has {} states",
                assignment.len(),
                model.num_states()
            )));
        }
        if let Some(&a) = assignment.iter().find(|&&a| a >= model.num_actions()) {
            return Err(Error::InvalidArgument(format!("action index {a} out of range")));
        }
        Ok(Self(assignment))
    }

    /// Same action in every state.
    pub fn uniform(model: &MdpModel, action: usize) -> Result<Self, Error> {
        Self::new(model, vec![action; model.num_states()])
    }

    pub(crate) fn from_vec_unchecked(assignment: Vec<usize>) -> Self {
        Self(assignment)
    }

    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Action names joined by `|` in state order, e.g. `A_H|A_L`.
    pub fn label(&self, model: &MdpModel) -> String {
        self.0
            .iter()
            .map(|&a| model.actions()[a].name.as_str())
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Inverse of [`label`](Self::label).
    pub fn parse(model: &MdpModel, label: &str) -> Result<Self, Error> {
        let assignment = label
            .split('|')
            .map(|name| {
                model.action_index(name.trim()).ok_or_else(|| {
                    Error::InvalidArgument(format!("unknown action '{name}' in policy '{label}'"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(model, assignment)
    }

    /// Protection cost paid in each state.
    pub fn state_costs(&self, model: &MdpModel) -> Vec<f64> {
        self.0.iter().map(|&a| model.cost(a)).collect()
    }
}

impl Index<usize> for ProtectionPolicy {
    type Output = usize;

    fn index(&self, state: usize) -> &usize {
        &self.0[state]
    }
}

/// Per-state expected cumulative discounted loss.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueVector(Vec<f64>);

impl ValueVector {
    pub fn new(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sup-norm distance.
    pub fn max_abs_diff(&self, other: &ValueVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for ValueVector {
    type Output = f64;

    fn index(&self, state: usize) -> &f64 {
        &self.0[state]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    #[test]
    fn label_round_trip() {
        let m = bundled::four_state();
        let p = ProtectionPolicy::new(&m, vec![2, 2, 0, 1]).unwrap();
        assert_eq!(p.label(&m), "A_H|A_H|A_0|A_L");
        assert_eq!(ProtectionPolicy::parse(&m, &p.label(&m)).unwrap(), p);
    }

    #[test]
    fn rejects_wrong_length_and_bad_index() {
        let m = bundled::two_state();
        assert!(ProtectionPolicy::new(&m, vec![0]).is_err());
        assert!(ProtectionPolicy::new(&m, vec![0, 2]).is_err());
        assert!(ProtectionPolicy::parse(&m, "A_H|A_X").is_err());
    }
}

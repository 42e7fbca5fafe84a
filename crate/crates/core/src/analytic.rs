//! Closed-form engine for the two-state, two-action user under linear
//! coverage `r(x) = R x`.
//!
//! States are `Good`/`Bad` (`X_G < X_B`), actions are `Strong`/`Weak`
//! (`C_L < C_H`, strong protection moves the user towards the good state).
//! Everything here is exact algebra over the model parameters; the numeric
//! solvers act as the oracle in tests.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{ActionSpec, MdpModel, StateSpec};
use crate::policy::ProtectionPolicy;

/// Absolute tolerance (relative to the scale of `h`) under which `h` counts as zero.
const H_TIE_TOL: f64 = 1e-12;
/// `|ρ|` below this is treated as zero.
const RHO_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwoState {
    Good,
    Bad,
}

impl TwoState {
    pub const BOTH: [TwoState; 2] = [TwoState::Good, TwoState::Bad];

    fn idx(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Self {
        match self {
            Self::Good => Self::Bad,
            Self::Bad => Self::Good,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protection {
    Strong,
    Weak,
}

impl Protection {
    pub const BOTH: [Protection; 2] = [Protection::Strong, Protection::Weak];

    fn idx(self) -> usize {
        self as usize
    }

    fn letter(self) -> char {
        match self {
            Self::Strong => 'H',
            Self::Weak => 'L',
        }
    }
}

/// Actions taken in the good and bad state, e.g. `Π_HL` is `(Strong, Weak)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PolicyPair {
    pub good: Protection,
    pub bad: Protection,
}

impl PolicyPair {
    pub const fn new(good: Protection, bad: Protection) -> Self {
        Self { good, bad }
    }

    pub fn at(&self, s: TwoState) -> Protection {
        match s {
            TwoState::Good => self.good,
            TwoState::Bad => self.bad,
        }
    }
}

impl fmt::Display for PolicyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pi_{}{}", self.good.letter(), self.bad.letter())
    }
}

use Protection::{Strong, Weak};

const HH: PolicyPair = PolicyPair::new(Strong, Strong);
const HL: PolicyPair = PolicyPair::new(Strong, Weak);
const LH: PolicyPair = PolicyPair::new(Weak, Strong);
const LL: PolicyPair = PolicyPair::new(Weak, Weak);

/// Validated two-state model. Keeps the index mapping back to the
/// [`MdpModel`] it was built from, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStateModel {
    discount: f64,
    /// `[X_G, X_B]`
    loss: [f64; 2],
    /// `[C_H, C_L]`
    cost: [f64; 2],
    /// `[action][from][to]`
    p: [[[f64; 2]; 2]; 2],
    initial: TwoState,
    state_index: [usize; 2],
    action_index: [usize; 2],
}

impl TwoStateModel {
    /// `to_good[action][state]` is `p(state, action, S_G)`; actions ordered
    /// `[Strong, Weak]`, states `[Good, Bad]`. `cost` is `[C_H, C_L]`.
    pub fn new(discount: f64, loss: [f64; 2], cost: [f64; 2], to_good: [[f64; 2]; 2]) -> Result<Self> {
        let mut p = [[[0.0; 2]; 2]; 2];
        for a in 0..2 {
            for s in 0..2 {
                p[a][s] = [to_good[a][s], 1.0 - to_good[a][s]];
            }
        }
        Self::from_parts(discount, loss, cost, p, TwoState::Good, [0, 1], [0, 1])
    }

    fn from_parts(
        discount: f64,
        loss: [f64; 2],
        cost: [f64; 2],
        p: [[[f64; 2]; 2]; 2],
        initial: TwoState,
        state_index: [usize; 2],
        action_index: [usize; 2],
    ) -> Result<Self> {
        let fail = |msg: String| Err(Error::TwoStateOrdering(msg));
        if !(discount.is_finite() && (0.0..1.0).contains(&discount)) {
            return fail(format!("discount {discount} outside [0, 1)"));
        }
        if !(loss[0] >= 0.0 && loss[0] < loss[1] && loss[1].is_finite()) {
            return fail(format!("need 0 <= X_G < X_B, got {loss:?}"));
        }
        if !(cost[1] >= 0.0 && cost[1] < cost[0] && cost[0].is_finite()) {
            return fail(format!("need 0 <= C_L < C_H, got C_H={}, C_L={}", cost[0], cost[1]));
        }
        for row in p.iter().flatten() {
            if row.iter().any(|x| !(0.0..=1.0).contains(x)) || (row[0] + row[1] - 1.0).abs() > 1e-9 {
                return fail(format!("invalid transition row {row:?}"));
            }
        }
        for (s, (strong, weak)) in p[0].iter().zip(&p[1]).enumerate() {
            if !(strong[1] < weak[1] && weak[0] < strong[0]) {
                return fail(format!(
                    "strong protection must move state {s} towards the good state more than weak protection"
                ));
            }
        }
        Ok(Self {
            discount,
            loss,
            cost,
            p,
            initial,
            state_index,
            action_index,
        })
    }

    /// Identifies the good state (lower loss) and the strong action (higher cost).
    pub fn from_mdp(model: &MdpModel) -> Result<Self> {
        if model.num_states() != 2 || model.num_actions() != 2 {
            return Err(Error::NotTwoByTwo);
        }
        let good = if model.loss(0) <= model.loss(1) { 0 } else { 1 };
        let strong = if model.cost(0) >= model.cost(1) { 0 } else { 1 };
        let state_index = [good, 1 - good];
        let action_index = [strong, 1 - strong];
        let mut p = [[[0.0; 2]; 2]; 2];
        for a in 0..2 {
            for s in 0..2 {
                for t in 0..2 {
                    p[a][s][t] = model.prob(state_index[s], action_index[a], state_index[t]);
                }
            }
        }
        let initial = if model.initial_state() == good { TwoState::Good } else { TwoState::Bad };
        Self::from_parts(
            model.discount(),
            [model.loss(state_index[0]), model.loss(state_index[1])],
            [model.cost(action_index[0]), model.cost(action_index[1])],
            p,
            initial,
            state_index,
            action_index,
        )
    }

    /// Equivalent [`MdpModel`] with states `S_G, S_B` and actions `A_H, A_L`.
    pub fn to_mdp(&self) -> MdpModel {
        let states = vec![
            StateSpec { name: "S_G".into(), loss: self.loss[0] },
            StateSpec { name: "S_B".into(), loss: self.loss[1] },
        ];
        let actions = vec![
            ActionSpec { name: "A_H".into(), cost: self.cost[0] },
            ActionSpec { name: "A_L".into(), cost: self.cost[1] },
        ];
        let transitions = self.p.iter().map(|a| a.iter().map(|r| r.to_vec()).collect()).collect();
        MdpModel::new(states, actions, transitions, self.discount, self.initial.idx())
            .expect("two-state parameters form a valid model")
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn initial(&self) -> TwoState {
        self.initial
    }

    pub fn loss(&self, s: TwoState) -> f64 {
        self.loss[s.idx()]
    }

    pub fn cost(&self, a: Protection) -> f64 {
        self.cost[a.idx()]
    }

    /// `p(from, action, to)`.
    pub fn p(&self, from: TwoState, action: Protection, to: TwoState) -> f64 {
        self.p[action.idx()][from.idx()][to.idx()]
    }

    /// Discounted transition terms: `1 - δp` on the diagonal, `δp` off it.
    fn p_hat(&self, from: TwoState, action: Protection, to: TwoState) -> f64 {
        let dp = self.discount * self.p(from, action, to);
        if from == to {
            1.0 - dp
        } else {
            dp
        }
    }

    /// Determinant of `I - δP` for the policy `(good, bad)`; positive for `δ < 1`.
    pub fn i_p(&self, good: Protection, bad: Protection) -> f64 {
        use TwoState::*;
        let d = self.discount;
        (1.0 - d * self.p(Good, good, Good)) * (1.0 - d * self.p(Bad, bad, Bad))
            - d * d * self.p(Good, good, Bad) * self.p(Bad, bad, Good)
    }

    /// Loss-driven coefficient: `V̄ = (1 - R) k + b`.
    pub fn k_coeff(&self, s: TwoState, good: Protection, bad: Protection) -> f64 {
        use TwoState::*;
        let sc = s.other();
        (self.p_hat(Bad, bad, sc) * self.loss(Good) + self.p_hat(Good, good, sc) * self.loss(Bad))
            / self.i_p(good, bad)
    }

    /// Cost-driven coefficient of `V̄`.
    pub fn b_coeff(&self, s: TwoState, good: Protection, bad: Protection) -> f64 {
        use TwoState::*;
        let sc = s.other();
        (self.p_hat(Bad, bad, sc) * self.cost(good) + self.p_hat(Good, good, sc) * self.cost(bad))
            / self.i_p(good, bad)
    }

    /// Value at `s` when `s` takes `own` and the other state takes `other`.
    pub fn vbar(&self, s: TwoState, own: Protection, other: Protection, level: f64) -> f64 {
        let pair = pair_for(s, own, other);
        (1.0 - level) * self.k_coeff(s, pair.good, pair.bad) + self.b_coeff(s, pair.good, pair.bad)
    }

    fn h_parts(&self, s: TwoState, other_action: Protection) -> (f64, f64) {
        use TwoState::*;
        let d = self.discount;
        let sc = s.other();
        let slope_base =
            d * (self.p(s, Strong, sc) - self.p(s, Weak, sc)) * (self.loss(sc) - self.loss(s));
        let cost_term = (1.0 - d + d * self.p(Bad, other_action, Good) + d * self.p(Good, other_action, Bad))
            * (self.cost(Strong) - self.cost(Weak));
        (slope_base, cost_term)
    }

    /// Sign of `h(s, α, R)` decides between strong (negative) and weak
    /// (non-negative) protection at `s` when the other state plays `α`.
    pub fn h(&self, s: TwoState, other_action: Protection, level: f64) -> f64 {
        let (a, b) = self.h_parts(s, other_action);
        (1.0 - level) * a + b
    }

    /// `dh/dR`, strictly positive under the model ordering (when `δ > 0`).
    pub fn h_slope(&self, s: TwoState) -> f64 {
        -self.h_parts(s, Strong).0
    }

    fn weak_preferred(&self, s: TwoState, other_action: Protection, level: f64) -> bool {
        let (a, b) = self.h_parts(s, other_action);
        let h = (1.0 - level) * a + b;
        h >= -H_TIE_TOL * (a.abs() + b.abs())
    }

    pub fn rho(&self) -> f64 {
        use TwoState::*;
        self.p(Bad, Strong, Good) + self.p(Good, Strong, Bad) - self.p(Bad, Weak, Good) - self.p(Good, Weak, Bad)
    }

    /// Optimal policy from the four sign conditions on `h`, weak protection on ties.
    pub fn analytic_pair(&self, level: f64) -> PolicyPair {
        use TwoState::*;
        if self.weak_preferred(Good, Weak, level) && self.weak_preferred(Bad, Weak, level) {
            LL
        } else if self.weak_preferred(Good, Strong, level) && !self.weak_preferred(Bad, Weak, level) {
            LH
        } else if !self.weak_preferred(Good, Weak, level) && self.weak_preferred(Bad, Strong, level) {
            HL
        } else {
            HH
        }
    }

    /// [`analytic_pair`](Self::analytic_pair) mapped onto the source model's indices.
    pub fn analytic_policy(&self, level: f64) -> ProtectionPolicy {
        self.to_policy(self.analytic_pair(level))
    }

    pub fn to_policy(&self, pair: PolicyPair) -> ProtectionPolicy {
        let mut assignment = vec![0; 2];
        for s in TwoState::BOTH {
            assignment[self.state_index[s.idx()]] = self.action_index[pair.at(s).idx()];
        }
        ProtectionPolicy::from_vec_unchecked(assignment)
    }

    /// Root of `h(s, α, ·)`, clamped to `[0, 1]`.
    fn threshold_root(&self, s: TwoState, other_action: Protection) -> f64 {
        let (a, b) = self.h_parts(s, other_action);
        let root = if a.abs() > f64::MIN_POSITIVE * 1e3 {
            1.0 + b / a
        } else {
            // Degenerate slope: bisect the sign change, if any.
            let (mut lo, mut hi) = (0.0, 1.0);
            if self.h(s, other_action, lo) >= 0.0 {
                return 0.0;
            }
            if self.h(s, other_action, hi) < 0.0 {
                return 1.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if self.h(s, other_action, mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };
        root.clamp(0.0, 1.0)
    }

    pub fn classify(&self) -> CaseClassification {
        use TwoState::*;
        let rho = self.rho();
        let threshold = |kind, s: TwoState, other, governs| Threshold {
            kind,
            value: self.threshold_root(s, other),
            root_of: (s, other),
            governs,
        };
        let (case, thresholds, policies) = match self.analytic_pair(0.0) {
            LL => (Case::Case1, vec![], vec![LL]),
            HL => (
                Case::Case2,
                vec![threshold(ThresholdKind::RG, Good, Weak, Some(Good))],
                vec![HL, LL],
            ),
            LH => (
                Case::Case3,
                vec![threshold(ThresholdKind::RB, Bad, Weak, Some(Bad))],
                vec![LH, LL],
            ),
            HH if rho.abs() <= RHO_ZERO_TOL => (
                Case::Case4c,
                vec![threshold(ThresholdKind::RS, Good, Strong, None)],
                vec![HH, LL],
            ),
            HH if rho < 0.0 => (
                Case::Case4a,
                vec![
                    threshold(ThresholdKind::RB, Bad, Strong, Some(Bad)),
                    threshold(ThresholdKind::RG, Good, Weak, Some(Good)),
                ],
                vec![HH, HL, LL],
            ),
            HH => (
                Case::Case4b,
                vec![
                    threshold(ThresholdKind::RG, Good, Strong, Some(Good)),
                    threshold(ThresholdKind::RB, Bad, Weak, Some(Bad)),
                ],
                vec![HH, LH, LL],
            ),
        };
        let mut bounds = vec![0.0];
        bounds.extend(thresholds.iter().map(|t| t.value));
        bounds.push(1.0);
        let intervals = policies
            .iter()
            .enumerate()
            .map(|(i, &policy)| PolicyInterval {
                lo: bounds[i],
                hi: bounds[i + 1],
                hi_closed: i + 1 == policies.len(),
                policy,
            })
            .collect();
        CaseClassification {
            case,
            rho,
            thresholds,
            intervals,
        }
    }

    /// Zero-profit contract region: coverage up to the first policy switch,
    /// premium `K(R) = R k(s_0; π_0)`.
    pub fn optimal_contract(&self) -> AnalyticContract {
        let classification = self.classify();
        let first = &classification.intervals[0];
        let base = first.policy;
        AnalyticContract {
            case: classification.case,
            lo: 0.0,
            hi: first.hi,
            hi_closed: first.hi_closed,
            premium_slope: self.k_coeff(self.initial, base.good, base.bad),
            profit: 0.0,
            baseline: base,
        }
    }

    /// Coverage levels at which the direct-loss stream exceeds the uninsured one.
    pub fn peltzman_regions(&self) -> Vec<CoverageInterval> {
        let classification = self.classify();
        match classification.thresholds.first() {
            None => vec![],
            Some(t) => vec![CoverageInterval {
                lo: t.value,
                hi: 1.0,
                lo_closed: true,
                hi_closed: true,
            }],
        }
    }

    /// Expected discounted direct losses from `s` under `pair`.
    pub fn direct_losses(&self, s: TwoState, pair: PolicyPair) -> f64 {
        self.k_coeff(s, pair.good, pair.bad)
    }

    /// Residuals of the algebraic identities linking `h`, `ρ`, and the value
    /// differences between strong and weak protection.
    pub fn identity_residuals(&self, level: f64) -> IdentityReport {
        use TwoState::*;
        let d = self.discount;
        let rho = self.rho();
        let dc = self.cost(Strong) - self.cost(Weak);
        let dx = self.loss(Bad) - self.loss(Good);
        let h = |s, a| self.h(s, a, level);
        let mut residuals = Vec::new();
        let mut push = |name: &str, lhs: f64, rhs: f64| {
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            residuals.push((name.to_string(), (lhs - rhs).abs() / scale));
        };

        push("h action gap (good)", h(Good, Strong) - h(Good, Weak), rho * d * dc);
        push("h action gap (bad)", h(Bad, Strong) - h(Bad, Weak), rho * d * dc);
        push("h state gap (strong)", h(Good, Strong) - h(Bad, Strong), rho * d * (1.0 - level) * dx);
        push("h state gap (weak)", h(Good, Weak) - h(Bad, Weak), rho * d * (1.0 - level) * dx);
        push(
            "h cross gap (good strong, bad weak)",
            h(Good, Strong) - h(Bad, Weak),
            rho * d * (dc + (1.0 - level) * dx),
        );
        push(
            "h cross gap (bad strong, good weak)",
            h(Bad, Strong) - h(Good, Weak),
            rho * d * (dc - (1.0 - level) * dx),
        );

        let mut sign_agreement = true;
        for other in Protection::BOTH {
            // Good state switches its own action, bad state plays `other`.
            let diff = self.vbar(Good, Strong, other, level) - self.vbar(Good, Weak, other, level);
            let factor = (1.0 - d) * self.p_hat(Bad, other, Bad) / (self.i_p(Strong, other) * self.i_p(Weak, other));
            push(&format!("value gap factorization (good, bad plays {other:?})"), diff, factor * h(Good, other));
            sign_agreement &= sign_agrees(diff, h(Good, other));

            let diff = self.vbar(Bad, Strong, other, level) - self.vbar(Bad, Weak, other, level);
            let factor = (1.0 - d) * self.p_hat(Good, other, Good) / (self.i_p(other, Strong) * self.i_p(other, Weak));
            push(&format!("value gap factorization (bad, good plays {other:?})"), diff, factor * h(Bad, other));
            sign_agreement &= sign_agrees(diff, h(Bad, other));
        }

        let max_residual = residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max);
        IdentityReport {
            residuals,
            max_residual,
            sign_agreement,
        }
    }
}

fn sign_agrees(a: f64, b: f64) -> bool {
    let tol = 1e-9 * a.abs().max(b.abs()).max(1.0);
    (a.abs() <= tol && b.abs() <= tol) || (a > 0.0) == (b > 0.0)
}

fn pair_for(s: TwoState, own: Protection, other: Protection) -> PolicyPair {
    match s {
        TwoState::Good => PolicyPair::new(own, other),
        TwoState::Bad => PolicyPair::new(other, own),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Case1,
    Case2,
    Case3,
    Case4a,
    Case4b,
    Case4c,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    /// Switch governed by the good state.
    RG,
    /// Switch governed by the bad state.
    RB,
    /// Simultaneous switch of both states.
    RS,
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RG => "R_G",
            Self::RB => "R_B",
            Self::RS => "R_s",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub kind: ThresholdKind,
    pub value: f64,
    /// `(s, α)` such that `h(s, α, value) = 0`.
    pub root_of: (TwoState, Protection),
    /// State whose action flips at this threshold; `None` when both flip.
    pub governs: Option<TwoState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyInterval {
    pub lo: f64,
    pub hi: f64,
    /// Intervals are `[lo, hi)` except the last, which is `[lo, 1]`.
    pub hi_closed: bool,
    pub policy: PolicyPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseClassification {
    pub case: Case,
    pub rho: f64,
    pub thresholds: Vec<Threshold>,
    pub intervals: Vec<PolicyInterval>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticContract {
    pub case: Case,
    pub lo: f64,
    pub hi: f64,
    /// `false` means `[0, hi)`; at `hi` itself the policy has already
    /// switched under the weak-on-tie rule. The closed interval is the
    /// textbook convention.
    pub hi_closed: bool,
    /// `K(R) = premium_slope * R` on the region.
    pub premium_slope: f64,
    pub profit: f64,
    pub baseline: PolicyPair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl CoverageInterval {
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub residuals: Vec<(String, f64)>,
    pub max_residual: f64,
    pub sign_agreement: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::coverage::CoveragePolicy;
    use crate::evaluate::{decompose_value, evaluate_policy};
    use crate::solvers::solve_value_iteration;
    use crate::testutil::random_two_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use TwoState::{Bad, Good};

    fn bundled_pair() -> TwoStateModel {
        TwoStateModel::from_mdp(&bundled::two_state()).unwrap()
    }

    #[test]
    fn i_p_values() {
        let m = bundled_pair();
        assert!((m.i_p(Strong, Strong) - 0.082).abs() < 1e-15);
        assert!((m.i_p(Weak, Weak) - 0.1).abs() < 1e-15);
        let mut raw = bundled::two_state().to_raw();
        raw.discount = 0.0;
        let m0 = TwoStateModel::from_mdp(&crate::model::validate_model(raw).unwrap()).unwrap();
        for a in Protection::BOTH {
            for b in Protection::BOTH {
                assert_eq!(m0.i_p(a, b), 1.0);
            }
        }
    }

    #[test]
    fn coefficients() {
        let m = bundled_pair();
        assert!((m.k_coeff(Good, Strong, Strong) - 1.8 / 0.082).abs() < 1e-12);
        assert!((m.k_coeff(Good, Strong, Strong) - 21.9512).abs() < 1e-4);
        assert!((m.b_coeff(Good, Strong, Strong) - 10.0).abs() < 1e-12);
        assert!((m.vbar(Good, Strong, Strong, 0.0) - 31.951219512195124).abs() < 1e-12);
        assert!((m.vbar(Good, Weak, Weak, 0.0) - 45.0).abs() < 1e-12);
        assert_eq!(m.vbar(Good, Strong, Strong, 1.0), m.b_coeff(Good, Strong, Strong));

        let lossless = TwoStateModel::new(0.9, [0.0, 1e-300], [1.0, 0.0], [[0.8, 0.6], [0.5, 0.5]]).unwrap();
        assert!(lossless.k_coeff(Good, Strong, Weak).abs() < 1e-290);
    }

    #[test]
    fn h_values_and_rho() {
        let m = bundled_pair();
        assert!((m.h(Good, Strong, 0.0) + 1.88).abs() < 1e-9);
        assert!((m.h(Good, Weak, 0.0) + 1.70).abs() < 1e-9);
        assert!((m.h(Bad, Strong, 0.0) + 0.08).abs() < 1e-9);
        assert!((m.h(Bad, Weak, 0.0) - 0.10).abs() < 1e-9);
        assert!((m.rho() + 0.20).abs() < 1e-12);
        for s in TwoState::BOTH {
            for a in Protection::BOTH {
                assert!(m.h(s, a, 1.0) > 0.0);
                let slope = m.h(s, a, 0.7) - m.h(s, a, 0.2);
                assert!((slope / 0.5 - m.h_slope(s)).abs() < 1e-12);
            }
            assert!(m.h_slope(s) > 0.0);
        }
    }

    #[test]
    fn rho_variants() {
        // Equal shifts in both states cancel.
        let sym = TwoStateModel::new(0.9, [0.0, 10.0], [1.0, 0.0], [[0.7, 0.6], [0.5, 0.4]]).unwrap();
        assert!(sym.rho().abs() < 1e-15);
        let raised = TwoStateModel::new(0.9, [0.0, 10.0], [1.0, 0.0], [[0.8, 0.9], [0.5, 0.5]]).unwrap();
        assert!((raised.rho() - 0.10).abs() < 1e-12);
    }

    #[test]
    fn bundled_model_is_case_4a() {
        let c = bundled_pair().classify();
        assert_eq!(c.case, Case::Case4a);
        assert_eq!(c.thresholds[0].kind, ThresholdKind::RB);
        assert!((c.thresholds[0].value - (1.0 - 0.82 / 0.9)).abs() < 1e-12);
        assert!((c.thresholds[0].value - 0.0889).abs() < 1e-3);
        assert_eq!(c.thresholds[1].kind, ThresholdKind::RG);
        assert!((c.thresholds[1].value - (1.0 - 1.0 / 2.7)).abs() < 1e-12);
        let pols: Vec<_> = c.intervals.iter().map(|i| i.policy).collect();
        assert_eq!(pols, vec![HH, HL, LL]);
    }

    #[test]
    fn expensive_strong_protection_is_case_1() {
        let m = TwoStateModel::new(0.9, [0.0, 10.0], [100.0, 0.0], [[0.8, 0.6], [0.5, 0.5]]).unwrap();
        for s in TwoState::BOTH {
            for a in Protection::BOTH {
                assert!(m.h(s, a, 0.0) > 0.0);
            }
        }
        let c = m.classify();
        assert_eq!(c.case, Case::Case1);
        assert_eq!(c.intervals.len(), 1);
        assert!(m.peltzman_regions().is_empty());
        let contract = m.optimal_contract();
        assert_eq!((contract.lo, contract.hi, contract.hi_closed), (0.0, 1.0, true));
        assert!((contract.premium_slope - m.k_coeff(Good, Weak, Weak)).abs() < 1e-15);
        // Numeric check: no-insurance optimum is all-weak at every level.
        let mdp = m.to_mdp();
        for i in 0..=10 {
            let r = solve_value_iteration(&mdp, &CoveragePolicy::Linear { level: i as f64 / 10.0 }, 1e-10, 100_000).unwrap();
            assert_eq!(r.policy.label(&mdp), "A_L|A_L");
        }
    }

    #[test]
    fn symmetric_rho_gives_case_4c() {
        let sym = TwoStateModel::new(0.9, [0.0, 10.0], [0.2, 0.0], [[0.7, 0.6], [0.5, 0.4]]).unwrap();
        assert!(sym.h(Good, Strong, 0.0) < 0.0 && sym.h(Bad, Strong, 0.0) < 0.0);
        let c = sym.classify();
        assert_eq!(c.case, Case::Case4c);
        assert_eq!(c.thresholds.len(), 1);
        let t = &c.thresholds[0];
        assert!(sym.h(Good, Strong, t.value).abs() < 1e-10);
        assert!(sym.h(Bad, Strong, t.value).abs() < 1e-10);
    }

    #[test]
    fn analytic_policy_levels() {
        let m = bundled_pair();
        assert_eq!(m.analytic_pair(0.0), HH);
        assert_eq!(m.analytic_pair(0.5), HL);
        assert_eq!(m.analytic_pair(1.0), LL);
        assert_eq!(m.analytic_pair(1.0 - 0.82 / 0.9), HL);
        let mdp = bundled::two_state();
        for i in 0..=100 {
            let level = i as f64 / 100.0;
            let numeric = solve_value_iteration(&mdp, &CoveragePolicy::Linear { level }, 1e-10, 100_000).unwrap();
            assert_eq!(m.analytic_policy(level), numeric.policy, "R = {level}");
        }
    }

    #[test]
    fn contract_and_peltzman_on_bundled_model() {
        let m = bundled_pair();
        let c = m.optimal_contract();
        assert_eq!(c.case, Case::Case4a);
        assert!((c.hi - 0.0889).abs() < 1e-3);
        assert!(!c.hi_closed);
        assert!((c.premium_slope - 21.9512).abs() < 1e-4);
        let regions = m.peltzman_regions();
        assert_eq!(regions.len(), 1);
        assert!((regions[0].lo - 0.0889).abs() < 1e-3 && regions[0].hi == 1.0);
        let mdp = bundled::two_state();
        let (hh_direct, _) = decompose_value(&mdp, &m.to_policy(HH));
        let (hl_direct, _) = decompose_value(&mdp, &m.to_policy(HL));
        assert!(hl_direct[0] > hh_direct[0]);
        assert!((m.direct_losses(Good, HL) - hl_direct[0]).abs() < 1e-10);
    }

    #[test]
    fn identities_hold_on_bundled_model() {
        let r = bundled_pair().identity_residuals(0.3);
        assert_eq!(r.residuals.len(), 10);
        assert!(r.max_residual <= 1e-12, "{r:?}");
        assert!(r.sign_agreement);
    }

    #[test]
    fn from_mdp_handles_reordered_indices() {
        let mdp = bundled::two_state();
        let mut raw = mdp.to_raw();
        raw.states.swap(0, 1);
        raw.actions.swap(0, 1);
        let t = raw.transitions.clone();
        raw.transitions = vec![
            vec![vec![t[1][1][1], t[1][1][0]], vec![t[1][0][1], t[1][0][0]]],
            vec![vec![t[0][1][1], t[0][1][0]], vec![t[0][0][1], t[0][0][0]]],
        ];
        let swapped = crate::model::validate_model(raw).unwrap();
        let m = TwoStateModel::from_mdp(&swapped).unwrap();
        assert_eq!(m, TwoStateModel { state_index: [1, 0], action_index: [1, 0], initial: Good, ..bundled_pair() });
        assert_eq!(m.analytic_policy(0.5).label(&swapped), "A_L|A_H");
    }

    #[test]
    fn rejects_non_two_by_two_and_bad_ordering() {
        assert!(matches!(TwoStateModel::from_mdp(&bundled::four_state()), Err(Error::NotTwoByTwo)));
        assert!(TwoStateModel::new(0.9, [10.0, 0.0], [1.0, 0.0], [[0.8, 0.6], [0.5, 0.5]]).is_err());
        assert!(TwoStateModel::new(0.9, [0.0, 10.0], [1.0, 1.0], [[0.8, 0.6], [0.5, 0.5]]).is_err());
        assert!(TwoStateModel::new(0.9, [0.0, 10.0], [1.0, 0.0], [[0.5, 0.6], [0.5, 0.5]]).is_err());
    }

    #[test]
    fn random_models_closed_form_matches_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let m = random_two_state(&mut rng);
            let mdp = m.to_mdp();
            let c = m.classify();
            for t in &c.thresholds {
                assert!(m.h(t.root_of.0, t.root_of.1, t.value).abs() <= 1e-10);
            }
            for w in c.intervals.windows(2) {
                assert!(w[0].hi <= w[1].lo + 1e-15 && w[0].hi >= w[0].lo);
            }
            for i in 0..=10 {
                let level = i as f64 / 10.0;
                let cov = CoveragePolicy::Linear { level };
                for pair in [HH, HL, LH, LL] {
                    let v = evaluate_policy(&mdp, &m.to_policy(pair), &cov);
                    assert!((m.vbar(Good, pair.good, pair.bad, level) - v[0]).abs() <= 1e-10 * v[0].abs().max(1.0));
                    assert!((m.vbar(Bad, pair.bad, pair.good, level) - v[1]).abs() <= 1e-10 * v[1].abs().max(1.0));
                }
                for s in TwoState::BOTH {
                    for a in Protection::BOTH {
                        assert!(m.h(s, a, level + 0.05) > m.h(s, a, level));
                    }
                }
            }
        }
    }
}

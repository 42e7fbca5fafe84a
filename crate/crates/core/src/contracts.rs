//! The insurer's side: premiums, coverage paid, operating profit, contract
//! sweeps and the zero-profit region.

use rayon::prelude::*;

use crate::coverage::CoveragePolicy;
use crate::error::{Error, Result};
use crate::evaluate::{decompose_value, evaluate_policy};
use crate::model::MdpModel;
use crate::policy::ProtectionPolicy;
use crate::solvers::{solve_policy_enumeration, solve_value_iteration, SolveResult};

/// Default value-iteration tolerance for sweeps.
pub const DEFAULT_TOL: f64 = 1e-10;
/// `|τ|` at or below this counts as zero profit.
pub const PROFIT_TOL: f64 = 1e-7;
/// Bisection stops once the switch bracket is this narrow.
pub const BRACKET_WIDTH: f64 = 1e-6;
/// Cross-check sweeps against enumeration up to this many policies.
pub const CROSS_CHECK_LIMIT: f64 = 1e4;
/// Agreement required between value iteration and enumeration.
const CROSS_CHECK_TOL: f64 = 1e-6;
const MAX_ITER: usize = 10_000_000;

pub const DEFAULT_LINEAR_POINTS: usize = 201;
pub const DEFAULT_THRESHOLD_POINTS: usize = 401;
pub const THREADS_ENV: &str = "CYINS_THREADS";

/// A premium paid up front plus a coverage function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contract {
    pub premium: f64,
    pub coverage: CoveragePolicy,
}

impl Contract {
    pub fn new(premium: f64, coverage: CoveragePolicy) -> Result<Self> {
        if !(premium.is_finite() && premium >= 0.0) {
            return Err(Error::InvalidArgument(format!("premium must be finite and non-negative, got {premium}")));
        }
        Ok(Self {
            premium,
            coverage: coverage.validated()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractSweepRow {
    /// `R` for linear sweeps, the cutoff `X_R` for threshold sweeps.
    pub parameter: f64,
    pub policy: ProtectionPolicy,
    /// `V(s_0, π*_r, r)`.
    pub user_value: f64,
    pub max_premium: f64,
    pub profit: f64,
    /// Discounted direct losses at `s_0` under the row's policy.
    pub direct_losses: f64,
    /// Discounted protection costs at `s_0` under the row's policy.
    pub protection_cost: f64,
}

impl ContractSweepRow {
    /// Coverage paid, recomputed from the stored fields.
    pub fn coverage_paid(&self) -> f64 {
        self.direct_losses + self.protection_cost - self.user_value
    }
}

/// Optimal policy and exact values under `coverage`.
pub fn solve_contract(model: &MdpModel, coverage: &CoveragePolicy, tol: f64) -> Result<SolveResult> {
    let solved = solve_value_iteration(model, coverage, tol, MAX_ITER)?;
    if !solved.converged {
        return Err(Error::InvalidArgument(format!(
            "value iteration did not converge within {MAX_ITER} iterations"
        )));
    }
    Ok(solved)
}

/// `V(s_0, π*_{r_0}, r_0) - V(s_0, π*_r, r)`: the largest premium the user accepts.
pub fn max_premium(model: &MdpModel, coverage: &CoveragePolicy, baseline: &SolveResult) -> Result<f64> {
    let solved = solve_contract(model, coverage, DEFAULT_TOL)?;
    Ok(premium_from(model, baseline, &solved))
}

fn premium_from(model: &MdpModel, baseline: &SolveResult, solved: &SolveResult) -> f64 {
    let s0 = model.initial_state();
    (baseline.values[s0] - solved.values[s0]).max(0.0)
}

/// Expected discounted coverage paid: `V(s_0, π*_r, r_0) - V(s_0, π*_r, r)`.
pub fn expected_cumulative_coverage(model: &MdpModel, coverage: &CoveragePolicy, solved: &SolveResult) -> f64 {
    let s0 = model.initial_state();
    let uninsured = evaluate_policy(model, &solved.policy, &CoveragePolicy::Zero);
    let insured = evaluate_policy(model, &solved.policy, coverage);
    uninsured[s0] - insured[s0]
}

/// Operating profit at the maximum premium: `V(s_0, π*_{r_0}, r_0) - V(s_0, π*_r, r_0)`.
pub fn insurer_profit(
    model: &MdpModel,
    _coverage: &CoveragePolicy,
    baseline: &SolveResult,
    solved: &SolveResult,
) -> f64 {
    let s0 = model.initial_state();
    baseline.values[s0] - evaluate_policy(model, &solved.policy, &CoveragePolicy::Zero)[s0]
}

/// Contract family swept by a single real parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepFamily {
    /// Parameter is the level `R` of `r(x) = R x`.
    Linear,
    /// Parameter is the cutoff `X_R`.
    Threshold { low_level: f64, high_level: f64 },
}

impl SweepFamily {
    pub fn coverage_at(&self, parameter: f64) -> CoveragePolicy {
        match *self {
            Self::Linear => CoveragePolicy::Linear { level: parameter },
            Self::Threshold { low_level, high_level } => CoveragePolicy::Threshold {
                cutoff: parameter,
                low_level,
                high_level,
            },
        }
    }

    fn check(&self, grid: &[f64]) -> Result<()> {
        if grid.is_empty() {
            return Err(Error::InvalidArgument("sweep grid is empty".into()));
        }
        if grid.windows(2).any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt())) {
            return Err(Error::InvalidArgument("sweep grid must be sorted ascending".into()));
        }
        match *self {
            Self::Linear => {
                if grid.iter().any(|r| !(0.0..=1.0).contains(r)) {
                    return Err(Error::InvalidArgument("linear coverage levels must lie in [0, 1]".into()));
                }
            }
            Self::Threshold { low_level, high_level } => {
                if !(0.0 <= low_level && low_level <= high_level && high_level <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "need 0 <= low_level <= high_level <= 1, got {low_level}, {high_level}"
                    )));
                }
                if grid.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidArgument("threshold cutoffs must be finite".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub tol: f64,
    /// Worker cap; `Some(1)` runs serially, `None` uses the global pool.
    pub threads: Option<usize>,
    /// Verify every row against enumeration when `M^N` is small enough.
    pub cross_check: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            threads: None,
            cross_check: true,
        }
    }
}

impl SweepOptions {
    /// Defaults with the worker cap read from `CYINS_THREADS`, if set.
    pub fn from_env() -> Self {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0);
        Self {
            threads,
            ..Self::default()
        }
    }
}

/// `points` evenly spaced levels over `[0, 1]`.
pub fn linear_grid(points: usize) -> Vec<f64> {
    uniform_grid(0.0, 1.0, points)
}

/// `points` cutoffs over `[0, 1.25 * max loss]`.
pub fn threshold_grid(model: &MdpModel, points: usize) -> Vec<f64> {
    uniform_grid(0.0, 1.25 * model.max_loss(), points)
}

pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        n => (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Solves the no-insurance baseline.
pub fn solve_baseline(model: &MdpModel, tol: f64) -> Result<SolveResult> {
    solve_contract(model, &CoveragePolicy::Zero, tol)
}

/// One sweep row, optionally cross-checked against enumeration.
pub fn contract_row(
    model: &MdpModel,
    baseline: &SolveResult,
    coverage: &CoveragePolicy,
    parameter: f64,
    options: &SweepOptions,
) -> Result<ContractSweepRow> {
    let solved = solve_contract(model, coverage, options.tol)?;
    let policy_count = (model.num_actions() as f64).powi(model.num_states() as i32);
    if options.cross_check && policy_count <= CROSS_CHECK_LIMIT {
        let brute = solve_policy_enumeration(model, coverage)?;
        let gap = brute.values.max_abs_diff(&solved.values);
        if gap > CROSS_CHECK_TOL {
            return Err(Error::CrossCheck(format!(
                "value iteration and enumeration differ by {gap:e} at parameter {parameter}"
            )));
        }
    }
    let s0 = model.initial_state();
    let (direct, cost) = decompose_value(model, &solved.policy);
    Ok(ContractSweepRow {
        parameter,
        user_value: solved.values[s0],
        max_premium: premium_from(model, baseline, &solved),
        profit: insurer_profit(model, coverage, baseline, &solved),
        direct_losses: direct[s0],
        protection_cost: cost[s0],
        policy: solved.policy,
    })
}

/// Rows for every grid point, in grid order. Independent of worker scheduling.
pub fn sweep(
    model: &MdpModel,
    family: SweepFamily,
    grid: &[f64],
    options: &SweepOptions,
) -> Result<Vec<ContractSweepRow>> {
    family.check(grid)?;
    let baseline = solve_baseline(model, options.tol)?;
    let row = |&p: &f64| contract_row(model, &baseline, &family.coverage_at(p), p, options);
    match options.threads {
        Some(1) => grid.iter().map(row).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?
            .install(|| grid.par_iter().map(row).collect()),
        None => grid.par_iter().map(row).collect(),
    }
}

pub fn sweep_linear(model: &MdpModel, grid: &[f64], options: &SweepOptions) -> Result<Vec<ContractSweepRow>> {
    sweep(model, SweepFamily::Linear, grid, options)
}

pub fn sweep_threshold(
    model: &MdpModel,
    low_level: f64,
    high_level: f64,
    grid: &[f64],
    options: &SweepOptions,
) -> Result<Vec<ContractSweepRow>> {
    sweep(model, SweepFamily::Threshold { low_level, high_level }, grid, options)
}

/// Narrows `(inside, outside)` by bisection until the pair is at most
/// [`BRACKET_WIDTH`] apart, keeping `inside(inside)` true and
/// `inside(outside)` false.
pub fn bisect(
    mut inside_point: f64,
    mut outside_point: f64,
    mut inside: impl FnMut(f64) -> Result<bool>,
) -> Result<(f64, f64)> {
    while (outside_point - inside_point).abs() > BRACKET_WIDTH {
        let mid = 0.5 * (inside_point + outside_point);
        if mid == inside_point || mid == outside_point {
            break;
        }
        if inside(mid)? {
            inside_point = mid;
        } else {
            outside_point = mid;
        }
    }
    Ok((inside_point, outside_point))
}

/// Refiner for [`optimal_region`]: a parameter is inside when its profit is zero.
pub fn zero_profit_refiner<'a>(
    model: &'a MdpModel,
    family: SweepFamily,
    options: &'a SweepOptions,
) -> Result<impl FnMut(f64, f64) -> Result<(f64, f64)> + 'a> {
    let baseline = solve_baseline(model, options.tol)?;
    let probe = SweepOptions {
        cross_check: false,
        ..*options
    };
    Ok(move |inside_point: f64, outside_point: f64| {
        bisect(inside_point, outside_point, |p| {
            let row = contract_row(model, &baseline, &family.coverage_at(p), p, &probe)?;
            Ok(row.profit.abs() <= PROFIT_TOL)
        })
    })
}

/// One maximal interval of the zero-profit region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
    /// `(parameter, K_max)` for every sweep row inside the interval.
    pub premiums: Vec<(f64, f64)>,
}

impl RegionInterval {
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn describe(&self) -> String {
        use crate::io::fmt_sig10;
        format!(
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            fmt_sig10(self.lo),
            fmt_sig10(self.hi),
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub intervals: Vec<RegionInterval>,
    /// Largest premium (equivalently, most coverage) among zero-profit rows.
    pub representative: ContractSweepRow,
    pub max_profit: f64,
    /// Set when a boundary was left open because the switch point itself
    /// already yields negative profit.
    pub note: Option<String>,
}

pub const OPEN_BOUNDARY_NOTE: &str = "switch points where the user's policy already differs from the \
no-insurance policy are excluded; the closed-interval convention includes them";

/// Parameters achieving zero profit, refined at switch points.
///
/// `refine(inside, outside)` returns a narrowed bracket. A boundary whose
/// inside point never moved off its grid value is reported closed there;
/// otherwise it is open at the refined outside point.
pub fn optimal_region(
    rows: &[ContractSweepRow],
    mut refine: impl FnMut(f64, f64) -> Result<(f64, f64)>,
) -> Result<RegionReport> {
    let zero = |r: &ContractSweepRow| r.profit.abs() <= PROFIT_TOL;
    let max_profit = rows.iter().map(|r| r.profit).fold(f64::NEG_INFINITY, f64::max);
    let mut intervals = Vec::new();
    let mut note = None;
    let mut i = 0;
    while i < rows.len() {
        if !zero(&rows[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < rows.len() && zero(&rows[i + 1]) {
            i += 1;
        }
        let end = i;
        i += 1;

        let mut edge = |inside_idx: usize, outside_idx: Option<usize>| -> Result<(f64, bool)> {
            let grid_point = rows[inside_idx].parameter;
            let Some(out) = outside_idx else {
                return Ok((grid_point, true));
            };
            let (inside, outside) = refine(grid_point, rows[out].parameter)?;
            if inside == grid_point {
                Ok((inside, true))
            } else {
                note = Some(OPEN_BOUNDARY_NOTE.to_string());
                Ok((outside, false))
            }
        };
        let (lo, lo_closed) = edge(start, start.checked_sub(1))?;
        let (hi, hi_closed) = edge(end, (end + 1 < rows.len()).then_some(end + 1))?;
        intervals.push(RegionInterval {
            lo,
            hi,
            lo_closed,
            hi_closed,
            premiums: rows[start..=end].iter().map(|r| (r.parameter, r.max_premium)).collect(),
        });
    }
    // Ties go to the earliest row, e.g. the lowest cutoff on a flat premium step.
    let representative = rows
        .iter()
        .filter(|r| zero(r))
        .fold(None::<&ContractSweepRow>, |best, r| match best {
            Some(b) if b.max_premium >= r.max_premium => Some(b),
            _ => Some(r),
        })
        .cloned()
        .ok_or_else(|| Error::InvalidArgument("sweep has no zero-profit row".into()))?;
    Ok(RegionReport {
        intervals,
        representative,
        max_profit,
        note,
    })
}

/// A change of optimal policy between neighbouring sweep parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySwitch {
    /// Refined bracket: `before` still has the old policy, `after` the new one.
    pub before: f64,
    pub after: f64,
    pub from: ProtectionPolicy,
    pub to: ProtectionPolicy,
}

/// Policy switches along a sweep, each refined by bisection. Regimes too
/// narrow to contain a grid point are found while walking each bracket.
pub fn policy_switches(
    model: &MdpModel,
    family: SweepFamily,
    rows: &[ContractSweepRow],
    options: &SweepOptions,
) -> Result<Vec<PolicySwitch>> {
    let policy_at = |p: f64| Ok::<_, Error>(solve_contract(model, &family.coverage_at(p), options.tol)?.policy);
    let mut out = Vec::new();
    for w in rows.windows(2) {
        let (mut start, mut current) = (w[0].parameter, w[0].policy.clone());
        while current != w[1].policy {
            let (before, after) = bisect(start, w[1].parameter, |p| Ok(policy_at(p)? == current))?;
            let to = policy_at(after)?;
            out.push(PolicySwitch {
                before,
                after,
                from: current,
                to: to.clone(),
            });
            if after >= w[1].parameter {
                break;
            }
            (start, current) = (after, to);
        }
    }
    Ok(out)
}

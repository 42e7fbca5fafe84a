//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use cyins::analytic::{Case, Protection, ThresholdKind, TwoState, TwoStateModel};
use cyins::bundled;
use cyins::contracts::{
    linear_grid, optimal_region, solve_contract, sweep, sweep_linear, threshold_grid, zero_profit_refiner,
    SweepFamily, SweepOptions, DEFAULT_TOL,
};
use cyins::montecarlo::{simulate_value, SimulationConfig};
use cyins::reproduce::{reproduce, Study};
use cyins::solvers::{solve_lp, solve_policy_enumeration, solve_value_iteration};
use cyins::testutil::{random_coverage, random_model, random_two_state};
use cyins::{decompose_value, evaluate_policy, CoveragePolicy, ProtectionPolicy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;
type Criterion = fn() -> Check;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn near(name: &str, got: f64, want: f64, tol: f64) -> Check {
    ensure((got - want).abs() <= tol, || format!("{name} = {got}, expected {want} ± {tol}"))
}

fn two_state() -> TwoStateModel {
    TwoStateModel::from_mdp(&bundled::two_state()).unwrap()
}

fn golden_numbers() -> Check {
    use Protection::{Strong, Weak};
    use TwoState::{Bad, Good};
    let m = two_state();
    near("rho", m.rho(), -0.20, 1e-12)?;
    near("h(S_G,A_H,0)", m.h(Good, Strong, 0.0), -1.88, 1e-9)?;
    near("h(S_G,A_L,0)", m.h(Good, Weak, 0.0), -1.70, 1e-9)?;
    near("h(S_B,A_H,0)", m.h(Bad, Strong, 0.0), -0.08, 1e-9)?;
    near("h(S_B,A_L,0)", m.h(Bad, Weak, 0.0), 0.10, 1e-9)?;
    let c = m.classify();
    ensure(c.case == Case::Case4a, || format!("case {}", c.case))?;
    let r_b = c
        .thresholds
        .iter()
        .find(|t| t.kind == ThresholdKind::RB)
        .ok_or("no R_B threshold")?
        .value;
    near("R_B", r_b, 0.0889, 1e-3)?;
    near("R_B (closed form)", r_b, 1.0 - 0.82 / 0.9, 1e-9)?;
    let k = m.k_coeff(Good, Strong, Strong);
    near("k", k, 21.9512, 1e-3)?;
    near("k (closed form)", k, 1.8 / 0.082, 1e-6)
}

fn optimal_contract() -> Check {
    let model = bundled::two_state();
    let options = SweepOptions::default();
    let rows = sweep_linear(&model, &linear_grid(201), &options).map_err(|e| e.to_string())?;
    let refiner = zero_profit_refiner(&model, SweepFamily::Linear, &options).map_err(|e| e.to_string())?;
    let region = optimal_region(&rows, refiner).map_err(|e| e.to_string())?;
    ensure(region.intervals.len() == 1, || format!("{} intervals", region.intervals.len()))?;
    let iv = &region.intervals[0];
    ensure(iv.lo == 0.0 && iv.lo_closed, || format!("region starts at {}", iv.describe()))?;
    near("region upper end", iv.hi, 0.0889, 1e-3)?;
    let k = 1.8 / 0.082;
    let deviation = iv.premiums.iter().map(|&(r, km)| (km - r * k).abs()).fold(0.0, f64::max);
    ensure(deviation <= 1e-6, || format!("K(R) deviates from R k by {deviation:e}"))?;
    near("max profit", region.max_profit, 0.0, 1e-7)?;
    let last = rows.last().unwrap();
    ensure(last.parameter == 1.0, || "grid does not end at 1".into())?;
    near("profit at R = 1", last.profit, -13.0488, 1e-3)
}

fn solver_cross_validation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..200 {
        let model = random_model(&mut rng, 4, 3, 0.5, 0.99);
        let coverage = random_coverage(&mut rng, model.max_loss());
        let vi = solve_value_iteration(&model, &coverage, 1e-10, 10_000_000).map_err(|e| e.to_string())?;
        let lp = solve_lp(&model, &coverage).map_err(|e| e.to_string())?;
        let en = solve_policy_enumeration(&model, &coverage).map_err(|e| e.to_string())?;
        for (name, other) in [("LP", &lp), ("enumeration", &en)] {
            let gap = vi.values.max_abs_diff(&other.values);
            ensure(gap <= 1e-6, || format!("model {i}: VI and {name} values differ by {gap:e}"))?;
            if other.policy != vi.policy {
                // Tie-equivalent: each policy must attain the other's values.
                let v = evaluate_policy(&model, &other.policy, &coverage);
                let gap = v.max_abs_diff(&vi.values);
                ensure(gap <= 1e-6, || format!("model {i}: {name} policy is not tie-equivalent ({gap:e})"))?;
            }
        }
    }
    Ok(())
}

fn analytic_numeric_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_identity = 0.0f64;
    for i in 0..100 {
        let m = random_two_state(&mut rng);
        let mdp = m.to_mdp();
        let thresholds: Vec<f64> = m.classify().thresholds.iter().map(|t| t.value).collect();
        for j in 0..=10 {
            let level = j as f64 / 10.0;
            let coverage = CoveragePolicy::Linear { level };
            for good in Protection::BOTH {
                for bad in Protection::BOTH {
                    let pair = cyins::analytic::PolicyPair::new(good, bad);
                    let v = evaluate_policy(&mdp, &m.to_policy(pair), &coverage);
                    let closed = [m.vbar(TwoState::Good, good, bad, level), m.vbar(TwoState::Bad, bad, good, level)];
                    for s in 0..2 {
                        let gap = (closed[s] - v[s]).abs();
                        ensure(gap <= 1e-10, || format!("model {i}, R={level}: vbar off by {gap:e}"))?;
                    }
                }
            }
            if thresholds.iter().all(|t| (t - level).abs() > 1e-6) {
                let numeric = solve_value_iteration(&mdp, &coverage, 1e-12, 10_000_000).map_err(|e| e.to_string())?;
                ensure(numeric.policy == m.analytic_policy(level), || {
                    format!(
                        "model {i}, R={level}: analytic {} vs numeric {}",
                        m.analytic_policy(level).label(&mdp),
                        numeric.policy.label(&mdp)
                    )
                })?;
            }
            let report = m.identity_residuals(level);
            ensure(report.sign_agreement, || format!("model {i}, R={level}: sign disagreement"))?;
            worst_identity = worst_identity.max(report.max_residual);
        }
    }
    ensure(worst_identity <= 1e-10, || format!("identity residual {worst_identity:e}"))
}

fn fig4_behavior() -> Check {
    let model = bundled::four_state();
    let rows = sweep_linear(&model, &linear_grid(201), &SweepOptions::default()).map_err(|e| e.to_string())?;
    for w in rows.windows(2) {
        let (a, b) = (w[0].policy.state_costs(&model), w[1].policy.state_costs(&model));
        ensure(a.iter().zip(&b).all(|(x, y)| y <= x), || {
            format!("protection cost rises between R={} and R={}", w[0].parameter, w[1].parameter)
        })?;
    }
    for w in rows.windows(3) {
        if w[0].policy == w[1].policy && w[1].policy == w[2].policy {
            let t = (w[1].parameter - w[0].parameter) / (w[2].parameter - w[0].parameter);
            let line = w[0].max_premium + t * (w[2].max_premium - w[0].max_premium);
            let residual = (w[1].max_premium - line).abs();
            ensure(residual <= 1e-7, || format!("K not affine near R={}: {residual:e}", w[1].parameter))?;
        }
    }
    let max_profit = rows.iter().map(|r| r.profit).fold(f64::NEG_INFINITY, f64::max);
    near("max profit", max_profit, 0.0, 1e-7)
}

fn fig5_behavior() -> Check {
    let model = bundled::four_state();
    let family = SweepFamily::Threshold {
        low_level: 0.0,
        high_level: 0.9,
    };
    let rows = sweep(&model, family, &threshold_grid(&model, 401), &SweepOptions::default()).map_err(|e| e.to_string())?;
    ensure(rows.last().unwrap().parameter == 20.0, || "grid does not end at 20".into())?;
    for w in rows.windows(2) {
        ensure(w[1].max_premium <= w[0].max_premium, || {
            format!("K rises between X_R={} and X_R={}", w[0].parameter, w[1].parameter)
        })?;
    }
    // Staircase: K only moves where the cutoff crosses a loss level.
    let mut losses: Vec<f64> = model.states().iter().map(|s| s.loss).collect();
    losses.sort_by(f64::total_cmp);
    let bucket = |x: f64| losses.iter().filter(|&&l| l <= x).count();
    for w in rows.windows(2) {
        if bucket(w[0].parameter) == bucket(w[1].parameter) {
            ensure(w[0].max_premium == w[1].max_premium, || {
                format!("K changes inside a step near X_R={}", w[1].parameter)
            })?;
        }
    }
    for r in rows.iter().filter(|r| r.parameter > 16.0) {
        ensure(r.max_premium == 0.0 && r.profit == 0.0, || {
            format!("X_R={}: K={}, profit={}", r.parameter, r.max_premium, r.profit)
        })?;
    }
    let max_profit = rows.iter().map(|r| r.profit).fold(f64::NEG_INFINITY, f64::max);
    near("max profit", max_profit, 0.0, 1e-7)
}

fn peltzman() -> Check {
    let model = bundled::two_state();
    let s0 = model.initial_state();
    let direct_at = |level: f64| -> Result<f64, String> {
        let solved = solve_contract(&model, &CoveragePolicy::Linear { level }, DEFAULT_TOL).map_err(|e| e.to_string())?;
        Ok(decompose_value(&model, &solved.policy).0[s0])
    };
    let base = direct_at(0.0)?;
    for level in [0.1, 0.5, 1.0] {
        let d = direct_at(level)?;
        ensure(d - base >= 1e-6, || format!("R={level}: V_d={d}, baseline {base}"))?;
    }
    Ok(())
}

fn monte_carlo() -> Check {
    let two = bundled::two_state();
    let hh = ProtectionPolicy::uniform(&two, two.action_index("A_H").unwrap()).unwrap();
    let four = bundled::four_state();
    let half = CoveragePolicy::Linear { level: 0.5 };
    let four_policy = solve_contract(&four, &half, DEFAULT_TOL).map_err(|e| e.to_string())?.policy;
    let cases = [
        ("two-state, A_H everywhere, no coverage", &two, hh, CoveragePolicy::Zero),
        ("four-state, optimal policy, linear 0.5", &four, four_policy, half),
    ];
    for (name, model, policy, coverage) in cases {
        let exact = evaluate_policy(model, &policy, &coverage)[model.initial_state()];
        let mut hits = 0;
        for seed in 0..20 {
            let config = SimulationConfig::for_model(model, 100_000, seed);
            let est = simulate_value(model, &policy, &coverage, &config).map_err(|e| e.to_string())?;
            if est.covers(exact, 3.0) {
                hits += 1;
            }
        }
        ensure(hits >= 18, || format!("{name}: only {hits}/20 seeds within 3 standard errors"))?;
    }
    Ok(())
}

fn determinism() -> Check {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let serial = SweepOptions {
        threads: Some(1),
        ..SweepOptions::default()
    };
    let parallel = SweepOptions {
        threads: Some(4),
        ..SweepOptions::default()
    };
    for study in Study::ALL {
        let runs = [
            reproduce(study, dirs[0].path(), &SweepOptions::default()),
            reproduce(study, dirs[1].path(), &SweepOptions::default()),
            reproduce(study, dirs[2].path(), &serial),
        ];
        let mut files = Vec::new();
        for run in runs {
            let out = run.map_err(|e| e.to_string())?;
            files.push((fs::read(&out.csv_path).unwrap(), fs::read(&out.summary_path).unwrap()));
        }
        ensure(files[0] == files[1], || format!("{study}: repeated runs differ"))?;
        ensure(files[0] == files[2], || format!("{study}: serial and parallel runs differ"))?;
    }
    let model = bundled::four_state();
    let grid = linear_grid(201);
    let a = sweep_linear(&model, &grid, &serial).map_err(|e| e.to_string())?;
    let b = sweep_linear(&model, &grid, &parallel).map_err(|e| e.to_string())?;
    ensure(a == b, || "serial and parallel sweeps differ".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("golden numbers of the two-state model", golden_numbers),
        ("optimal contract on the two-state model", optimal_contract),
        ("solver cross-validation on 200 random models", solver_cross_validation),
        ("analytic and numeric engines agree", analytic_numeric_equivalence),
        ("four-state linear sweep behavior", fig4_behavior),
        ("four-state threshold sweep behavior", fig5_behavior),
        ("Peltzman effect on the two-state model", peltzman),
        ("Monte-Carlo consistency", monte_carlo),
        ("determinism of studies and sweeps", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(()) => println!("criterion {}: PASS: {name}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL: {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

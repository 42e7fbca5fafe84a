//! The three bundled numerical studies, written as CSV plus a `key=value`
//! summary.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analytic::{TwoState, TwoStateModel};
use crate::bundled;
use crate::contracts::{
    linear_grid, optimal_region, policy_switches, sweep, threshold_grid, zero_profit_refiner, ContractSweepRow,
    RegionReport, SweepFamily, SweepOptions, DEFAULT_LINEAR_POINTS, DEFAULT_THRESHOLD_POINTS,
};
use crate::error::{Error, Result};
use crate::io::{fmt_sig10, sweep_csv, write_file};
use crate::model::MdpModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    /// Linear coverage on the two-state model, with the closed-form overlay.
    Fig3,
    /// Linear coverage on the four-state model.
    Fig4,
    /// Threshold coverage (`R_0 = 0`, `R_1 = 0.9`) on the four-state model.
    Fig5,
}

impl Study {
    pub const ALL: [Study; 3] = [Study::Fig3, Study::Fig4, Study::Fig5];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown study '{s}', expected fig3, fig4 or fig5")))
    }
}

pub const FIG5_LOW_LEVEL: f64 = 0.0;
pub const FIG5_HIGH_LEVEL: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub rows: Vec<ContractSweepRow>,
    pub summary: Vec<(String, String)>,
}

impl StudyOutput {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Runs `study` and writes `<study>.csv` and `<study>_summary.txt` into `out_dir`.
pub fn reproduce(study: Study, out_dir: &Path, options: &SweepOptions) -> Result<StudyOutput> {
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let (model, family, grid) = match study {
        Study::Fig3 => (bundled::two_state(), SweepFamily::Linear, linear_grid(DEFAULT_LINEAR_POINTS)),
        Study::Fig4 => (bundled::four_state(), SweepFamily::Linear, linear_grid(DEFAULT_LINEAR_POINTS)),
        Study::Fig5 => {
            let m = bundled::four_state();
            let grid = threshold_grid(&m, DEFAULT_THRESHOLD_POINTS);
            let family = SweepFamily::Threshold {
                low_level: FIG5_LOW_LEVEL,
                high_level: FIG5_HIGH_LEVEL,
            };
            (m, family, grid)
        }
    };
    let rows = sweep(&model, family, &grid, options)?;
    let region = optimal_region(&rows, zero_profit_refiner(&model, family, options)?)?;

    let mut summary = vec![("study".to_string(), study.name().to_string())];
    let csv = match study {
        Study::Fig3 => {
            let analytic = TwoStateModel::from_mdp(&model)?;
            summary.extend(analytic_summary(&analytic));
            fig3_csv(&model, &analytic, &rows)
        }
        _ => {
            let switches = policy_switches(&model, family, &rows, options)?;
            summary.push(("baseline_policy".into(), rows[0].policy.label(&model)));
            summary.push(("baseline_value".into(), fmt_sig10(rows[0].user_value)));
            summary.push(("switches".into(), switches.len().to_string()));
            for (i, s) in switches.iter().enumerate() {
                summary.push((
                    format!("switch_{}", i + 1),
                    format!(
                        "{}..{} {} -> {}",
                        fmt_sig10(s.before),
                        fmt_sig10(s.after),
                        s.from.label(&model),
                        s.to.label(&model)
                    ),
                ));
            }
            sweep_csv(&model, &rows, &[], |_, _| vec![])
        }
    };
    summary.extend(region_summary(&region, &rows));

    let csv_path = out_dir.join(format!("{study}.csv"));
    let summary_path = out_dir.join(format!("{study}_summary.txt"));
    write_file(&csv_path, &csv)?;
    let text: String = summary.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    write_file(&summary_path, &text)?;
    Ok(StudyOutput {
        csv_path,
        summary_path,
        rows,
        summary,
    })
}

/// Classification, `h` values, thresholds and closed-form contract.
pub fn analytic_summary(m: &TwoStateModel) -> Vec<(String, String)> {
    use crate::analytic::Protection::{Strong, Weak};
    let c = m.classify();
    let contract = m.optimal_contract();
    let mut out = vec![("case".to_string(), c.case.to_string()), ("rho".into(), fmt_sig10(c.rho))];
    for (s, sn) in [(TwoState::Good, "S_G"), (TwoState::Bad, "S_B")] {
        for (a, an) in [(Strong, "A_H"), (Weak, "A_L")] {
            out.push((format!("h({sn},{an},0)"), fmt_sig10(m.h(s, a, 0.0))));
        }
    }
    for t in &c.thresholds {
        out.push((t.kind.to_string(), fmt_sig10(t.value)));
    }
    out.push(("k".into(), fmt_sig10(contract.premium_slope)));
    out.push(("analytic_region".into(), {
        let close = if contract.hi_closed { ']' } else { ')' };
        format!("[{}, {}{close}", fmt_sig10(contract.lo), fmt_sig10(contract.hi))
    }));
    out
}

fn region_summary(region: &RegionReport, rows: &[ContractSweepRow]) -> Vec<(String, String)> {
    let intervals: Vec<String> = region.intervals.iter().map(|i| i.describe()).collect();
    let mut out = vec![
        ("region".to_string(), intervals.join(" U ")),
        ("representative_param".into(), fmt_sig10(region.representative.parameter)),
        ("representative_premium".into(), fmt_sig10(region.representative.max_premium)),
        ("max_profit".into(), fmt_sig10(region.max_profit)),
        ("min_profit".into(), fmt_sig10(rows.iter().map(|r| r.profit).fold(f64::INFINITY, f64::min))),
    ];
    if let Some(last) = rows.last() {
        out.push(("profit_at_last".into(), fmt_sig10(last.profit)));
    }
    if let Some(note) = &region.note {
        out.push(("note".into(), note.clone()));
    }
    out
}

fn fig3_csv(model: &MdpModel, analytic: &TwoStateModel, rows: &[ContractSweepRow]) -> String {
    let c = analytic.classify();
    let s0 = analytic.initial();
    let mut header = vec!["analytic_policy", "analytic_value", "case"];
    let names: Vec<String> = c.thresholds.iter().map(|t| t.kind.to_string()).collect();
    header.extend(names.iter().map(String::as_str));
    sweep_csv(model, rows, &header, |_, row| {
        let level = row.parameter;
        let pair = analytic.analytic_pair(level);
        let value = analytic.vbar(s0, pair.at(s0), pair.at(s0.other()), level);
        let mut cells = vec![analytic.to_policy(pair).label(model), fmt_sig10(value), c.case.to_string()];
        cells.extend(c.thresholds.iter().map(|t| fmt_sig10(t.value)));
        cells
    })
}

//! Model files and CSV rendering.
//!
//! A model file is TOML with keys `discount`, `initial_state`, `states`
//! (array of `{name, loss}`), `actions` (array of `{name, cost}`) and
//! `transitions` (nested array indexed `[action][from][to]`).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::contracts::ContractSweepRow;
use crate::error::{Error, Result};
use crate::model::{validate_model, MdpModel, RawModel};

pub const SWEEP_CSV_HEADER: &str =
    "param,policy,user_value,max_premium,profit,direct_losses,protection_cost";

/// Parses model text; `origin` names the source in diagnostics.
pub fn parse_model(text: &str, origin: impl AsRef<Path>) -> Result<MdpModel> {
    let raw: RawModel = toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.as_ref().to_path_buf(),
        message: e.to_string().trim_end().to_string(),
    })?;
    Ok(validate_model(raw)?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MdpModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model(&text, path)
}

pub fn model_to_string(model: &MdpModel) -> String {
    toml::to_string(&model.to_raw()).expect("model serializes to TOML")
}

pub fn save_model(model: &MdpModel, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &model_to_string(model))
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: PathBuf::from(path),
        source,
    })
}

/// Renders `x` with 10 significant digits, `%.10g` style.
pub fn fmt_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// One CSV line per row, header first. `extra` appends columns to each row.
pub fn sweep_csv(
    model: &MdpModel,
    rows: &[ContractSweepRow],
    extra_header: &[&str],
    extra: impl Fn(usize, &ContractSweepRow) -> Vec<String>,
) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    for h in extra_header {
        out.push(',');
        out.push_str(h);
    }
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_sig10(row.parameter),
            row.policy.label(model),
            fmt_sig10(row.user_value),
            fmt_sig10(row.max_premium),
            fmt_sig10(row.profit),
            fmt_sig10(row.direct_losses),
            fmt_sig10(row.protection_cost),
        );
        for cell in extra(i, row) {
            out.push(',');
            out.push_str(&cell);
        }
        out.push('\n');
    }
    out
}

//! Models shipped with the crate.

use crate::io::parse_model;
use crate::model::MdpModel;

pub const TWO_STATE_SOURCE: &str = include_str!("../models/two_state.model");
pub const FOUR_STATE_SOURCE: &str = include_str!("../models/four_state.model");

/// Two states (`S_G`, `S_B`), two actions (`A_H`, `A_L`), discount 0.9.
pub fn two_state() -> MdpModel {
    parse_model(TWO_STATE_SOURCE, "two_state.model").expect("bundled two-state model is valid")
}

/// Four states (`S_G`, `S_B1`..`S_B3`), three actions (`A_0`, `A_L`, `A_H`), discount 0.9.
pub fn four_state() -> MdpModel {
    parse_model(FOUR_STATE_SOURCE, "four_state.model").expect("bundled four-state model is valid")
}

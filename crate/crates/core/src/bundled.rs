//! Example specs shipped with the crate.

use crate::error::{Error, Result};
use crate::symbol::SystemSpec;

pub const EXAMPLE_1_1: &str = include_str!("../specs/example_1_1.json");
pub const FIRST_ORDER_ONLY: &str = include_str!("../specs/example_1_1_firstorder_only.json");
pub const IMAGINARY_DIAGONAL: &str = include_str!("../specs/imaginary_diagonal.json");
pub const QUASILINEAR_DEMO: &str = include_str!("../specs/quasilinear_demo.json");
pub const TURING_PAIR: &str = include_str!("../specs/turing_pair.json");

pub const NAMES: [&str; 5] = [
    "example_1_1",
    "example_1_1_firstorder_only",
    "imaginary_diagonal",
    "quasilinear_demo",
    "turing_pair",
];

pub fn text(name: &str) -> Option<&'static str> {
    Some(match name.trim_end_matches(".json") {
        "example_1_1" => EXAMPLE_1_1,
        "example_1_1_firstorder_only" => FIRST_ORDER_ONLY,
        "imaginary_diagonal" => IMAGINARY_DIAGONAL,
        "quasilinear_demo" => QUASILINEAR_DEMO,
        "turing_pair" => TURING_PAIR,
        _ => return None,
    })
}

/// Parses one of the bundled system specs (not the ODE pair).
pub fn spec(name: &str) -> Result<SystemSpec> {
    let text = text(name).ok_or_else(|| Error::Invalid(format!("no bundled spec named `{name}`")))?;
    SystemSpec::from_json_str(text)
}

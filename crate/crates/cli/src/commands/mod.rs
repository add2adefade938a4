pub mod atm;
pub mod learn;
pub mod refine;
pub mod terrain;
pub mod thermo_table;

use crate::error::CliError;

/// Files to write, plus an error to report after writing them.
#[derive(Default)]
pub struct Outputs {
    pub files: Vec<(String, String)>,
    pub failure: Option<CliError>,
}

impl Outputs {
    pub fn push(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

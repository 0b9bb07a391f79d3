//! CSV emission with a reproducibility header.
//!
//! Every file starts with `#`-prefixed comment lines echoing the scenario
//! name, the full resolved configuration, and the seed, so identical inputs
//! produce byte-identical files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::CliError;

/// RFC-4180-style quoting: quote when the field contains commas, quotes or
/// line breaks, doubling embedded quotes.
fn quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub struct CsvDoc {
    scenario: String,
    resolved: BTreeMap<String, String>,
    seed: Option<u64>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvDoc {
    pub fn new(scenario: &str, resolved: BTreeMap<String, String>, seed: Option<u64>) -> Self {
        CsvDoc {
            scenario: scenario.to_string(),
            resolved,
            seed,
            header: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn header(&mut self, columns: &[&str]) -> &mut Self {
        self.header = columns.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn row(&mut self, fields: Vec<String>) -> &mut Self {
        self.rows.push(fields);
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# ensembleq scenario = {}\n", self.scenario));
        for (k, v) in &self.resolved {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        if let Some(seed) = self.seed {
            out.push_str(&format!("# seed = {seed}\n"));
        }
        if !self.header.is_empty() {
            let cols: Vec<String> = self.header.iter().map(|c| quote(c)).collect();
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        for row in &self.rows {
            let cols: Vec<String> = row.iter().map(|c| quote(c)).collect();
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut file = std::fs::File::create(path)
            .map_err(|e| CliError::io(format!("creating {}: {e}", path.display())))?;
        file.write_all(self.render().as_bytes())
            .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?;
        Ok(())
    }
}

/// Shortest round-trip decimal formatting (deterministic for a given build).
pub fn fmt(x: f64) -> String {
    format!("{x}")
}

//! Text documents: triples in, results out.
//!
//! Documents are JSON. Lines whose first non-blank character is `#` are
//! header comments and are skipped by the reader.

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{LevyError, Result};
use crate::triple::LevyTriple;

/// Strips `#` header lines.
pub fn strip_header(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join("\n")
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(&strip_header(text)).map_err(|e| LevyError::Document(e.to_string()))
}

/// Parses a triple document and checks its parameters (no integrals).
pub fn parse_triple(text: &str) -> Result<LevyTriple> {
    let t: LevyTriple = parse(text)?;
    t.check_structure()?;
    Ok(t)
}

pub fn render<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::LevyMeasure;

    #[test]
    fn header_lines_are_skipped() {
        let text = "# generated\n{\"shift\": 1, \"gauss_var\": 0,\n \"measure\": {\"type\": \"discrete\", \"atoms\": [{\"x\": 1, \"mass\": 1}]}}";
        assert_eq!(parse_triple(text).unwrap(), LevyTriple::poisson(1.0));
    }

    #[test]
    fn round_trip() {
        let t = LevyTriple::new(0.5, 2.0, LevyMeasure::ITransformed { seed: Box::new(LevyMeasure::discrete(&[(2.0, 0.1)])) });
        assert_eq!(parse_triple(&render(&t)).unwrap(), t);
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(parse_triple("{"), Err(LevyError::Document(_))));
        assert!(matches!(parse_triple(r#"{"shift": 0, "gauss_var": 0, "measure": {"type": "bogus"}}"#), Err(LevyError::Document(_))));
        assert!(matches!(parse_triple(r#"{"shift": 0, "gauss_var": -1}"#), Err(LevyError::InvalidParameter(_))));
    }
}

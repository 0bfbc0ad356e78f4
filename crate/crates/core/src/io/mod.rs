//! Text formats and built-in models.

mod format;
mod healthcare;
mod policy;

pub use format::{parse, parse_document, parse_unvalidated, serialize, ParseError, PomdpDocument, ValueKind};
pub use healthcare::{healthcare_model, HEALTHCARE_ID};
pub use policy::{parse_policy, write_policy, PolicyFile};

use crate::model::Belief;

/// Parses a comma-separated probability vector such as `"0.2,0.5,0.3"`.
pub fn parse_belief(text: &str) -> crate::Result<Belief> {
    let weights = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| crate::Error::InvalidBelief(format!("{s:?}: {e}")))
        })
        .collect::<crate::Result<Vec<f64>>>()?;
    Belief::new(weights)
}

#[cfg(test)]
mod tests {
    use super::parse_belief;

    #[test]
    fn belief_strings() {
        assert_eq!(parse_belief("0,0,1").unwrap().as_slice(), &[0.0, 0.0, 1.0]);
        assert_eq!(parse_belief(" 1 , 1 ").unwrap().as_slice(), &[0.5, 0.5]);
        assert!(parse_belief("0,0").is_err());
        assert!(parse_belief("a,b").is_err());
        assert!(parse_belief("").is_err());
    }
}

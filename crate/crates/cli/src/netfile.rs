//! The JSON network file: either
//! `{"symmetric": {"K": 3, "ps": 0.1, "pd": 0.1}}` or
//! `{"relays": [{"ps": 0.1, "pd": 0.3}, ...]}`.

use std::path::Path;

use bspr::{NetworkSpec, RelayLink, SymmetricSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symmetric: Option<SymmetricSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relays: Option<Vec<RelayLink>>,
}

/// A validated network description in one of the two file forms.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkFile {
    Symmetric(SymmetricSpec),
    Relays(NetworkSpec),
}

impl NetworkFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawFile =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("network file: {e}")))?;
        match (raw.symmetric, raw.relays) {
            (Some(s), None) => Ok(Self::Symmetric(SymmetricSpec::new(s.k, s.p_s, s.p_d)?)),
            (None, Some(r)) => Ok(Self::Relays(NetworkSpec::new(r)?)),
            _ => Err(CliError::Input(
                "network file must contain exactly one of \"symmetric\" or \"relays\"".into(),
            )),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let raw = match self {
            Self::Symmetric(s) => RawFile {
                symmetric: Some(*s),
                relays: None,
            },
            Self::Relays(net) => RawFile {
                symmetric: None,
                relays: Some(net.relays().to_vec()),
            },
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn network(&self) -> NetworkSpec {
        match self {
            Self::Symmetric(s) => s.to_network(),
            Self::Relays(net) => net.clone(),
        }
    }

    pub fn symmetric(&self) -> Option<SymmetricSpec> {
        match self {
            Self::Symmetric(s) => Some(*s),
            Self::Relays(net) => net.as_symmetric(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_both_forms() {
        let s = NetworkFile::parse(r#"{"symmetric": {"K": 3, "ps": 0.1, "pd": 0.2}}"#).unwrap();
        assert_eq!(s.network().len(), 3);
        assert!(s.symmetric().is_some());
        let r = NetworkFile::parse(r#"{"relays": [{"ps": 0.1, "pd": 0.3}, {"ps": 0.2, "pd": 0.3}]}"#).unwrap();
        assert_eq!(r.network().source_crossovers(), vec![0.1, 0.2]);
        assert!(r.symmetric().is_none());
    }

    #[test]
    fn rejects_malformed_files() {
        for bad in [
            "{}",
            r#"{"symmetric": {"K": 2, "ps": 0.1, "pd": 0.1}, "relays": []}"#,
            r#"{"relays": []}"#,
            r#"{"relays": [{"ps": 0.6, "pd": 0.1}]}"#,
            r#"{"symmetric": {"K": 0, "ps": 0.1, "pd": 0.1}}"#,
            r#"{"symmetric": {"K": 2, "ps": 0.5, "pd": 0.1}}"#,
            r#"{"Relays": [{"ps": 0.1, "pd": 0.1}]}"#,
            r#"{"relays": [{"ps": 0.1}]}"#,
            "not json",
        ] {
            assert!(NetworkFile::parse(bad).is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn relay_files_round_trip_byte_identically(
            links in proptest::collection::vec((0.0f64..=0.5, 0.0f64..=0.5), 1..12)
        ) {
            let net = NetworkSpec::new(links.into_iter().map(|(s, d)| RelayLink::new(s, d).unwrap()).collect()).unwrap();
            let text = NetworkFile::Relays(net).to_json();
            let again = NetworkFile::parse(&text).unwrap().to_json();
            prop_assert_eq!(text, again);
        }

        #[test]
        fn symmetric_files_round_trip_byte_identically(k in 1usize..10_000, ps in 0.0f64..0.5, pd in 0.0f64..0.5) {
            let text = NetworkFile::Symmetric(SymmetricSpec::new(k, ps, pd).unwrap()).to_json();
            let parsed = NetworkFile::parse(&text).unwrap();
            prop_assert_eq!(parsed.network().len(), k);
            prop_assert_eq!(text, parsed.to_json());
        }
    }
}

use super::{toml_error, DocumentError};
use crate::contract::SlaContract;

/// Parses a TOML contract document. Defaults are applied for omitted
/// optional fields; unknown fields are rejected.
pub fn parse_contract(text: &str) -> Result<SlaContract, DocumentError> {
    toml::from_str(text).map_err(|e| toml_error(text, e))
}

pub fn serialize_contract(contract: &SlaContract) -> Result<String, DocumentError> {
    toml::to_string_pretty(contract).map_err(|e| DocumentError::new(e.to_string()))
}

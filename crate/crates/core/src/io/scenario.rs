use super::{toml_error, DocumentError};
use crate::simulator::ScenarioConfig;

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, DocumentError> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    config.validate().map_err(|e| DocumentError::new(e.to_string()))?;
    Ok(config)
}

pub fn serialize_scenario(config: &ScenarioConfig) -> Result<String, DocumentError> {
    toml::to_string_pretty(config).map_err(|e| DocumentError::new(e.to_string()))
}

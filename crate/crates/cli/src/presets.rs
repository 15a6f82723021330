//! Figure presets, embedded at build time.

use crate::config::Config;
use crate::error::{CliError, Result};

pub const PRESETS: [(&str, &str); 11] = [
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("fig9", include_str!("../presets/fig9.toml")),
    ("fig10", include_str!("../presets/fig10.toml")),
    ("fig11", include_str!("../presets/fig11.toml")),
    ("fig12", include_str!("../presets/fig12.toml")),
    ("fig13", include_str!("../presets/fig13.toml")),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub config: Config,
}

/// Series of a preset, each with the shared top-level keys filled in.
pub fn load(id: &str) -> Result<Vec<Series>> {
    let text = PRESETS
        .iter()
        .find(|(k, _)| *k == id)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let ids: Vec<&str> = PRESETS.iter().map(|(k, _)| *k).collect();
            CliError::Usage(format!(
                "unknown figure `{id}` (expected one of {})",
                ids.join(", ")
            ))
        })?;
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(format!("{id}: {}", e.message())))?;
    let series = match table.remove("series") {
        Some(toml::Value::Array(a)) => a,
        _ => return Err(CliError::Config(format!("{id}: no series"))),
    };
    table.remove("title");
    let shared = Config::from_table(&table);
    series
        .iter()
        .map(|s| {
            let t = s
                .as_table()
                .ok_or_else(|| CliError::Config(format!("{id}: series must be tables")))?;
            let mut config = shared.clone();
            config.merge(&Config::from_table(t));
            let name = config
                .str("name")?
                .ok_or_else(|| CliError::Config(format!("{id}: series without a name")))?
                .to_string();
            Ok(Series { name, config })
        })
        .collect()
}

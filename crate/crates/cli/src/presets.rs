//! Scenario files shipped with the binary.

use anyhow::{anyhow, Result};

use crate::config::Config;

pub const PRESETS: &[(&str, &str)] = &[
    ("fig3a", include_str!("../presets/fig3a.toml")),
    ("fig3b", include_str!("../presets/fig3b.toml")),
    ("fig3c", include_str!("../presets/fig3c.toml")),
    ("fig3d", include_str!("../presets/fig3d.toml")),
    ("fig5-beat", include_str!("../presets/fig5-beat.toml")),
    ("fig9-qutrit", include_str!("../presets/fig9-qutrit.toml")),
    ("fig11-sin2", include_str!("../presets/fig11-sin2.toml")),
    ("fig13-case-a", include_str!("../presets/fig13-case-a.toml")),
    ("fig13-case-b", include_str!("../presets/fig13-case-b.toml")),
    ("fig13-case-c", include_str!("../presets/fig13-case-c.toml")),
    ("fig14-sweep", include_str!("../presets/fig14-sweep.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            anyhow!(
                "unknown preset {name:?}; available: {}",
                names().collect::<Vec<_>>().join(", ")
            )
        })
}

pub fn load(name: &str) -> Result<Config> {
    Config::parse(source(name)?)
}

//! Flat key-value configuration shared by the library and the CLI.
//!
//! ```text
//! # physics
//! gamma_s = 1.0
//! gamma_l = 0.0016667
//! delta_m = 0.474
//! epsilon_re = 1.635e-3
//! epsilon_im = 0.0
//! # optimizer
//! restarts = 3
//! max_iterations = 2000
//! tolerance = 1e-8
//! seed = 42
//! ```
//!
//! Keys not listed above are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::c;
use crate::optimize::OptimizerConfig;
use crate::physics::KaonPhysics;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub gamma_s: Option<f64>,
    pub gamma_l: Option<f64>,
    pub delta_m: Option<f64>,
    pub epsilon_re: Option<f64>,
    pub epsilon_im: Option<f64>,
    pub restarts: Option<usize>,
    pub max_iterations: Option<usize>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Physics constants with unspecified keys left at their defaults.
    pub fn physics(&self) -> Result<KaonPhysics> {
        let d = KaonPhysics::default();
        KaonPhysics::new(
            self.gamma_s.unwrap_or(d.gamma_s()),
            self.gamma_l.unwrap_or(d.gamma_l()),
            self.delta_m.unwrap_or(d.delta_m()),
            c(
                self.epsilon_re.unwrap_or(d.epsilon().re),
                self.epsilon_im.unwrap_or(d.epsilon().im),
            ),
        )
    }

    pub fn optimizer(&self) -> Result<OptimizerConfig> {
        let d = OptimizerConfig::default();
        let cfg = OptimizerConfig {
            restarts: self.restarts.unwrap_or(d.restarts),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            seed: self.seed.unwrap_or(d.seed),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

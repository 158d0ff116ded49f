use serde::{Deserialize, Serialize};

use super::GammaConstants;
use crate::error::Result;
use crate::exec::Exec;
use crate::matching::{default_eta_initial, EtaPolicy};
use crate::scalar::Arithmetic;

/// Knobs of a guided run. Every field has a default, so `{}` is a valid
/// JSON config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProcessConfig {
    pub eta_policy: EtaPolicy,
    /// Starting slack; `None` means `4 * sqrt(ln n / sqrt n)`.
    pub eta_initial: Option<f64>,
    pub eta_max: f64,
    pub arithmetic: Arithmetic,
    pub gamma_constants: GammaConstants,
    /// Keep per-step diagnostics in the outcome.
    pub record_trajectory: bool,
    /// Parallelism inside a single step.
    pub exec: Exec,
}

impl Default for ProcessConfig {
    fn default() -> Self {
        ProcessConfig {
            eta_policy: EtaPolicy::Doubling,
            eta_initial: None,
            eta_max: 1024.0,
            arithmetic: Arithmetic::F64,
            gamma_constants: GammaConstants::default(),
            record_trajectory: false,
            exec: Exec::Sequential,
        }
    }
}

impl ProcessConfig {
    pub fn eta_initial_for(&self, n: usize) -> f64 {
        self.eta_initial.unwrap_or_else(|| default_eta_initial(n))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_and_defaults() {
        let c = ProcessConfig::from_json("{}").unwrap();
        assert_eq!(c, ProcessConfig::default());
        let c = ProcessConfig::from_json(
            r#"{"eta_policy": "fixed", "eta_initial": 0.5, "arithmetic": "exact",
                "gamma_constants": {"a_factor": 2.0}, "record_trajectory": true}"#,
        )
        .unwrap();
        assert_eq!(c.eta_policy, EtaPolicy::Fixed);
        assert_eq!(c.eta_initial_for(100), 0.5);
        assert_eq!(c.arithmetic, Arithmetic::Exact);
        assert_eq!(c.gamma_constants.a_factor, 2.0);
        assert_eq!(c.gamma_constants.b_scale, 1.0);
        assert_eq!(ProcessConfig::from_json(&c.to_json()).unwrap(), c);
        assert!(ProcessConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }
}

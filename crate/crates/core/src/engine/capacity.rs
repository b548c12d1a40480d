//! Ergodic sum-capacity estimation by admission control.
//!
//! Before each frame every queue below the threshold `V` is granted `W_max`
//! bits; the long-run admitted rate approaches the policy's sum capacity from
//! below as `V` grows.

use crate::channel::UserProfile;
use crate::config::RunConfig;
use crate::error::{Result, SimError};

use super::run_simulation;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissionControl {
    /// `V`, bits.
    pub threshold: f64,
    /// `W_max`, bits granted per frame to each queue below the threshold.
    pub grant: f64,
}

impl AdmissionControl {
    pub fn new(threshold: f64, grant: f64) -> Result<Self> {
        let ac = AdmissionControl { threshold, grant };
        ac.validate()?;
        Ok(ac)
    }

    /// `V = 100 * max lambda_n * max T_n` and `W_max = V`; `None` if no user
    /// has traffic.
    pub fn default_for(users: &[UserProfile]) -> Option<Self> {
        let rate = users.iter().map(UserProfile::arrival_rate).fold(0.0, f64::max);
        let t_max = users.iter().map(|u| u.coherence_len).max()? as f64;
        let threshold = 100.0 * rate * t_max;
        (threshold > 0.0).then_some(AdmissionControl {
            threshold,
            grant: threshold,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(SimError::config(
                "admission.threshold",
                format!("must be positive, got {}", self.threshold),
            ));
        }
        // A zero grant is allowed: nothing is ever admitted.
        if !(self.grant.is_finite() && self.grant >= 0.0) {
            return Err(SimError::config(
                "admission.grant",
                format!("must be non-negative, got {}", self.grant),
            ));
        }
        Ok(())
    }
}

/// Runs `config` with admission control in place of its arrival process and
/// returns the time-average admitted bits per channel use.
pub fn estimate_capacity(config: &RunConfig, threshold: f64, grant: f64) -> Result<f64> {
    let mut cfg = config.clone();
    cfg.admission = Some(AdmissionControl::new(threshold, grant)?);
    let out = run_simulation(&cfg)?;
    Ok(out.summary.admitted_rate.unwrap_or(0.0))
}

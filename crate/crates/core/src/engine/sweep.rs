//! One-dimensional parameter sweeps.

use std::str::FromStr;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Result, SimError};
use crate::rng::derive_seed;

use super::{run_simulation, AdmissionControl, RunSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Antennas,
    SnrDb,
    Horizon,
    Period,
    Theta,
    Groups,
    TStc,
    KRandom,
    /// Admission threshold `V`.
    Threshold,
    /// Admission grant `W_max`.
    Grant,
}

impl FromStr for SweepAxis {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "antennas" | "M" => SweepAxis::Antennas,
            "snr_db" => SweepAxis::SnrDb,
            "horizon_slots" => SweepAxis::Horizon,
            "period" | "T" => SweepAxis::Period,
            "theta" => SweepAxis::Theta,
            "groups" | "K" => SweepAxis::Groups,
            "t_stc" => SweepAxis::TStc,
            "k_random" => SweepAxis::KRandom,
            "threshold" | "V" => SweepAxis::Threshold,
            "grant" | "W_max" => SweepAxis::Grant,
            other => return Err(SimError::config("axis", format!("unknown sweep axis `{other}`"))),
        })
    }
}

fn as_count(axis: &str, value: f64) -> Result<u64> {
    if value.is_finite() && value >= 0.0 && value.fract() == 0.0 && value < u32::MAX as f64 {
        Ok(value as u64)
    } else {
        Err(SimError::config(
            axis,
            format!("needs a non-negative integer, got {value}"),
        ))
    }
}

pub fn apply_axis(config: &mut RunConfig, axis: SweepAxis, value: f64) -> Result<()> {
    match axis {
        SweepAxis::Antennas => config.antennas = as_count("antennas", value)? as usize,
        SweepAxis::SnrDb => config.snr_db = value,
        SweepAxis::Horizon => config.horizon_slots = as_count("horizon_slots", value)?,
        SweepAxis::Period => config.policy.period = as_count("period", value)? as u32,
        SweepAxis::Theta => config.policy.theta = as_count("theta", value)? as u32,
        SweepAxis::Groups => config.policy.num_groups = as_count("groups", value)? as usize,
        SweepAxis::TStc => config.policy.t_stc = Some(as_count("t_stc", value)? as u32),
        SweepAxis::KRandom => config.policy.k_random = as_count("k_random", value)? as usize,
        SweepAxis::Threshold => {
            let grant = config.admission.map_or(value, |a| a.grant);
            config.admission = Some(AdmissionControl::new(value, grant)?);
        }
        SweepAxis::Grant => {
            let threshold = match config.admission {
                Some(a) => a.threshold,
                None => AdmissionControl::default_for(&config.users)
                    .map(|a| a.threshold)
                    .ok_or_else(|| SimError::config("admission.threshold", "required to sweep the grant"))?,
            };
            config.admission = Some(AdmissionControl::new(threshold, value)?);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub seed: u64,
    pub summary: RunSummary,
}

/// One independent run per value, seeded from the template's seed and the
/// value's position in `values`. Rows come back sorted by value.
pub fn sweep(template: &RunConfig, axis: &str, values: &[f64]) -> Result<Vec<SweepRow>> {
    let axis: SweepAxis = axis.parse()?;
    let configs = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut cfg = template.clone();
            apply_axis(&mut cfg, axis, v)?;
            cfg.seed = derive_seed(template.seed, i as u64);
            cfg.validate()?;
            Ok((v, cfg))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = configs
        .into_par_iter()
        .map(|(value, cfg)| {
            run_simulation(&cfg).map(|out| SweepRow {
                value,
                seed: cfg.seed,
                summary: out.summary,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::queueing::ArrivalModel;
    use crate::schedulers::{PolicyConfig, PolicyKind};

    fn template() -> RunConfig {
        let mut c = RunConfig::with_coherence(
            4,
            &[50, 50, 5],
            ArrivalModel::default(),
            PolicyConfig::new(PolicyKind::Qqs),
        )
        .unwrap();
        c.horizon_slots = 500;
        c
    }

    #[test]
    fn empty_values() {
        assert!(sweep(&template(), "antennas", &[]).unwrap().is_empty());
    }

    #[test]
    fn unknown_axis() {
        let err = sweep(&template(), "bogus", &[1.0]).unwrap_err();
        assert!(err.is_config_error());
    }

    #[test]
    fn rows_sorted_and_seeded() {
        let rows = sweep(&template(), "antennas", &[8.0, 2.0, 4.0]).unwrap();
        let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
        assert_eq!(values, vec![2.0, 4.0, 8.0]);
        let again = sweep(&template(), "antennas", &[8.0, 2.0, 4.0]).unwrap();
        assert_eq!(rows, again);
        assert_eq!(rows[2].seed, derive_seed(1, 0));
    }

    #[test]
    fn integer_axes_reject_fractions() {
        let mut c = template();
        assert!(apply_axis(&mut c, SweepAxis::Antennas, 2.5).is_err());
        apply_axis(&mut c, SweepAxis::Threshold, 100.0).unwrap();
        assert_eq!(c.admission.unwrap().grant, 100.0);
        apply_axis(&mut c, SweepAxis::Grant, 10.0).unwrap();
        assert_eq!(c.admission.unwrap().threshold, 100.0);
    }
}

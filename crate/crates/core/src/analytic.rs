//! Closed-form pilot-overhead calculators.

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AntennaLimit {
    Bounded(usize),
    /// Massive-array regime: the DoF is limited by users only.
    Unbounded,
}

/// `max(0, (T_c - N_s) / T_c) * min(M, N_s)`.
pub fn training_dof(coherence: f64, num_scheduled: u32, antennas: AntennaLimit) -> Result<f64> {
    if !(coherence.is_finite() && coherence >= 1.0) {
        return Err(SimError::param("coherence", format!("must be >= 1, got {coherence}")));
    }
    let ns = num_scheduled as f64;
    let dof = match antennas {
        AntennaLimit::Bounded(m) => ns.min(m as f64),
        AntennaLimit::Unbounded => ns,
    };
    Ok(((coherence - ns) / coherence).max(0.0) * dof)
}

/// One time-sharing mode: a user set served for a fraction of the time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeShareMode {
    /// Block length of each user in the mode.
    pub coherence: Vec<f64>,
    pub fraction: f64,
}

impl TimeShareMode {
    pub fn new(coherence: Vec<f64>, fraction: f64) -> Result<Self> {
        if coherence.is_empty() {
            return Err(SimError::param("user_set", "a mode needs at least one user"));
        }
        if coherence.iter().any(|t| t.is_nan() || *t < 1.0) {
            return Err(SimError::param("coherence", "block lengths must be >= 1"));
        }
        if !(0.0..=1.0).contains(&fraction) {
            return Err(SimError::param(
                "fraction",
                format!("must lie in [0, 1], got {fraction}"),
            ));
        }
        Ok(TimeShareMode { coherence, fraction })
    }

    /// `1 - sum 1/T_n` for a multiplexed mode, 1 for a single user, floored at 0.
    pub fn efficiency(&self) -> f64 {
        if self.coherence.len() > 1 {
            (1.0 - self.coherence.iter().map(|t| 1.0 / t).sum::<f64>()).max(0.0)
        } else {
            1.0
        }
    }

    /// Sum rate contributed per unit time when active, with unit user rates.
    pub fn rate(&self) -> f64 {
        self.coherence.len() as f64 * self.efficiency()
    }
}

/// Sum rate of a time-sharing schedule with unit per-user rates. Every user of
/// a multiplexed mode pays the mode's full pilot overhead.
pub fn timeshare_sum_rate(modes: &[TimeShareMode]) -> Result<f64> {
    let total: f64 = modes.iter().map(|m| m.fraction).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(SimError::param(
            "fraction",
            format!("fractions must sum to 1, got {total}"),
        ));
    }
    Ok(modes.iter().map(|m| m.fraction * m.rate()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn forty_users() -> Vec<f64> {
        let mut t = vec![50.0; 39];
        t.push(5.0);
        t
    }

    #[test]
    fn dof_peak() {
        let peak = training_dof(20.0, 10, AntennaLimit::Unbounded).unwrap();
        assert_eq!(peak, 5.0);
        let best = (0..=20)
            .max_by(|&a, &b| {
                let da = training_dof(20.0, a, AntennaLimit::Unbounded).unwrap();
                let db = training_dof(20.0, b, AntennaLimit::Unbounded).unwrap();
                da.total_cmp(&db)
            })
            .unwrap();
        assert_eq!(best, 10);
    }

    #[test]
    fn dof_edges() {
        assert_eq!(training_dof(20.0, 20, AntennaLimit::Unbounded).unwrap(), 0.0);
        assert_eq!(training_dof(20.0, 30, AntennaLimit::Unbounded).unwrap(), 0.0);
        assert_eq!(training_dof(20.0, 5, AntennaLimit::Bounded(3)).unwrap(), 2.25);
        assert!(training_dof(0.5, 1, AntennaLimit::Unbounded).is_err());
    }

    #[test]
    fn multiplex_everyone() {
        let rate = timeshare_sum_rate(&[TimeShareMode::new(forty_users(), 1.0).unwrap()]).unwrap();
        assert!((rate - 0.8).abs() < 1e-9, "{rate}");
    }

    #[test]
    fn two_mode_time_sharing() {
        let modes = [
            TimeShareMode::new(vec![50.0; 39], 0.8).unwrap(),
            TimeShareMode::new(vec![5.0], 0.2).unwrap(),
        ];
        let rate = timeshare_sum_rate(&modes).unwrap();
        assert!((rate - 7.064).abs() < 1e-9, "{rate}");
    }

    #[test]
    fn single_user_single_mode() {
        let rate = timeshare_sum_rate(&[TimeShareMode::new(vec![3.0], 1.0).unwrap()]).unwrap();
        assert_eq!(rate, 1.0);
    }

    #[test]
    fn fraction_sum_checked() {
        let modes = [TimeShareMode::new(vec![5.0], 0.5).unwrap()];
        assert!(timeshare_sum_rate(&modes).is_err());
        assert!(TimeShareMode::new(vec![], 1.0).is_err());
    }

    #[test]
    fn overhead_clamped_at_zero() {
        let m = TimeShareMode::new(vec![2.0, 2.0, 2.0], 1.0).unwrap();
        assert_eq!(m.efficiency(), 0.0);
    }

    proptest! {
        #[test]
        fn dof_max_at_half_block(half in 1u32..200) {
            let tc = 2 * half;
            let best = (0..=tc)
                .map(|ns| training_dof(tc as f64, ns, AntennaLimit::Unbounded).unwrap())
                .fold(f64::MIN, f64::max);
            prop_assert_eq!(best, tc as f64 / 4.0);
            prop_assert_eq!(training_dof(tc as f64, half, AntennaLimit::Unbounded).unwrap(), best);
        }

        #[test]
        fn linear_in_fraction(p in 0.0f64..1.0, t in prop::collection::vec(2.0f64..100.0, 1..6)) {
            let a = TimeShareMode::new(t.clone(), p).unwrap();
            let b = TimeShareMode::new(vec![7.0], 1.0 - p).unwrap();
            let rate = timeshare_sum_rate(&[a.clone(), b.clone()]).unwrap();
            prop_assert!((rate - (p * a.rate() + (1.0 - p) * b.rate())).abs() < 1e-9);
        }

        #[test]
        fn dropping_shortest_user_helps(mut t in prop::collection::vec(1.0f64..100.0, 3..10)) {
            let full = TimeShareMode::new(t.clone(), 1.0).unwrap().efficiency();
            t.sort_by(f64::total_cmp);
            t.remove(0);
            let reduced = TimeShareMode::new(t, 1.0).unwrap().efficiency();
            prop_assert!(reduced >= full);
        }
    }
}

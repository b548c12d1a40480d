//! Block-fading channel realisations and user mobility.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::queueing::ArrivalModel;

/// Propagation speed used by the coherence-time conversion (m/s).
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Distribution of the per-entry channel gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelModel {
    /// i.i.d. CN(0, 1) entries.
    #[default]
    Rayleigh,
    /// Every entry is exactly `1 + 0i`; gives closed-form link rates for testing.
    Unit,
}

impl ChannelModel {
    /// Draws one user's row of `num_antennas` gains. Real parts come before
    /// imaginary parts, entry by entry.
    pub fn draw_row<R: Rng + ?Sized>(self, num_antennas: usize, rng: &mut R) -> Vec<Complex64> {
        match self {
            ChannelModel::Rayleigh => (0..num_antennas).map(|_| cn01(rng)).collect(),
            ChannelModel::Unit => vec![Complex64::new(1.0, 0.0); num_antennas],
        }
    }
}

/// One circular-symmetric complex Gaussian sample with unit variance.
pub fn cn01<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// A user as seen by the scheduler: its block length and traffic.
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    pub user_id: usize,
    /// Speed the block length was derived from, if any.
    pub velocity: Option<f64>,
    /// Block length `T_n` in channel uses.
    pub coherence_len: u32,
    pub arrivals: ArrivalModel,
}

impl UserProfile {
    pub fn with_coherence(user_id: usize, coherence_len: u32, arrivals: ArrivalModel) -> Result<Self> {
        if coherence_len == 0 {
            return Err(SimError::param("coherence_len", "must be at least 1"));
        }
        Ok(UserProfile {
            user_id,
            velocity: None,
            coherence_len,
            arrivals,
        })
    }

    pub fn from_velocity(
        user_id: usize,
        velocity: f64,
        carrier_freq: f64,
        cell_radius: f64,
        arrivals: ArrivalModel,
    ) -> Result<Self> {
        let coherence_len = coherence_from_velocity(velocity, carrier_freq, cell_radius)?;
        Ok(UserProfile {
            user_id,
            velocity: Some(velocity),
            coherence_len,
            arrivals,
        })
    }

    /// Mean arrival rate in bits per channel use.
    pub fn arrival_rate(&self) -> f64 {
        self.arrivals.rate()
    }
}

/// Block length in channel uses for a user moving at `velocity` m/s.
///
/// Coherence bandwidth is `c / (4 R)` and coherence time `c / (8 f_c v)`;
/// the product is rounded and floored at one channel use.
pub fn coherence_from_velocity(velocity: f64, carrier_freq: f64, cell_radius: f64) -> Result<u32> {
    for (name, v) in [
        ("velocity", velocity),
        ("carrier_freq", carrier_freq),
        ("cell_radius", cell_radius),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(SimError::param(name, format!("must be positive and finite, got {v}")));
        }
    }
    let bandwidth = SPEED_OF_LIGHT / (4.0 * cell_radius);
    let time = SPEED_OF_LIGHT / (8.0 * carrier_freq * velocity);
    let blocks = (bandwidth * time).round();
    Ok(if blocks < 1.0 {
        1
    } else {
        blocks.min(u32::MAX as f64) as u32
    })
}

/// Gains of the scheduled users for one fading block. Row `i` is `h_i^†`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBlock {
    pub gains: DMatrix<Complex64>,
    pub block_start: u64,
}

impl ChannelBlock {
    /// Stacks rows (one per user) into a block.
    pub fn from_rows(rows: &[&[Complex64]], block_start: u64) -> Result<Self> {
        let num_antennas = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != num_antennas) {
            return Err(SimError::param("rows", "all rows must have the same length"));
        }
        let gains = DMatrix::from_fn(rows.len(), num_antennas, |i, j| rows[i][j]);
        Ok(ChannelBlock { gains, block_start })
    }

    pub fn num_users(&self) -> usize {
        self.gains.nrows()
    }

    pub fn num_antennas(&self) -> usize {
        self.gains.ncols()
    }

    pub fn row(&self, user: usize) -> Vec<Complex64> {
        self.gains.row(user).iter().copied().collect()
    }
}

/// Draws an `num_users x num_antennas` Rayleigh block, row by row.
pub fn sample_block<R: Rng + ?Sized>(num_users: usize, num_antennas: usize, rng: &mut R) -> Result<ChannelBlock> {
    if num_users == 0 {
        return Err(SimError::param("num_users", "must be at least 1"));
    }
    if num_antennas == 0 {
        return Err(SimError::param("num_antennas", "must be at least 1"));
    }
    let rows: Vec<Vec<Complex64>> = (0..num_users)
        .map(|_| ChannelModel::Rayleigh.draw_row(num_antennas, rng))
        .collect();
    let refs: Vec<&[Complex64]> = rows.iter().map(Vec::as_slice).collect();
    ChannelBlock::from_rows(&refs, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Hand computation: B_c = 3e8 / 4000 = 75000 Hz, T_c = 3e8 / (8 * 2.6e9 * v).
    fn hand_oracle(v: f64) -> f64 {
        let bc = 3.0e8 / (4.0 * 1000.0);
        let tc = 3.0e8 / (8.0 * 2.6e9 * v);
        bc * tc
    }

    #[test]
    fn coherence_at_60_kmh() {
        let exact = hand_oracle(16.67);
        assert!((exact - 64.89).abs() < 0.01, "{exact}");
        assert_eq!(coherence_from_velocity(16.67, 2.6e9, 1000.0).unwrap(), 65);
    }

    #[test]
    fn coherence_at_3_kmh() {
        let exact = hand_oracle(0.8333);
        assert!((exact - 1298.1).abs() < 0.1, "{exact}");
        assert_eq!(coherence_from_velocity(0.8333, 2.6e9, 1000.0).unwrap(), 1298);
    }

    #[test]
    fn coherence_is_floored_at_one() {
        assert_eq!(coherence_from_velocity(1.0e6, 2.6e9, 1.0e6).unwrap(), 1);
    }

    #[test]
    fn coherence_rejects_non_positive() {
        assert!(coherence_from_velocity(0.0, 2.6e9, 1000.0).is_err());
        assert!(coherence_from_velocity(1.0, -1.0, 1000.0).is_err());
        assert!(coherence_from_velocity(1.0, 2.6e9, f64::NAN).is_err());
    }

    #[test]
    fn sample_block_is_deterministic() {
        let a = sample_block(1, 1, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = sample_block(1, 1, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a.gains.shape(), (1, 1));
        assert_eq!(a, b);
    }

    #[test]
    fn stream_advances_between_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = sample_block(2, 2, &mut rng).unwrap();
        let _: f64 = rng.random();
        let b = sample_block(2, 2, &mut rng).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn sample_block_rejects_empty_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_block(0, 4, &mut rng).is_err());
        assert!(sample_block(4, 0, &mut rng).is_err());
    }

    #[test]
    fn unit_variance_per_entry() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 100_000;
        let mut power = DMatrix::<f64>::zeros(4, 16);
        let (mut re2, mut im2) = (0.0, 0.0);
        for _ in 0..draws {
            let block = sample_block(4, 16, &mut rng).unwrap();
            for (acc, h) in power.iter_mut().zip(block.gains.iter()) {
                *acc += h.norm_sqr();
                re2 += h.re * h.re;
                im2 += h.im * h.im;
            }
        }
        for mean in power.iter().map(|p| p / draws as f64) {
            assert!((0.99..=1.01).contains(&mean), "entry mean {mean}");
        }
        let n = (draws * 64) as f64;
        assert!(((re2 / n) - 0.5).abs() < 0.01);
        assert!(((im2 / n) - 0.5).abs() < 0.01);
    }

    #[test]
    fn unit_model_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let row = ChannelModel::Unit.draw_row(3, &mut rng);
        assert!(row.iter().all(|h| *h == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn profile_requires_positive_coherence() {
        let arrivals = ArrivalModel::new(0.5, 3.0).unwrap();
        assert!(UserProfile::with_coherence(0, 0, arrivals).is_err());
        let p = UserProfile::from_velocity(1, 16.67, 2.6e9, 1000.0, arrivals).unwrap();
        assert_eq!(p.coherence_len, 65);
        assert_eq!(p.arrival_rate(), 1.5);
    }
}

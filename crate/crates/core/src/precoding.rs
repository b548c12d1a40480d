//! Zero-forcing precoding and per-user link rates.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SimError};

/// Singular values below this fraction of the largest mark a channel as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PrecodeResult {
    /// `M x N_s` precoding matrix `W`.
    pub precoder: DMatrix<Complex64>,
    /// Power normalisation `zeta`, with `zeta^2 * tr(W W^H) = P`.
    pub power_scale: f64,
    pub per_user_sinr: Vec<f64>,
    /// `log2(1 + sinr)` per user, bits per channel use.
    pub per_user_sm_rate: Vec<f64>,
}

impl PrecodeResult {
    pub fn power_scale_sq(&self) -> f64 {
        self.power_scale * self.power_scale
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SimError::param(name, format!("must be positive and finite, got {v}")))
    }
}

/// `W = H^H (H H^H)^{-1}` for the `N_s x M` channel `gains`, with SINR
/// evaluated from the full signal/interference expression.
pub fn zero_forcing(gains: &DMatrix<Complex64>, total_power: f64, noise_var: f64) -> Result<PrecodeResult> {
    check_positive("total_power", total_power)?;
    check_positive("noise_var", noise_var)?;
    let (users, antennas) = gains.shape();
    if users == 0 || antennas == 0 {
        return Err(SimError::param("channel", "empty channel matrix"));
    }
    if users > antennas {
        return Err(SimError::DegenerateChannel {
            smallest: 0.0,
            largest: gains.norm(),
        });
    }

    let sv = gains.singular_values();
    let largest = sv.max();
    let smallest = sv.min();
    if largest.is_nan() || largest <= 0.0 || smallest < RANK_TOLERANCE * largest {
        return Err(SimError::DegenerateChannel { smallest, largest });
    }

    let adjoint = gains.adjoint();
    let gram = gains * &adjoint;
    let gram_inv = gram
        .cholesky()
        .ok_or(SimError::DegenerateChannel { smallest, largest })?
        .inverse();
    let precoder = adjoint * gram_inv;

    let scale_sq = total_power / precoder.norm_squared();
    let effective = gains * &precoder;
    let per_user_sinr: Vec<f64> = (0..users)
        .map(|n| {
            let signal = scale_sq * effective[(n, n)].norm_sqr();
            let interference: f64 = (0..users)
                .filter(|&j| j != n)
                .map(|j| scale_sq * effective[(n, j)].norm_sqr())
                .sum();
            signal / (interference + noise_var)
        })
        .collect();
    let per_user_sm_rate = per_user_sinr.iter().map(|g| (1.0 + g).log2()).collect();

    Ok(PrecodeResult {
        precoder,
        power_scale: scale_sq.sqrt(),
        per_user_sinr,
        per_user_sm_rate,
    })
}

/// Single-user space-time-coded rate `log2(1 + |h|^2 P / (M sigma^2))`.
pub fn stc_rate(row: &[Complex64], total_power: f64, num_antennas: usize, noise_var: f64) -> Result<f64> {
    check_positive("total_power", total_power)?;
    check_positive("noise_var", noise_var)?;
    if num_antennas == 0 || row.len() != num_antennas {
        return Err(SimError::param(
            "user_channel_row",
            format!("length {} does not match {num_antennas} antennas", row.len()),
        ));
    }
    let gain: f64 = row.iter().map(|h| h.norm_sqr()).sum();
    Ok((1.0 + gain * total_power / (num_antennas as f64 * noise_var)).log2())
}

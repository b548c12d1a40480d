//! Genie-aided drift maximisation over every nonempty user subset.

use itertools::Itertools;

use super::{evaluate_set, frame_len_for, LinkParams, SchedulingDecision};
use crate::channel::ChannelBlock;
use crate::error::{Result, SimError};

pub const DEFAULT_SUBSET_LIMIT: usize = 12;

/// Picks the subset maximising `sum_{n in S} Q_n^theta beta_n / T_k` on the
/// genie channel (one row per user).
///
/// Subsets are visited by size, then lexicographically, and only a strictly
/// better objective replaces the incumbent, so ties go to the smallest subset
/// with the lowest user indices. A zero best objective yields an idle frame.
pub fn gap_decide(
    queues: &[f64],
    coherence: &[u32],
    genie: &ChannelBlock,
    link: &LinkParams,
    t_stc: Option<u32>,
    theta: u32,
    subset_limit: usize,
) -> Result<SchedulingDecision> {
    let n = queues.len();
    if coherence.len() != n || genie.num_users() != n {
        return Err(SimError::param(
            "genie_channel",
            format!(
                "{} queues, {} block lengths, {} channel rows",
                n,
                coherence.len(),
                genie.num_users()
            ),
        ));
    }
    if n > subset_limit {
        return Err(SimError::config(
            "policy.kind",
            format!("{n} users exceed the subset search limit of {subset_limit}; use a QQS policy"),
        ));
    }

    let mut best = SchedulingDecision::idle();
    for size in 1..=n.min(link.num_antennas) {
        for set in (0..n).combinations(size) {
            // Sets whose pilots fill the whole frame score zero.
            if size > 1 && frame_len_for(&set, coherence, t_stc) <= size as u32 {
                continue;
            }
            let gains = genie.gains.select_rows(set.iter());
            let candidate = evaluate_set(&set, &gains, queues, coherence, theta, link, t_stc)?;
            if candidate.objective_value > best.objective_value {
                best = candidate;
            }
        }
    }
    if best.objective_value > 0.0 {
        Ok(best)
    } else {
        Ok(SchedulingDecision::idle())
    }
}

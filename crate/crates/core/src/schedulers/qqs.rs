//! Queue-based quantized-block-length scheduling.
//!
//! Users are binned by block length, each bin greedily grows a multiplexed
//! set from its longest queues, and the bin with the largest pre-log score
//! wins. Channel fluctuations are ignored: every scheduled user is assumed to
//! get the same per-slot rate.

use super::weight;
use crate::error::{Result, SimError};

#[derive(Debug, Clone, PartialEq)]
pub struct QqsSelection {
    /// Chosen users in ascending order; empty for an idle frame.
    pub scheduled: Vec<usize>,
    /// Index of the winning group, if any.
    pub group: Option<usize>,
    /// `P_k` per group; `None` for empty groups.
    pub group_scores: Vec<Option<f64>>,
}

/// Splits users into `num_groups` bins `((k-1)/K T_max, k/K T_max]`.
/// Members of each bin are listed in ascending user order.
pub fn partition_groups(coherence: &[u32], num_groups: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); num_groups];
    let t_max = coherence.iter().copied().max().unwrap_or(1).max(1) as u64;
    for (user, &t) in coherence.iter().enumerate() {
        // Smallest k with T_n <= k T_max / K, computed exactly.
        let k = (t as u64 * num_groups as u64).div_ceil(t_max).max(1) as usize;
        groups[k.min(num_groups) - 1].push(user);
    }
    groups
}

/// `(1 - len / mean_coherence) * sum of the first len weights`.
pub fn prefix_score(sorted_weights: &[f64], len: usize, mean_coherence: f64) -> f64 {
    let total: f64 = sorted_weights[..len].iter().sum();
    (1.0 - len as f64 / mean_coherence) * total
}

/// Length of the greedy prefix: keep adding the next-longest queue while
/// `(1 - (i+1)/T) w_{i+1} - (1/T) sum_{j<=i} w_j > 0`.
pub fn greedy_prefix_len(sorted_weights: &[f64], mean_coherence: f64) -> usize {
    if sorted_weights.is_empty() {
        return 0;
    }
    let mut len = 1;
    let mut total = sorted_weights[0];
    while len < sorted_weights.len() {
        let next = sorted_weights[len];
        let gain = (1.0 - (len + 1) as f64 / mean_coherence) * next - total / mean_coherence;
        if gain > 0.0 {
            total += next;
            len += 1;
        } else {
            break;
        }
    }
    len
}

/// Runs the four QQS steps on queue backlogs (raised to `theta`).
pub fn qqs_decide(queues: &[f64], coherence: &[u32], num_groups: usize, theta: u32) -> Result<QqsSelection> {
    if num_groups == 0 {
        return Err(SimError::param("num_groups", "must be at least 1"));
    }
    if queues.len() != coherence.len() {
        return Err(SimError::param("queues", "one queue per block length required"));
    }
    let weights: Vec<f64> = queues.iter().map(|&q| weight(q, theta)).collect();
    let groups = partition_groups(coherence, num_groups);

    let mut best: Option<(usize, f64, Vec<usize>)> = None;
    let mut group_scores = Vec::with_capacity(groups.len());
    for (k, members) in groups.iter().enumerate() {
        if members.is_empty() {
            group_scores.push(None);
            continue;
        }
        let mean_coherence = members.iter().map(|&n| coherence[n] as f64).sum::<f64>() / members.len() as f64;
        let mut order = members.clone();
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
        let sorted: Vec<f64> = order.iter().map(|&n| weights[n]).collect();

        let len = greedy_prefix_len(&sorted, mean_coherence);
        let multiplexed = prefix_score(&sorted, len, mean_coherence);
        // The best singleton is the head of the sorted group.
        let (score, mut chosen) = if sorted[0] >= multiplexed {
            (sorted[0], vec![order[0]])
        } else {
            (multiplexed, order[..len].to_vec())
        };
        chosen.sort_unstable();
        group_scores.push(Some(score));
        if best.as_ref().is_none_or(|(_, s, _)| score > *s) {
            best = Some((k, score, chosen));
        }
    }

    Ok(match best {
        Some((k, score, set)) if score > 0.0 => QqsSelection {
            scheduled: set,
            group: Some(k),
            group_scores,
        },
        _ => QqsSelection {
            scheduled: Vec::new(),
            group: None,
            group_scores,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_blocks_groups() {
        let groups = partition_groups(&[100, 100, 100, 5, 5], 2);
        assert_eq!(groups, vec![vec![3, 4], vec![0, 1, 2]]);
    }

    #[test]
    fn bin_edges_are_right_closed() {
        // T_max = 100, K = 4: edges at 25, 50, 75, 100.
        let groups = partition_groups(&[25, 26, 50, 100, 1], 4);
        assert_eq!(groups, vec![vec![0, 4], vec![1, 2], vec![], vec![3]]);
    }

    #[test]
    fn more_groups_than_users() {
        let groups = partition_groups(&[10, 20], 5);
        assert_eq!(groups.iter().filter(|g| !g.is_empty()).count(), 2);
    }

    #[test]
    fn greedy_takes_all_equal_queues() {
        let w = [10.0, 10.0, 10.0];
        assert_eq!(greedy_prefix_len(&w, 50.0), 3);
        let scores: Vec<f64> = (1..=3).map(|i| prefix_score(&w, i, 50.0)).collect();
        for (s, e) in scores.iter().zip([9.8, 19.2, 28.2]) {
            assert!((s - e).abs() < 1e-12, "{s} vs {e}");
        }
    }

    #[test]
    fn short_block_prefers_singleton() {
        let w = [10.0, 1.0];
        // (1 - 2/5) * 1 - 10/5 = -1.4
        assert_eq!(greedy_prefix_len(&w, 5.0), 1);
        assert!((prefix_score(&w, 1, 5.0) - 8.0).abs() < 1e-12);
        let sel = qqs_decide(&[10.0, 1.0], &[5, 5], 1, 1).unwrap();
        assert_eq!(sel.scheduled, vec![0]);
        assert_eq!(sel.group_scores, vec![Some(10.0)]);
    }

    #[test]
    fn best_group_wins() {
        let sel = qqs_decide(&[10.0, 10.0, 10.0, 12.0, 12.0], &[100, 100, 100, 5, 5], 2, 1).unwrap();
        // Long group: (1 - 3/100) * 30 = 29.1; short group singleton 12.
        assert_eq!(sel.scheduled, vec![0, 1, 2]);
        assert_eq!(sel.group, Some(1));
    }

    #[test]
    fn power_law_shifts_to_long_queue() {
        let q = [10.0, 10.0, 10.0, 25.0, 1.0];
        let coh = [100, 100, 100, 5, 5];
        assert_eq!(qqs_decide(&q, &coh, 2, 1).unwrap().scheduled, vec![0, 1, 2]);
        assert_eq!(qqs_decide(&q, &coh, 2, 3).unwrap().scheduled, vec![3]);
    }

    #[test]
    fn all_empty_is_idle() {
        let sel = qqs_decide(&[0.0; 4], &[10, 10, 2, 2], 2, 1).unwrap();
        assert!(sel.scheduled.is_empty());
        assert_eq!(sel.group, None);
    }
}

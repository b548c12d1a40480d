use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::Result;
use crate::queueing::UserQueue;
use crate::rng::{Purpose, StreamFactory};
use crate::schedulers::{FrameDraws, Mode, Scheduler};

/// A run is declared stable when the backlog trend over its second half is
/// below this many bits per slot.
pub const STABILITY_SLOPE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame_index: u64,
    pub t_start: u64,
    pub frame_len: u32,
    pub mode: Mode,
    pub scheduled: Vec<usize>,
    /// Allocated bits, parallel to `scheduled`.
    pub allocated_bits: Vec<f64>,
    /// Bits actually removed from each scheduled queue.
    pub served_bits: Vec<f64>,
    pub objective_value: f64,
    pub degenerate: bool,
}

/// Per-slot backlog and head-of-line delay of every user, slot-major.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlotTrace {
    num_users: usize,
    backlog: Vec<f64>,
    hol: Vec<u64>,
}

impl SlotTrace {
    pub fn new(num_users: usize) -> Self {
        SlotTrace {
            num_users,
            backlog: Vec::new(),
            hol: Vec::new(),
        }
    }

    pub fn push(&mut self, backlog: &[f64], hol: &[u64]) {
        debug_assert_eq!(backlog.len(), self.num_users);
        self.backlog.extend_from_slice(backlog);
        self.hol.extend_from_slice(hol);
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn len(&self) -> usize {
        self.backlog.len().checked_div(self.num_users).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn backlog_row(&self, slot: usize) -> &[f64] {
        &self.backlog[slot * self.num_users..(slot + 1) * self.num_users]
    }

    pub fn hol_row(&self, slot: usize) -> &[u64] {
        &self.hol[slot * self.num_users..(slot + 1) * self.num_users]
    }

    pub fn total_backlog(&self, slot: usize) -> f64 {
        self.backlog_row(slot).iter().sum()
    }

    /// Running mean of the head-of-line delay of `user` after each slot.
    pub fn time_average_delay_curve(&self, user: usize) -> Vec<f64> {
        let mut sum = 0.0;
        (0..self.len())
            .map(|t| {
                sum += self.hol[t * self.num_users + user] as f64;
                sum / (t + 1) as f64
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub total_slots: u64,
    pub num_frames: u64,
    pub time_avg_delay: Vec<f64>,
    pub mean_queue: Vec<f64>,
    /// Served bits per slot, summed over users.
    pub sum_rate: f64,
    /// Admitted bits per slot under admission control.
    pub admitted_rate: Option<f64>,
    /// Least-squares slope of total backlog over the second half of the run.
    pub stability_slope: f64,
    pub arrived_bits: Vec<f64>,
    pub served_bits: Vec<f64>,
    pub final_backlog: Vec<f64>,
}

impl RunSummary {
    pub fn is_stable(&self) -> bool {
        self.stability_slope.abs() < STABILITY_SLOPE_TOL
    }

    pub fn mean_delay(&self) -> f64 {
        if self.time_avg_delay.is_empty() {
            0.0
        } else {
            self.time_avg_delay.iter().sum::<f64>() / self.time_avg_delay.len() as f64
        }
    }

    pub fn served_rate(&self, user: usize) -> f64 {
        per_slot(self.served_bits[user], self.total_slots)
    }

    pub fn arrival_rate(&self, user: usize) -> f64 {
        per_slot(self.arrived_bits[user], self.total_slots)
    }
}

fn per_slot(bits: f64, slots: u64) -> f64 {
    if slots == 0 {
        0.0
    } else {
        bits / slots as f64
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub frames: Vec<FrameRecord>,
    pub slots: SlotTrace,
    pub summary: RunSummary,
}

/// Ordinary least-squares slope of `ys` against `0, 1, 2, ...`.
pub fn least_squares_slope(ys: &[f64]) -> f64 {
    let n = ys.len();
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let x_mean = (nf - 1.0) / 2.0;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Simulates frames until at least `horizon_slots` channel uses have elapsed.
///
/// Each frame: the policy decides on the backlogs at frame start, admission
/// grants (if any) enter the queues at frame start, every slot records backlog
/// and head-of-line delay, and at frame end each scheduled queue is served
/// `min(Q at frame start, beta)` bits before the frame's arrivals, drawn slot
/// by slot and stamped with their true slots, are appended.
pub fn run_simulation(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let n = config.num_users();
    let streams = StreamFactory::new(config.seed);
    let mut scheduler = Scheduler::new(config.policy.clone(), config.link(), config.coherence())?;
    let mut queues = vec![UserQueue::new(); n];
    let mut arrival_rngs: Vec<ChaCha8Rng> = (0..n).map(|u| streams.stream(Purpose::Arrivals, u as u64)).collect();

    let mut frames = Vec::new();
    let mut slots = SlotTrace::new(n);
    let mut admitted = 0.0;
    let mut t = 0u64;
    let mut frame_index = 0u64;
    let mut backlog_now = vec![0.0; n];
    let mut hol_now = vec![0u64; n];

    while t < config.horizon_slots {
        let at_start: Vec<f64> = queues.iter().map(UserQueue::backlog).collect();
        let mut draws = FrameDraws::new(streams, frame_index, t, config.channel_model, n, config.antennas);
        let decision = scheduler.decide(&at_start, &mut draws)?;
        let len = decision.frame_len as u64;

        if let Some(ac) = &config.admission {
            for (q, &start) in queues.iter_mut().zip(&at_start) {
                if start < ac.threshold && ac.grant > 0.0 {
                    q.push_arrival(t, ac.grant);
                    admitted += ac.grant;
                }
            }
        }

        let mut pending: Vec<Vec<(u64, f64)>> = vec![Vec::new(); n];
        for slot in t..t + len {
            for (u, q) in queues.iter_mut().enumerate() {
                if config.admission.is_none() {
                    let bits = config.users[u].arrivals.draw(&mut arrival_rngs[u]);
                    if bits > 0.0 {
                        pending[u].push((slot, bits));
                    }
                }
                hol_now[u] = q.sample_delay(slot).0;
                backlog_now[u] = q.backlog();
            }
            slots.push(&backlog_now, &hol_now);
        }

        let served_bits: Vec<f64> = decision
            .scheduled
            .iter()
            .zip(&decision.allocated_bits)
            .map(|(&u, &beta)| queues[u].serve(beta.min(at_start[u])))
            .collect();
        for (q, arrivals) in queues.iter_mut().zip(&pending) {
            for &(slot, bits) in arrivals {
                q.push_arrival(slot, bits);
            }
        }

        frames.push(FrameRecord {
            frame_index,
            t_start: t,
            frame_len: decision.frame_len,
            mode: decision.mode,
            scheduled: decision.scheduled,
            allocated_bits: decision.allocated_bits,
            served_bits,
            objective_value: decision.objective_value,
            degenerate: decision.degenerate,
        });
        t += len;
        frame_index += 1;
    }

    let total_slots = t;
    let half = slots.len() / 2;
    let totals: Vec<f64> = (half..slots.len()).map(|s| slots.total_backlog(s)).collect();
    let mean_queue = (0..n)
        .map(|u| {
            if slots.is_empty() {
                0.0
            } else {
                (0..slots.len()).map(|s| slots.backlog_row(s)[u]).sum::<f64>() / slots.len() as f64
            }
        })
        .collect();
    let served_bits: Vec<f64> = queues.iter().map(UserQueue::total_served).collect();
    let summary = RunSummary {
        total_slots,
        num_frames: frame_index,
        time_avg_delay: queues.iter().map(UserQueue::time_average_delay).collect(),
        mean_queue,
        sum_rate: per_slot(served_bits.iter().sum(), total_slots),
        admitted_rate: config.admission.map(|_| per_slot(admitted, total_slots)),
        stability_slope: least_squares_slope(&totals),
        arrived_bits: queues.iter().map(UserQueue::total_arrived).collect(),
        served_bits,
        final_backlog: queues.iter().map(UserQueue::backlog).collect(),
    };
    Ok(RunOutput { frames, slots, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::queueing::ArrivalModel;
    use crate::schedulers::{PolicyConfig, PolicyKind};

    fn mixed_blocks(kind: PolicyKind) -> RunConfig {
        let mut c = RunConfig::with_coherence(
            10,
            &[100, 100, 100, 5, 5],
            ArrivalModel::default(),
            PolicyConfig::new(kind),
        )
        .unwrap();
        c.horizon_slots = 3000;
        c
    }

    #[test]
    fn slope_of_line() {
        let ys: Vec<f64> = (0..10).map(|i| 3.0 * i as f64 + 1.0).collect();
        assert!((least_squares_slope(&ys) - 3.0).abs() < 1e-12);
        assert_eq!(least_squares_slope(&[5.0]), 0.0);
    }

    #[test]
    fn null_run() {
        let mut c = mixed_blocks(PolicyKind::Qqs);
        c.horizon_slots = 0;
        let out = run_simulation(&c).unwrap();
        assert!(out.frames.is_empty());
        assert!(out.slots.is_empty());
        assert_eq!(out.summary.sum_rate, 0.0);
    }

    #[test]
    fn frames_tile_the_run() {
        let out = run_simulation(&mixed_blocks(PolicyKind::Gap)).unwrap();
        let mut expected = 0;
        for f in &out.frames {
            assert_eq!(f.t_start, expected);
            expected += f.frame_len as u64;
        }
        assert_eq!(expected, out.summary.total_slots);
        assert_eq!(out.slots.len() as u64, out.summary.total_slots);
        assert!(out.summary.total_slots >= 3000);
    }

    #[test]
    fn served_never_exceeds_allocation() {
        let out = run_simulation(&mixed_blocks(PolicyKind::Qqs)).unwrap();
        for f in &out.frames {
            for (s, a) in f.served_bits.iter().zip(&f.allocated_bits) {
                assert!(*s <= *a + 1e-9);
            }
        }
    }

    #[test]
    fn bits_are_conserved() {
        let out = run_simulation(&mixed_blocks(PolicyKind::Tdma)).unwrap();
        let s = &out.summary;
        for u in 0..5 {
            let lhs = s.arrived_bits[u] - s.served_bits[u];
            assert!((lhs - s.final_backlog[u]).abs() < 1e-9 * (1.0 + s.arrived_bits[u]));
        }
    }

    #[test]
    fn deterministic() {
        let a = run_simulation(&mixed_blocks(PolicyKind::Qqs)).unwrap();
        let b = run_simulation(&mixed_blocks(PolicyKind::Qqs)).unwrap();
        assert_eq!(a.frames, b.frames);
        assert_eq!(a.slots, b.slots);
    }
}

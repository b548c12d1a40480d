//! Scheduling policies behind one decision interface.
//!
//! Every policy first picks a user set. The set is then evaluated on the
//! frame's channel: `|S| = 1` is served with space-time coding for `T_STC`
//! channel uses, `|S| > 1` is zero-forced for `min T_n` channel uses of which
//! `|S|` go to uplink pilots, and the empty set idles for one channel use.

mod baseline;
mod gap;
mod qqs;

pub use baseline::{full_sm_select, random_k_select, TdmaCursor};
pub use gap::{gap_decide, DEFAULT_SUBSET_LIMIT};
pub use qqs::{greedy_prefix_len, partition_groups, prefix_score, qqs_decide, QqsSelection};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelBlock, ChannelModel};
use crate::error::{Result, SimError};
use crate::precoding::{stc_rate, zero_forcing};
use crate::rng::{Purpose, StreamFactory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Spatial multiplexing with zero-forcing.
    Sm,
    /// Single-user space-time coding, no CSIT.
    Stc,
    Idle,
}

impl Mode {
    pub fn for_set_size(size: usize) -> Mode {
        match size {
            0 => Mode::Idle,
            1 => Mode::Stc,
            _ => Mode::Sm,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Sm => "SM",
            Mode::Stc => "STC",
            Mode::Idle => "IDLE",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SM" => Ok(Mode::Sm),
            "STC" => Ok(Mode::Stc),
            "IDLE" => Ok(Mode::Idle),
            other => Err(SimError::param("mode", format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchedulingDecision {
    /// Scheduled user ids in ascending order.
    pub scheduled: Vec<usize>,
    pub mode: Mode,
    /// `T_k` in channel uses.
    pub frame_len: u32,
    /// `beta_n` for each entry of `scheduled`, in bits.
    pub allocated_bits: Vec<f64>,
    /// `sum_n Q_n^theta beta_n / T_k` for this decision.
    pub objective_value: f64,
    /// Set when zero-forcing failed and the frame carries no data.
    pub degenerate: bool,
}

impl SchedulingDecision {
    pub fn idle() -> Self {
        SchedulingDecision {
            scheduled: Vec::new(),
            mode: Mode::Idle,
            frame_len: 1,
            allocated_bits: Vec::new(),
            objective_value: 0.0,
            degenerate: false,
        }
    }

    /// Allocated bits for `user`, 0 if unscheduled.
    pub fn allocation_for(&self, user: usize) -> f64 {
        self.scheduled
            .iter()
            .position(|&u| u == user)
            .map_or(0.0, |i| self.allocated_bits[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Gap,
    Tdca,
    Pldca,
    Qqs,
    Tqqs,
    Plqqs,
    Tdma,
    FullSm,
    RandomK,
}

impl PolicyKind {
    /// Policies that score subsets on the true channel before estimation.
    pub fn is_genie(self) -> bool {
        matches!(self, PolicyKind::Gap | PolicyKind::Tdca | PolicyKind::Pldca)
    }

    pub fn is_power_law(self) -> bool {
        matches!(self, PolicyKind::Pldca | PolicyKind::Plqqs)
    }

    pub fn is_periodic(self) -> bool {
        matches!(self, PolicyKind::Tdca | PolicyKind::Tqqs)
    }

    pub fn is_qqs(self) -> bool {
        matches!(self, PolicyKind::Qqs | PolicyKind::Tqqs | PolicyKind::Plqqs)
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Gap => "gap",
            PolicyKind::Tdca => "tdca",
            PolicyKind::Pldca => "pldca",
            PolicyKind::Qqs => "qqs",
            PolicyKind::Tqqs => "tqqs",
            PolicyKind::Plqqs => "plqqs",
            PolicyKind::Tdma => "tdma",
            PolicyKind::FullSm => "full_sm",
            PolicyKind::RandomK => "random_k",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Queue exponent; only the power-law kinds use it.
    pub theta: u32,
    /// Frames between decisions; only the periodic kinds use it.
    pub period: u32,
    /// Number of coherence-time groups for the QQS family.
    pub num_groups: usize,
    /// Optional cap on the STC frame length; `None` uses the user's block length.
    pub t_stc: Option<u32>,
    pub k_random: usize,
    /// Largest user count the exhaustive subset search accepts.
    pub max_subset_users: usize,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        PolicyConfig {
            kind,
            theta: if kind.is_power_law() { 3 } else { 1 },
            period: 1,
            num_groups: 2,
            t_stc: None,
            k_random: 10,
            max_subset_users: DEFAULT_SUBSET_LIMIT,
        }
    }

    pub fn effective_theta(&self) -> u32 {
        if self.kind.is_power_law() {
            self.theta
        } else {
            1
        }
    }

    pub fn effective_period(&self) -> u32 {
        if self.kind.is_periodic() {
            self.period
        } else {
            1
        }
    }

    pub fn validate(&self, num_users: usize) -> Result<()> {
        if self.theta.is_multiple_of(2) {
            return Err(SimError::config(
                "policy.theta",
                format!("must be an odd integer >= 1, got {}", self.theta),
            ));
        }
        if self.period == 0 {
            return Err(SimError::config("policy.period", "must be at least 1"));
        }
        if self.num_groups == 0 {
            return Err(SimError::config("policy.groups", "must be at least 1"));
        }
        if self.t_stc == Some(0) {
            return Err(SimError::config("policy.t_stc", "must be at least 1"));
        }
        if self.kind == PolicyKind::RandomK && self.k_random == 0 {
            return Err(SimError::config("policy.k_random", "must be at least 1"));
        }
        if self.kind.is_genie() && num_users > self.max_subset_users {
            return Err(SimError::config(
                "policy.kind",
                format!(
                    "{} users exceed the subset search limit of {} for `{}`; use a QQS policy or raise policy.max_subset_users",
                    num_users,
                    self.max_subset_users,
                    self.kind.name()
                ),
            ));
        }
        Ok(())
    }
}

/// Transmit power, noise and array size shared by every rate computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub num_antennas: usize,
    pub total_power: f64,
    pub noise_var: f64,
}

impl LinkParams {
    /// `P = 1` and `sigma^2 = 10^(-snr_db / 10)`.
    pub fn from_snr_db(num_antennas: usize, snr_db: f64) -> Self {
        LinkParams {
            num_antennas,
            total_power: 1.0,
            noise_var: 10f64.powf(-snr_db / 10.0),
        }
    }
}

/// STC frame length for a user with block length `coherence`.
pub fn stc_frame_len(coherence: u32, cap: Option<u32>) -> u32 {
    cap.map_or(coherence, |c| coherence.min(c)).max(1)
}

/// `T_k` for a set, given per-user block lengths.
pub fn frame_len_for(set: &[usize], coherence: &[u32], t_stc: Option<u32>) -> u32 {
    match set {
        [] => 1,
        [only] => stc_frame_len(coherence[*only], t_stc),
        _ => set.iter().map(|&n| coherence[n]).min().unwrap_or(1),
    }
}

pub(crate) fn weight(queue: f64, theta: u32) -> f64 {
    if theta == 1 {
        queue
    } else {
        queue.powi(theta as i32)
    }
}

/// Allocated bits and drift term for serving `set` whose channel rows (in
/// the order of `set`) are `set_gains`. A rank-deficient set gets zero bits.
pub fn evaluate_set(
    set: &[usize],
    set_gains: &DMatrix<Complex64>,
    queues: &[f64],
    coherence: &[u32],
    theta: u32,
    link: &LinkParams,
    t_stc: Option<u32>,
) -> Result<SchedulingDecision> {
    if set.is_empty() {
        return Ok(SchedulingDecision::idle());
    }
    debug_assert_eq!(set_gains.nrows(), set.len());
    let frame_len = frame_len_for(set, coherence, t_stc);
    let mode = Mode::for_set_size(set.len());
    let mut degenerate = false;
    let allocated_bits: Vec<f64> = match mode {
        Mode::Stc => {
            let row: Vec<Complex64> = set_gains.row(0).iter().copied().collect();
            let rate = stc_rate(&row, link.total_power, link.num_antennas, link.noise_var)?;
            vec![frame_len as f64 * rate]
        }
        Mode::Sm => {
            let data_slots = frame_len.saturating_sub(set.len() as u32) as f64;
            if data_slots == 0.0 {
                vec![0.0; set.len()]
            } else {
                match zero_forcing(set_gains, link.total_power, link.noise_var) {
                    Ok(pre) => pre.per_user_sm_rate.iter().map(|r| data_slots * r).collect(),
                    Err(SimError::DegenerateChannel { .. }) => {
                        degenerate = true;
                        vec![0.0; set.len()]
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        Mode::Idle => unreachable!(),
    };
    let objective_value = set
        .iter()
        .zip(&allocated_bits)
        .map(|(&n, b)| weight(queues[n], theta) * b)
        .sum::<f64>()
        / frame_len as f64;
    Ok(SchedulingDecision {
        scheduled: set.to_vec(),
        mode,
        frame_len,
        allocated_bits,
        objective_value,
        degenerate,
    })
}

/// Lazily drawn channel rows for one frame. Each `(frame, user)` row has its
/// own random stream, so the rows a policy sees do not depend on which other
/// rows were drawn.
#[derive(Debug, Clone)]
pub struct FrameDraws {
    streams: StreamFactory,
    frame: u64,
    start_slot: u64,
    model: ChannelModel,
    num_antennas: usize,
    rows: Vec<Option<Vec<Complex64>>>,
}

impl FrameDraws {
    pub fn new(
        streams: StreamFactory,
        frame: u64,
        start_slot: u64,
        model: ChannelModel,
        num_users: usize,
        num_antennas: usize,
    ) -> Self {
        FrameDraws {
            streams,
            frame,
            start_slot,
            model,
            num_antennas,
            rows: vec![None; num_users],
        }
    }

    pub fn frame(&self) -> u64 {
        self.frame
    }

    pub fn row(&mut self, user: usize) -> &[Complex64] {
        if self.rows[user].is_none() {
            let mut rng = self.streams.channel_row(self.frame, user);
            self.rows[user] = Some(self.model.draw_row(self.num_antennas, &mut rng));
        }
        self.rows[user].as_deref().unwrap()
    }

    /// Rows of `users`, stacked in the given order.
    pub fn block(&mut self, users: &[usize]) -> ChannelBlock {
        for &u in users {
            self.row(u);
        }
        let rows: Vec<&[Complex64]> = users.iter().map(|&u| self.rows[u].as_deref().unwrap()).collect();
        let mut block = ChannelBlock::from_rows(&rows, self.start_slot).expect("rows share the antenna count");
        if users.is_empty() {
            block.gains = DMatrix::zeros(0, self.num_antennas);
        }
        block
    }

    /// All users' rows (the genie's view).
    pub fn full(&mut self) -> ChannelBlock {
        let all: Vec<usize> = (0..self.rows.len()).collect();
        self.block(&all)
    }

    pub fn policy_rng(&self) -> ChaCha8Rng {
        self.streams.stream(Purpose::Policy, self.frame)
    }
}

/// A policy plus the memory it carries between frames.
#[derive(Debug, Clone)]
pub struct Scheduler {
    config: PolicyConfig,
    link: LinkParams,
    coherence: Vec<u32>,
    cached_set: Option<Vec<usize>>,
    frames_since_decision: u32,
    tdma: TdmaCursor,
}

impl Scheduler {
    pub fn new(config: PolicyConfig, link: LinkParams, coherence: Vec<u32>) -> Result<Self> {
        config.validate(coherence.len())?;
        if coherence.contains(&0) {
            return Err(SimError::config("users.coherence", "block lengths must be at least 1"));
        }
        let n = coherence.len();
        Ok(Scheduler {
            config,
            link,
            coherence,
            cached_set: None,
            frames_since_decision: 0,
            tdma: TdmaCursor::new(n),
        })
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    /// Decides frame `draws.frame()` given queue backlogs at frame start.
    pub fn decide(&mut self, queues: &[f64], draws: &mut FrameDraws) -> Result<SchedulingDecision> {
        let theta = self.config.effective_theta();
        let period = self.config.effective_period();
        let fresh = self.frames_since_decision == 0 || self.cached_set.is_none();
        self.frames_since_decision = (self.frames_since_decision + 1) % period;

        if !fresh {
            let set = self.cached_set.clone().unwrap_or_default();
            return self.evaluate(&set, queues, theta, draws);
        }

        let decision = match self.config.kind {
            PolicyKind::Gap | PolicyKind::Tdca | PolicyKind::Pldca => {
                let genie = draws.full();
                gap_decide(
                    queues,
                    &self.coherence,
                    &genie,
                    &self.link,
                    self.config.t_stc,
                    theta,
                    self.config.max_subset_users,
                )?
            }
            PolicyKind::Qqs | PolicyKind::Tqqs | PolicyKind::Plqqs => {
                let sel = qqs_decide(queues, &self.coherence, self.config.num_groups, theta)?;
                self.evaluate(&sel.scheduled, queues, theta, draws)?
            }
            PolicyKind::Tdma => {
                let set = vec![self.tdma.next_user()];
                self.evaluate(&set, queues, theta, draws)?
            }
            PolicyKind::FullSm => {
                let set = full_sm_select(self.coherence.len());
                self.evaluate(&set, queues, theta, draws)?
            }
            PolicyKind::RandomK => {
                let mut rng = draws.policy_rng();
                let set = random_k_select(self.coherence.len(), self.config.k_random, &mut rng);
                self.evaluate(&set, queues, theta, draws)?
            }
        };
        self.cached_set = Some(decision.scheduled.clone());
        Ok(decision)
    }

    fn evaluate(
        &self,
        set: &[usize],
        queues: &[f64],
        theta: u32,
        draws: &mut FrameDraws,
    ) -> Result<SchedulingDecision> {
        let block = draws.block(set);
        evaluate_set(
            set,
            &block.gains,
            queues,
            &self.coherence,
            theta,
            &self.link,
            self.config.t_stc,
        )
    }
}

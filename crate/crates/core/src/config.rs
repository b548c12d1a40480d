//! Run configuration and its TOML file format.
//!
//! ```toml
//! [system]
//! antennas = 10
//! snr_db = 15.0
//! horizon_slots = 20000
//! seed = 1
//!
//! [policy]
//! kind = "qqs"
//! groups = 2
//!
//! [[users]]
//! count = 3
//! coherence = 100
//!
//! [[users]]
//! count = 2
//! coherence = 5
//! ```
//!
//! Any key can be overridden from the command line with a dotted path such as
//! `policy.kind=gap` or `system.antennas=100`.

use std::path::PathBuf;

use serde::Deserialize;

use crate::channel::{ChannelModel, UserProfile};
use crate::engine::AdmissionControl;
use crate::error::{Result, SimError};
use crate::queueing::ArrivalModel;
use crate::schedulers::{LinkParams, PolicyConfig, PolicyKind, DEFAULT_SUBSET_LIMIT};

pub const DEFAULT_CARRIER_FREQ: f64 = 2.6e9;
pub const DEFAULT_CELL_RADIUS: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub antennas: usize,
    pub snr_db: f64,
    pub users: Vec<UserProfile>,
    pub policy: PolicyConfig,
    pub horizon_slots: u64,
    pub seed: u64,
    pub admission: Option<AdmissionControl>,
    pub channel_model: ChannelModel,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    /// 15 dB, 20000 slots, seed 1, Rayleigh fading, no admission control.
    pub fn new(antennas: usize, users: Vec<UserProfile>, policy: PolicyConfig) -> Self {
        RunConfig {
            antennas,
            snr_db: 15.0,
            users,
            policy,
            horizon_slots: 20_000,
            seed: 1,
            admission: None,
            channel_model: ChannelModel::Rayleigh,
            output_dir: None,
        }
    }

    /// Users with the given block lengths and identical arrivals.
    pub fn with_coherence(
        antennas: usize,
        coherence: &[u32],
        arrivals: ArrivalModel,
        policy: PolicyConfig,
    ) -> Result<Self> {
        let users = coherence
            .iter()
            .enumerate()
            .map(|(i, &t)| UserProfile::with_coherence(i, t, arrivals))
            .collect::<Result<Vec<_>>>()?;
        Ok(RunConfig::new(antennas, users, policy))
    }

    pub fn link(&self) -> LinkParams {
        LinkParams::from_snr_db(self.antennas, self.snr_db)
    }

    pub fn coherence(&self) -> Vec<u32> {
        self.users.iter().map(|u| u.coherence_len).collect()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(SimError::config("system.antennas", "must be at least 1"));
        }
        if !self.snr_db.is_finite() {
            return Err(SimError::config("system.snr_db", "must be finite"));
        }
        if self.users.is_empty() {
            return Err(SimError::config("users", "at least one user is required"));
        }
        if self.users.len() >= 1 << 16 {
            return Err(SimError::config("users", "at most 65535 users are supported"));
        }
        if let Some(u) = self.users.iter().find(|u| u.coherence_len == 0) {
            return Err(SimError::config(
                "users.coherence",
                format!("user {} has a zero block length", u.user_id),
            ));
        }
        if let Some(a) = &self.admission {
            a.validate()?;
        }
        self.policy.validate(self.users.len())
    }

    /// Parses a config file's text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Parses a config file's text after applying `key=value` overrides.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| SimError::config(error_key(&e), e.message()))?;
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let raw: RawConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| SimError::config(error_key(&e), e.message()))?;
        raw.into_config()
    }
}

fn error_key(e: &toml::de::Error) -> String {
    // serde messages name the field in backticks; fall back to the whole file.
    let msg = e.message();
    msg.split('`')
        .nth(1)
        .map_or_else(|| "<config>".to_string(), str::to_string)
}

/// Applies `a.b.c=value` to a parsed table. The value is read as a TOML
/// literal when possible and as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| SimError::config(item, "overrides must look like key=value"))?;
    let path = path.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys
        .pop()
        .filter(|k| !k.is_empty())
        .ok_or_else(|| SimError::config(path, "empty key"))?;
    let mut cursor = table;
    for key in keys {
        let entry = cursor
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| SimError::config(path, format!("`{key}` is not a section")))?;
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    system: RawSystem,
    #[serde(default)]
    arrivals: RawArrivals,
    #[serde(default)]
    policy: RawPolicy,
    admission: Option<RawAdmission>,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    users: Vec<RawUser>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSystem {
    antennas: usize,
    snr_db: f64,
    horizon_slots: u64,
    seed: u64,
    channel: ChannelModel,
    carrier_freq_hz: f64,
    cell_radius_m: f64,
}

impl Default for RawSystem {
    fn default() -> Self {
        RawSystem {
            antennas: 10,
            snr_db: 15.0,
            horizon_slots: 20_000,
            seed: 1,
            channel: ChannelModel::Rayleigh,
            carrier_freq_hz: DEFAULT_CARRIER_FREQ,
            cell_radius_m: DEFAULT_CELL_RADIUS,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawArrivals {
    packet_prob: f64,
    packet_bits: f64,
}

impl Default for RawArrivals {
    fn default() -> Self {
        let d = ArrivalModel::default();
        RawArrivals {
            packet_prob: d.packet_prob(),
            packet_bits: d.packet_bits(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawPolicy {
    kind: PolicyKind,
    theta: Option<u32>,
    period: u32,
    groups: usize,
    t_stc: Option<u32>,
    k_random: usize,
    max_subset_users: usize,
}

impl Default for RawPolicy {
    fn default() -> Self {
        RawPolicy {
            kind: PolicyKind::Gap,
            theta: None,
            period: 1,
            groups: 2,
            t_stc: None,
            k_random: 10,
            max_subset_users: DEFAULT_SUBSET_LIMIT,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdmission {
    threshold: Option<f64>,
    grant: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUser {
    #[serde(default = "one")]
    count: usize,
    coherence: Option<u32>,
    velocity_mps: Option<f64>,
    packet_prob: Option<f64>,
    packet_bits: Option<f64>,
}

fn one() -> usize {
    1
}

fn keyed<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        SimError::Parameter { reason, .. } => SimError::config(key, reason),
        other => other,
    })
}

impl RawConfig {
    fn into_config(self) -> Result<RunConfig> {
        let sys = self.system;
        let default_arrivals = keyed(
            "arrivals",
            ArrivalModel::new(self.arrivals.packet_prob, self.arrivals.packet_bits),
        )?;

        let mut users = Vec::new();
        for (entry_idx, raw) in self.users.iter().enumerate() {
            let key = format!("users[{entry_idx}]");
            let arrivals = keyed(
                &key,
                ArrivalModel::new(
                    raw.packet_prob.unwrap_or(default_arrivals.packet_prob()),
                    raw.packet_bits.unwrap_or(default_arrivals.packet_bits()),
                ),
            )?;
            for _ in 0..raw.count {
                let id = users.len();
                // An explicit block length wins over one derived from velocity.
                let profile = match (raw.coherence, raw.velocity_mps) {
                    (Some(t), v) => {
                        let mut p = keyed(
                            &format!("{key}.coherence"),
                            UserProfile::with_coherence(id, t, arrivals),
                        )?;
                        p.velocity = v;
                        p
                    }
                    (None, Some(v)) => keyed(
                        &format!("{key}.velocity_mps"),
                        UserProfile::from_velocity(id, v, sys.carrier_freq_hz, sys.cell_radius_m, arrivals),
                    )?,
                    (None, None) => {
                        return Err(SimError::config(&key, "needs `coherence` or `velocity_mps`"));
                    }
                };
                users.push(profile);
            }
        }

        let p = self.policy;
        let policy = PolicyConfig {
            kind: p.kind,
            theta: p.theta.unwrap_or(if p.kind.is_power_law() { 3 } else { 1 }),
            period: p.period,
            num_groups: p.groups,
            t_stc: p.t_stc,
            k_random: p.k_random,
            max_subset_users: p.max_subset_users,
        };

        let mut config = RunConfig {
            antennas: sys.antennas,
            snr_db: sys.snr_db,
            users,
            policy,
            horizon_slots: sys.horizon_slots,
            seed: sys.seed,
            admission: None,
            channel_model: sys.channel,
            output_dir: self.output.dir,
        };
        if let Some(a) = self.admission {
            let default = AdmissionControl::default_for(&config.users);
            let threshold = a.threshold.or(default.as_ref().map(|d| d.threshold));
            let threshold = threshold.ok_or_else(|| {
                SimError::config(
                    "admission.threshold",
                    "no arrival rate to derive a default from; set it explicitly",
                )
            })?;
            let grant = a.grant.unwrap_or(threshold);
            config.admission = Some(keyed("admission", AdmissionControl::new(threshold, grant))?);
        }
        config.validate()?;
        Ok(config)
    }
}

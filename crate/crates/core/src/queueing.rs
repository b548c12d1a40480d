//! Per-user bit queues with packet-level bookkeeping.
//!
//! A queue holds real-valued bits split into packets. Service is applied once
//! per frame and only to bits that were present when the frame started;
//! packets that arrive during the frame join the tail with their true arrival
//! slot, so head-of-line delay stays meaningful at slot granularity.

use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Result, SimError};

/// Residual packet sizes below this are treated as fully served.
const RESIDUE_BITS: f64 = 1e-9;

/// Bernoulli packet arrivals: one packet of `packet_bits` with probability
/// `packet_prob` per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalModel {
    packet_prob: f64,
    packet_bits: f64,
}

impl ArrivalModel {
    pub fn new(packet_prob: f64, packet_bits: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&packet_prob) {
            return Err(SimError::param(
                "packet_prob",
                format!("must lie in [0, 1], got {packet_prob}"),
            ));
        }
        if !(packet_bits.is_finite() && packet_bits > 0.0) {
            return Err(SimError::param(
                "packet_bits",
                format!("must be positive, got {packet_bits}"),
            ));
        }
        Ok(ArrivalModel {
            packet_prob,
            packet_bits,
        })
    }

    pub fn packet_prob(&self) -> f64 {
        self.packet_prob
    }

    pub fn packet_bits(&self) -> f64 {
        self.packet_bits
    }

    /// Mean bits per channel use.
    pub fn rate(&self) -> f64 {
        self.packet_prob * self.packet_bits
    }

    /// Bits arriving in one slot (0 or `packet_bits`). Always consumes one draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        if u < self.packet_prob {
            self.packet_bits
        } else {
            0.0
        }
    }
}

impl Default for ArrivalModel {
    fn default() -> Self {
        ArrivalModel {
            packet_prob: 0.5,
            packet_bits: 3.0,
        }
    }
}

/// Packet arrivals over slots `start_slot .. start_slot + num_slots`.
pub fn generate_arrivals<R: Rng + ?Sized>(
    model: &ArrivalModel,
    start_slot: u64,
    num_slots: u64,
    rng: &mut R,
) -> Vec<(u64, f64)> {
    (start_slot..start_slot + num_slots)
        .filter_map(|slot| {
            let bits = model.draw(rng);
            (bits > 0.0).then_some((slot, bits))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    pub arrival_slot: u64,
    pub remaining_bits: f64,
}

#[derive(Debug, Clone, Default)]
pub struct UserQueue {
    backlog: f64,
    fifo: VecDeque<Packet>,
    delay_sum: f64,
    delay_samples: u64,
    total_arrived: f64,
    total_served: f64,
}

impl UserQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// `Q_n`, in bits.
    pub fn backlog(&self) -> f64 {
        self.backlog
    }

    pub fn packets(&self) -> impl Iterator<Item = &Packet> {
        self.fifo.iter()
    }

    pub fn total_arrived(&self) -> f64 {
        self.total_arrived
    }

    pub fn total_served(&self) -> f64 {
        self.total_served
    }

    /// Appends a packet at the tail. Arrival slots must be nondecreasing.
    pub fn push_arrival(&mut self, slot: u64, bits: f64) {
        if bits <= 0.0 {
            return;
        }
        debug_assert!(self.fifo.back().is_none_or(|p| p.arrival_slot <= slot));
        self.fifo.push_back(Packet {
            arrival_slot: slot,
            remaining_bits: bits,
        });
        self.backlog += bits;
        self.total_arrived += bits;
    }

    /// Removes up to `allocated` bits from the head and returns the bits served.
    pub fn serve(&mut self, allocated: f64) -> f64 {
        if allocated <= 0.0 || self.backlog <= 0.0 {
            return 0.0;
        }
        if allocated >= self.backlog {
            let served = self.backlog;
            self.fifo.clear();
            self.backlog = 0.0;
            self.total_served += served;
            return served;
        }
        let mut left = allocated;
        let mut served = 0.0;
        while let Some(head) = self.fifo.front_mut() {
            if head.remaining_bits <= left + RESIDUE_BITS {
                left -= head.remaining_bits;
                served += head.remaining_bits;
                self.fifo.pop_front();
                if left <= 0.0 {
                    break;
                }
            } else {
                head.remaining_bits -= left;
                served += left;
                break;
            }
        }
        if self.fifo.is_empty() {
            // Absorb rounding residue so arrived = served + backlog holds.
            served = self.backlog;
            self.backlog = 0.0;
        } else {
            self.backlog = (self.backlog - served).max(0.0);
        }
        self.total_served += served;
        served
    }

    /// One frame of `Q' = max(Q - beta, 0) + alpha`: serves `allocated` bits
    /// from the bits present at frame start, then appends `frame_arrivals`.
    /// Returns the bits actually served.
    pub fn apply_frame(&mut self, allocated: f64, frame_arrivals: &[(u64, f64)]) -> f64 {
        let served = self.serve(allocated);
        for &(slot, bits) in frame_arrivals {
            self.push_arrival(slot, bits);
        }
        served
    }

    /// Age of the oldest unserved packet at `now`, 0 when empty.
    pub fn hol_delay(&self, now: u64) -> u64 {
        self.fifo.front().map_or(0, |p| now.saturating_sub(p.arrival_slot))
    }

    /// Records one head-of-line delay sample and returns it together with the
    /// running time-average delay.
    pub fn sample_delay(&mut self, now: u64) -> (u64, f64) {
        let hol = self.hol_delay(now);
        self.delay_sum += hol as f64;
        self.delay_samples += 1;
        (hol, self.time_average_delay())
    }

    pub fn time_average_delay(&self) -> f64 {
        if self.delay_samples == 0 {
            0.0
        } else {
            self.delay_sum / self.delay_samples as f64
        }
    }

    pub fn delay_samples(&self) -> u64 {
        self.delay_samples
    }
}

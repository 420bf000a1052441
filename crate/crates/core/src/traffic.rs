//! Constant-bit-rate real-time sources and per-user eNB buffers.

use std::collections::VecDeque;

use crate::config::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub size_bits: u64,
    pub arrival_tti: u64,
    pub remaining_bits: u64,
}

impl Packet {
    pub fn new(size_bits: u64, arrival_tti: u64) -> Self {
        Packet {
            size_bits,
            arrival_tti,
            remaining_bits: size_bits,
        }
    }
}

/// FIFO buffer with exact bit accounting:
/// `arrived = delivered + discarded + queued`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserBuffer {
    queue: VecDeque<Packet>,
    pub arrived_bits: u64,
    pub delivered_bits: u64,
    pub discarded_bits: u64,
}

impl UserBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, packet: Packet) {
        self.arrived_bits += packet.remaining_bits;
        self.queue.push_back(packet);
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn head(&self) -> Option<&Packet> {
        self.queue.front()
    }

    pub fn queued_bits(&self) -> u64 {
        self.queue.iter().map(|p| p.remaining_bits).sum()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    /// Serves up to `capacity_bits` in FIFO order, splitting the last packet.
    pub fn drain(&mut self, capacity_bits: u64) -> u64 {
        let mut left = capacity_bits;
        let mut served = 0;
        while left > 0 {
            let Some(head) = self.queue.front_mut() else {
                break;
            };
            let take = head.remaining_bits.min(left);
            head.remaining_bits -= take;
            left -= take;
            served += take;
            if head.remaining_bits == 0 {
                self.queue.pop_front();
            }
        }
        self.delivered_bits += served;
        served
    }

    /// Drops every packet older than `t_i_seconds`. Returns the bits counted
    /// as discarded: the unserved remainder of each dropped packet.
    pub fn expire_packets(&mut self, current_tti: u64, tti_seconds: f64, t_i_seconds: f64) -> u64 {
        let mut discarded = 0;
        self.queue.retain(|p| {
            let age = (current_tti - p.arrival_tti) as f64 * tti_seconds;
            // compare on a TTI grid so 100 x 1 ms == 0.1 s exactly
            let expired = age > t_i_seconds * (1.0 + 1e-12);
            if expired {
                discarded += p.remaining_bits;
            }
            !expired
        });
        self.discarded_bits += discarded;
        discarded
    }
}

/// CBR arrivals: one packet every `traffic_interarrival_ttis`, phase-shifted
/// by user id.
pub fn generate_arrivals(user_id: usize, tti: u64, config: &SimConfig) -> Vec<Packet> {
    let period = config.traffic_interarrival_ttis;
    let phase = user_id as u64 % period;
    if tti % period == phase {
        vec![Packet::new(config.traffic_packet_bits, tti)]
    } else {
        Vec::new()
    }
}

/// Age of the head-of-line packet in seconds, 0 when empty.
pub fn hol_delay(buffer: &UserBuffer, current_tti: u64, tti_seconds: f64) -> f64 {
    buffer
        .head()
        .map_or(0.0, |p| current_tti.saturating_sub(p.arrival_tti) as f64 * tti_seconds)
}

pub fn expire_packets(buffer: &mut UserBuffer, current_tti: u64, tti_seconds: f64, t_i_seconds: f64) -> u64 {
    buffer.expire_packets(current_tti, tti_seconds, t_i_seconds)
}

pub fn drain(buffer: &mut UserBuffer, capacity_bits: u64) -> u64 {
    buffer.drain(capacity_bits)
}

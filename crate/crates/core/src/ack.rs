//! The fixed TCP acknowledgment model.
//!
//! Every payload flow drags a reverse flow of pure ACK segments behind it.
//! For the non-interactive connections assumed here, the ratio of payload
//! packets per ACK packet is a constant `r`, so `beta` — ACK bytes generated
//! per payload byte — follows directly from the segment sizes.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AckModelError {
    #[error("payload-packets-per-ack ratio must be positive (got {0})")]
    BadRatio(f64),
    #[error("segment sizes must be positive")]
    BadSegmentSize,
    #[error("beta must lie in (0, 1), got {0}; check r/MSS/ACK sizes")]
    BadBeta(f64),
}

/// Payload-to-ACK byte accounting: `beta = ack_packet_size / (mss * r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AckModel {
    /// Average number of payload packets acknowledged per ACK packet.
    pub r: f64,
    /// Maximum segment size of a payload packet, in bytes.
    pub mss: u64,
    /// On-wire size of one ACK packet, in bytes.
    pub ack_packet_size: u64,
}

impl Default for AckModel {
    fn default() -> Self {
        Self {
            r: 2.5,
            mss: 1448,
            ack_packet_size: 66,
        }
    }
}

impl AckModel {
    pub fn new(r: f64, mss: u64, ack_packet_size: u64) -> Result<Self, AckModelError> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(AckModelError::BadRatio(r));
        }
        if mss == 0 || ack_packet_size == 0 {
            return Err(AckModelError::BadSegmentSize);
        }
        let model = Self {
            r,
            mss,
            ack_packet_size,
        };
        let beta = model.beta();
        if !(beta > 0.0 && beta < 1.0) {
            return Err(AckModelError::BadBeta(beta));
        }
        Ok(model)
    }

    /// ACK bytes generated per payload byte.
    pub fn beta(&self) -> f64 {
        self.ack_packet_size as f64 / (self.mss as f64 * self.r)
    }

    /// Bytes acknowledged by a single ACK packet.
    pub fn bytes_per_ack(&self) -> f64 {
        self.mss as f64 * self.r
    }

    /// Size of the ACK flow acknowledging `payload` bytes:
    /// `ack_packet_size * ceil(payload / (mss * r))`.
    ///
    /// Monotone in `payload`, and never larger than `payload` once the
    /// payload reaches one ACK packet's worth of bytes — the property the
    /// descending-order payload extraction relies on.
    pub fn ack_flow_size(&self, payload: u64) -> u64 {
        let packets = (payload as f64 / self.bytes_per_ack()).ceil();
        self.ack_packet_size * packets as u64
    }
}

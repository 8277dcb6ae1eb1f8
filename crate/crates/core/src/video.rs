//! MGS video quality, block-fading loss and per-slot PSNR evolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear rate-quality model `W(R) = α + β·R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoSequence {
    pub name: String,
    /// dB
    pub alpha: f64,
    /// dB per bit/s
    pub beta: f64,
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    #[serde(default = "default_gop")]
    pub gop: u32,
}

fn default_frame_rate() -> f64 {
    30.0
}

fn default_gop() -> u32 {
    16
}

impl VideoSequence {
    pub fn new(name: impl Into<String>, alpha: f64, beta: f64) -> Result<Self> {
        let s = Self { name: name.into(), alpha, beta, frame_rate: default_frame_rate(), gop: default_gop() };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::config(format!("sequence {}: alpha must be positive", self.name)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::config(format!("sequence {}: beta must be non-negative", self.name)));
        }
        Ok(())
    }

    // Synthetic placeholders shaped like CIF MGS curves; not fitted to any codec.
    pub fn bus() -> Self {
        Self::new("bus", 26.0, 2.4e-5).expect("valid preset")
    }

    pub fn mobile() -> Self {
        Self::new("mobile", 23.0, 2.0e-5).expect("valid preset")
    }

    pub fn harbour() -> Self {
        Self::new("harbour", 25.0, 2.2e-5).expect("valid preset")
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "bus" => Some(Self::bus()),
            "mobile" => Some(Self::mobile()),
            "harbour" => Some(Self::harbour()),
            _ => None,
        }
    }
}

/// PSNR in dB at received rate `rate` (bit/s).
pub fn psnr_of_rate(seq: &VideoSequence, rate: f64) -> Result<f64> {
    if !(rate >= 0.0) {
        return Err(Error::domain(format!("rate must be non-negative, got {rate}")));
    }
    Ok(seq.alpha + seq.beta * rate)
}

/// `P(X ≤ H)` for an exponentially distributed SINR with mean `mean_sinr`.
pub fn loss_probability(threshold: f64, mean_sinr: f64) -> f64 {
    if threshold <= 0.0 {
        return 0.0;
    }
    -(-threshold / mean_sinr).exp_m1()
}

/// Mean SINR giving loss probability `loss` at `threshold`.
pub fn mean_sinr_for_loss(threshold: f64, loss: f64) -> Result<f64> {
    if !(loss > 0.0 && loss < 1.0) || !(threshold > 0.0) {
        return Err(Error::config(format!("cannot place loss {loss} at threshold {threshold}")));
    }
    Ok(-threshold / (-loss).ln_1p())
}

/// What one user received in a slot.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SlotDelivery {
    /// Time share on the serving transmitter.
    pub share: f64,
    /// Whether the slot's packets survived fading (`ξ`).
    pub received: bool,
    /// Bits per unit time share (`B_0`, or `G_i·B_1` for an FBS link).
    pub capacity: f64,
}

impl SlotDelivery {
    pub fn bits(&self) -> f64 {
        if self.received {
            self.share * self.capacity
        } else {
            0.0
        }
    }
}

/// Accumulated PSNR of every user over a window of `T` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamState {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    window: u32,
    slot: u32,
    psnr: Vec<f64>,
    delivered: Vec<f64>,
}

impl StreamState {
    pub fn new(sequences: &[VideoSequence], window: u32) -> Result<Self> {
        if window == 0 {
            return Err(Error::config("window length T must be at least one slot"));
        }
        for s in sequences {
            s.validate()?;
        }
        let alpha: Vec<f64> = sequences.iter().map(|s| s.alpha).collect();
        Ok(Self {
            beta: sequences.iter().map(|s| s.beta).collect(),
            psnr: alpha.clone(),
            delivered: vec![0.0; alpha.len()],
            alpha,
            window,
            slot: 0,
        })
    }

    /// `W_j`, the PSNR accumulated so far in the current window.
    pub fn psnr(&self) -> &[f64] {
        &self.psnr
    }

    /// Bits delivered so far in the current window.
    pub fn delivered(&self) -> &[f64] {
        &self.delivered
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    /// Slots already played in the current window.
    pub fn slot_in_window(&self) -> u32 {
        self.slot
    }

    /// `R_j` for a link of `capacity` bit/s: `β_j·capacity/T`.
    pub fn rate_constant(&self, user: usize, capacity: f64) -> f64 {
        self.beta[user] * capacity / self.window as f64
    }

    /// Applies one slot. Returns the window-final PSNRs when this slot closes
    /// a window, after which the state restarts from `α`.
    pub fn update(&mut self, deliveries: &[SlotDelivery]) -> Result<Option<Vec<f64>>> {
        if deliveries.len() != self.psnr.len() {
            return Err(Error::contract(format!("{} deliveries for {} users", deliveries.len(), self.psnr.len())));
        }
        for (j, d) in deliveries.iter().enumerate() {
            if !(d.share >= 0.0) || !(d.capacity >= 0.0) {
                return Err(Error::contract(format!("user {j}: negative share or capacity")));
            }
            let bits = d.bits();
            self.psnr[j] += self.rate_constant(j, bits);
            self.delivered[j] += bits;
        }
        self.slot += 1;
        if self.slot == self.window {
            let done = std::mem::replace(&mut self.psnr, self.alpha.clone());
            self.delivered.iter_mut().for_each(|b| *b = 0.0);
            self.slot = 0;
            Ok(Some(done))
        } else {
            Ok(None)
        }
    }
}

/// Checks that every transmitter's time shares sum to at most one.
pub fn check_time_shares(shares: &[(usize, f64)], transmitters: usize) -> Result<()> {
    let mut sum = vec![0.0; transmitters];
    for &(t, s) in shares {
        sum[t] += s;
    }
    if let Some(t) = sum.iter().position(|&s| s > 1.0 + 1e-6) {
        return Err(Error::contract(format!("transmitter {t} time shares sum to {}", sum[t])));
    }
    Ok(())
}

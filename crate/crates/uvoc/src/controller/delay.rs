//! Quarter-period delay line for single-phase operation.
//!
//! The orthogonal feedback component is the measured signal delayed by a
//! quarter of the nominal period, with linear interpolation between samples.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct QuarterDelay {
    buf: Vec<f64>,
    head: usize,
    filled: usize,
    /// Delay expressed in (fractional) samples.
    delay_samples: f64,
}

impl QuarterDelay {
    pub fn new(omega0: f64, dt: f64) -> QuarterDelay {
        let delay_t = 2.0 * std::f64::consts::PI / (4.0 * omega0);
        let delay_samples = delay_t / dt;
        let cap = delay_samples.ceil() as usize + 2;
        QuarterDelay { buf: vec![0.0; cap], head: 0, filled: 0, delay_samples }
    }

    /// Number of samples needed before the delayed output is valid.
    pub fn warmup_len(&self) -> usize {
        self.delay_samples.floor() as usize + 2
    }

    pub fn is_ready(&self) -> bool {
        self.filled >= self.warmup_len()
    }

    /// Push the newest sample and read back the value one quarter period
    /// ago. During warm-up the output is an error carrying the fill state.
    pub fn step(&mut self, x: f64) -> Result<f64> {
        self.buf[self.head] = x;
        self.head = (self.head + 1) % self.buf.len();
        self.filled = (self.filled + 1).min(self.buf.len());
        if !self.is_ready() {
            return Err(Error::InsufficientHistory { have: self.filled, need: self.warmup_len() });
        }
        let back = self.delay_samples;
        let k = back.floor() as usize;
        let frac = back - k as f64;
        // newest sample sits at head-1
        let newest = (self.head + self.buf.len() - 1) % self.buf.len();
        let at = |steps_back: usize| {
            self.buf[(newest + self.buf.len() - steps_back % self.buf.len()) % self.buf.len()]
        };
        Ok(at(k) * (1.0 - frac) + at(k + 1) * frac)
    }

    /// Like [`step`](Self::step) but yielding zero during warm-up.
    pub fn step_or_zero(&mut self, x: f64) -> (f64, bool) {
        match self.step(x) {
            Ok(y) => (y, true),
            Err(_) => (0.0, false),
        }
    }
}

//! Fault detection state machine and over-current series compensation.
//!
//! A fault latches when the instantaneous feedback-current magnitude exceeds
//! the over-current threshold. It clears when the filtered terminal-voltage
//! magnitude returns above the low-voltage threshold, after which the
//! series compensation is withdrawn along a linear ramp so the hand-off
//! back to normal operation stays smooth.

use serde::{Deserialize, Serialize};

use crate::core::SpaceVector;
use crate::error::{Error, Result};

/// Thresholds and gains for fault ride-through.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaultConfig {
    /// Over-current latch threshold, A (vector magnitude).
    pub i_threshold: f64,
    /// Low-voltage clear threshold, V (vector magnitude, filtered).
    pub v_threshold: f64,
    /// Maximum allowable current, A. Must not exceed `i_threshold`.
    pub i_max: f64,
    /// Series compensation gain, Ω.
    pub r_ocl: f64,
    /// Ramp-out duration of the compensation after the fault clears, s.
    pub ramp_time: f64,
    /// Synchronization gain boost constant, s. The gain becomes
    /// `η (1 + R0/τ_f)` while the fault is latched.
    pub gain_tau: f64,
    /// The filtered terminal voltage must stay above the threshold, with no
    /// over-current, for this long before the fault clears. Debounces the
    /// detector against the voltage-filter lag right after a sag.
    pub clear_dwell: f64,
}

impl FaultConfig {
    /// Compensation gain for a desired current-control bandwidth across the
    /// total filter inductance.
    pub fn r_ocl_from_bandwidth(omega_ocl: f64, l_total: f64) -> f64 {
        omega_ocl * l_total
    }

    pub fn validate(&self) -> Result<()> {
        if self.i_max > self.i_threshold {
            return Err(Error::Schema(format!(
                "i_max ({}) must not exceed i_threshold ({})",
                self.i_max, self.i_threshold
            )));
        }
        for (name, v) in [
            ("i_threshold", self.i_threshold),
            ("v_threshold", self.v_threshold),
            ("i_max", self.i_max),
            ("r_ocl", self.r_ocl),
            ("ramp_time", self.ramp_time),
            ("gain_tau", self.gain_tau),
        ] {
            if !(v > 0.0) {
                return Err(Error::Schema(format!("fault config field {name} must be positive")));
            }
        }
        if self.clear_dwell < 0.0 {
            return Err(Error::Schema("clear_dwell must be non-negative".into()));
        }
        Ok(())
    }
}

/// Latched fault flag, compensation ramp, and the current-clamp gain that is
/// valid while the fault is active.
#[derive(Debug, Clone, Copy, Default)]
pub struct FaultState {
    pub x_f: bool,
    pub x_r: f64,
    /// Clamp gain `N·I_m / sqrt(2 (P0² + Q0²))`, A/V; refreshed every step
    /// while the fault is latched.
    pub k_m: f64,
    /// Time the clear condition has held continuously, s.
    pub clear_clock: f64,
}

impl FaultState {
    /// Additive synchronization-gain boost: zero in normal operation,
    /// `R0/τ_f` (which carries the units of the gain itself) while latched.
    pub fn eta_boost(&self, cfg: &FaultConfig) -> f64 {
        if self.x_f {
            cfg.r_ocl / cfg.gain_tau
        } else {
            0.0
        }
    }
}

/// Advance the fault state machine by one controller period.
///
/// Over-current takes priority and resets the clear dwell. The latched
/// state clears once the filtered terminal voltage has stayed above the
/// threshold, with no over-current, for the configured dwell. After
/// clearing, `x_r` descends linearly to zero with slope `-1/t_f`.
pub fn fault_fsm_step(
    mut state: FaultState,
    i_mag: f64,
    vg_mag_filtered: f64,
    cfg: &FaultConfig,
    dt: f64,
) -> FaultState {
    if i_mag > cfg.i_threshold {
        state.x_f = true;
        state.x_r = 1.0;
        state.clear_clock = 0.0;
    } else if state.x_f {
        if vg_mag_filtered > cfg.v_threshold {
            state.clear_clock += dt;
            if state.clear_clock >= cfg.clear_dwell {
                state.x_f = false;
                state.clear_clock = 0.0;
            }
        } else {
            state.clear_clock = 0.0;
        }
    } else if state.x_r > 0.0 {
        state.x_r = (state.x_r - dt / cfg.ramp_time).max(0.0);
    }
    state
}

/// Series over-current compensation voltage `x_r R0 (i0_sat − i)`.
pub fn ocl_compensation(i0_sat: SpaceVector, i_fb: SpaceVector, x_r: f64, r_ocl: f64) -> SpaceVector {
    (i0_sat - i_fb).scale(x_r * r_ocl)
}

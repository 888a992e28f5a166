//! Space-vector oscillator: current-reference generation, circular
//! limiting, fault-mode reference, and the oscillator integration step.
//!
//! The oscillator state is a voltage vector driven by three terms: a
//! harmonic rotation at the nominal frequency, a magnitude correction
//! toward the voltage set-point (grid-forming only), and a synchronization
//! feedback proportional to the rotated current tracking error. Setting the
//! magnitude-correction gain to zero is the entire grid-following mode
//! switch; no other code path differs.

use serde::{Deserialize, Serialize};

use crate::controller::fault::{FaultConfig, FaultState};
use crate::core::SpaceVector;
use crate::error::{Error, Result};

/// Oscillator gains and set-points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvoParams {
    /// Synchronization gain, V/(A·s).
    pub eta: f64,
    /// Magnitude correction gain, 1/(V²·s). Zero selects grid-following.
    pub mu: f64,
    /// Current-error rotation angle, rad, in [0, π/2].
    pub phi: f64,
    /// Nominal angular frequency, rad/s.
    pub omega0: f64,
    /// Voltage vector magnitude set-point, V (phase peak).
    pub v_p0: f64,
    /// Real power set-point, W.
    pub p0: f64,
    /// Reactive power set-point, VAR.
    pub q0: f64,
    /// Phase count as a real factor.
    pub n: f64,
    /// Magnitude floor guarding divisions by the squared voltage.
    pub v_floor: f64,
}

impl SvoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::Schema("eta must be positive".into()));
        }
        if self.mu < 0.0 {
            return Err(Error::Schema("mu must be non-negative".into()));
        }
        Ok(())
    }

    pub fn is_grid_forming(&self) -> bool {
        self.mu > 0.0
    }
}

/// The integrated oscillator voltage vector.
#[derive(Debug, Clone, Copy)]
pub struct OscillatorState {
    pub v: SpaceVector,
}

impl OscillatorState {
    pub fn from_magnitude_angle(v_p: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        OscillatorState { v: SpaceVector::new(v_p * c, v_p * s) }
    }
}

/// Instantaneous-power-theory current reference for the given set-points.
pub fn current_reference(
    v: SpaceVector,
    p0: f64,
    q0: f64,
    n: f64,
    v_floor: f64,
) -> Result<SpaceVector> {
    let mag = v.magnitude();
    if mag < v_floor {
        return Err(Error::DegenerateVoltage { magnitude: mag, floor: v_floor });
    }
    let g = 2.0 / (n * mag * mag);
    Ok(SpaceVector {
        alpha: g * (v.alpha * p0 + v.beta * q0),
        beta: g * (v.beta * p0 - v.alpha * q0),
    })
}

/// Radial current limiter: transparent inside the disc, otherwise scales the
/// vector down to magnitude `i_max` with the angle unchanged.
pub fn circular_limit(i0: SpaceVector, i_max: f64) -> SpaceVector {
    let mag = i0.magnitude();
    if mag <= i_max {
        i0
    } else {
        i0.scale(i_max / mag)
    }
}

/// Saturated current reference used while a fault is latched: the reference
/// direction with its magnitude pinned at `i_max` through the clamp gain
/// `K_m = N I_m / sqrt(2 (P0² + Q0²))`.
///
/// With both set-points zero the direction is undefined; the reference then
/// falls back to pure reactive injection, i.e. the voltage vector rotated by
/// −π/2 at magnitude `i_max`.
pub fn fault_mode_reference(
    v: SpaceVector,
    p0: f64,
    q0: f64,
    n: f64,
    i_max: f64,
    v_floor: f64,
) -> Result<SpaceVector> {
    let mag = v.magnitude();
    if mag < v_floor {
        return Err(Error::DegenerateVoltage { magnitude: mag, floor: v_floor });
    }
    let s2 = p0 * p0 + q0 * q0;
    if s2 == 0.0 {
        return Ok(v.rotate(-std::f64::consts::FRAC_PI_2).scale(i_max / mag));
    }
    let k_m = clamp_gain(p0, q0, n, i_max);
    let v_rms = mag / std::f64::consts::SQRT_2;
    let i0 = current_reference(v, p0, q0, n, v_floor)?;
    Ok(i0.scale(k_m * v_rms))
}

/// `K_m = N I_m / sqrt(2 (P0² + Q0²))`, A/V.
pub fn clamp_gain(p0: f64, q0: f64, n: f64, i_max: f64) -> f64 {
    let s2 = p0 * p0 + q0 * q0;
    if s2 == 0.0 {
        0.0
    } else {
        n * i_max / (2.0 * s2).sqrt()
    }
}

/// Oscillator derivative at the state `v` with the feedback current held.
fn oscillator_derivative(
    v: SpaceVector,
    i_fb: SpaceVector,
    p: &SvoParams,
    fault: &FaultState,
    fault_cfg: &FaultConfig,
) -> Result<SpaceVector> {
    let mag = v.magnitude();
    if mag < p.v_floor {
        return Err(Error::DegenerateVoltage { magnitude: mag, floor: p.v_floor });
    }
    let i0_sat = if fault.x_f {
        fault_mode_reference(v, p.p0, p.q0, p.n, fault_cfg.i_max, p.v_floor)?
    } else {
        circular_limit(current_reference(v, p.p0, p.q0, p.n, p.v_floor)?, fault_cfg.i_max)
    };
    let eta_f = p.eta + fault.eta_boost(fault_cfg);

    // jω0 v
    let mut d = SpaceVector::new(-p.omega0 * v.beta, p.omega0 * v.alpha);
    // magnitude correction, disabled while the fault is latched
    if !fault.x_f && p.mu != 0.0 {
        d = d + v.scale(p.mu * (p.v_p0 * p.v_p0 - mag * mag));
    }
    // rotated synchronization feedback
    d = d + (i0_sat - i_fb).rotate(p.phi).scale(eta_f);
    Ok(d)
}

/// Advance the oscillator by one sampling period with a classical
/// fourth-order Runge-Kutta step. Measurements are held constant across the
/// step; the state-dependent reference and limiter are re-evaluated at each
/// stage.
pub fn svo_step(
    osc: &OscillatorState,
    i_fb: SpaceVector,
    p: &SvoParams,
    fault: &FaultState,
    fault_cfg: &FaultConfig,
    dt: f64,
) -> Result<OscillatorState> {
    let v = osc.v;
    let k1 = oscillator_derivative(v, i_fb, p, fault, fault_cfg)?;
    let k2 = oscillator_derivative(v + k1.scale(0.5 * dt), i_fb, p, fault, fault_cfg)?;
    let k3 = oscillator_derivative(v + k2.scale(0.5 * dt), i_fb, p, fault, fault_cfg)?;
    let k4 = oscillator_derivative(v + k3.scale(dt), i_fb, p, fault, fault_cfg)?;
    let next = v + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0);
    if !next.is_finite() {
        return Err(Error::NonFinite { what: "oscillator voltage".into(), time: f64::NAN });
    }
    Ok(OscillatorState { v: next })
}

//! Pre-synchronization filter: a virtual RL branch between the oscillator
//! voltage and the measured grid-side voltage.
//!
//! The filtered difference is a virtual current — an estimate of what would
//! flow if the interconnection switch were closed. Feeding it back to the
//! oscillator pulls the voltage vector into alignment; the switch can close
//! once the virtual current has settled near zero.

use serde::{Deserialize, Serialize};

use crate::core::SpaceVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PresyncParams {
    /// Virtual branch inductance, H.
    pub l_ps: f64,
    /// Virtual branch resistance, Ω.
    pub r_ps: f64,
    pub enabled: bool,
}

impl PresyncParams {
    pub fn validate(&self) -> Result<()> {
        if self.enabled && !(self.l_ps > 0.0 && self.r_ps > 0.0) {
            return Err(Error::Schema("pre-sync branch parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Virtual branch state: the virtual current.
#[derive(Debug, Clone, Copy, Default)]
pub struct PresyncState {
    pub i_ps: SpaceVector,
}

/// Advance the virtual RL branch one period with the voltage difference held
/// constant (exact zero-order-hold step, unconditionally stable).
pub fn presync_step(
    state: PresyncState,
    v: SpaceVector,
    v_grid: SpaceVector,
    p: &PresyncParams,
    dt: f64,
) -> PresyncState {
    let u = v - v_grid;
    let target = u.scale(1.0 / p.r_ps);
    let a = (-p.r_ps / p.l_ps * dt).exp();
    PresyncState { i_ps: target + (state.i_ps - target).scale(a) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> PresyncParams {
        PresyncParams { l_ps: 1.5e-3, r_ps: 0.21, enabled: true }
    }

    #[test]
    fn no_mismatch_no_current() {
        let p = params();
        let mut s = PresyncState::default();
        let v = SpaceVector::new(170.0, 10.0);
        for _ in 0..1000 {
            s = presync_step(s, v, v, &p, 1e-4);
        }
        assert_eq!(s.i_ps, SpaceVector::ZERO);
    }

    #[test]
    fn constant_offset_settles_to_offset_over_resistance() {
        let p = params();
        let mut s = PresyncState::default();
        let dv = SpaceVector::new(2.1, -0.7);
        for _ in 0..10_000 {
            s = presync_step(s, dv, SpaceVector::ZERO, &p, 1e-4);
        }
        assert_relative_eq!(s.i_ps.alpha, dv.alpha / p.r_ps, max_relative = 1e-9);
        assert_relative_eq!(s.i_ps.beta, dv.beta / p.r_ps, max_relative = 1e-9);
    }

    #[test]
    fn step_response_time_constant() {
        let p = params();
        let tau = p.l_ps / p.r_ps;
        let dt = 1e-4;
        let mut s = PresyncState::default();
        let dv = SpaceVector::new(1.0, 0.0);
        let steps = (tau / dt).round() as usize;
        for _ in 0..steps {
            s = presync_step(s, dv, SpaceVector::ZERO, &p, dt);
        }
        // one time constant: 1 - 1/e of the final value, within 2%
        let expect = (1.0 - (-1.0f64).exp()) / p.r_ps;
        assert_relative_eq!(s.i_ps.alpha, expect, max_relative = 0.02);
    }
}

//! DC-bus voltage regulator: lead-lag filter cascaded with a PI compensator,
//! generating the real power set-point in grid-following operation.
//!
//! The compensator itself has positive DC gain. Because raising the real
//! power set-point discharges the bus, the regulator output enters the
//! set-point with a negated sign to close the loop as negative feedback.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::BilinearSection;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DcRegParams {
    /// Proportional gain, W/V.
    pub k_p: f64,
    /// Integral time constant, s.
    pub t_i: f64,
    /// Lead-lag zero, rad/s.
    pub omega_z: f64,
    /// Lead-lag pole, rad/s; must exceed the zero.
    pub omega_p: f64,
    /// Bus voltage reference, V.
    pub v_ref: f64,
}

impl DcRegParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_z < self.omega_p) {
            return Err(Error::Schema("lead-lag requires omega_z < omega_p".into()));
        }
        for (name, v) in [
            ("k_p", self.k_p),
            ("t_i", self.t_i),
            ("omega_z", self.omega_z),
            ("omega_p", self.omega_p),
            ("v_ref", self.v_ref),
        ] {
            if !(v > 0.0) {
                return Err(Error::Schema(format!("dc regulator field {name} must be positive")));
            }
        }
        Ok(())
    }

    /// Continuous compensator response
    /// `F(jω) = K (1 + 1/(jωT_i)) √(ω_p/ω_z) (jω+ω_z)/(jω+ω_p)`.
    pub fn response(&self, omega: f64) -> Complex64 {
        let s = Complex64::new(0.0, omega);
        let pi = Complex64::new(1.0, 0.0) + 1.0 / (s * self.t_i);
        let lead = (self.omega_p / self.omega_z).sqrt() * (s + self.omega_z) / (s + self.omega_p);
        self.k_p * pi * lead
    }
}

/// Discrete regulator state: trapezoidal PI integrator plus the bilinear
/// lead-lag section.
#[derive(Debug, Clone)]
pub struct DcReg {
    params: DcRegParams,
    lead: BilinearSection,
    integral: f64,
    prev_lead_out: f64,
}

impl DcReg {
    pub fn new(params: DcRegParams, dt: f64) -> DcReg {
        let g = (params.omega_p / params.omega_z).sqrt();
        let lead = BilinearSection::new(
            [g * params.omega_z, g, 0.0],
            [params.omega_p, 1.0, 0.0],
            dt,
            None,
        );
        DcReg { params, lead, integral: 0.0, prev_lead_out: 0.0 }
    }

    /// One controller period. Returns the real power set-point (sign already
    /// applied for loop closure) and the raw compensator output.
    pub fn step(&mut self, v_dc: f64, dt: f64) -> DcRegOutput {
        let e = self.params.v_ref - v_dc;
        let x = self.lead.step(e);
        self.integral += 0.5 * (x + self.prev_lead_out) * dt / self.params.t_i;
        self.prev_lead_out = x;
        let u = self.params.k_p * (x + self.integral);
        DcRegOutput { p0: -u, compensator: u }
    }

    pub fn params(&self) -> &DcRegParams {
        &self.params
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DcRegOutput {
    /// Real power set-point commanded to the oscillator.
    pub p0: f64,
    /// Compensator output before the loop-closure sign.
    pub compensator: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> DcRegParams {
        DcRegParams {
            k_p: 75.0,
            t_i: 0.4,
            omega_z: 5.0 * std::f64::consts::PI,
            omega_p: 30.0 * std::f64::consts::PI,
            v_ref: 400.0,
        }
    }

    #[test]
    fn zero_error_zero_output() {
        let mut reg = DcReg::new(params(), 1e-4);
        let out = reg.step(400.0, 1e-4);
        assert_eq!(out.p0, 0.0);
        assert_eq!(out.compensator, 0.0);
    }

    #[test]
    fn constant_error_integrates_at_kp_over_ti() {
        // after the lead-lag settles to its DC gain √(ωz/ωp), the compensator
        // ramps at K_p √(ωz/ωp) e / T_i
        let p = params();
        let dt = 1e-4;
        let mut reg = DcReg::new(p.clone(), dt);
        let e = 2.0;
        let v_dc = p.v_ref - e;
        let mut u1 = 0.0;
        for _ in 0..20_000 {
            u1 = reg.step(v_dc, dt).compensator;
        }
        let mut u2 = 0.0;
        let extra = 10_000;
        for _ in 0..extra {
            u2 = reg.step(v_dc, dt).compensator;
        }
        let slope = (u2 - u1) / (extra as f64 * dt);
        let lead_dc = (p.omega_z / p.omega_p).sqrt();
        assert_relative_eq!(slope, p.k_p * lead_dc * e / p.t_i, max_relative = 1e-3);
    }

    #[test]
    fn loop_closure_sign_discharges_error() {
        // bus below reference: the set-point must go negative so the
        // converter imports power and the bus recovers
        let mut reg = DcReg::new(params(), 1e-4);
        let out = reg.step(390.0, 1e-4);
        assert!(out.p0 < 0.0);
    }

    #[test]
    fn lead_lag_midpoint_identities() {
        let p = params();
        let wm = (p.omega_z * p.omega_p).sqrt();
        // maximum phase lead of the lead-lag part occurs at the geometric
        // midpoint, where its magnitude contribution is exactly 1
        let lead_only = |w: f64| {
            let s = Complex64::new(0.0, w);
            (p.omega_p / p.omega_z).sqrt() * (s + p.omega_z) / (s + p.omega_p)
        };
        assert_relative_eq!(lead_only(wm).norm(), 1.0, max_relative = 1e-12);
        let phase_mid = lead_only(wm).arg();
        for w in [0.5 * wm, 0.9 * wm, 1.1 * wm, 2.0 * wm] {
            assert!(lead_only(w).arg() <= phase_mid + 1e-12);
        }
    }

    #[test]
    fn response_asymptotes() {
        let p = params();
        // very high frequency: PI → 1, lead → √(ωp/ωz)
        let hi = p.response(1e7);
        assert_relative_eq!(hi.norm(), p.k_p * (p.omega_p / p.omega_z).sqrt(), max_relative = 1e-4);
        // very low frequency: integrator dominated, phase → −90°
        let lo = p.response(1e-4);
        assert_relative_eq!(lo.arg().to_degrees(), -90.0, epsilon = 0.1);
    }

    #[test]
    fn discrete_matches_continuous_well_below_nyquist() {
        let p = params();
        let dt = 1e-4;
        // drive with a sinusoidal error and compare against the analytic
        // response at 5 Hz
        let w = 2.0 * std::f64::consts::PI * 5.0;
        let mut reg = DcReg::new(p.clone(), dt);
        let settle = 100_000;
        let n = (2.0 * std::f64::consts::PI / w / dt).round() as usize * 10;
        let mut out = Vec::with_capacity(n);
        for k in 0..settle + n {
            let t = k as f64 * dt;
            let e = (w * t).cos();
            let y = reg.step(p.v_ref - e, dt).compensator;
            if k >= settle {
                out.push(y);
            }
        }
        let x = crate::util::single_bin_projection(&out, dt, settle as f64 * dt, w);
        let h = p.response(w);
        assert_relative_eq!(x.norm(), h.norm(), max_relative = 2e-3);
        assert!((x.arg() - h.arg()).abs() < 3e-3);
    }
}

//! Emulated virtual impedance.
//!
//! A band-limited virtual resistance (optionally with a virtual inductance)
//! provides the proportional damping the integral-form oscillator lacks; a
//! bank of resonant sections raises the converter output impedance at
//! selected harmonics. The resonant numerators are inductive-form when the
//! network-side current is fed back and resistive-form for converter-side
//! feedback.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::core::SpaceVector;
use crate::error::{Error, Result};
use crate::util::BilinearSection;

/// Which converter current is measured and fed back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurrentFeedback {
    /// Network/grid-side inductor current.
    Grid,
    /// Converter-side inductor current.
    Converter,
}

/// One resonant section of the harmonic-compensation bank.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResonantBand {
    /// Harmonic order; the center frequency is `h·ω0`.
    pub harmonic: u32,
    /// Impedance magnitude at the center, Ω.
    pub gain: f64,
    /// Bandwidth of the section, rad/s.
    pub bandwidth: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EviParams {
    /// Virtual resistance, Ω.
    pub r_vir: f64,
    /// Virtual inductance, H.
    pub l_vir: f64,
    /// Bandwidth limit of the resistive/inductive branch, rad/s.
    pub omega_c: f64,
    /// Resonant harmonic-compensation bank.
    pub bank: Vec<ResonantBand>,
}

impl EviParams {
    pub fn validate(&self) -> Result<()> {
        if self.r_vir < 0.0 || self.l_vir < 0.0 {
            return Err(Error::Schema("virtual impedance must be non-negative".into()));
        }
        if !(self.omega_c > 0.0) {
            return Err(Error::Schema("virtual impedance bandwidth must be positive".into()));
        }
        Ok(())
    }
}

/// Discrete-time realization of the virtual impedance, one filter chain per
/// axis. Sections are discretized by the bilinear transform, prewarped at
/// the branch corner and at each resonance center respectively.
#[derive(Debug, Clone)]
pub struct Evi {
    sections_alpha: Vec<BilinearSection>,
    sections_beta: Vec<BilinearSection>,
    dt: f64,
}

impl Evi {
    pub fn new(p: &EviParams, side: CurrentFeedback, omega0: f64, dt: f64) -> Evi {
        let mut protos: Vec<BilinearSection> = Vec::new();
        protos.push(BilinearSection::new(
            [p.r_vir, p.l_vir, 0.0],
            [1.0, 1.0 / p.omega_c, 0.0],
            dt,
            Some(p.omega_c),
        ));
        for band in &p.bank {
            let wh = band.harmonic as f64 * omega0;
            let num = match side {
                CurrentFeedback::Grid => [-band.gain * band.bandwidth * wh, 0.0, 0.0],
                CurrentFeedback::Converter => [0.0, band.gain * band.bandwidth, 0.0],
            };
            protos.push(BilinearSection::new(num, [wh * wh, band.bandwidth, 1.0], dt, Some(wh)));
        }
        Evi { sections_beta: protos.clone(), sections_alpha: protos, dt }
    }

    /// Filter one sample of the feedback current into the series voltage.
    pub fn step(&mut self, i: SpaceVector) -> SpaceVector {
        let mut v = SpaceVector::ZERO;
        for s in &mut self.sections_alpha {
            v.alpha += s.step(i.alpha);
        }
        for s in &mut self.sections_beta {
            v.beta += s.step(i.beta);
        }
        v
    }

    /// Frequency response of the discrete realization.
    pub fn response(&self, omega: f64) -> Complex64 {
        self.sections_alpha.iter().map(|s| s.response(omega, self.dt)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const OMEGA0: f64 = 2.0 * std::f64::consts::PI * 60.0;
    const DT: f64 = 1e-4;

    #[test]
    fn dc_gain_is_r_vir() {
        let p = EviParams { r_vir: 0.21, l_vir: 0.0, omega_c: 1200.0, bank: vec![] };
        let mut evi = Evi::new(&p, CurrentFeedback::Grid, OMEGA0, DT);
        let mut out = SpaceVector::ZERO;
        for _ in 0..20_000 {
            out = evi.step(SpaceVector::new(10.0, -4.0));
        }
        assert_relative_eq!(out.alpha, 0.21 * 10.0, max_relative = 1e-9);
        assert_relative_eq!(out.beta, 0.21 * -4.0, max_relative = 1e-9);
    }

    #[test]
    fn grid_side_resonance_is_inductive_at_center() {
        let band = ResonantBand { harmonic: 5, gain: 12.0, bandwidth: 10.0 };
        let p = EviParams { r_vir: 0.0, l_vir: 0.0, omega_c: 1200.0, bank: vec![band] };
        let evi = Evi::new(&p, CurrentFeedback::Grid, OMEGA0, DT);
        let h = evi.response(5.0 * OMEGA0);
        assert_relative_eq!(h.norm(), 12.0, max_relative = 1e-6);
        assert_relative_eq!(h.arg().to_degrees(), 90.0, max_relative = 1e-4);
    }

    #[test]
    fn converter_side_resonance_is_resistive_at_center() {
        let band = ResonantBand { harmonic: 7, gain: 8.0, bandwidth: 15.0 };
        let p = EviParams { r_vir: 0.0, l_vir: 0.0, omega_c: 1200.0, bank: vec![band] };
        let evi = Evi::new(&p, CurrentFeedback::Converter, OMEGA0, DT);
        let h = evi.response(7.0 * OMEGA0);
        assert_relative_eq!(h.norm(), 8.0, max_relative = 1e-6);
        assert!(h.arg().to_degrees().abs() < 1e-4);
    }

    #[test]
    fn discretization_tracks_continuous_response_at_centers() {
        // compare against the continuous-time transfer function at each
        // resonance center: 1% magnitude, 1 degree phase
        let bank = vec![
            ResonantBand { harmonic: 3, gain: 10.0, bandwidth: 8.0 },
            ResonantBand { harmonic: 5, gain: 10.0, bandwidth: 8.0 },
            ResonantBand { harmonic: 7, gain: 6.0, bandwidth: 12.0 },
            ResonantBand { harmonic: 11, gain: 4.0, bandwidth: 16.0 },
            ResonantBand { harmonic: 13, gain: 4.0, bandwidth: 16.0 },
        ];
        let p = EviParams { r_vir: 0.21, l_vir: 0.0, omega_c: 1200.0, bank };
        let evi = Evi::new(&p, CurrentFeedback::Grid, OMEGA0, DT);
        for band in &p.bank {
            let w = band.harmonic as f64 * OMEGA0;
            let s = Complex64::new(0.0, w);
            let mut cont = Complex64::new(p.r_vir, 0.0) / (s / p.omega_c + 1.0);
            for b in &p.bank {
                let wh = b.harmonic as f64 * OMEGA0;
                cont += Complex64::new(-b.gain * b.bandwidth * wh, 0.0)
                    / (s * s + b.bandwidth * s + wh * wh);
            }
            let disc = evi.response(w);
            assert_relative_eq!(disc.norm(), cont.norm(), max_relative = 0.01);
            let dphase = (disc.arg() - cont.arg()).to_degrees();
            assert!(dphase.abs() < 1.0, "phase error {dphase} deg at h={}", band.harmonic);
        }
    }

    #[test]
    fn sine_drive_matches_response_evaluation() {
        // time-domain cross-check of the frequency response at one harmonic
        let band = ResonantBand { harmonic: 5, gain: 12.0, bandwidth: 10.0 };
        let p = EviParams { r_vir: 0.21, l_vir: 0.5e-3, omega_c: 1200.0, bank: vec![band] };
        let mut evi = Evi::new(&p, CurrentFeedback::Grid, OMEGA0, DT);
        let w = 5.0 * OMEGA0;
        let n_settle = 50_000;
        let n_window = (2.0 * std::f64::consts::PI / w / DT).round() as usize * 20;
        let mut out = Vec::new();
        for k in 0..n_settle + n_window {
            let t = k as f64 * DT;
            let y = evi.step(SpaceVector::new((w * t).cos(), 0.0));
            if k >= n_settle {
                out.push(y.alpha);
            }
        }
        let t0 = n_settle as f64 * DT;
        let x = crate::util::single_bin_projection(&out, DT, t0, w);
        let h = evi.response(w);
        assert_relative_eq!(x.norm(), h.norm(), max_relative = 1e-3);
    }
}

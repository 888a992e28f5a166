//! Space-vector value types, reference-frame transforms, and
//! instantaneous-power algebra.
//!
//! Three-phase (or delay-constructed single-phase) quantities are carried as
//! two-component vectors in the stationary αβ frame. The Clarke transform
//! here is amplitude-invariant (2/3 scaling), so the magnitude of a voltage
//! vector equals the phase peak value and the power expressions carry the
//! N/2 factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A two-component stationary-frame (αβ) vector. Carries voltages in volts
/// or currents in amperes; the vector itself is unit-agnostic.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpaceVector {
    pub alpha: f64,
    pub beta: f64,
}

impl SpaceVector {
    pub const ZERO: SpaceVector = SpaceVector { alpha: 0.0, beta: 0.0 };

    pub fn new(alpha: f64, beta: f64) -> Self {
        SpaceVector { alpha, beta }
    }

    pub fn magnitude(&self) -> f64 {
        self.alpha.hypot(self.beta)
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite()
    }

    /// Complex multiplication by `e^{jφ}`; preserves the magnitude.
    pub fn rotate(&self, phi: f64) -> SpaceVector {
        let (s, c) = phi.sin_cos();
        SpaceVector {
            alpha: c * self.alpha - s * self.beta,
            beta: s * self.alpha + c * self.beta,
        }
    }

    pub fn scale(&self, k: f64) -> SpaceVector {
        SpaceVector { alpha: k * self.alpha, beta: k * self.beta }
    }

    pub fn dot(&self, other: &SpaceVector) -> f64 {
        self.alpha * other.alpha + self.beta * other.beta
    }
}

impl std::ops::Add for SpaceVector {
    type Output = SpaceVector;
    fn add(self, rhs: SpaceVector) -> SpaceVector {
        SpaceVector { alpha: self.alpha + rhs.alpha, beta: self.beta + rhs.beta }
    }
}

impl std::ops::Sub for SpaceVector {
    type Output = SpaceVector;
    fn sub(self, rhs: SpaceVector) -> SpaceVector {
        SpaceVector { alpha: self.alpha - rhs.alpha, beta: self.beta - rhs.beta }
    }
}

impl std::ops::Mul<f64> for SpaceVector {
    type Output = SpaceVector;
    fn mul(self, k: f64) -> SpaceVector {
        self.scale(k)
    }
}

impl std::ops::Neg for SpaceVector {
    type Output = SpaceVector;
    fn neg(self) -> SpaceVector {
        SpaceVector { alpha: -self.alpha, beta: -self.beta }
    }
}

/// Magnitude/angle form of a space vector. The zero vector decomposes to
/// angle 0 by convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarForm {
    /// Vector magnitude, ≥ 0 (phase peak scale).
    pub magnitude: f64,
    /// Angle in radians.
    pub angle: f64,
}

pub fn polar_decompose(v: SpaceVector) -> PolarForm {
    let magnitude = v.magnitude();
    let angle = if magnitude == 0.0 { 0.0 } else { v.beta.atan2(v.alpha) };
    PolarForm { magnitude, angle }
}

pub fn polar_compose(p: PolarForm) -> SpaceVector {
    let (s, c) = p.angle.sin_cos();
    SpaceVector { alpha: p.magnitude * c, beta: p.magnitude * s }
}

/// Amplitude-invariant Clarke transform of three phase samples.
pub fn abc_to_alphabeta(a: f64, b: f64, c: f64) -> SpaceVector {
    SpaceVector {
        alpha: (2.0 / 3.0) * (a - 0.5 * b - 0.5 * c),
        beta: (2.0 / 3.0) * (3.0f64.sqrt() / 2.0) * (b - c),
    }
}

/// Phase count of the converter. Everything downstream is generalized over
/// the two cases through the `N` factor in the power expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseCount {
    #[serde(rename = "1")]
    Single,
    #[serde(rename = "3")]
    Three,
}

impl PhaseCount {
    pub fn as_f64(&self) -> f64 {
        match self {
            PhaseCount::Single => 1.0,
            PhaseCount::Three => 3.0,
        }
    }
}

/// Converter nameplate data and the base quantities derived from it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VscRatings {
    /// Apparent power rating, VA.
    pub s_rated: f64,
    /// Real power rating, W.
    pub p_rated: f64,
    /// Reactive power rating, VAR.
    pub q_rated: f64,
    /// Nominal line-neutral RMS voltage, V.
    pub v_nominal: f64,
    /// Nominal angular frequency, rad/s.
    pub omega0: f64,
    /// Controller sampling rate, Hz.
    pub sampling_hz: f64,
    /// Phase count.
    pub phases: PhaseCount,
}

impl VscRatings {
    pub fn validate(&self) -> Result<()> {
        if !(self.sampling_hz > 0.0) {
            return Err(Error::Schema("sampling rate must be positive".into()));
        }
        if !(self.s_rated > 0.0 && self.v_nominal > 0.0 && self.omega0 > 0.0) {
            return Err(Error::Schema("ratings must be positive".into()));
        }
        let s2 = self.p_rated.powi(2) + self.q_rated.powi(2);
        if s2 > self.s_rated.powi(2) * 1.01 {
            return Err(Error::Schema(format!(
                "P_rated² + Q_rated² = {s2:.3e} exceeds S_rated² by more than 1%"
            )));
        }
        Ok(())
    }

    /// Impedance base: 3·V0²/S for three phase, V0²/S for single phase.
    pub fn z_base(&self) -> f64 {
        self.phases.as_f64() * self.v_nominal.powi(2) / self.s_rated
    }

    /// Current base on the vector-magnitude (phase peak) scale.
    pub fn i_base_peak(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.s_rated / (self.phases.as_f64() * self.v_nominal)
    }

    /// Voltage base on the vector-magnitude (phase peak) scale.
    pub fn v_base_peak(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.v_nominal
    }

    pub fn inductance_base(&self) -> f64 {
        self.z_base() / self.omega0
    }

    pub fn capacitance_base(&self) -> f64 {
        1.0 / (self.z_base() * self.omega0)
    }

    pub fn control_period(&self) -> f64 {
        1.0 / self.sampling_hz
    }
}

/// Instantaneous real and reactive power of a voltage/current vector pair.
pub fn instantaneous_pq(v: SpaceVector, i: SpaceVector, n: f64) -> (f64, f64) {
    let p = 0.5 * n * (v.alpha * i.alpha + v.beta * i.beta);
    let q = 0.5 * n * (v.beta * i.alpha - v.alpha * i.beta);
    (p, q)
}

/// Power tracking error and its current-scaled components.
///
/// The scaled components satisfy `(e_ip + j e_iq)·v = i0 − i` with `i0` the
/// instantaneous-power-theory current reference for the same set-points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerError {
    pub e_p: f64,
    pub e_q: f64,
    pub e_ip: f64,
    pub e_iq: f64,
}

pub fn power_error(
    v: SpaceVector,
    i: SpaceVector,
    p0: f64,
    q0: f64,
    n: f64,
    v_floor: f64,
) -> Result<PowerError> {
    let mag = v.magnitude();
    if mag < v_floor {
        return Err(Error::DegenerateVoltage { magnitude: mag, floor: v_floor });
    }
    let (p, q) = instantaneous_pq(v, i, n);
    let e_p = p0 - p;
    let e_q = q0 - q;
    let vp2 = mag * mag;
    Ok(PowerError {
        e_p,
        e_q,
        e_ip: 2.0 * e_p / (n * vp2),
        e_iq: -2.0 * e_q / (n * vp2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn clarke_zero_input() {
        let v = abc_to_alphabeta(0.0, 0.0, 0.0);
        assert_eq!(v, SpaceVector::ZERO);
    }

    #[test]
    fn clarke_balanced_set_is_amplitude_invariant() {
        let a = 0.0f64.cos();
        let b = (-2.0 * std::f64::consts::PI / 3.0).cos();
        let c = (2.0 * std::f64::consts::PI / 3.0).cos();
        let v = abc_to_alphabeta(a, b, c);
        assert_relative_eq!(v.alpha, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.beta, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn clarke_single_phase_energized() {
        let v = abc_to_alphabeta(1.0, 0.0, 0.0);
        assert_relative_eq!(v.alpha, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.beta, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn clarke_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x: [f64; 3] = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let y: [f64; 3] = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let sum = abc_to_alphabeta(x[0] + y[0], x[1] + y[1], x[2] + y[2]);
            let parts = abc_to_alphabeta(x[0], x[1], x[2]) + abc_to_alphabeta(y[0], y[1], y[2]);
            assert_abs_diff_eq!(sum.alpha, parts.alpha, epsilon = 1e-12);
            assert_abs_diff_eq!(sum.beta, parts.beta, epsilon = 1e-12);
        }
    }

    #[test]
    fn polar_examples() {
        let p = polar_decompose(SpaceVector::new(1.0, 0.0));
        assert_eq!((p.magnitude, p.angle), (1.0, 0.0));

        let p = polar_decompose(SpaceVector::new(0.0, 2.0));
        assert_relative_eq!(p.magnitude, 2.0);
        assert_relative_eq!(p.angle, std::f64::consts::FRAC_PI_2);

        let p = polar_decompose(SpaceVector::new(-3.0, -4.0));
        assert_relative_eq!(p.magnitude, 5.0);
        assert_relative_eq!(p.angle, (-4.0f64).atan2(-3.0));
    }

    #[test]
    fn polar_zero_vector_angle_convention() {
        let p = polar_decompose(SpaceVector::ZERO);
        assert_eq!(p.angle, 0.0);
        assert_eq!(p.magnitude, 0.0);
    }

    #[test]
    fn polar_round_trip_many_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100_000 {
            let v = SpaceVector::new(rng.gen_range(-1e3..1e3), rng.gen_range(-1e3..1e3));
            if v.magnitude() == 0.0 {
                continue;
            }
            let back = polar_compose(polar_decompose(v));
            assert_relative_eq!(back.alpha, v.alpha, epsilon = 1e-12, max_relative = 1e-12);
            assert_relative_eq!(back.beta, v.beta, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn rotate_examples() {
        let v = SpaceVector::new(1.0, 0.0).rotate(std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(v.alpha, 0.0, epsilon = 1e-15);
        assert_relative_eq!(v.beta, 1.0);

        let v = SpaceVector::new(1.0, 0.0).rotate(0.0);
        assert_eq!(v, SpaceVector::new(1.0, 0.0));

        let v = SpaceVector::new(1.0, 1.0).rotate(std::f64::consts::PI);
        assert_relative_eq!(v.alpha, -1.0, epsilon = 1e-12);
        assert_relative_eq!(v.beta, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn rotate_preserves_magnitude_and_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let v = SpaceVector::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
            let p1 = rng.gen_range(-6.0..6.0);
            let p2 = rng.gen_range(-6.0..6.0);
            let a = v.rotate(p1).rotate(p2);
            let b = v.rotate(p1 + p2);
            assert_relative_eq!(v.rotate(p1).magnitude(), v.magnitude(), max_relative = 1e-12);
            assert_abs_diff_eq!(a.alpha, b.alpha, epsilon = 1e-9);
            assert_abs_diff_eq!(a.beta, b.beta, epsilon = 1e-9);
        }
    }

    #[test]
    fn instantaneous_pq_examples() {
        let (p, q) = instantaneous_pq(SpaceVector::new(100.0, 0.0), SpaceVector::new(10.0, 0.0), 3.0);
        assert_relative_eq!(p, 1500.0);
        assert_abs_diff_eq!(q, 0.0);

        let (p, q) = instantaneous_pq(SpaceVector::new(100.0, 0.0), SpaceVector::new(0.0, 10.0), 3.0);
        assert_abs_diff_eq!(p, 0.0);
        assert_relative_eq!(q, -1500.0);

        let (p, q) = instantaneous_pq(SpaceVector::new(100.0, 17.0), SpaceVector::ZERO, 3.0);
        assert_eq!((p, q), (0.0, 0.0));
    }

    #[test]
    fn power_error_at_tracking_equilibrium_is_zero() {
        // i chosen as the exact reference for (P0, Q0): all error fields vanish.
        let v = SpaceVector::new(170.0, 40.0);
        let n = 3.0;
        let (p0, q0) = (3000.0, -500.0);
        let vp2 = v.magnitude().powi(2);
        let i = SpaceVector::new(
            2.0 / n * (v.alpha * p0 + v.beta * q0) / vp2,
            2.0 / n * (v.beta * p0 - v.alpha * q0) / vp2,
        );
        let e = power_error(v, i, p0, q0, n, 1e-6).unwrap();
        assert_abs_diff_eq!(e.e_p, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(e.e_q, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(e.e_ip, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.e_iq, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn power_error_open_circuit_demand() {
        let vp = 170.0;
        let v = SpaceVector::new(vp, 0.0);
        let (p0, q0) = (3000.0, 1500.0);
        let e = power_error(v, SpaceVector::ZERO, p0, q0, 3.0, 1e-6).unwrap();
        assert_relative_eq!(e.e_p, p0);
        assert_relative_eq!(e.e_q, q0);
        assert_relative_eq!(e.e_ip, 2.0 * p0 / (3.0 * vp * vp));
        assert_relative_eq!(e.e_iq, -2.0 * q0 / (3.0 * vp * vp));
    }

    #[test]
    fn power_error_rejects_degenerate_voltage() {
        let r = power_error(SpaceVector::new(1e-9, 0.0), SpaceVector::ZERO, 1.0, 0.0, 3.0, 1e-6);
        assert!(matches!(r, Err(Error::DegenerateVoltage { .. })));
    }

    #[test]
    fn error_decomposition_reconstructs_current_error() {
        // (e_ip + j e_iq)·v must equal i0 − i for arbitrary vector pairs.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let v = SpaceVector::new(rng.gen_range(-200.0..200.0), rng.gen_range(-200.0..200.0));
            if v.magnitude() < 1.0 {
                continue;
            }
            let i = SpaceVector::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            let (p0, q0) = (rng.gen_range(-5e3..5e3), rng.gen_range(-5e3..5e3));
            let n = 3.0;
            let e = power_error(v, i, p0, q0, n, 1e-6).unwrap();
            let vp2 = v.magnitude().powi(2);
            let i0 = SpaceVector::new(
                2.0 / n * (v.alpha * p0 + v.beta * q0) / vp2,
                2.0 / n * (v.beta * p0 - v.alpha * q0) / vp2,
            );
            // complex (e_ip + j e_iq) * v
            let rec = SpaceVector::new(
                e.e_ip * v.alpha - e.e_iq * v.beta,
                e.e_ip * v.beta + e.e_iq * v.alpha,
            );
            let expect = i0 - i;
            let scale = expect.magnitude().max(1e-6);
            assert!((rec - expect).magnitude() / scale < 1e-9);
        }
    }

    #[test]
    fn ratings_validation() {
        let mut r = VscRatings {
            s_rated: 10_000.0,
            p_rated: 9_000.0,
            q_rated: 4_400.0,
            v_nominal: 120.0,
            omega0: 2.0 * std::f64::consts::PI * 60.0,
            sampling_hz: 10_000.0,
            phases: PhaseCount::Three,
        };
        assert!(r.validate().is_ok());
        assert_relative_eq!(r.z_base(), 4.32, epsilon = 1e-12);
        r.q_rated = 9_000.0;
        assert!(r.validate().is_err());
    }
}

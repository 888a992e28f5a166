//! Steady-state design toolkit: oscillator gain selection from ratings and
//! allowable network excursions, droop closed forms, and the numeric
//! power-limit map over the grid voltage/frequency box.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::controller::{CurrentFeedback, SvoParams};
use crate::core::VscRatings;
use crate::error::{Error, Result};
use crate::util::parallel_map;

/// Ratings plus the allowed network excursions the gains are designed for.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignSpec {
    pub ratings: VscRatings,
    /// Maximum voltage deviation at the PoC, V (L-N RMS).
    pub delta_v_max: f64,
    /// Maximum frequency deviation, rad/s.
    pub delta_omega_max: f64,
    /// Current-error rotation angle, rad (0 or π/2 for pure droop pairings).
    pub phi: f64,
}

impl DesignSpec {
    pub fn v_max(&self) -> f64 {
        self.ratings.v_nominal + self.delta_v_max
    }

    pub fn validate(&self) -> Result<()> {
        self.ratings.validate()?;
        if !(self.delta_v_max > 0.0 && self.delta_v_max < self.ratings.v_nominal) {
            return Err(Error::Infeasible(format!(
                "delta_v_max {} must lie in (0, V0)",
                self.delta_v_max
            )));
        }
        if !(self.delta_omega_max > 0.0) {
            return Err(Error::Infeasible("delta_omega_max must be positive".into()));
        }
        Ok(())
    }
}

/// Gain pair selected so the output powers reach their ratings exactly at
/// the edges of the allowed excursion box.
///
/// For φ=π/2 real power pairs with frequency and reactive power with
/// voltage; for φ=0 the pairings swap.
pub fn design_eta_mu(spec: &DesignSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let r = &spec.ratings;
    let n = r.phases.as_f64();
    let v0 = r.v_nominal;
    let v_max = spec.v_max();
    let denom = (2.0 * v_max * v_max - v0 * v0).powi(2) - v0.powi(4);
    if denom <= 0.0 {
        return Err(Error::Infeasible(
            "voltage excursion too small: gain denominator is not positive".into(),
        ));
    }
    let quarter = std::f64::consts::FRAC_PI_2;
    let (freq_rated, volt_rated) = if (spec.phi - quarter).abs() < 1e-9 {
        (r.p_rated, r.q_rated)
    } else if spec.phi.abs() < 1e-9 {
        (r.q_rated, r.p_rated)
    } else {
        return Err(Error::Infeasible(format!(
            "gain design is defined for phi = 0 or pi/2, got {}",
            spec.phi
        )));
    };
    let eta = n * spec.delta_omega_max * v_max * v_max / freq_rated;
    let mu = 2.0 * eta * volt_rated / (n * denom);
    Ok((eta, mu))
}

/// Closed-form steady-state RMS voltage for a grid-forming operating point.
pub fn steady_state_voltage(p: f64, q: f64, params: &SvoParams) -> Result<f64> {
    if !(params.mu > 0.0) {
        return Err(Error::Infeasible(
            "voltage droop closed form requires a positive magnitude-correction gain".into(),
        ));
    }
    let v0 = params.v_p0 / std::f64::consts::SQRT_2;
    let drive = (params.p0 - p) * params.phi.cos() + (params.q0 - q) * params.phi.sin();
    let radicand = 1.0 + 2.0 * params.eta * drive / (params.mu * params.n * v0.powi(4));
    if radicand < 0.0 {
        return Err(Error::Infeasible(format!(
            "operating point outside the voltage droop range (radicand {radicand:.6})"
        )));
    }
    Ok(v0 / std::f64::consts::SQRT_2 * (1.0 + radicand.sqrt()).sqrt())
}

/// Steady-state frequency for a given power flow and voltage.
pub fn droop_frequency(p: f64, q: f64, v: f64, params: &SvoParams) -> f64 {
    params.omega0
        + params.eta / (params.n * v * v)
            * ((params.p0 - p) * params.phi.sin() - (params.q0 - q) * params.phi.cos())
}

/// LCL filter in phasor form for the power-flow solve.
#[derive(Debug, Clone)]
pub struct LclPhasor {
    pub l_a: f64,
    pub r_a: f64,
    pub l_g: f64,
    pub r_g: f64,
    pub c_f: f64,
}

#[derive(Debug, Clone)]
pub struct PowerMapParams {
    pub svo: SvoParams,
    pub lcl: LclPhasor,
    pub feedback: CurrentFeedback,
    /// Grid RMS voltage range (min, max) and node count.
    pub v_range: (f64, f64, usize),
    /// Grid angular frequency range (min, max) and node count.
    pub omega_range: (f64, f64, usize),
    pub tolerance: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct PowerMapNode {
    /// Grid RMS voltage at the PoC.
    pub v_g: f64,
    /// Network frequency, rad/s.
    pub omega: f64,
    /// Power delivered at the PoC.
    pub p_poc: f64,
    pub q_poc: f64,
    /// Oscillator RMS voltage and angle at the solution.
    pub v_osc: f64,
    pub theta: f64,
    pub converged: bool,
}

/// Phasor solution of the LCL two-port for fixed boundary voltages. Returns
/// (converter current, grid current, capacitor voltage) as RMS phasors.
fn lcl_solve(
    v_poles: Complex64,
    v_poc: Complex64,
    omega: f64,
    lcl: &LclPhasor,
) -> (Complex64, Complex64, Complex64) {
    let za = Complex64::new(lcl.r_a, omega * lcl.l_a);
    let zg = Complex64::new(lcl.r_g, omega * lcl.l_g);
    let yc = Complex64::new(0.0, omega * lcl.c_f);
    let v_f = (v_poles / za + v_poc / zg) / (1.0 / za + yc + 1.0 / zg);
    ((v_poles - v_f) / za, (v_f - v_poc) / zg, v_f)
}

/// Steady-state droop residuals at the poles for a candidate (V, θ).
fn droop_residuals(
    v: f64,
    theta: f64,
    v_g: f64,
    omega: f64,
    params: &SvoParams,
    lcl: &LclPhasor,
    feedback: CurrentFeedback,
) -> [f64; 2] {
    let v_poles = Complex64::from_polar(v, theta);
    let v_poc = Complex64::new(v_g, 0.0);
    let (i_a, i_g, _) = lcl_solve(v_poles, v_poc, omega, lcl);
    let i_fb = match feedback {
        CurrentFeedback::Grid => i_g,
        CurrentFeedback::Converter => i_a,
    };
    let s = params.n * v_poles * i_fb.conj();
    let (p, q) = (s.re, s.im);
    let v0 = params.v_p0 / std::f64::consts::SQRT_2;
    let drive_v = (params.p0 - p) * params.phi.cos() + (params.q0 - q) * params.phi.sin();
    let drive_w = (params.p0 - p) * params.phi.sin() - (params.q0 - q) * params.phi.cos();
    [
        v * v - v0 * v0 - params.eta / (2.0 * params.mu * params.n * v * v) * drive_v,
        omega - params.omega0 - params.eta / (params.n * v * v) * drive_w,
    ]
}

/// Solve one map node by damped Newton iteration on (V, θ).
pub fn solve_power_flow_node(
    v_g: f64,
    omega: f64,
    params: &SvoParams,
    lcl: &LclPhasor,
    feedback: CurrentFeedback,
    tolerance: f64,
    max_iterations: usize,
) -> PowerMapNode {
    let v0 = params.v_p0 / std::f64::consts::SQRT_2;
    let inits = [[v_g, 0.0], [v0, 0.0], [0.5 * (v0 + v_g), 0.2], [v0, -0.2]];
    let mut node = newton_node(inits[0], v_g, omega, params, lcl, feedback, tolerance, max_iterations);
    for init in &inits[1..] {
        if node.converged {
            break;
        }
        node = newton_node(*init, v_g, omega, params, lcl, feedback, tolerance, max_iterations);
    }
    node
}

#[allow(clippy::too_many_arguments)]
fn newton_node(
    init: [f64; 2],
    v_g: f64,
    omega: f64,
    params: &SvoParams,
    lcl: &LclPhasor,
    feedback: CurrentFeedback,
    tolerance: f64,
    max_iterations: usize,
) -> PowerMapNode {
    let v0 = params.v_p0 / std::f64::consts::SQRT_2;
    let mut x = init;
    let scale = [v0 * v0, params.omega0];
    let norm = |f: &[f64; 2]| (f[0] / scale[0]).abs().max((f[1] / scale[1]).abs());
    let mut converged = false;

    for _ in 0..max_iterations {
        let f = droop_residuals(x[0], x[1], v_g, omega, params, lcl, feedback);
        let r = norm(&f);
        if r < tolerance {
            converged = true;
            break;
        }
        // forward-difference Jacobian
        let hv = 1e-7 * v0.max(x[0].abs());
        let ht = 1e-8;
        let fv = droop_residuals(x[0] + hv, x[1], v_g, omega, params, lcl, feedback);
        let ft = droop_residuals(x[0], x[1] + ht, v_g, omega, params, lcl, feedback);
        let j = [
            [(fv[0] - f[0]) / hv, (ft[0] - f[0]) / ht],
            [(fv[1] - f[1]) / hv, (ft[1] - f[1]) / ht],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let dx = [
            -(f[0] * j[1][1] - f[1] * j[0][1]) / det,
            -(j[0][0] * f[1] - j[1][0] * f[0]) / det,
        ];
        // damp while the step makes things worse
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let cand = [x[0] + step * dx[0], x[1] + step * dx[1]];
            if cand[0] > 0.05 * v0 {
                let fc = droop_residuals(cand[0], cand[1], v_g, omega, params, lcl, feedback);
                if norm(&fc) < r {
                    x = cand;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let v_poles = Complex64::from_polar(x[0], x[1]);
    let v_poc = Complex64::new(v_g, 0.0);
    let (_, i_g, _) = lcl_solve(v_poles, v_poc, omega, lcl);
    let s_poc = params.n * v_poc * i_g.conj();
    PowerMapNode {
        v_g,
        omega,
        p_poc: s_poc.re,
        q_poc: s_poc.im,
        v_osc: x[0],
        theta: x[1],
        converged,
    }
}

/// Power delivered at the PoC over a grid of (voltage, frequency) nodes.
pub fn power_limit_map(params: &PowerMapParams) -> Vec<PowerMapNode> {
    let (v_lo, v_hi, nv) = params.v_range;
    let (w_lo, w_hi, nw) = params.omega_range;
    let mut nodes = Vec::with_capacity(nv * nw);
    for iv in 0..nv {
        let v_g = if nv == 1 { v_lo } else { v_lo + (v_hi - v_lo) * iv as f64 / (nv - 1) as f64 };
        for iw in 0..nw {
            let w = if nw == 1 { w_lo } else { w_lo + (w_hi - w_lo) * iw as f64 / (nw - 1) as f64 };
            nodes.push((v_g, w));
        }
    }
    let svo = params.svo.clone();
    let lcl = params.lcl.clone();
    parallel_map(nodes, move |(v_g, w)| {
        solve_power_flow_node(
            v_g,
            w,
            &svo,
            &lcl,
            params.feedback,
            params.tolerance,
            params.max_iterations,
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::PhaseCount;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn table_ratings() -> VscRatings {
        VscRatings {
            s_rated: 10_000.0,
            p_rated: 9_000.0,
            q_rated: 4_400.0,
            v_nominal: 120.0,
            omega0: 2.0 * std::f64::consts::PI * 60.0,
            sampling_hz: 10_000.0,
            phases: PhaseCount::Three,
        }
    }

    fn spec(phi: f64) -> DesignSpec {
        DesignSpec {
            ratings: table_ratings(),
            delta_v_max: 6.0,
            delta_omega_max: std::f64::consts::PI,
            phi,
        }
    }

    fn designed_svo() -> SvoParams {
        let s = spec(std::f64::consts::FRAC_PI_2);
        let (eta, mu) = design_eta_mu(&s).unwrap();
        SvoParams {
            eta,
            mu,
            phi: s.phi,
            omega0: s.ratings.omega0,
            v_p0: 2.0f64.sqrt() * 120.0,
            p0: 0.0,
            q0: 0.0,
            n: 3.0,
            v_floor: 1e-4,
        }
    }

    #[test]
    fn worked_design_numbers() {
        let (eta, mu) = design_eta_mu(&spec(std::f64::consts::FRAC_PI_2)).unwrap();
        assert_relative_eq!(eta, 16.6253, max_relative = 1e-4);
        assert_relative_eq!(mu, 5.2029e-4, max_relative = 1e-4);

        let (eta0, _) = design_eta_mu(&spec(0.0)).unwrap();
        assert_relative_eq!(eta0, 34.01, max_relative = 1e-3);
    }

    #[test]
    fn eta_vanishes_with_the_frequency_band() {
        let mut s = spec(std::f64::consts::FRAC_PI_2);
        s.delta_omega_max = 1e-9;
        let (eta, _) = design_eta_mu(&s).unwrap();
        assert!(eta < 1e-6);
    }

    #[test]
    fn design_identities_back_substitute() {
        // frequency edge: rated power at V_max and Δω_max exactly;
        // voltage edge: rated reactive absorption lands on V_max exactly
        let s = spec(std::f64::consts::FRAC_PI_2);
        let (eta, mu) = design_eta_mu(&s).unwrap();
        let n = 3.0;
        let v_max = s.v_max();
        assert_relative_eq!(
            n * s.delta_omega_max * v_max * v_max / eta,
            s.ratings.p_rated,
            max_relative = 1e-12
        );
        let denom = (2.0 * v_max * v_max - 120.0f64.powi(2)).powi(2) - 120.0f64.powi(4);
        assert_relative_eq!(mu / eta, 2.0 * s.ratings.q_rated / (n * denom), max_relative = 1e-12);

        let params = designed_svo();
        let v = steady_state_voltage(0.0, -s.ratings.q_rated, &params).unwrap();
        assert_relative_eq!(v, v_max, max_relative = 1e-12);
    }

    #[test]
    fn voltage_closed_form_fixed_point_and_monotonicity() {
        let params = designed_svo();
        let v = steady_state_voltage(0.0, 0.0, &params).unwrap();
        assert_relative_eq!(v, 120.0, max_relative = 1e-12);
        // monotone increasing in (Q0 - Q)
        let mut prev = 0.0;
        for k in 0..50 {
            let q = 4400.0 - k as f64 * (2.0 * 4400.0 / 49.0); // Q from +rated to -rated
            let v = steady_state_voltage(0.0, q, &params).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn voltage_lower_branch_matches_numeric_inversion() {
        // delivering rated reactive power: invert the droop numerically and
        // compare with the closed form
        let params = designed_svo();
        let q = 4400.0;
        let v_closed = steady_state_voltage(0.0, q, &params).unwrap();
        // bisection on Q(V) = (nμ/2η)(V0⁴ − (2V²−V0²)²) against q
        let v0 = 120.0f64;
        let q_of_v = |v: f64| {
            params.n * params.mu / (2.0 * params.eta)
                * (v0.powi(4) - (2.0 * v * v - v0 * v0).powi(2))
        };
        let (mut lo, mut hi) = (0.7 * v0, v0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q_of_v(mid) > q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_relative_eq!(v_closed, 0.5 * (lo + hi), max_relative = 1e-9);
    }

    #[test]
    fn infeasible_radicand_is_an_error() {
        let params = designed_svo();
        // delivering far beyond the design range drives the radicand negative
        let r = steady_state_voltage(0.0, 50_000.0, &params);
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }

    #[test]
    fn frequency_droop_values() {
        let params = designed_svo();
        assert_relative_eq!(droop_frequency(0.0, 0.0, 120.0, &params), params.omega0);
        let dw = droop_frequency(-9000.0, 0.0, 120.0, &params) - params.omega0;
        assert_relative_eq!(dw, 16.6253 * 9000.0 / (3.0 * 14400.0), max_relative = 1e-4);
        assert_relative_eq!(dw, 3.4636, max_relative = 1e-3);
    }

    #[test]
    fn frequency_droop_is_linear_in_powers() {
        let params = designed_svo();
        let v = 121.3;
        let w0 = droop_frequency(0.0, 0.0, v, &params);
        let wp = droop_frequency(1000.0, 0.0, v, &params);
        let wq = droop_frequency(0.0, 1000.0, v, &params);
        let wpq = droop_frequency(3000.0, -2000.0, v, &params);
        let slope_p = wp - w0;
        let slope_q = wq - w0;
        assert_abs_diff_eq!(wpq - w0, 3.0 * slope_p - 2.0 * slope_q, epsilon = 1e-12);
    }

    #[test]
    fn phi_zero_design_identity_at_voltage_edge() {
        let s = spec(0.0);
        let (eta, mu) = design_eta_mu(&s).unwrap();
        let params = SvoParams {
            eta,
            mu,
            phi: 0.0,
            omega0: s.ratings.omega0,
            v_p0: 2.0f64.sqrt() * 120.0,
            p0: 0.0,
            q0: 0.0,
            n: 3.0,
            v_floor: 1e-4,
        };
        // at V_max with rated reactive absorption the frequency deviation is
        // the full design band
        let w = droop_frequency(0.0, s.ratings.q_rated, s.v_max(), &params);
        assert_relative_eq!((w - params.omega0).abs(), s.delta_omega_max, max_relative = 1e-12);
    }

    fn table_lcl() -> LclPhasor {
        let zb = 4.32;
        let w0 = 2.0 * std::f64::consts::PI * 60.0;
        LclPhasor {
            l_a: 0.0778 * zb / w0,
            r_a: 0.0,
            l_g: 0.0524 * zb / w0,
            r_g: 0.0,
            c_f: 0.0879 / (zb * w0),
        }
    }

    #[test]
    fn nominal_node_is_unloaded() {
        let params = designed_svo();
        let node = solve_power_flow_node(
            120.0,
            params.omega0,
            &params,
            &table_lcl(),
            CurrentFeedback::Grid,
            1e-12,
            60,
        );
        assert!(node.converged);
        // only the filter capacitor's own reactive flow remains at the PoC
        assert_abs_diff_eq!(node.p_poc, 0.0, epsilon = 1.0);
        assert!(node.q_poc.abs() < 0.12 * 10_000.0);
        assert_relative_eq!(node.v_osc, 120.0, max_relative = 5e-3);
    }

    #[test]
    fn direct_connection_reproduces_the_closed_forms() {
        // shrink the filter to nothing: the solved node powers must satisfy
        // the droop closed forms evaluated at the grid condition
        let params = designed_svo();
        let lcl = LclPhasor { l_a: 1e-9, r_a: 1e-9, l_g: 1e-9, r_g: 1e-9, c_f: 1e-12 };
        let v_g = 123.0;
        let w = params.omega0 + 1.0;
        // the near-zero impedance makes the power flow ill-conditioned, so
        // the residual floor sits well above the default map tolerance
        let node = solve_power_flow_node(v_g, w, &params, &lcl, CurrentFeedback::Grid, 1e-8, 80);
        assert!(node.converged);
        // invert the two droop relations for (P, Q) at V = V_g, ω = ω_g
        let drive_w = (w - params.omega0) * params.n * v_g * v_g / params.eta;
        let drive_v = (v_g * v_g - 14400.0) * 2.0 * params.mu * params.n * v_g * v_g / params.eta;
        // φ=π/2: drive_v = Q0 − Q, drive_w = P0 − P
        let p_expect = params.p0 - drive_w;
        let q_expect = params.q0 - drive_v;
        assert_relative_eq!(node.p_poc, p_expect, max_relative = 1e-3, epsilon = 1.0);
        assert_relative_eq!(node.q_poc, q_expect, max_relative = 1e-3, epsilon = 1.0);
    }

    #[test]
    fn map_refinement_is_pure() {
        let w0 = 2.0 * std::f64::consts::PI * 60.0;
        let params = PowerMapParams {
            svo: designed_svo(),
            lcl: table_lcl(),
            feedback: CurrentFeedback::Grid,
            v_range: (114.0, 126.0, 3),
            omega_range: (w0 - std::f64::consts::PI, w0 + std::f64::consts::PI, 3),
            tolerance: 1e-12,
            max_iterations: 60,
        };
        let coarse = power_limit_map(&params);
        assert!(coarse.iter().all(|n| n.converged));
        // refining the grid leaves shared nodes identical
        let fine = PowerMapParams {
            v_range: (114.0, 126.0, 5),
            omega_range: params.omega_range,
            ..params
        };
        let fine_nodes = power_limit_map(&fine);
        let shared_c = coarse
            .iter()
            .find(|n| n.v_g == 114.0 && n.omega == w0 - std::f64::consts::PI)
            .unwrap();
        let shared_f = fine_nodes
            .iter()
            .find(|n| n.v_g == 114.0 && n.omega == w0 - std::f64::consts::PI)
            .unwrap();
        assert_relative_eq!(shared_c.p_poc, shared_f.p_poc, max_relative = 1e-8, epsilon = 1e-6);
        assert_relative_eq!(shared_c.q_poc, shared_f.q_poc, max_relative = 1e-8, epsilon = 1e-6);
    }
}

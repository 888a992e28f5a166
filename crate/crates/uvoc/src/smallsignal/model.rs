//! Nonlinear synchronous-frame model of the controlled converter and its
//! exact analytic Jacobians.
//!
//! States are ordered `[I_d, I_q, V, θ_s, v_dc]` with the currents and
//! voltage on the RMS scale, the oscillator angle relative to a frame
//! rotating at the reference frequency, and the bus voltage in volts.
//! Inputs are `[P0, Q0]`. The filter capacitor is neglected: all series
//! elements lump into one equivalent resistance and inductance.

use nalgebra::{DMatrix, DVector};

use crate::controller::SvoParams;
use crate::error::{Error, Result};

/// Lumped electrical parameters seen by the oscillator.
#[derive(Debug, Clone)]
pub struct SmallSignalParams {
    pub svo: SvoParams,
    /// Total series resistance including the virtual resistance, Ω.
    pub r_e: f64,
    /// Total series inductance including any virtual inductance, H.
    pub l_e: f64,
    /// DC link capacitance, F.
    pub c_dc: f64,
    /// Nominal bus voltage used for modulation scaling, V.
    pub v_dc_ref: f64,
    /// External DC power at the operating point, W.
    pub p_dc: f64,
}

impl SmallSignalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_e > 0.0) {
            return Err(Error::Schema("equivalent inductance must be positive".into()));
        }
        if !(self.c_dc > 0.0 && self.v_dc_ref > 0.0) {
            return Err(Error::Schema("DC link parameters must be positive".into()));
        }
        Ok(())
    }

    /// Nominal RMS voltage set-point.
    pub fn v0(&self) -> f64 {
        self.svo.v_p0 / std::f64::consts::SQRT_2
    }
}

/// Grid condition the model is attached to.
#[derive(Debug, Clone, Copy)]
pub struct GridCondition {
    /// Grid L-N RMS voltage behind the lumped impedance.
    pub v_g: f64,
    /// Reference-frame (network) frequency, rad/s.
    pub omega: f64,
}

/// Operating regime of the controller.
#[derive(Debug, Clone, Copy)]
pub enum Mode {
    Normal,
    /// Current-clamped ride-through: the set-points are scaled by the clamp
    /// gain times the voltage, the series compensation resistance and its
    /// reference feedforward enter the current dynamics, the magnitude
    /// correction is disabled, and the synchronization gain gets the
    /// additive boost `R0/τ_f` when a boost constant is given.
    Fault {
        i_max: f64,
        r_ocl: f64,
        /// Gain boost constant τ_f; `None` leaves the gain unchanged.
        gain_tau: Option<f64>,
    },
}

impl Mode {
    fn is_fault(&self) -> bool {
        matches!(self, Mode::Fault { .. })
    }
}

/// Mode-resolved coefficients used by both the nonlinear assembly and the
/// analytic Jacobian.
struct Coefficients {
    eta: f64,
    mu: f64,
    r_e: f64,
    /// Clamp gain, zero in normal mode.
    k_m: f64,
    /// Series compensation gain, zero in normal mode.
    r_ocl: f64,
}

fn coefficients(p: &SmallSignalParams, mode: &Mode) -> Coefficients {
    match *mode {
        Mode::Normal => Coefficients {
            eta: p.svo.eta,
            mu: p.svo.mu,
            r_e: p.r_e,
            k_m: 0.0,
            r_ocl: 0.0,
        },
        Mode::Fault { i_max, r_ocl, gain_tau } => Coefficients {
            eta: p.svo.eta + gain_tau.map_or(0.0, |tau| r_ocl / tau),
            mu: 0.0,
            r_e: p.r_e + r_ocl,
            k_m: crate::controller::clamp_gain(p.svo.p0, p.svo.q0, p.svo.n, i_max),
            r_ocl,
        },
    }
}

/// Right-hand side of the five-state model.
pub fn nonlinear_f(
    x: &[f64; 5],
    u: &[f64; 2],
    p: &SmallSignalParams,
    grid: &GridCondition,
    mode: &Mode,
) -> [f64; 5] {
    let c = coefficients(p, mode);
    let [i_d, i_q, v, theta, v_dc] = *x;
    let [p0, q0] = *u;
    let n = p.svo.n;
    let (sin, cos) = theta.sin_cos();
    let k_v = v_dc / p.v_dc_ref;
    let xi1 = i_d * cos + i_q * sin;
    let xi2 = i_d * sin - i_q * cos;
    let pw = n * k_v * v * xi1;
    let qw = n * k_v * v * xi2;
    let (cph, sph) = (p.svo.phi.cos(), p.svo.phi.sin());

    // clamped-mode set-point substitution
    let (p0_eff, q0_eff) = if mode.is_fault() {
        (c.k_m * v * p0, c.k_m * v * q0)
    } else {
        (p0, q0)
    };

    let mut f1 = -c.r_e / p.l_e * i_d + grid.omega * i_q + (k_v * v * cos - grid.v_g) / p.l_e;
    let mut f2 = -grid.omega * i_d - c.r_e / p.l_e * i_q + k_v * v * sin / p.l_e;
    if mode.is_fault() {
        // clamped reference feedforward through the series compensation
        f1 += c.r_ocl / p.l_e * (c.k_m / n) * (p0 * cos + q0 * sin);
        f2 += c.r_ocl / p.l_e * (c.k_m / n) * (p0 * sin - q0 * cos);
    }
    let v0 = p.v0();
    let f3 = 2.0 * c.mu * v * (v0 * v0 - v * v)
        + c.eta / (n * v) * ((p0_eff - pw) * cph + (q0_eff - qw) * sph);
    let f4 = p.svo.omega0 - grid.omega
        + c.eta / (n * v * v) * ((p0_eff - pw) * sph - (q0_eff - qw) * cph);
    let f5 = p.p_dc / (p.c_dc * v_dc) - n * v * xi1 / (p.c_dc * p.v_dc_ref);
    [f1, f2, f3, f4, f5]
}

/// Exact analytic Jacobians (∂F/∂x, ∂F/∂u) of [`nonlinear_f`].
pub fn analytic_jacobian(
    x: &[f64; 5],
    u: &[f64; 2],
    p: &SmallSignalParams,
    grid: &GridCondition,
    mode: &Mode,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let c = coefficients(p, mode);
    let [i_d, i_q, v, theta, v_dc] = *x;
    let [p0, q0] = *u;
    let n = p.svo.n;
    let l = p.l_e;
    let (sin, cos) = theta.sin_cos();
    let k_v = v_dc / p.v_dc_ref;
    let xi1 = i_d * cos + i_q * sin;
    let xi2 = i_d * sin - i_q * cos;
    let pw = n * k_v * v * xi1;
    let qw = n * k_v * v * xi2;
    let (cph, sph) = (p.svo.phi.cos(), p.svo.phi.sin());
    let fault = mode.is_fault();
    let (p0_eff, q0_eff) = if fault { (c.k_m * v * p0, c.k_m * v * q0) } else { (p0, q0) };

    // power partials
    let dp = [n * k_v * v * cos, n * k_v * v * sin, n * k_v * xi1, -n * k_v * v * xi2, n * v * xi1 / p.v_dc_ref];
    let dq = [n * k_v * v * sin, -n * k_v * v * cos, n * k_v * xi2, n * k_v * v * xi1, n * v * xi2 / p.v_dc_ref];
    // effective set-point partials w.r.t. V (clamped mode only)
    let dp0_dv = if fault { c.k_m * p0 } else { 0.0 };
    let dq0_dv = if fault { c.k_m * q0 } else { 0.0 };
    // w.r.t. the inputs
    let m_u = if fault { c.k_m * v } else { 1.0 };

    let mut a = DMatrix::zeros(5, 5);
    let mut b = DMatrix::zeros(5, 2);

    // current rows
    a[(0, 0)] = -c.r_e / l;
    a[(0, 1)] = grid.omega;
    a[(0, 2)] = k_v * cos / l;
    a[(0, 3)] = -k_v * v * sin / l;
    a[(0, 4)] = v * cos / (p.v_dc_ref * l);
    a[(1, 0)] = -grid.omega;
    a[(1, 1)] = -c.r_e / l;
    a[(1, 2)] = k_v * sin / l;
    a[(1, 3)] = k_v * v * cos / l;
    a[(1, 4)] = v * sin / (p.v_dc_ref * l);
    if fault {
        let g = c.r_ocl / l * (c.k_m / n);
        a[(0, 3)] += g * (-p0 * sin + q0 * cos);
        a[(1, 3)] += g * (p0 * cos + q0 * sin);
        b[(0, 0)] = g * cos;
        b[(0, 1)] = g * sin;
        b[(1, 0)] = g * sin;
        b[(1, 1)] = -g * cos;
    }

    // oscillator magnitude row:
    // F3 = 2μV(V0²−V²) + (η/(nV))·G, G = (p0_eff−P)cφ + (q0_eff−Q)sφ
    let g_val = (p0_eff - pw) * cph + (q0_eff - qw) * sph;
    let v0 = p.v0();
    let dg = |dp_k: f64, dq_k: f64, dp0_k: f64, dq0_k: f64| {
        (dp0_k - dp_k) * cph + (dq0_k - dq_k) * sph
    };
    a[(2, 0)] = c.eta / (n * v) * dg(dp[0], dq[0], 0.0, 0.0);
    a[(2, 1)] = c.eta / (n * v) * dg(dp[1], dq[1], 0.0, 0.0);
    a[(2, 2)] = 2.0 * c.mu * (v0 * v0 - 3.0 * v * v)
        + c.eta / n * (dg(dp[2], dq[2], dp0_dv, dq0_dv) * v - g_val) / (v * v);
    a[(2, 3)] = c.eta / (n * v) * dg(dp[3], dq[3], 0.0, 0.0);
    a[(2, 4)] = c.eta / (n * v) * dg(dp[4], dq[4], 0.0, 0.0);
    b[(2, 0)] = c.eta / (n * v) * m_u * cph;
    b[(2, 1)] = c.eta / (n * v) * m_u * sph;

    // oscillator angle row:
    // F4 = ω0 − ω* + (η/(nV²))·H, H = (p0_eff−P)sφ − (q0_eff−Q)cφ
    let h_val = (p0_eff - pw) * sph - (q0_eff - qw) * cph;
    let dh = |dp_k: f64, dq_k: f64, dp0_k: f64, dq0_k: f64| {
        (dp0_k - dp_k) * sph - (dq0_k - dq_k) * cph
    };
    a[(3, 0)] = c.eta / (n * v * v) * dh(dp[0], dq[0], 0.0, 0.0);
    a[(3, 1)] = c.eta / (n * v * v) * dh(dp[1], dq[1], 0.0, 0.0);
    a[(3, 2)] = c.eta / n * (dh(dp[2], dq[2], dp0_dv, dq0_dv) / (v * v) - 2.0 * h_val / (v * v * v));
    a[(3, 3)] = c.eta / (n * v * v) * dh(dp[3], dq[3], 0.0, 0.0);
    a[(3, 4)] = c.eta / (n * v * v) * dh(dp[4], dq[4], 0.0, 0.0);
    b[(3, 0)] = c.eta / (n * v * v) * m_u * sph;
    b[(3, 1)] = -c.eta / (n * v * v) * m_u * cph;

    // bus row: F5 = p_dc/(C v_dc) − nVξ1/(C V*_dc)
    let cd = p.c_dc;
    a[(4, 0)] = -n * v * cos / (cd * p.v_dc_ref);
    a[(4, 1)] = -n * v * sin / (cd * p.v_dc_ref);
    a[(4, 2)] = -n * xi1 / (cd * p.v_dc_ref);
    a[(4, 3)] = n * v * xi2 / (cd * p.v_dc_ref);
    a[(4, 4)] = -p.p_dc / (cd * v_dc * v_dc);

    (a, b)
}

/// Central-difference Jacobians of [`nonlinear_f`], the reference the
/// analytic form is checked against.
///
/// Each column uses extrapolated central differences (a Ridders tableau):
/// the step starts large and shrinks geometrically while a Neville scheme
/// cancels the even-order truncation terms and tracks the best estimate.
/// This keeps the subtraction noise floor well below the comparison
/// tolerance even where a row of the model carries large magnitudes.
pub fn finite_difference_jacobian(
    x: &[f64; 5],
    u: &[f64; 2],
    p: &SmallSignalParams,
    grid: &GridCondition,
    mode: &Mode,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let x_scale = [
        x[0].abs().max(10.0),
        x[1].abs().max(10.0),
        x[2].abs().max(p.v0()),
        1.0,
        x[4].abs().max(p.v_dc_ref),
    ];
    let u_scale = [u[0].abs().max(1000.0), u[1].abs().max(1000.0)];

    let mut a = DMatrix::zeros(5, 5);
    let mut b = DMatrix::zeros(5, 2);
    for j in 0..5 {
        let col = ridders_column(
            |h| {
                let mut xp = *x;
                let mut xm = *x;
                xp[j] += h;
                xm[j] -= h;
                let fp = nonlinear_f(&xp, u, p, grid, mode);
                let fm = nonlinear_f(&xm, u, p, grid, mode);
                std::array::from_fn(|i| (fp[i] - fm[i]) / (2.0 * h))
            },
            0.05 * x_scale[j],
        );
        for i in 0..5 {
            a[(i, j)] = col[i];
        }
    }
    for j in 0..2 {
        let col = ridders_column(
            |h| {
                let mut up = *u;
                let mut um = *u;
                up[j] += h;
                um[j] -= h;
                let fp = nonlinear_f(x, &up, p, grid, mode);
                let fm = nonlinear_f(x, &um, p, grid, mode);
                std::array::from_fn(|i| (fp[i] - fm[i]) / (2.0 * h))
            },
            0.05 * u_scale[j],
        );
        for i in 0..5 {
            b[(i, j)] = col[i];
        }
    }
    (a, b)
}

/// Ridders extrapolation of a vector-valued central difference, tracking
/// the best estimate per component.
fn ridders_column<F: Fn(f64) -> [f64; 5]>(diff: F, h0: f64) -> [f64; 5] {
    const LEVELS: usize = 9;
    const SHRINK: f64 = 1.6;
    let con2 = SHRINK * SHRINK;
    let mut tableau = vec![vec![[0.0f64; 5]; LEVELS]; LEVELS];
    let mut best = [0.0f64; 5];
    let mut best_err = [f64::INFINITY; 5];
    let mut h = h0;
    tableau[0][0] = diff(h);
    for k in 0..5 {
        best[k] = tableau[0][0][k];
    }
    for i in 1..LEVELS {
        h /= SHRINK;
        tableau[0][i] = diff(h);
        let mut fac = con2;
        for m in 1..=i {
            let mut row = [0.0f64; 5];
            for k in 0..5 {
                row[k] = (tableau[m - 1][i][k] * fac - tableau[m - 1][i - 1][k]) / (fac - 1.0);
            }
            tableau[m][i] = row;
            fac *= con2;
            for k in 0..5 {
                let err = (tableau[m][i][k] - tableau[m - 1][i][k])
                    .abs()
                    .max((tableau[m][i][k] - tableau[m - 1][i - 1][k]).abs());
                if err <= best_err[k] {
                    best_err[k] = err;
                    best[k] = tableau[m][i][k];
                }
            }
        }
    }
    best
}

/// The settled converter state and the consistent DC power draw.
#[derive(Debug, Clone, Copy)]
pub struct OperatingPoint {
    pub i_d: f64,
    pub i_q: f64,
    /// Oscillator RMS voltage.
    pub v: f64,
    pub theta_s: f64,
    pub v_dc: f64,
    /// External DC power making the bus equation balance.
    pub p_dc: f64,
    pub grid: GridCondition,
    /// Infinity norm of the model residual at this point.
    pub residual: f64,
}

impl OperatingPoint {
    pub fn state(&self) -> [f64; 5] {
        [self.i_d, self.i_q, self.v, self.theta_s, self.v_dc]
    }
}

const EQ_TOLERANCE: f64 = 1e-10;
const EQ_MAX_ITER: usize = 120;

/// Solve the AC equilibrium with the bus pinned at its reference, then
/// back-fill the DC power that balances the bus equation.
pub fn equilibrium_solve(
    p: &SmallSignalParams,
    grid: &GridCondition,
    mode: &Mode,
) -> Result<OperatingPoint> {
    p.validate()?;
    let v0 = p.v0();
    let inits: [[f64; 4]; 6] = [
        [0.0, 0.0, v0.max(grid.v_g), 0.0],
        [0.0, 0.0, grid.v_g.max(0.2 * v0), 0.3],
        [0.0, 0.0, v0, -0.3],
        [0.0, 0.0, 0.5 * (v0 + grid.v_g), 0.8],
        [0.0, 0.0, (0.3 * v0).max(grid.v_g), -0.8],
        [0.0, 0.0, v0, 1.5],
    ];
    let mut best_residual = f64::INFINITY;
    for init in inits {
        match newton4(init, p, grid, mode) {
            Ok(op) => return Ok(op),
            Err(Error::NoConvergence { residual, .. }) => {
                best_residual = best_residual.min(residual)
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoConvergence { iterations: EQ_MAX_ITER, residual: best_residual })
}

fn newton4(
    init: [f64; 4],
    p: &SmallSignalParams,
    grid: &GridCondition,
    mode: &Mode,
) -> Result<OperatingPoint> {
    let u = [p.svo.p0, p.svo.q0];
    let mut x4 = init;
    let full = |x4: &[f64; 4]| [x4[0], x4[1], x4[2], x4[3], p.v_dc_ref];
    let res4 = |x4: &[f64; 4]| {
        let f = nonlinear_f(&full(x4), &u, p, grid, mode);
        [f[0], f[1], f[2], f[3]]
    };
    let norm = |f: &[f64; 4]| f.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut residual = f64::INFINITY;
    for _ in 0..EQ_MAX_ITER {
        if !(x4[2] > 1e-3 * p.v0()) || !x4.iter().all(|v| v.is_finite()) {
            break;
        }
        let f = res4(&x4);
        residual = norm(&f);
        if residual < EQ_TOLERANCE {
            let x5 = full(&x4);
            let xi1 = x4[0] * x4[3].cos() + x4[1] * x4[3].sin();
            let p_eq = p.svo.n * x5[2] * xi1; // k_v = 1 at the pinned bus
            return Ok(OperatingPoint {
                i_d: x4[0],
                i_q: x4[1],
                v: x4[2],
                theta_s: x4[3],
                v_dc: p.v_dc_ref,
                p_dc: p_eq,
                grid: *grid,
                residual,
            });
        }
        let (a, _) = analytic_jacobian(&full(&x4), &u, p, grid, mode);
        let j4 = a.view((0, 0), (4, 4)).into_owned();
        let rhs = DVector::from_column_slice(&f);
        let dx = match j4.lu().solve(&rhs) {
            Some(d) => d,
            None => break,
        };
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..12 {
            let cand = [
                x4[0] - step * dx[0],
                x4[1] - step * dx[1],
                x4[2] - step * dx[2],
                x4[3] - step * dx[3],
            ];
            if cand[2] > 1e-3 * p.v0() {
                let fc = res4(&cand);
                if norm(&fc) < residual {
                    x4 = cand;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: EQ_MAX_ITER, residual })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    pub(crate) fn table_params() -> SmallSignalParams {
        // lossless filter with a 1 mH dominantly inductive network branch
        let zb = 4.32;
        let w0 = 2.0 * std::f64::consts::PI * 60.0;
        SmallSignalParams {
            svo: SvoParams {
                eta: 16.6253,
                mu: 5.2029e-4,
                phi: std::f64::consts::FRAC_PI_2,
                omega0: w0,
                v_p0: 2.0f64.sqrt() * 120.0,
                p0: 0.0,
                q0: 0.0,
                n: 3.0,
                v_floor: 1e-4,
            },
            r_e: 0.049 * zb,
            l_e: (0.0778 + 0.0524) * zb / w0 + 1e-3,
            c_dc: 2e-3,
            v_dc_ref: 400.0,
            p_dc: 0.0,
        }
    }

    fn nominal_grid() -> GridCondition {
        GridCondition { v_g: 120.0, omega: 2.0 * std::f64::consts::PI * 60.0 }
    }

    #[test]
    fn zero_flow_fixed_point() {
        let p = table_params();
        let op = equilibrium_solve(&p, &nominal_grid(), &Mode::Normal).unwrap();
        assert_abs_diff_eq!(op.i_d, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(op.i_q, 0.0, epsilon = 1e-9);
        assert_relative_eq!(op.v, 120.0, max_relative = 1e-10);
        assert_abs_diff_eq!(op.theta_s, 0.0, epsilon = 1e-10);
        assert_relative_eq!(op.v_dc, 400.0);
        assert!(op.residual < 1e-10);
        assert_abs_diff_eq!(op.p_dc, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn loaded_equilibrium_converges_tightly() {
        let mut p = table_params();
        p.svo.p0 = 5000.0;
        p.svo.q0 = -1500.0;
        let op = equilibrium_solve(&p, &nominal_grid(), &Mode::Normal).unwrap();
        assert!(op.residual < 1e-10, "residual {}", op.residual);
        // delivering real power advances the oscillator angle
        assert!(op.theta_s > 0.0);
    }

    #[test]
    fn analytic_jacobian_matches_central_differences() {
        let p = table_params();
        let grid = nominal_grid();
        for mode in [
            Mode::Normal,
            Mode::Fault { i_max: 39.28, r_ocl: 5.25, gain_tau: Some(0.028) },
        ] {
            let mut pp = p.clone();
            pp.svo.p0 = 4000.0;
            pp.svo.q0 = 1000.0;
            pp.p_dc = -800.0;
            let x = [12.0, -7.5, 118.0, 0.21, 396.0];
            let u = [pp.svo.p0, pp.svo.q0];
            let (a, b) = analytic_jacobian(&x, &u, &pp, &grid, &mode);
            let (afd, bfd) = finite_difference_jacobian(&x, &u, &pp, &grid, &mode);
            for i in 0..5 {
                for j in 0..5 {
                    let denom = afd[(i, j)].abs().max(1e-3);
                    assert!(
                        (a[(i, j)] - afd[(i, j)]).abs() / denom < 1e-6
                            || (a[(i, j)] - afd[(i, j)]).abs() < 1e-9,
                        "A[{i},{j}] analytic {} vs fd {}",
                        a[(i, j)],
                        afd[(i, j)]
                    );
                }
                for j in 0..2 {
                    let denom = bfd[(i, j)].abs().max(1e-3);
                    assert!(
                        (b[(i, j)] - bfd[(i, j)]).abs() / denom < 1e-6
                            || (b[(i, j)] - bfd[(i, j)]).abs() < 1e-9,
                        "B[{i},{j}] analytic {} vs fd {}",
                        b[(i, j)],
                        bfd[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn known_entries_at_any_point() {
        let p = table_params();
        let grid = nominal_grid();
        let x = [3.0, 1.0, 121.0, 0.05, 401.0];
        let (a, _) = analytic_jacobian(&x, &[0.0, 0.0], &p, &grid, &Mode::Normal);
        assert_relative_eq!(a[(0, 0)], -p.r_e / p.l_e, max_relative = 1e-12);
        assert_relative_eq!(a[(0, 1)], grid.omega, max_relative = 1e-12);
    }

    #[test]
    fn zero_flow_bus_row_reduces_to_projection() {
        let p = table_params();
        let grid = nominal_grid();
        let op = equilibrium_solve(&p, &grid, &Mode::Normal).unwrap();
        let (a, _) = analytic_jacobian(&op.state(), &[0.0, 0.0], &p, &grid, &Mode::Normal);
        let scale = p.svo.n * op.v / (p.c_dc * p.v_dc_ref);
        assert_relative_eq!(a[(4, 0)], -scale * op.theta_s.cos(), max_relative = 1e-9);
        assert_abs_diff_eq!(a[(4, 1)], -scale * op.theta_s.sin(), epsilon = 1e-9);
        // ξ1 = ξ2 = 0 at zero flow
        assert_abs_diff_eq!(a[(4, 2)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(4, 3)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fault_mode_equilibrium_under_deep_sag() {
        let mut p = table_params();
        p.svo.p0 = 5000.0;
        p.svo.q0 = (10_000.0f64.powi(2) - 5000.0f64.powi(2)).sqrt();
        let grid = GridCondition { v_g: 0.3 * 120.0, omega: nominal_grid().omega };
        let mode = Mode::Fault { i_max: 39.28, r_ocl: 5.25, gain_tau: Some(0.028) };
        let op = equilibrium_solve(&p, &grid, &mode).unwrap();
        assert!(op.residual < 1e-10);
        // clamped current magnitude: |I| = I_m/√2 on the RMS component scale
        let i_mag = (op.i_d * op.i_d + op.i_q * op.i_q).sqrt();
        assert_relative_eq!(i_mag, 39.28 / 2.0f64.sqrt(), max_relative = 0.05);
    }
}

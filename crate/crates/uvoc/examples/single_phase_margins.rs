//! Stability margins of the single-phase rectifier bus-voltage loop at no
//! load: crossover, gain margin, and phase margin of F_dc·G_OL.
//!
//! ```bash
//! cargo run --release -p uvoc --example single_phase_margins
//! ```

use num_complex::Complex64;
use uvoc::controller::{DcRegParams, SvoParams};
use uvoc::smallsignal::{equilibrium_solve, g_ol, linearize, margins, GridCondition, Mode, SmallSignalParams};

fn loop_margins(c_dc: f64) -> (f64, f64, f64) {
    let w0 = 2.0 * std::f64::consts::PI * 60.0;
    let zb = 4.32; // same filter hardware as the three-phase build
    let params = SmallSignalParams {
        svo: SvoParams {
            eta: 16.63,
            mu: 0.0,
            phi: std::f64::consts::FRAC_PI_2,
            omega0: w0,
            v_p0: 2.0f64.sqrt() * 120.0,
            p0: 0.0,
            q0: 0.0,
            n: 1.0,
            v_floor: 1e-4,
        },
        r_e: 0.21,
        l_e: (0.0778 + 0.0524) * zb / w0,
        c_dc,
        v_dc_ref: 200.0,
        p_dc: 0.0,
    };
    let reg = DcRegParams {
        k_p: 40.0,
        t_i: 0.4,
        omega_z: 5.0 * std::f64::consts::PI,
        omega_p: 30.0 * std::f64::consts::PI,
        v_ref: 200.0,
    };
    let grid = GridCondition { v_g: 120.0, omega: w0 };
    let op = equilibrium_solve(&params, &grid, &Mode::Normal).unwrap();
    let model = linearize(&op, &params, &Mode::Normal).unwrap();
    let tf = g_ol(&model).unwrap();
    let l = move |w: f64| {
        reg.response(w) * tf.eval_jw(w).unwrap_or(Complex64::new(f64::NAN, 0.0))
    };
    let m = margins(&l, (0.05, 2000.0)).unwrap();
    (m.gain_crossover, m.gain_margin_db.unwrap_or(f64::NAN), m.phase_margin_deg)
}

fn main() {
    // sweep the bus capacitance to see where the crossover lands
    println!("{:>10} {:>12} {:>10} {:>10}", "C_dc [mF]", "wc [rad/s]", "GM [dB]", "PM [deg]");
    for c_mf in [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0] {
        let (wc, gm, pm) = loop_margins(c_mf * 1e-3);
        println!("{c_mf:>10.1} {wc:>12.3} {gm:>10.2} {pm:>10.2}");
    }
    println!("\ntarget: wc = 7π ≈ {:.3} rad/s, GM ≈ 25.6 dB, PM ≈ 71.5°", 7.0 * std::f64::consts::PI);

    // bisect on the crossover target
    let target = 7.0 * std::f64::consts::PI;
    let (mut lo, mut hi) = (0.5e-3, 20e-3);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (wc, _, _) = loop_margins(mid);
        if wc > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let (wc, gm, pm) = loop_margins(c);
    println!("calibrated C_dc = {:.4} mF -> wc = {wc:.3} rad/s, GM = {gm:.2} dB, PM = {pm:.2} deg", c * 1e3);
}

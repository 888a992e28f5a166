//! Temporary probe: fault-mode spectra under gain-boost interpretations.

use uvoc::controller::SvoParams;
use uvoc::smallsignal::{eigenvalues, equilibrium_solve, linearize, GridCondition, Mode, SmallSignalParams};

fn spectrum(eta: f64, gain_tau: Option<f64>, label: &str) {
    let w0 = 2.0 * std::f64::consts::PI * 60.0;
    let p = SmallSignalParams {
        svo: SvoParams {
            eta,
            mu: 5.2029e-4,
            phi: std::f64::consts::FRAC_PI_2,
            omega0: w0,
            v_p0: 2.0f64.sqrt() * 120.0,
            p0: 5000.0,
            q0: (10_000.0f64.powi(2) - 5000.0f64.powi(2)).sqrt(),
            n: 3.0,
            v_floor: 1e-4,
        },
        r_e: 0.21 + 0.008 * 4.32,
        l_e: 3.784e-3 + 1.0e-3,
        c_dc: 2e-3,
        v_dc_ref: 400.0,
        p_dc: 0.0,
    };
    let grid = GridCondition { v_g: 0.3 * 120.0, omega: w0 };
    let mode = Mode::Fault { i_max: 39.28, r_ocl: 5.25, gain_tau };
    match equilibrium_solve(&p, &grid, &mode) {
        Ok(op) => {
            let m = linearize(&op, &p, &mode).unwrap();
            let eigs = eigenvalues(&m.a11());
            let s: Vec<String> = eigs.iter().map(|e| format!("{:.1}{:+.1}j", e.re, e.im)).collect();
            println!("{label}: eq V={:.1} th={:.3} |I|={:.1}  eigs: {}", op.v, op.theta_s, (op.i_d * op.i_d + op.i_q * op.i_q).sqrt(), s.join(", "));
        }
        Err(e) => println!("{label}: equilibrium failed ({e})"),
    }
}

fn main() {
    spectrum(16.63, None, "no boost (eta_f = eta)        ");
    spectrum(16.63, Some(0.028), "multiplicative (eta_f = 188 eta)");
    spectrum(16.63 + 5.25 / 0.028, None, "additive (eta_f = eta + R0/tau) ");
}

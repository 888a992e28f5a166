//! Sweep the grid voltage/frequency box and verify the PoC powers stay
//! inside the converter ratings with gains from the design rules.
//!
//! ```bash
//! cargo run --release -p uvoc --example power_limit_map
//! ```

use uvoc::controller::CurrentFeedback;
use uvoc::core::{PhaseCount, VscRatings};
use uvoc::design::{design_eta_mu, power_limit_map, DesignSpec, LclPhasor, PowerMapParams};

fn main() {
    let ratings = VscRatings {
        s_rated: 10_000.0,
        p_rated: 9_000.0,
        q_rated: 4_400.0,
        v_nominal: 120.0,
        omega0: 2.0 * std::f64::consts::PI * 60.0,
        sampling_hz: 10_000.0,
        phases: PhaseCount::Three,
    };
    let spec = DesignSpec {
        ratings: ratings.clone(),
        delta_v_max: 0.05 * 120.0,
        delta_omega_max: std::f64::consts::PI,
        phi: std::f64::consts::FRAC_PI_2,
    };
    let (eta, mu) = design_eta_mu(&spec).unwrap();
    println!("designed gains: eta = {eta:.4}, mu = {mu:.4e}");

    let zb = ratings.z_base();
    let w0 = ratings.omega0;
    let lcl = LclPhasor {
        l_a: 0.0778 * zb / w0,
        r_a: 0.0,
        l_g: 0.0524 * zb / w0,
        r_g: 0.0,
        c_f: 0.0879 / (zb * w0),
    };
    for feedback in [CurrentFeedback::Grid, CurrentFeedback::Converter] {
        let params = PowerMapParams {
            svo: uvoc::controller::SvoParams {
                eta,
                mu,
                phi: spec.phi,
                omega0: w0,
                v_p0: ratings.v_base_peak(),
                p0: 0.0,
                q0: 0.0,
                n: 3.0,
                v_floor: 1e-4,
            },
            lcl: lcl.clone(),
            feedback,
            v_range: (120.0 - 6.0, 120.0 + 6.0, 21),
            omega_range: (w0 - std::f64::consts::PI, w0 + std::f64::consts::PI, 21),
            tolerance: 1e-12,
            max_iterations: 80,
        };
        let t0 = std::time::Instant::now();
        let nodes = power_limit_map(&params);
        let failed = nodes.iter().filter(|n| !n.converged).count();
        let p_max = nodes.iter().map(|n| n.p_poc.abs()).fold(0.0, f64::max);
        let q_max = nodes.iter().map(|n| n.q_poc.abs()).fold(0.0, f64::max);
        println!(
            "{feedback:?} feedback: {} nodes, {failed} unconverged, max|P| = {:.1} W ({:.4} of rating), max|Q| = {:.1} VAR ({:.4} of rating), {:.0} ms",
            nodes.len(),
            p_max,
            p_max / ratings.p_rated,
            q_max,
            q_max / ratings.q_rated,
            t0.elapsed().as_millis()
        );
    }
}

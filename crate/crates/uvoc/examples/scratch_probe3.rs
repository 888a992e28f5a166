//! Temporary probe: step-by-step startup signals.

use uvoc::sim::{Engine, Scenario};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/fig10_fault_scr5.json");
    let base = std::fs::read_to_string(path).unwrap();
    let scenario = Scenario::from_json(&base).unwrap();
    let cfg = scenario.resolve().unwrap();
    println!("i_threshold = {:.2} A", cfg.controller.fault.i_threshold);
    let mut engine = Engine::new(&cfg).unwrap();
    for k in 0..400 {
        let out = engine.step(0.0).unwrap();
        if k % 20 == 0 || out.record.x_f {
            let r = &out.record;
            println!(
                "k={k:4} t={:.4} |v|={:8.2} |i_g|={:8.2} |i_a|={:8.2} |v_f|={:8.2} x_f={} x_r={:.3} P={:9.1} p0={:.1}",
                r.t,
                r.v_p,
                r.i_g.magnitude(),
                r.i_a.magnitude(),
                r.v_f.magnitude(),
                r.x_f as u8,
                r.x_r,
                r.p,
                r.p0
            );
        }
    }
}

//! Temporary probe: clamp envelope timing.

use uvoc::sim::{run_scenario, Scenario};

fn main() {
    for name in ["fig10_fault_scr5", "fig11_fault_scr19"] {
        let path = format!("{}/scenarios/{}.json", env!("CARGO_MANIFEST_DIR"), name);
        let scenario = Scenario::from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
        let cfg = scenario.resolve().unwrap();
        let ib = cfg.controller.ratings.i_base_peak();
        let p0 = cfg.controller.svo.p0;
        let trace = run_scenario(&cfg).unwrap();
        let latch = trace.records.iter().find(|r| r.x_f).map(|r| r.t).unwrap();
        let clear = trace.records.iter().find(|r| r.t > latch && !r.x_f).map(|r| r.t).unwrap();
        // last time |i_g| exceeds 1.05 pu inside the sag window
        let last_over = trace
            .window(latch, 2.2999)
            .iter()
            .filter(|r| r.i_g.magnitude() / ib > 1.05)
            .map(|r| r.t)
            .fold(latch, f64::max);
        let peak_all = trace
            .window(latch, 2.2999)
            .iter()
            .map(|r| r.i_g.magnitude() / ib)
            .fold(0.0, f64::max);
        let peak_after_5ms = trace
            .window(latch + 0.005, 2.2999)
            .iter()
            .map(|r| r.i_g.magnitude() / ib)
            .fold(0.0, f64::max);
        let peak_recovery = trace
            .window(2.2999, trace.end_time())
            .iter()
            .map(|r| r.i_g.magnitude() / ib)
            .fold(0.0, f64::max);
        let tail = trace.window(clear + 0.2, trace.end_time());
        let p_err = tail.iter().map(|r| (r.p - p0).abs()).fold(0.0, f64::max) / p0;
        let relatches = trace
            .records
            .windows(2)
            .filter(|w| w[0].t > clear && !w[0].x_f && w[1].x_f)
            .count();
        println!(
            "{name}: latch {latch:.4} clear {clear:.4} | sag peak {peak_all:.3}pu, clamp<=1.05 from latch+{:.1}ms, peak(latch+5ms..) {peak_after_5ms:.3}pu | recovery peak {peak_recovery:.3}pu relatches {relatches} | maxPerr@+200ms {:.2}%",
            (last_over - latch) * 1e3,
            100.0 * p_err
        );
    }
}

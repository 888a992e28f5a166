//! Temporary probe: recovery-policy variants.

use uvoc::sim::{run_scenario, Scenario};

fn run(case: &str, patch: &dyn Fn(&mut serde_json::Value)) {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/fig10_fault_scr5.json");
    let base = std::fs::read_to_string(path).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&base).unwrap();
    patch(&mut v);
    let scenario = Scenario::from_json(&v.to_string()).unwrap();
    let cfg = scenario.resolve().unwrap();
    let ib = cfg.controller.ratings.i_base_peak();
    let p0 = cfg.controller.svo.p0;
    match run_scenario(&cfg) {
        Ok(trace) => {
            let latch = trace.records.iter().find(|r| r.x_f).map(|r| r.t).unwrap_or(-1.0);
            let clear = trace
                .records
                .iter()
                .find(|r| r.t > latch && !r.x_f)
                .map(|r| r.t)
                .unwrap_or(-1.0);
            let relatches = trace
                .records
                .windows(2)
                .filter(|w| w[0].t > clear && !w[0].x_f && w[1].x_f)
                .count();
            let clamp_peak = trace
                .window(latch + trace.dt, 2.2999)
                .iter()
                .map(|r| r.i_g.magnitude())
                .fold(0.0, f64::max)
                / ib;
            let tail = trace.window(clear + 0.2, trace.end_time());
            let p_err = tail.iter().map(|r| (r.p - p0).abs()).fold(0.0, f64::max) / p0;
            println!(
                "{case}: latch {latch:.3} clear {clear:.3} relatches {relatches} clamp_peak {clamp_peak:.3}pu maxPerr@200ms {:.1}%",
                100.0 * p_err
            );
        }
        Err(e) => println!("{case}: DIVERGED ({e})"),
    }
}

fn main() {
    run("baseline (tf=100ms, boost on) ", &|_| {});
    run("no q0 boost                   ", &|v| v["controller"]["fault"]["raise_q0"] = false.into());
    run("tf = 20 ms                    ", &|v| v["controller"]["fault"]["ramp_time"] = 0.02.into());
    run("tf = 10 ms                    ", &|v| v["controller"]["fault"]["ramp_time"] = 0.01.into());
    run("tf = 20 ms, no boost          ", &|v| {
        v["controller"]["fault"]["ramp_time"] = 0.02.into();
        v["controller"]["fault"]["raise_q0"] = false.into();
    });
    run("r_ocl = 1.6 (omega_ocl L)     ", &|v| {
        v["controller"]["fault"]["r_ocl"] = serde_json::Value::Null;
        if let Some(o) = v["controller"]["fault"].as_object_mut() {
            o.remove("r_ocl");
        }
    });
    run("p0 = 0.3 pu                   ", &|v| v["controller"]["svo"]["p0"] = serde_json::json!({"pu": 0.3}));
}

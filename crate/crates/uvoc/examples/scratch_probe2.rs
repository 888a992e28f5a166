//! Temporary probe: inspect the growing mode before divergence.

use uvoc::sim::{run_scenario, Scenario};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/fig10_fault_scr5.json");
    let base = std::fs::read_to_string(path).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&base).unwrap();
    v["duration"] = serde_json::json!(0.78);
    let scenario = Scenario::from_json(&v.to_string()).unwrap();
    let cfg = scenario.resolve().unwrap();
    let trace = run_scenario(&cfg).unwrap();

    // envelope of the deviation of |v_f| from its cycle mean, per 50 ms bin
    let dt = trace.dt;
    let bin = (0.05 / dt) as usize;
    for (i, chunk) in trace.records.chunks(bin).enumerate() {
        let mags: Vec<f64> = chunk.iter().map(|r| r.v_f.magnitude()).collect();
        let mean = mags.iter().sum::<f64>() / mags.len() as f64;
        let dev = mags.iter().map(|m| (m - mean).abs()).fold(0.0, f64::max);
        let imax = chunk.iter().map(|r| r.i_a.magnitude()).fold(0.0, f64::max);
        println!("t={:.2}: |v_f| mean {:7.2}, ripple {:9.3e}, max|i_a| {:9.3e}", i as f64 * 0.05, mean, dev, imax);
    }
    // estimate the ripple frequency from zero crossings of the deviation in
    // the last bin
    let tail = &trace.records[trace.records.len() - bin..];
    let mags: Vec<f64> = tail.iter().map(|r| r.v_f.magnitude()).collect();
    let mean = mags.iter().sum::<f64>() / mags.len() as f64;
    let mut crossings = 0;
    for w in mags.windows(2) {
        if (w[0] - mean).signum() != (w[1] - mean).signum() {
            crossings += 1;
        }
    }
    let freq = crossings as f64 / 2.0 / (bin as f64 * dt);
    println!("ripple frequency of |v_f| ~ {freq:.0} Hz (beat of the mode against the fundamental)");
}

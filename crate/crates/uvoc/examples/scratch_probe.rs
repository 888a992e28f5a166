//! Temporary probe of loop stability vs parasitic resistance.

use uvoc::sim::{run_scenario, Scenario};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/fig10_fault_scr5.json");
    let base = std::fs::read_to_string(path).unwrap();
    for (ra, rg) in [(0.0, 0.0), (0.003, 0.002), (0.005, 0.003), (0.01, 0.005), (0.02, 0.01)] {
        let mut v: serde_json::Value = serde_json::from_str(&base).unwrap();
        v["plant"]["r_a"] = serde_json::json!({ "pu": ra });
        v["plant"]["r_g"] = serde_json::json!({ "pu": rg });
        v["duration"] = serde_json::json!(1.5);
        let scenario = Scenario::from_json(&v.to_string()).unwrap();
        let cfg = scenario.resolve().unwrap();
        match run_scenario(&cfg) {
            Ok(trace) => {
                // ripple on |i_g| over the last 0.2 s as a resonance gauge
                let w = trace.window(1.3, 1.5);
                let mags: Vec<f64> = w.iter().map(|r| r.i_g.magnitude()).collect();
                let mean = mags.iter().sum::<f64>() / mags.len() as f64;
                let dev = mags.iter().map(|m| (m - mean).abs()).fold(0.0, f64::max);
                println!("r_a={ra} r_g={rg}: ok, |i_g| mean {mean:.2} A, ripple {dev:.3} A");
            }
            Err(e) => println!("r_a={ra} r_g={rg}: DIVERGED ({e})"),
        }
    }
}

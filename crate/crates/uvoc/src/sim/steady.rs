//! Cycle-averaged steady-state quantities extracted from a trace window.

use crate::error::{Error, Result};
use crate::sim::trace::Trace;
use crate::util::wrap_angle;

#[derive(Debug, Clone, Copy)]
pub struct SteadyState {
    pub p: f64,
    pub q: f64,
    /// Mean oscillator vector magnitude.
    pub v_p: f64,
    /// Frequency from a linear fit of the unwrapped oscillator angle.
    pub omega: f64,
    pub v_dc: f64,
}

/// Average the final `window` seconds of the trace. The window must cover at
/// least two fundamental periods.
pub fn steady_state_extract(trace: &Trace, window: f64, omega0: f64) -> Result<SteadyState> {
    let min_window = 2.0 * 2.0 * std::f64::consts::PI / omega0;
    if window < min_window {
        return Err(Error::Schema(format!(
            "window {window:.4} s shorter than two fundamental periods ({min_window:.4} s)"
        )));
    }
    let end = trace.end_time();
    let records = trace.window(end - window + 0.5 * trace.dt, end + trace.dt);
    if records.len() < 4 {
        return Err(Error::Schema("window contains too few records".into()));
    }

    let n = records.len() as f64;
    let mean = |f: &dyn Fn(&crate::sim::trace::TraceRecord) -> f64| {
        records.iter().map(|r| f(r)).sum::<f64>() / n
    };

    // unwrap the oscillator angle and fit a line through it
    let mut theta = Vec::with_capacity(records.len());
    let mut prev = records[0].v.beta.atan2(records[0].v.alpha);
    let mut unwrapped = prev;
    theta.push(unwrapped);
    for r in &records[1..] {
        let raw = r.v.beta.atan2(r.v.alpha);
        unwrapped += wrap_angle(raw - prev);
        prev = raw;
        theta.push(unwrapped);
    }
    let t_mean = records.iter().map(|r| r.t).sum::<f64>() / n;
    let th_mean = theta.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (r, th) in records.iter().zip(&theta) {
        num += (r.t - t_mean) * (th - th_mean);
        den += (r.t - t_mean) * (r.t - t_mean);
    }
    let omega = if den > 0.0 { num / den } else { omega0 };

    Ok(SteadyState {
        p: mean(&|r| r.p),
        q: mean(&|r| r.q),
        v_p: mean(&|r| r.v_p),
        omega,
        v_dc: mean(&|r| r.v_dc),
    })
}

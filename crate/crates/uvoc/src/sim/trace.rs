//! Uniformly sampled simulation traces and their CSV export.

use std::io::Write;

use crate::core::SpaceVector;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    /// Oscillator voltage vector.
    pub v: SpaceVector,
    pub i_a: SpaceVector,
    pub i_g: SpaceVector,
    pub v_f: SpaceVector,
    pub v_dc: f64,
    /// Controller-view instantaneous powers.
    pub p: f64,
    pub q: f64,
    /// Oscillator magnitude and finite-difference frequency.
    pub v_p: f64,
    pub omega: f64,
    pub x_f: bool,
    pub x_r: f64,
    /// Applied real power set-point.
    pub p0: f64,
    pub i_ps_mag: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    /// Record spacing, s.
    pub dt: f64,
    pub records: Vec<TraceRecord>,
}

pub const TRACE_HEADER: &str = "t,v_alpha,v_beta,ia_alpha,ia_beta,ig_alpha,ig_beta,vf_alpha,vf_beta,v_dc,P,Q,V_p,omega,x_f,x_r,P0,i_ps_mag";

impl Trace {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for r in &self.records {
            // `{}` on f64 is the shortest representation that round-trips
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.v.alpha,
                r.v.beta,
                r.i_a.alpha,
                r.i_a.beta,
                r.i_g.alpha,
                r.i_g.beta,
                r.v_f.alpha,
                r.v_f.beta,
                r.v_dc,
                r.p,
                r.q,
                r.v_p,
                r.omega,
                if r.x_f { 1 } else { 0 },
                r.x_r,
                r.p0,
                r.i_ps_mag
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    /// Records with `t` inside `[start, end)`; empty when the interval is.
    pub fn window(&self, start: f64, end: f64) -> &[TraceRecord] {
        let lo = self.records.partition_point(|r| r.t < start);
        let hi = self.records.partition_point(|r| r.t < end);
        &self.records[lo..hi.max(lo)]
    }

    pub fn end_time(&self) -> f64 {
        self.records.last().map(|r| r.t).unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64) -> TraceRecord {
        TraceRecord {
            t,
            v: SpaceVector::new(1.0, 2.0),
            i_a: SpaceVector::ZERO,
            i_g: SpaceVector::ZERO,
            v_f: SpaceVector::ZERO,
            v_dc: 400.0,
            p: 0.1,
            q: -0.2,
            v_p: 2.2360679,
            omega: 377.0,
            x_f: false,
            x_r: 0.0,
            p0: 0.0,
            i_ps_mag: 0.0,
        }
    }

    #[test]
    fn csv_round_trips_through_decimal_text() {
        let mut tr = Trace { dt: 1e-4, records: vec![] };
        let mut r = record(0.0001);
        r.v = SpaceVector::new(1.0 / 3.0, -2.0e-17);
        r.omega = std::f64::consts::PI * 120.0;
        tr.records.push(r);
        let text = tr.to_csv_string();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRACE_HEADER);
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 18);
        let back: f64 = fields[1].parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
        let back: f64 = fields[13].parse().unwrap();
        assert_eq!(back, std::f64::consts::PI * 120.0);
    }

    #[test]
    fn window_selects_half_open_interval() {
        let tr = Trace {
            dt: 1.0,
            records: (0..10).map(|k| record(k as f64)).collect(),
        };
        let w = tr.window(2.0, 5.0);
        assert_eq!(w.len(), 3);
        assert_eq!(w[0].t, 2.0);
        assert_eq!(w[2].t, 4.0);
    }
}

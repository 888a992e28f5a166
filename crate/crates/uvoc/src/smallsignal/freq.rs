//! Transfer-function evaluation, Bode data, and classical stability margins.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::controller::DcRegParams;
use crate::error::{Error, Result};
use crate::smallsignal::linear::LinearModel;

/// Evaluator for `±C (sI − A)⁻¹ B·e_input`, computed by a linear solve at
/// each frequency rather than an explicit inverse.
#[derive(Debug, Clone)]
pub struct TransferFunction {
    a: DMatrix<Complex64>,
    b: nalgebra::DVector<Complex64>,
    c: nalgebra::RowDVector<Complex64>,
    sign: f64,
}

impl TransferFunction {
    /// Select one state as output and one input column; `negate` flips the
    /// overall sign.
    pub fn new(m: &LinearModel, output_state: usize, input: usize, negate: bool) -> Result<Self> {
        let n = m.a.nrows();
        if output_state >= n || input >= m.b.ncols() {
            return Err(Error::Schema(format!(
                "selector out of range for a {n}-state, {}-input model",
                m.b.ncols()
            )));
        }
        let a = m.a.map(|x| Complex64::new(x, 0.0));
        let b = nalgebra::DVector::from_iterator(
            n,
            m.b.column(input).iter().map(|x| Complex64::new(*x, 0.0)),
        );
        let mut c = nalgebra::RowDVector::zeros(n);
        c[output_state] = Complex64::new(1.0, 0.0);
        Ok(TransferFunction { a, b, c, sign: if negate { -1.0 } else { 1.0 } })
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let n = self.a.nrows();
        let mut m = -self.a.clone();
        for i in 0..n {
            m[(i, i)] += s;
        }
        let x = m
            .lu()
            .solve(&self.b)
            .ok_or_else(|| Error::Numerical(format!("evaluation at a pole: s = {s}")))?;
        Ok(self.sign * (&self.c * x)[(0, 0)])
    }

    pub fn eval_jw(&self, omega: f64) -> Result<Complex64> {
        self.eval(Complex64::new(0.0, omega))
    }
}

/// Bus-voltage response to the negated real power set-point,
/// `Δv_dc / (−ΔP0)`: the uncompensated plant for the bus regulator design.
pub fn g_ol(m: &LinearModel) -> Result<TransferFunction> {
    TransferFunction::new(m, 4, 0, true)
}

/// Compensator frequency response at the given frequencies.
pub fn dc_compensator_response(p: &DcRegParams, omegas: &[f64]) -> Vec<(f64, Complex64)> {
    omegas.iter().map(|&w| (w, p.response(w))).collect()
}

#[derive(Debug, Clone)]
pub struct Margins {
    /// Gain crossover used for the phase margin (the highest-frequency
    /// unity-gain crossing), rad/s.
    pub gain_crossover: f64,
    pub phase_margin_deg: f64,
    /// All unity-gain crossings found in the band.
    pub gain_crossovers: Vec<f64>,
    /// Worst-case gain margin over the −180° crossings, dB; absent when the
    /// phase never crosses −180° in the band.
    pub gain_margin_db: Option<f64>,
    /// The −180° crossing frequencies.
    pub phase_crossovers: Vec<f64>,
}

const MARGIN_SCAN_POINTS: usize = 4000;
const BISECT_REL_TOL: f64 = 1e-9;

fn bisect(mut lo: f64, mut hi: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let fm = f(mid);
        if (hi - lo) / mid < BISECT_REL_TOL {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// Classical margins of a loop response over a logarithmic search band.
pub fn margins(
    loop_gain: &dyn Fn(f64) -> Complex64,
    band: (f64, f64),
) -> Result<Margins> {
    let (w_lo, w_hi) = band;
    if !(w_lo > 0.0 && w_hi > w_lo) {
        return Err(Error::Schema("margin search band must be positive and ordered".into()));
    }
    let ratio = (w_hi / w_lo).ln();
    let grid: Vec<f64> = (0..=MARGIN_SCAN_POINTS)
        .map(|k| w_lo * (ratio * k as f64 / MARGIN_SCAN_POINTS as f64).exp())
        .collect();

    // |L| = 1 crossings
    let mag = |w: f64| loop_gain(w).norm().ln();
    let mut gain_crossovers = Vec::new();
    for pair in grid.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if (mag(a) > 0.0) != (mag(b) > 0.0) {
            gain_crossovers.push(bisect(a, b, &mag));
        }
    }
    let gain_crossover = *gain_crossovers
        .last()
        .ok_or_else(|| Error::Numerical("no unity-gain crossover in the search band".into()))?;

    // unwrapped phase and its −180° crossings
    let mut phase = Vec::with_capacity(grid.len());
    let mut prev = loop_gain(grid[0]).arg();
    let mut acc = prev;
    phase.push(acc);
    for &w in &grid[1..] {
        let raw = loop_gain(w).arg();
        acc += crate::util::wrap_angle(raw - prev);
        prev = raw;
        phase.push(acc);
    }
    let target = -std::f64::consts::PI;
    let mut phase_crossovers = Vec::new();
    for (k, pair) in grid.windows(2).enumerate() {
        let (pa, pb) = (phase[k] - target, phase[k + 1] - target);
        if pa == 0.0 || (pa > 0.0) != (pb > 0.0) {
            // refine on the wrapped phase locally
            let f = |w: f64| {
                let base = loop_gain(w).arg();
                crate::util::wrap_angle(base - target)
            };
            phase_crossovers.push(bisect(pair[0], pair[1], &f));
        }
    }

    let phase_margin_deg = {
        let ph = loop_gain(gain_crossover).arg().to_degrees();
        180.0 + ph
    };
    let gain_margin_db = phase_crossovers
        .iter()
        .map(|&w| -20.0 * loop_gain(w).norm().log10())
        .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))));

    Ok(Margins {
        gain_crossover,
        phase_margin_deg,
        gain_crossovers,
        gain_margin_db,
        phase_crossovers,
    })
}

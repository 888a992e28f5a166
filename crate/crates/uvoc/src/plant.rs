//! Continuous-time averaged model of the converter and its network.
//!
//! The switch network is a unity-gain controlled voltage source: the pole
//! voltage equals the modulation vector times the instantaneous bus voltage,
//! and the corresponding real power is exchanged with the DC link. The AC
//! side is an LCL filter with an optional parallel load at the capacitor
//! node and a lumped Thevenin branch (filter grid-side inductor in series
//! with the network impedance) to the stiff source.

use serde::{Deserialize, Serialize};

use crate::core::{instantaneous_pq, SpaceVector};
use crate::error::{Error, Result};

/// Sinusoidal component added to the grid source voltage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridHarmonic {
    pub order: u32,
    /// Amplitude, V (vector magnitude scale).
    pub amplitude: f64,
}

/// Thevenin representation of the network behind the interconnection switch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridParams {
    pub r_n: f64,
    pub l_n: f64,
    /// Source amplitude, V (vector magnitude scale).
    pub v_peak: f64,
    /// Source angular frequency, rad/s.
    pub omega: f64,
    #[serde(default)]
    pub harmonics: Vec<GridHarmonic>,
}

impl GridParams {
    /// Source voltage vector at the given source phase.
    pub fn source_voltage(&self, phase: f64) -> SpaceVector {
        let (s, c) = phase.sin_cos();
        let mut v = SpaceVector::new(self.v_peak * c, self.v_peak * s);
        for h in &self.harmonics {
            let (sh, ch) = (h.order as f64 * phase).sin_cos();
            v.alpha += h.amplitude * ch;
            v.beta += h.amplitude * sh;
        }
        v
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantParams {
    /// Converter-side inductance, H, and its series resistance, Ω.
    pub l_a: f64,
    pub r_a: f64,
    /// Network-side filter inductance, H, and its series resistance, Ω.
    pub l_g: f64,
    pub r_g: f64,
    /// Filter capacitance, F.
    pub c_f: f64,
    pub grid: GridParams,
    /// DC link capacitance, F.
    pub c_dc: f64,
    /// External power injected into the DC link, W (negative for a load).
    pub p_dc: f64,
    /// When true the DC link is a stiff source: the bus voltage never moves.
    pub dc_source: bool,
    /// Parallel resistive load at the terminal node, Ω.
    pub load: Option<f64>,
    /// Interconnection switch between the terminal and the grid branch.
    pub sts_closed: bool,
    /// Number of phases as a real factor, for the power bookkeeping.
    pub n: f64,
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_a > 0.0 && self.l_g > 0.0 && self.c_f > 0.0 && self.c_dc > 0.0) {
            return Err(Error::Schema("plant storage elements must be positive".into()));
        }
        if self.r_a < 0.0 || self.r_g < 0.0 || self.grid.r_n < 0.0 || self.grid.l_n < 0.0 {
            return Err(Error::Schema("plant resistances must be non-negative".into()));
        }
        if let Some(r) = self.load {
            if !(r > 0.0) {
                return Err(Error::Schema("load resistance must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PlantState {
    /// Converter-side inductor current.
    pub i_a: SpaceVector,
    /// Grid-branch current.
    pub i_g: SpaceVector,
    /// Terminal (filter capacitor) voltage.
    pub v_f: SpaceVector,
    /// DC bus voltage.
    pub v_dc: f64,
    /// Grid source phase, rad.
    pub source_phase: f64,
}

impl PlantState {
    pub fn is_finite(&self) -> bool {
        self.i_a.is_finite()
            && self.i_g.is_finite()
            && self.v_f.is_finite()
            && self.v_dc.is_finite()
            && self.source_phase.is_finite()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PlantDerivatives {
    pub i_a: SpaceVector,
    pub i_g: SpaceVector,
    pub v_f: SpaceVector,
    pub v_dc: f64,
    pub source_phase: f64,
}

/// Bus voltages below this floor abort the run with a diagnosable error.
pub const V_DC_FLOOR: f64 = 1.0;

/// State derivatives for the pole voltage `v_a` held over the step.
pub fn plant_derivatives(
    s: &PlantState,
    v_a: SpaceVector,
    p: &PlantParams,
) -> Result<PlantDerivatives> {
    if s.v_dc < V_DC_FLOOR {
        return Err(Error::Numerical(format!(
            "DC bus voltage {:.3} V fell below the {} V floor",
            s.v_dc, V_DC_FLOOR
        )));
    }
    let mut d = PlantDerivatives { source_phase: p.grid.omega, ..Default::default() };

    // converter-side branch
    d.i_a = (v_a - s.v_f - s.i_a.scale(p.r_a)).scale(1.0 / p.l_a);

    // terminal node
    let i_load = match p.load {
        Some(r) => s.v_f.scale(1.0 / r),
        None => SpaceVector::ZERO,
    };
    d.v_f = (s.i_a - s.i_g - i_load).scale(1.0 / p.c_f);

    // lumped branch to the source
    if p.sts_closed {
        let v_src = p.grid.source_voltage(s.source_phase);
        let l = p.l_g + p.grid.l_n;
        let r = p.r_g + p.grid.r_n;
        d.i_g = (s.v_f - v_src - s.i_g.scale(r)).scale(1.0 / l);
    }

    // DC link energy balance against the pole power
    if !p.dc_source {
        let (p_poles, _) = instantaneous_pq(v_a, s.i_a, p.n);
        d.v_dc = (p.p_dc - p_poles) / (p.c_dc * s.v_dc);
    }
    Ok(d)
}

/// One classical Runge-Kutta step of the plant with `v_a` held constant.
pub fn plant_rk4_step(
    s: &PlantState,
    v_a: SpaceVector,
    p: &PlantParams,
    dt: f64,
) -> Result<PlantState> {
    let add = |s: &PlantState, d: &PlantDerivatives, h: f64| PlantState {
        i_a: s.i_a + d.i_a.scale(h),
        i_g: s.i_g + d.i_g.scale(h),
        v_f: s.v_f + d.v_f.scale(h),
        v_dc: s.v_dc + d.v_dc * h,
        source_phase: s.source_phase + d.source_phase * h,
    };
    let k1 = plant_derivatives(s, v_a, p)?;
    let k2 = plant_derivatives(&add(s, &k1, 0.5 * dt), v_a, p)?;
    let k3 = plant_derivatives(&add(s, &k2, 0.5 * dt), v_a, p)?;
    let k4 = plant_derivatives(&add(s, &k3, dt), v_a, p)?;
    let combined = PlantDerivatives {
        i_a: (k1.i_a + k2.i_a.scale(2.0) + k3.i_a.scale(2.0) + k4.i_a).scale(1.0 / 6.0),
        i_g: (k1.i_g + k2.i_g.scale(2.0) + k3.i_g.scale(2.0) + k4.i_g).scale(1.0 / 6.0),
        v_f: (k1.v_f + k2.v_f.scale(2.0) + k3.v_f.scale(2.0) + k4.v_f).scale(1.0 / 6.0),
        v_dc: (k1.v_dc + 2.0 * k2.v_dc + 2.0 * k3.v_dc + k4.v_dc) / 6.0,
        source_phase: (k1.source_phase
            + 2.0 * k2.source_phase
            + 2.0 * k3.source_phase
            + k4.source_phase)
            / 6.0,
    };
    Ok(add(s, &combined, dt))
}

/// Default resistance standing in for a dead short at the terminal node.
pub const SHORT_CIRCUIT_RESISTANCE: f64 = 1e-3;

/// Topology and source events applied while a scenario runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PlantEvent {
    /// Scale the grid source amplitude to an absolute value, V.
    GridVoltage { amplitude: f64 },
    /// Step the grid source frequency, rad/s.
    GridFrequency { omega: f64 },
    /// Open or close the interconnection switch.
    Sts { closed: bool },
    /// Replace the terminal load (absent resistance removes the load).
    Load { resistance: Option<f64> },
    /// Short the terminal node through a small resistance.
    ShortCircuit {
        #[serde(default)]
        resistance: Option<f64>,
    },
    /// Step the external DC power, W.
    DcPower { p_dc: f64 },
}

/// Apply an event to the plant parameters, returning the updated set.
pub fn apply_event(mut p: PlantParams, event: &PlantEvent) -> PlantParams {
    match event {
        PlantEvent::GridVoltage { amplitude } => p.grid.v_peak = *amplitude,
        PlantEvent::GridFrequency { omega } => p.grid.omega = *omega,
        PlantEvent::Sts { closed } => p.sts_closed = *closed,
        PlantEvent::Load { resistance } => p.load = *resistance,
        PlantEvent::ShortCircuit { resistance } => {
            p.load = Some(resistance.unwrap_or(SHORT_CIRCUIT_RESISTANCE))
        }
        PlantEvent::DcPower { p_dc } => p.p_dc = *p_dc,
    }
    p
}

//! Scenario files: the JSON schema, per-unit resolution, and validation.
//!
//! Every physical value is SI; fields that commonly appear normalized accept
//! a `{"pu": x}` object instead of a bare number and are resolved against
//! the converter base quantities when the scenario is loaded. Unknown keys
//! are rejected.

use serde::{Deserialize, Serialize};

use crate::controller::{
    ControllerConfig, CurrentFeedback, DcRegParams, EviParams, FaultConfig, ModulationScaling,
    PresyncParams, ResonantBand, SvoParams,
};
use crate::core::VscRatings;
use crate::error::{Error, Result};
use crate::plant::{GridHarmonic, GridParams, PlantEvent, PlantParams};

/// A number that is either already SI or expressed in per-unit of a base
/// resolved from the converter ratings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Si(f64),
    PerUnit { pu: f64 },
}

impl Quantity {
    pub fn resolve(&self, base: f64) -> f64 {
        match self {
            Quantity::Si(x) => *x,
            Quantity::PerUnit { pu } => pu * base,
        }
    }
}

impl Default for Quantity {
    fn default() -> Self {
        Quantity::Si(0.0)
    }
}

fn default_true() -> bool {
    true
}
fn default_substeps() -> u32 {
    10
}
fn default_decimation() -> u32 {
    1
}
fn quantity_one_pu() -> Quantity {
    Quantity::PerUnit { pu: 1.0 }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub ratings: VscRatings,
    pub plant: PlantSection,
    pub controller: ControllerSection,
    #[serde(default)]
    pub events: Vec<EventEntry>,
    /// Simulated time, s.
    pub duration: f64,
    /// Plant integration substeps per control period.
    #[serde(default = "default_substeps")]
    pub substeps: u32,
    /// Record every n-th control period.
    #[serde(default = "default_decimation")]
    pub decimation: u32,
    /// Seed for any randomized perturbation content.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loopgain: Option<LoopGainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    /// Converter-side inductance (base: Z_base/ω0).
    pub l_a: Quantity,
    #[serde(default)]
    pub r_a: Quantity,
    /// Network-side filter inductance.
    pub l_g: Quantity,
    #[serde(default)]
    pub r_g: Quantity,
    /// Filter capacitance (base: 1/(Z_base·ω0)).
    pub c_f: Quantity,
    pub grid: GridSection,
    /// DC link capacitance, F.
    pub c_dc: f64,
    /// External DC power injection, W (negative for a load).
    #[serde(default)]
    pub p_dc: f64,
    /// Stiff DC source instead of a capacitor bus.
    #[serde(default)]
    pub dc_source: bool,
    /// Parallel load resistance at the terminal node (base: Z_base).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<Quantity>,
    #[serde(default = "default_true")]
    pub sts_closed: bool,
    /// Initial DC bus voltage, V.
    pub v_dc_init: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub r_n: Quantity,
    #[serde(default)]
    pub l_n: Quantity,
    /// Source amplitude (base: √2·V0).
    #[serde(default = "quantity_one_pu")]
    pub amplitude: Quantity,
    /// Source angular frequency, rad/s; defaults to the rated frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub harmonics: Vec<HarmonicSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicSection {
    pub order: u32,
    /// Amplitude (base: √2·V0).
    pub amplitude: Quantity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub svo: SvoSection,
    #[serde(default)]
    pub fault: FaultSection,
    #[serde(default)]
    pub evi: EviSection,
    #[serde(default)]
    pub presync: PresyncSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dc_reg: Option<DcRegSection>,
    #[serde(default = "default_feedback")]
    pub feedback: CurrentFeedback,
    #[serde(default = "default_modulation")]
    pub modulation: ModulationScaling,
    /// Nominal bus voltage for modulation scaling; defaults to the regulator
    /// reference or the initial bus voltage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_dc_ref: Option<f64>,
}

fn default_feedback() -> CurrentFeedback {
    CurrentFeedback::Grid
}
fn default_modulation() -> ModulationScaling {
    ModulationScaling::NominalDc
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvoSection {
    pub eta: f64,
    pub mu: f64,
    /// Current-error rotation, rad.
    pub phi: f64,
    /// Voltage magnitude set-point (base: √2·V0).
    #[serde(default = "quantity_one_pu")]
    pub v_p0: Quantity,
    /// Real power set-point (base: S_rated).
    #[serde(default)]
    pub p0: Quantity,
    /// Reactive power set-point (base: S_rated).
    #[serde(default)]
    pub q0: Quantity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSection {
    /// Over-current latch threshold (base: √2·S/(N·V0)).
    #[serde(default = "fault_default_i_threshold")]
    pub i_threshold: Quantity,
    /// Low-voltage clear threshold (base: √2·V0).
    #[serde(default = "fault_default_v_threshold")]
    pub v_threshold: Quantity,
    /// Current clamp (base: √2·S/(N·V0)).
    #[serde(default = "quantity_one_pu")]
    pub i_max: Quantity,
    /// Series compensation gain, Ω. When absent it is derived from
    /// `omega_ocl` and the filter inductances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_ocl: Option<Quantity>,
    /// Current-control bandwidth used to derive `r_ocl`, rad/s.
    #[serde(default = "fault_default_omega_ocl")]
    pub omega_ocl: f64,
    /// Compensation ramp-out duration, s.
    #[serde(default = "fault_default_ramp_time")]
    pub ramp_time: f64,
    /// Synchronization gain boost constant, s.
    #[serde(default = "fault_default_gain_tau")]
    pub gain_tau: f64,
    /// Detector debounce before the latched state clears, s.
    #[serde(default = "fault_default_clear_dwell")]
    pub clear_dwell: f64,
    /// Commit the remaining apparent-power headroom to reactive support
    /// while a fault is latched.
    #[serde(default)]
    pub raise_q0: bool,
}

fn fault_default_i_threshold() -> Quantity {
    Quantity::PerUnit { pu: 1.1 }
}
fn fault_default_v_threshold() -> Quantity {
    Quantity::PerUnit { pu: 0.9 }
}
fn fault_default_omega_ocl() -> f64 {
    2.0 * std::f64::consts::PI * 500.0
}
fn fault_default_ramp_time() -> f64 {
    0.1
}
fn fault_default_gain_tau() -> f64 {
    0.028
}
fn fault_default_clear_dwell() -> f64 {
    0.005
}

impl Default for FaultSection {
    fn default() -> Self {
        FaultSection {
            i_threshold: fault_default_i_threshold(),
            v_threshold: fault_default_v_threshold(),
            i_max: quantity_one_pu(),
            r_ocl: None,
            omega_ocl: fault_default_omega_ocl(),
            ramp_time: fault_default_ramp_time(),
            gain_tau: fault_default_gain_tau(),
            clear_dwell: fault_default_clear_dwell(),
            raise_q0: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EviSection {
    /// Virtual resistance (base: Z_base).
    #[serde(default)]
    pub r_vir: Quantity,
    /// Virtual inductance (base: Z_base/ω0).
    #[serde(default)]
    pub l_vir: Quantity,
    /// Bandwidth of the resistive/inductive branch, rad/s.
    #[serde(default = "evi_default_omega_c")]
    pub omega_c: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bank: Vec<ResonantSection>,
}

fn evi_default_omega_c() -> f64 {
    1200.0
}

impl Default for EviSection {
    fn default() -> Self {
        EviSection {
            r_vir: Quantity::default(),
            l_vir: Quantity::default(),
            omega_c: evi_default_omega_c(),
            bank: vec![],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonantSection {
    pub harmonic: u32,
    /// Impedance magnitude at the center (base: Z_base).
    pub gain: Quantity,
    /// Section bandwidth, rad/s.
    pub bandwidth: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresyncSection {
    #[serde(default)]
    pub enabled: bool,
    /// Virtual branch inductance (base: Z_base/ω0); defaults to the summed
    /// filter inductances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_ps: Option<Quantity>,
    /// Virtual branch resistance (base: Z_base); defaults to the virtual
    /// resistance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_ps: Option<Quantity>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcRegSection {
    pub k_p: f64,
    pub t_i: f64,
    pub omega_z: f64,
    pub omega_p: f64,
    pub v_ref: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventEntry {
    pub time: f64,
    pub action: EventAction,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EventAction {
    /// Set the grid source amplitude (base: √2·V0).
    GridVoltage { amplitude: Quantity },
    /// Set the grid source frequency, rad/s.
    GridFrequency { omega: f64 },
    Sts { closed: bool },
    /// Replace the terminal load (base: Z_base); omit to remove it.
    Load {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resistance: Option<Quantity>,
    },
    /// Short the terminal node; resistance in Ω, defaulting to 1 mΩ.
    ShortCircuit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resistance: Option<f64>,
    },
    /// Step the external DC power, W.
    DcPower { p_dc: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    /// Initial oscillator magnitude (base: √2·V0); defaults to the voltage
    /// set-point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitude: Option<Quantity>,
    /// Initial oscillator angle, rad.
    #[serde(default)]
    pub angle: f64,
    /// Pre-charge the terminal voltage to the oscillator vector.
    #[serde(default = "default_true")]
    pub precharge_terminal: bool,
}

impl Default for InitSection {
    fn default() -> Self {
        InitSection { magnitude: None, angle: 0.0, precharge_terminal: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopGainSection {
    /// Time allowed for the operating point to settle before injecting, s.
    pub settle_time: f64,
    /// Projection window, s; tones should complete integer cycles in it.
    pub window: f64,
    /// Injected tone frequencies, Hz.
    pub tones_hz: Vec<f64>,
    /// Per-tone amplitude, W; defaults to 0.5% of the power rating.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Settling-drift tolerance on the bus voltage, V.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_tolerance: Option<f64>,
    /// Transient discard interval between injection start and the window, s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lead_in: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axes: Vec<SweepAxis>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted path into the scenario document.
    pub path: String,
    pub values: Vec<serde_json::Value>,
}

/// Fully resolved, SI-only run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub controller: ControllerConfig,
    pub plant: PlantParams,
    pub events: Vec<(f64, PlantEvent)>,
    pub duration: f64,
    pub substeps: u32,
    pub decimation: u32,
    pub seed: u64,
    pub init_magnitude: f64,
    pub init_angle: f64,
    pub init_v_dc: f64,
    pub precharge_terminal: bool,
    pub loopgain: Option<LoopGainSection>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        let s: Scenario = serde_json::from_str(text)?;
        Ok(s)
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let r = &self.ratings;
        r.validate()?;
        let zb = r.z_base();
        let lb = r.inductance_base();
        let cb = r.capacitance_base();
        let vb = r.v_base_peak();
        let ib = r.i_base_peak();
        let n = r.phases.as_f64();

        if !(self.duration > 0.0) {
            return Err(Error::Schema("duration must be positive".into()));
        }
        if self.substeps < 1 {
            return Err(Error::Schema("substeps must be at least 1".into()));
        }
        if self.decimation < 1 {
            return Err(Error::Schema("decimation must be at least 1".into()));
        }

        let l_a = self.plant.l_a.resolve(lb);
        let l_g = self.plant.l_g.resolve(lb);
        let plant = PlantParams {
            l_a,
            r_a: self.plant.r_a.resolve(zb),
            l_g,
            r_g: self.plant.r_g.resolve(zb),
            c_f: self.plant.c_f.resolve(cb),
            grid: GridParams {
                r_n: self.plant.grid.r_n.resolve(zb),
                l_n: self.plant.grid.l_n.resolve(lb),
                v_peak: self.plant.grid.amplitude.resolve(vb),
                omega: self.plant.grid.omega.unwrap_or(r.omega0),
                harmonics: self
                    .plant
                    .grid
                    .harmonics
                    .iter()
                    .map(|h| GridHarmonic { order: h.order, amplitude: h.amplitude.resolve(vb) })
                    .collect(),
            },
            c_dc: self.plant.c_dc,
            p_dc: self.plant.p_dc,
            dc_source: self.plant.dc_source,
            load: self.plant.load.map(|q| q.resolve(zb)),
            sts_closed: self.plant.sts_closed,
            n,
        };
        plant.validate()?;

        let c = &self.controller;
        let svo = SvoParams {
            eta: c.svo.eta,
            mu: c.svo.mu,
            phi: c.svo.phi,
            omega0: r.omega0,
            v_p0: c.svo.v_p0.resolve(vb),
            p0: c.svo.p0.resolve(r.s_rated),
            q0: c.svo.q0.resolve(r.s_rated),
            n,
            v_floor: 1e-6 * r.v_nominal,
        };
        let fault = FaultConfig {
            i_threshold: c.fault.i_threshold.resolve(ib),
            v_threshold: c.fault.v_threshold.resolve(vb),
            i_max: c.fault.i_max.resolve(ib),
            r_ocl: match c.fault.r_ocl {
                Some(q) => q.resolve(zb),
                None => FaultConfig::r_ocl_from_bandwidth(c.fault.omega_ocl, l_a + l_g),
            },
            ramp_time: c.fault.ramp_time,
            gain_tau: c.fault.gain_tau,
            clear_dwell: c.fault.clear_dwell,
        };
        let evi = EviParams {
            r_vir: c.evi.r_vir.resolve(zb),
            l_vir: c.evi.l_vir.resolve(lb),
            omega_c: c.evi.omega_c,
            bank: c
                .evi
                .bank
                .iter()
                .map(|b| ResonantBand {
                    harmonic: b.harmonic,
                    gain: b.gain.resolve(zb),
                    bandwidth: b.bandwidth,
                })
                .collect(),
        };
        let presync = PresyncParams {
            enabled: c.presync.enabled,
            l_ps: c.presync.l_ps.map(|q| q.resolve(lb)).unwrap_or(l_a + l_g),
            r_ps: c.presync.r_ps.map(|q| q.resolve(zb)).unwrap_or(evi.r_vir.max(1e-3)),
        };
        let dc_reg = c.dc_reg.as_ref().map(|d| DcRegParams {
            k_p: d.k_p,
            t_i: d.t_i,
            omega_z: d.omega_z,
            omega_p: d.omega_p,
            v_ref: d.v_ref,
        });
        let v_dc_ref = c
            .v_dc_ref
            .or(dc_reg.as_ref().map(|d| d.v_ref))
            .unwrap_or(self.plant.v_dc_init);

        let controller = ControllerConfig {
            ratings: r.clone(),
            svo,
            fault,
            evi,
            presync,
            dc_reg,
            feedback: c.feedback,
            modulation: c.modulation,
            v_dc_ref,
            raise_q0_on_fault: c.fault.raise_q0,
        };
        controller.validate()?;

        let mut events = Vec::with_capacity(self.events.len());
        for e in &self.events {
            let action = match &e.action {
                EventAction::GridVoltage { amplitude } => {
                    PlantEvent::GridVoltage { amplitude: amplitude.resolve(vb) }
                }
                EventAction::GridFrequency { omega } => PlantEvent::GridFrequency { omega: *omega },
                EventAction::Sts { closed } => PlantEvent::Sts { closed: *closed },
                EventAction::Load { resistance } => {
                    PlantEvent::Load { resistance: resistance.map(|q| q.resolve(zb)) }
                }
                EventAction::ShortCircuit { resistance } => {
                    PlantEvent::ShortCircuit { resistance: *resistance }
                }
                EventAction::DcPower { p_dc } => PlantEvent::DcPower { p_dc: *p_dc },
            };
            events.push((e.time, action));
        }
        if events.windows(2).any(|w| w[0].0 > w[1].0) {
            return Err(Error::Schema("events must be sorted by time".into()));
        }

        Ok(RunConfig {
            controller,
            plant,
            events,
            duration: self.duration,
            substeps: self.substeps,
            decimation: self.decimation,
            seed: self.seed,
            init_magnitude: self.init.magnitude.map(|q| q.resolve(vb)).unwrap_or(vb),
            init_angle: self.init.angle,
            init_v_dc: self.plant.v_dc_init,
            precharge_terminal: self.init.precharge_terminal,
            loopgain: self.loopgain.clone(),
        })
    }
}

//! The complete control stack, executed once per sampling period.
//!
//! Composition per period: fault detection → current reference → limiter →
//! oscillator integration → virtual impedance → over-current compensation →
//! output voltage command and modulation vector. The pre-synchronization
//! current, when enabled, joins the oscillator feedback; the DC-bus
//! regulator, when enabled, generates the real power set-point.

pub mod dcreg;
pub mod delay;
pub mod evi;
pub mod fault;
pub mod presync;
pub mod svo;

pub use dcreg::{DcReg, DcRegParams};
pub use delay::QuarterDelay;
pub use evi::{CurrentFeedback, Evi, EviParams, ResonantBand};
pub use fault::{fault_fsm_step, ocl_compensation, FaultConfig, FaultState};
pub use presync::{presync_step, PresyncParams, PresyncState};
pub use svo::{
    circular_limit, clamp_gain, current_reference, fault_mode_reference, svo_step,
    OscillatorState, SvoParams,
};

use serde::{Deserialize, Serialize};

use crate::core::{PhaseCount, SpaceVector, VscRatings};
use crate::error::Result;
use crate::util::LowPass;

/// How the modulation vector is scaled from the voltage command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulationScaling {
    /// Divide by the nominal bus reference; measurement noise stays out of
    /// the modulator.
    NominalDc,
    /// Divide by the instantaneous bus measurement.
    MeasuredDc,
}

/// Bandwidth of the terminal-voltage magnitude detector, rad/s.
const VG_DETECTOR_BANDWIDTH: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct ControllerConfig {
    pub ratings: VscRatings,
    pub svo: SvoParams,
    pub fault: FaultConfig,
    pub evi: EviParams,
    pub presync: PresyncParams,
    pub dc_reg: Option<DcRegParams>,
    pub feedback: CurrentFeedback,
    pub modulation: ModulationScaling,
    /// Nominal DC bus voltage used for modulation scaling.
    pub v_dc_ref: f64,
    /// Raise the reactive set-point to the remaining apparent-power headroom
    /// while a fault is latched.
    pub raise_q0_on_fault: bool,
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        self.ratings.validate()?;
        self.svo.validate()?;
        self.fault.validate()?;
        self.evi.validate()?;
        self.presync.validate()?;
        if let Some(reg) = &self.dc_reg {
            reg.validate()?;
        }
        Ok(())
    }
}

/// Signals sampled by the controller at the start of each period.
#[derive(Debug, Clone, Copy)]
pub struct Measurements {
    /// Converter-side inductor current.
    pub i_conv: SpaceVector,
    /// Network-side current.
    pub i_grid: SpaceVector,
    /// Terminal (filter capacitor) voltage; feeds the fault detector.
    pub v_terminal: SpaceVector,
    /// Voltage on the far side of the interconnection switch; feeds the
    /// pre-synchronization branch.
    pub v_grid_side: SpaceVector,
    /// DC bus voltage.
    pub v_dc: f64,
}

/// Per-period controller outputs.
#[derive(Debug, Clone, Copy)]
pub struct ControllerOutput {
    /// Modulation vector handed to the averaged switch network.
    pub modulation: SpaceVector,
    /// Voltage command before modulation scaling.
    pub v_cmd: SpaceVector,
    /// Oscillator voltage that produced this period's outputs.
    pub v_osc: SpaceVector,
    /// Saturated current reference of this period.
    pub i_ref_sat: SpaceVector,
    /// Total feedback current seen by the oscillator this period.
    pub i_fb: SpaceVector,
    /// Pre-synchronization virtual current.
    pub i_ps: SpaceVector,
    /// Effective set-points after regulation/fault adjustment.
    pub p0: f64,
    pub q0: f64,
    /// Raw DC regulator compensator output (before loop-closure sign).
    pub dc_compensator: f64,
    pub x_f: bool,
    pub x_r: f64,
}

/// Delay lines reconstructing the orthogonal axis in single-phase mode.
#[derive(Debug, Clone)]
struct SinglePhaseAxes {
    i: QuarterDelay,
    v_t: QuarterDelay,
    v_gs: QuarterDelay,
}

#[derive(Debug, Clone)]
pub struct Controller {
    pub config: ControllerConfig,
    pub osc: OscillatorState,
    pub fault: FaultState,
    evi: Evi,
    presync: PresyncState,
    dc_reg: Option<DcReg>,
    vg_detector: LowPass,
    /// Smoothed fraction of the reactive-support commitment, 0..1.
    q0_support: f64,
    single_phase: Option<SinglePhaseAxes>,
    dt: f64,
}

/// Time constant smoothing the reactive-support engagement, s.
const Q0_SUPPORT_TAU: f64 = 3e-3;

impl Controller {
    pub fn new(config: ControllerConfig, initial: OscillatorState) -> Result<Controller> {
        config.validate()?;
        let dt = config.ratings.control_period();
        let evi = Evi::new(&config.evi, config.feedback, config.ratings.omega0, dt);
        let dc_reg = config.dc_reg.clone().map(|p| DcReg::new(p, dt));
        let single_phase = match config.ratings.phases {
            PhaseCount::Single => Some(SinglePhaseAxes {
                i: QuarterDelay::new(config.ratings.omega0, dt),
                v_t: QuarterDelay::new(config.ratings.omega0, dt),
                v_gs: QuarterDelay::new(config.ratings.omega0, dt),
            }),
            PhaseCount::Three => None,
        };
        Ok(Controller {
            vg_detector: LowPass::new(VG_DETECTOR_BANDWIDTH),
            evi,
            presync: PresyncState::default(),
            dc_reg,
            q0_support: 0.0,
            single_phase,
            fault: FaultState::default(),
            osc: initial,
            config,
            dt,
        })
    }

    pub fn control_period(&self) -> f64 {
        self.dt
    }

    pub fn presync_current(&self) -> SpaceVector {
        self.presync.i_ps
    }

    /// Execute one control period. `p0_injection` adds a perturbation to the
    /// applied real power set-point (loop-gain measurement); pass zero in
    /// normal operation.
    pub fn step(&mut self, meas: &Measurements, p0_injection: f64) -> Result<ControllerOutput> {
        let cfg = &self.config;
        let mut i_meas = match cfg.feedback {
            CurrentFeedback::Grid => meas.i_grid,
            CurrentFeedback::Converter => meas.i_conv,
        };
        let mut v_terminal = meas.v_terminal;
        let mut v_grid_side = meas.v_grid_side;
        if let Some(axes) = &mut self.single_phase {
            i_meas.beta = axes.i.step_or_zero(i_meas.alpha).0;
            v_terminal.beta = axes.v_t.step_or_zero(v_terminal.alpha).0;
            v_grid_side.beta = axes.v_gs.step_or_zero(v_grid_side.alpha).0;
        }

        // fault detection on the instantaneous current magnitude and the
        // filtered terminal-voltage magnitude
        let vg_mag = self.vg_detector.update(v_terminal.magnitude(), self.dt);
        self.fault = fault_fsm_step(self.fault, i_meas.magnitude(), vg_mag, &cfg.fault, self.dt);

        // set-points for this period
        let (mut p0, dc_compensator) = match &mut self.dc_reg {
            Some(reg) => {
                let out = reg.step(meas.v_dc, self.dt);
                (out.p0, out.compensator)
            }
            None => (cfg.svo.p0, 0.0),
        };
        p0 += p0_injection;
        // reactive support: commit the apparent-power headroom while the
        // fault is latched and the terminal voltage actually needs it
        // (instantaneous magnitude, so engagement does not wait for the
        // detector filter); the commitment eases in and out over a few
        // milliseconds so the clamped reference never steps
        let engaged = cfg.raise_q0_on_fault
            && self.fault.x_f
            && v_terminal.magnitude() <= cfg.fault.v_threshold;
        let alpha = (-self.dt / Q0_SUPPORT_TAU).exp();
        let target = if engaged { 1.0 } else { 0.0 };
        self.q0_support = target + (self.q0_support - target) * alpha;
        let boost = (cfg.ratings.s_rated.powi(2) - p0 * p0).max(0.0).sqrt();
        let q0 = cfg.svo.q0 + self.q0_support * (boost - cfg.svo.q0);
        self.fault.k_m = if self.fault.x_f {
            clamp_gain(p0, q0, cfg.svo.n, cfg.fault.i_max)
        } else {
            0.0
        };

        // pre-synchronization current joins the oscillator feedback
        if cfg.presync.enabled {
            self.presync = presync_step(self.presync, self.osc.v, v_grid_side, &cfg.presync, self.dt);
        }
        let i_ps = if cfg.presync.enabled { self.presync.i_ps } else { SpaceVector::ZERO };
        let i_fb = i_meas + i_ps;

        let svo_eff = SvoParams { p0, q0, ..cfg.svo.clone() };
        let v_now = self.osc.v;
        let i_ref_sat = if self.fault.x_f {
            fault_mode_reference(v_now, p0, q0, svo_eff.n, cfg.fault.i_max, svo_eff.v_floor)?
        } else {
            circular_limit(
                current_reference(v_now, p0, q0, svo_eff.n, svo_eff.v_floor)?,
                cfg.fault.i_max,
            )
        };

        // series voltage terms and the output command from this period's state
        let v_zv = self.evi.step(i_meas);
        let v_ol = ocl_compensation(i_ref_sat, i_fb, self.fault.x_r, cfg.fault.r_ocl);
        let v_cmd = v_now - v_zv + v_ol;
        let scale = match cfg.modulation {
            ModulationScaling::NominalDc => cfg.v_dc_ref,
            ModulationScaling::MeasuredDc => meas.v_dc.max(1.0),
        };
        let modulation = v_cmd.scale(1.0 / scale);

        // advance the oscillator for the next period
        self.osc = svo_step(&self.osc, i_fb, &svo_eff, &self.fault, &cfg.fault, self.dt)?;

        Ok(ControllerOutput {
            modulation,
            v_cmd,
            v_osc: v_now,
            i_ref_sat,
            i_fb,
            i_ps,
            p0,
            q0,
            dc_compensator,
            x_f: self.fault.x_f,
            x_r: self.fault.x_r,
        })
    }
}

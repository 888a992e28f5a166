//! Fixed-step co-simulation of the discrete controller and the continuous
//! plant.
//!
//! The controller executes once per sampling period and its modulation
//! vector is held while the plant integrates `substeps` Runge-Kutta steps.
//! Events fire at the nearest plant step, exactly once. Identical inputs
//! produce bit-identical traces.

use crate::controller::{Controller, Measurements, OscillatorState};
use crate::core::{instantaneous_pq, SpaceVector};
use crate::error::{Error, Result};
use crate::plant::{apply_event, plant_rk4_step, PlantEvent, PlantParams, PlantState};
use crate::sim::scenario::RunConfig;
use crate::sim::trace::{Trace, TraceRecord};
use crate::util::wrap_angle;

/// One controller period worth of simulation output.
#[derive(Debug, Clone, Copy)]
pub struct StepOutput {
    pub record: TraceRecord,
    /// Raw DC regulator compensator output.
    pub dc_compensator: f64,
    /// Real power set-point actually applied (regulation plus injection).
    pub p0_applied: f64,
}

pub struct Engine {
    pub controller: Controller,
    pub plant: PlantParams,
    pub state: PlantState,
    pub t: f64,
    events: Vec<(f64, PlantEvent)>,
    next_event: usize,
    dt_ctrl: f64,
    dt_plant: f64,
    substeps: u32,
    prev_theta: Option<f64>,
}

impl Engine {
    pub fn new(cfg: &RunConfig) -> Result<Engine> {
        let osc = OscillatorState::from_magnitude_angle(cfg.init_magnitude, cfg.init_angle);
        let controller = Controller::new(cfg.controller.clone(), osc)?;
        let dt_ctrl = controller.control_period();
        let state = PlantState {
            i_a: SpaceVector::ZERO,
            i_g: SpaceVector::ZERO,
            v_f: if cfg.precharge_terminal { osc.v } else { SpaceVector::ZERO },
            v_dc: cfg.init_v_dc,
            source_phase: cfg.init_angle,
        };
        Ok(Engine {
            controller,
            plant: cfg.plant.clone(),
            state,
            t: 0.0,
            events: cfg.events.clone(),
            next_event: 0,
            dt_ctrl,
            dt_plant: dt_ctrl / cfg.substeps as f64,
            substeps: cfg.substeps,
            prev_theta: None,
        })
    }

    fn measurements(&self) -> Measurements {
        let s = &self.state;
        let v_grid_side = if self.plant.sts_closed {
            s.v_f
        } else {
            self.plant.grid.source_voltage(s.source_phase)
        };
        Measurements {
            i_conv: s.i_a,
            i_grid: s.i_g,
            v_terminal: s.v_f,
            v_grid_side,
            v_dc: s.v_dc,
        }
    }

    /// Execute one controller period followed by the plant substeps.
    pub fn step(&mut self, p0_injection: f64) -> Result<StepOutput> {
        let meas = self.measurements();
        let out = self.controller.step(&meas, p0_injection).map_err(|e| match e {
            Error::NonFinite { what, .. } => Error::NonFinite { what, time: self.t },
            other => other,
        })?;

        let n = self.plant.n;
        let (p, q) = instantaneous_pq(out.v_osc, out.i_fb, n);
        let theta = out.v_osc.beta.atan2(out.v_osc.alpha);
        let omega = match self.prev_theta {
            Some(prev) => wrap_angle(theta - prev) / self.dt_ctrl,
            None => self.controller.config.svo.omega0,
        };
        self.prev_theta = Some(theta);
        let record = TraceRecord {
            t: self.t,
            v: out.v_osc,
            i_a: meas.i_conv,
            i_g: meas.i_grid,
            v_f: meas.v_terminal,
            v_dc: meas.v_dc,
            p,
            q,
            v_p: out.v_osc.magnitude(),
            omega,
            x_f: out.x_f,
            x_r: out.x_r,
            p0: out.p0,
            i_ps_mag: out.i_ps.magnitude(),
        };

        for j in 0..self.substeps {
            let t_sub = self.t + j as f64 * self.dt_plant;
            while self.next_event < self.events.len()
                && self.events[self.next_event].0 < t_sub + 0.5 * self.dt_plant
            {
                let (_, ev) = &self.events[self.next_event];
                self.plant = apply_event(self.plant.clone(), ev);
                if matches!(ev, PlantEvent::Sts { closed: false }) {
                    self.state.i_g = SpaceVector::ZERO;
                }
                self.next_event += 1;
            }
            let v_a = out.modulation.scale(self.state.v_dc);
            self.state = plant_rk4_step(&self.state, v_a, &self.plant, self.dt_plant)?;
            self.check_finite(t_sub + self.dt_plant)?;
        }
        self.t += self.dt_ctrl;

        Ok(StepOutput { record, dc_compensator: out.dc_compensator, p0_applied: out.p0 })
    }

    fn check_finite(&self, t: f64) -> Result<()> {
        let s = &self.state;
        let vars = [
            ("i_a", s.i_a.is_finite()),
            ("i_g", s.i_g.is_finite()),
            ("v_f", s.v_f.is_finite()),
            ("v_dc", s.v_dc.is_finite()),
        ];
        for (name, ok) in vars {
            if !ok {
                return Err(Error::NonFinite { what: name.into(), time: t });
            }
        }
        Ok(())
    }
}

/// Run a resolved scenario to completion and capture the trace.
pub fn run_scenario(cfg: &RunConfig) -> Result<Trace> {
    let mut engine = Engine::new(cfg)?;
    let n_steps = (cfg.duration / engine.dt_ctrl).round() as usize;
    let mut trace = Trace {
        dt: engine.dt_ctrl * cfg.decimation as f64,
        records: Vec::with_capacity(n_steps / cfg.decimation as usize + 1),
    };
    for k in 0..n_steps {
        let out = engine.step(0.0)?;
        if k % cfg.decimation as usize == 0 {
            trace.records.push(out.record);
        }
    }
    Ok(trace)
}

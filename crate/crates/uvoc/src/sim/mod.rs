//! Deterministic fixed-step co-simulation: scenario files, the engine,
//! trace capture, steady-state extraction, and loop-gain measurement.

pub mod engine;
pub mod freqresp;
pub mod scenario;
pub mod steady;
pub mod trace;

pub use engine::{run_scenario, Engine, StepOutput};
pub use freqresp::{loop_gain_from_streams, measure_loop_gain, InjectionPoint, MultiTone};
pub use scenario::{Quantity, RunConfig, Scenario};
pub use steady::{steady_state_extract, SteadyState};
pub use trace::{Trace, TraceRecord, TRACE_HEADER};

//! A desk-scale laboratory for virtual-oscillator-controlled voltage source
//! converters.
//!
//! The crate bundles five pieces that are useful together:
//!
//! - [`core`]: space-vector algebra, reference-frame transforms, and
//!   instantaneous-power arithmetic shared by everything else.
//! - [`controller`]: the full control stack executed once per sampling
//!   period — space-vector oscillator (grid-forming and grid-following),
//!   current limiting, fault management with over-current compensation,
//!   emulated virtual impedance, pre-synchronization, single-phase feedback
//!   construction, and DC-bus voltage regulation.
//! - [`plant`]: a continuous-time averaged model of the converter, its LCL
//!   filter, a Thevenin grid branch with switching events, and the DC link.
//! - [`sim`]: a deterministic fixed-step co-simulation engine with trace
//!   capture, steady-state extraction, and loop-gain measurement by
//!   multi-tone injection.
//! - [`design`] and [`smallsignal`]: steady-state parameter selection,
//!   droop closed forms, power-limit maps, equilibrium solving, analytic
//!   linearization, eigenvalue/Bode/margin analysis.
//!
//! Runnable demonstrations live in `examples/`; the `uvoc` binary exposes
//! the same functionality as subcommands operating on JSON scenario files.

pub mod cli;
pub mod controller;
pub mod core;
pub mod design;
pub mod error;
pub mod plant;
pub mod sim;
pub mod smallsignal;
pub mod util;

pub use error::{Error, Result};

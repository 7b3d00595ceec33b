//! A deterministic interaction lab for a 1-DOF compliant rehabilitation arm.
//!
//! The plant is an effective point mass driven by an impedance controller,
//! a simulated patient arm coupled through a compliant interface, and an
//! impulse disturbance source. Sensing is multi-rate (1 kHz force, 500 Hz
//! IMU, 60 Hz position) with temporally correlated multiplicative noise,
//! fused at the 120 Hz control tick. An energy-feedback rule adapts the
//! controller's stiffness and damping once per movement cycle, and a
//! threshold classifier tracks the patient's state from energy and phase
//! features.
//!
//! Everything is seeded and reproducible: the same config and seed produce
//! byte-identical logs and reports.

pub mod adaptation;
pub mod context;
pub mod control;
pub mod dynamics;
pub mod harness;
pub mod metrics;
pub mod patient;
pub mod rng;
pub mod sensing;

mod error;

pub use error::SimError;

/// Control tick rate in Hz. Sensor fusion, the impedance law, and all
/// tick-level logs run on this grid.
pub const TICK_RATE: f64 = 120.0;

/// Tolerance for comparing timestamps that live on different rational grids.
pub const TIME_EPS: f64 = 1e-9;

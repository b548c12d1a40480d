//! The frame loop and the experiments built on it.

mod capacity;
mod sim;
mod sweep;

pub use capacity::{estimate_capacity, AdmissionControl};
pub use sim::{
    least_squares_slope, run_simulation, FrameRecord, RunOutput, RunSummary, SlotTrace, STABILITY_SLOPE_TOL,
};
pub use sweep::{apply_axis, sweep, SweepAxis, SweepRow};

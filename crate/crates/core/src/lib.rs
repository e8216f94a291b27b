//! Distributed rate splitting for multiple-access channels.
//!
//! Each real user turns itself into several virtual users, either by splitting
//! its transmit power (Gaussian channel) or through a random switch (discrete
//! memoryless channel), and the receiver decodes all virtual users one at a
//! time. This crate computes the allocations, schedules the decoder, verifies
//! that every decoding step is feasible and measures how fast per-user
//! throughput approaches the maximum equal rate.

pub mod dmc;
pub mod dmc_protocol;
pub mod error;
pub mod gaussian;
pub mod golden;
pub mod gaussian_protocol;
pub mod oracles;
pub mod schedule;
mod units;

pub use dmc::{DmcChannel, MutualInfoTable, SwitchDistribution, UserSet};
pub use error::{DrsError, Result};
pub use gaussian::{GaussianChannel, PowerSplit, RateAllocation};
pub use schedule::{DecodingSchedule, StepRecord, VerificationReport, VirtualUserId};
pub use units::LogBase;

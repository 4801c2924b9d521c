//! Deterministic link-budget simulator for a sub-THz "radio stripe": a
//! central unit feeding daisy-chained radio units over plastic microwave
//! fiber, with over-the-air coverage, dual-band beam selection, and
//! energy-per-bit accounting on top.
//!
//! The crate is organized around pure functions of an immutable
//! [`scenario::ScenarioConfig`]:
//!
//! - [`scenario`]: world definition and the TOML config loader
//! - [`rfchain`]: signal/noise/intermodulation budget along the fiber
//! - [`airlink`]: path gain, array patterns, blockage, serving-RU profiles
//! - [`dualband`]: low-band fingerprint to (RU, beam) mapping and its
//!   slot-overhead evaluation
//! - [`energy`]: stripe power draw and energy per bit
//! - [`cli`] / [`report`]: the `stripe-sim` command line and its CSV outputs

pub mod airlink;
pub mod cli;
pub mod dbmath;
pub mod dualband;
pub mod energy;
pub mod geometry;
pub mod report;
pub mod rfchain;
pub mod scenario;

pub use geometry::Vec3;
pub use scenario::{load_scenario, ScenarioConfig};

//! Decibel/linear conversions shared across the crate.
//!
//! Power quantities are carried in dBm where the unit matters; conversions
//! here are unit-agnostic (dB <-> linear ratio, dBm <-> linear mW).

/// Convert a dB (or dBm) value to a linear ratio (or mW).
///
/// `-inf` maps to 0, which is the convention used for "no distortion".
pub fn db_to_linear(db: f64) -> f64 {
    10.0_f64.powf(db / 10.0)
}

/// Convert a linear ratio (or mW) to dB (or dBm). Zero maps to `-inf`.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

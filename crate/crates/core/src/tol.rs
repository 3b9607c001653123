//! Floating-point comparison policy for distance values.
//!
//! All distance equality and ordering assertions use a relative tolerance of
//! 1e-9 with an absolute floor of 1e-12.

/// Relative tolerance for comparing computed distances.
pub const REL_TOL: f64 = 1e-9;

/// Absolute floor so comparisons near zero stay meaningful.
pub const ABS_FLOOR: f64 = 1e-12;

/// The admissible slack when comparing values of magnitude `scale`.
pub fn slack(scale: f64) -> f64 {
    (REL_TOL * scale.abs()).max(ABS_FLOOR)
}

/// `a == b` up to the shared tolerance.
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= slack(a.abs().max(b.abs()))
}

/// `a <= b` up to the shared tolerance.
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b + slack(a.abs().max(b.abs()))
}

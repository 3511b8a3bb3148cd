//! Fixed-width float formatting shared by every CSV and text report, so
//! repeated runs produce byte-identical artifacts.

/// Render with 17 significant digits (1 leading + 16 fractional).
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

//! Fixed numeric formatting shared by every CSV writer.

/// Twelve significant digits in scientific notation. Negative zero prints as
/// zero so that identical runs produce identical bytes.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

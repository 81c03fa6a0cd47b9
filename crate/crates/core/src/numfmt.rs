//! Fixed-precision number formatting shared by every export path.
//!
//! All floats leaving the pipeline (CSV, JSON payloads, API bodies) are first
//! rounded to 12 significant digits so that byte-level comparisons between
//! runs and between interfaces are stable.

/// Round to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.11e}", x).parse().unwrap_or(x)
}

/// Format with at most 12 significant digits, positional notation.
pub fn fmt_sig12(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    format!("{}", round_sig12(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(fmt_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig12(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_sig12(123456789.123456789), "123456789.123");
        assert_eq!(fmt_sig12(1.0), "1");
        assert_eq!(fmt_sig12(-0.0), "0");
        assert_eq!(fmt_sig12(1e-6), "0.000001");
    }

    #[test]
    fn idempotent() {
        for x in [0.1, 1.0 / 7.0, 1e12 / 7.0, -3.2e-9] {
            assert_eq!(round_sig12(round_sig12(x)), round_sig12(x));
        }
    }
}

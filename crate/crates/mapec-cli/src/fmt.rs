//! Locale-independent numeric formatting with six significant digits.

/// Formats with six significant digits: plain decimal for readable
/// magnitudes, scientific notation outside `1e-4 ..= 1e6`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..7).contains(&magnitude) {
        let decimals = (5 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

/// Rounds to the value `sig6` prints, for numeric (JSON) output channels.
pub fn round_sig6(x: f64) -> f64 {
    sig6(x).parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits_across_magnitudes() {
        assert_eq!(sig6(2.474197172768201), "2.47420");
        assert_eq!(sig6(0.25), "0.250000");
        assert_eq!(sig6(-0.25), "-0.250000");
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(123456.4), "123456");
        assert_eq!(sig6(0.000123456449), "0.000123456");
        assert_eq!(sig6(123456789.0), "1.23457e8");
        assert_eq!(sig6(0.0000012345), "1.23450e-6");
    }

    #[test]
    fn rounding_matches_the_printed_text() {
        assert_eq!(round_sig6(2.474197172768201), 2.4742);
        assert_eq!(round_sig6(0.3333333333), 0.333333);
        assert_eq!(round_sig6(0.0), 0.0);
    }
}

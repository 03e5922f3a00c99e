//! Locale-independent number rendering.

/// `%.{digits}g`-style rendering: `digits` significant digits, trailing
/// zeros dropped, scientific notation outside `1e-4 ≤ |x| < 10^digits`.
/// Negative zero prints as `0`.
pub fn significant(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // round once, in scientific form, to read off the decimal exponent
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_fraction(&format!("{x:.decimals$}")).to_string()
}

/// Shortest text that parses back to exactly `x`.
pub fn shortest(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let a = x.abs();
    if (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Comma-separated list with `digits` significant digits each.
pub fn join(values: impl IntoIterator<Item = f64>, digits: usize, sep: &str) -> String {
    values
        .into_iter()
        .map(|x| significant(x, digits))
        .collect::<Vec<_>>()
        .join(sep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn twelve_digit_rendering() {
        assert_eq!(significant(2.0000000000000004, 12), "2");
        assert_eq!(significant(-4.199999999999999, 12), "-4.2");
        assert_eq!(significant(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(significant(2.0 / 3.0, 12), "0.666666666667");
        assert_eq!(significant(-0.0, 12), "0");
        assert_eq!(significant(0.7, 12), "0.7");
        assert_eq!(significant(123456789012.0, 12), "123456789012");
        assert_eq!(significant(1234567890123.0, 12), "1.23456789012e12");
        assert_eq!(significant(1.5e-7, 12), "1.5e-7");
        assert_eq!(significant(0.00012, 12), "0.00012");
        assert_eq!(significant(999999999999.9, 12), "1e12");
    }

    #[test]
    fn shortest_examples() {
        assert_eq!(shortest(0.8), "0.8");
        assert_eq!(shortest(-6.0), "-6");
        assert_eq!(shortest(1e-20), "1e-20");
        assert_eq!(shortest(2.5e300), "2.5e300");
    }

    proptest! {
        #[test]
        fn shortest_round_trips(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = shortest(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }

        #[test]
        fn significant_is_within_rounding(x in -1e6f64..1e6) {
            let back: f64 = significant(x, 12).parse().unwrap();
            prop_assert!((back - x).abs() <= 1e-11 * x.abs().max(1e-300));
        }
    }
}

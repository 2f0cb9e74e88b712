//! Number rendering for text exports.
//!
//! Every real written to CSV goes through [`format_real`], which prints 17
//! significant digits in the style of C's `%.17g`. That is enough to make the
//! text round-trip to the same `f64` bit pattern.

/// Formats `x` with 17 significant digits, `%.17g` style.
///
/// Zero prints as `0` (`-0` when negative), infinities as `inf`/`-inf`, and NaN as `nan`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }

    const DIGITS: i32 = 17;
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");

    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Parses a real written by [`format_real`] (or any decimal literal),
/// accepting `inf`/`-inf` tokens.
pub fn parse_real(token: &str) -> Option<f64> {
    let t = token.trim();
    match t {
        "inf" | "+inf" | "Infinity" => Some(f64::INFINITY),
        "-inf" | "-Infinity" => Some(f64::NEG_INFINITY),
        _ => t.parse::<f64>().ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g17() {
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(-0.0), "-0");
        assert_eq!(format_real(1.0), "1");
        assert_eq!(format_real(-2.5), "-2.5");
        assert_eq!(format_real(0.1), "0.10000000000000001");
        assert_eq!(format_real(1e-5), "1.0000000000000001e-05");
        assert_eq!(format_real(1e20), "1e+20");
        assert_eq!(format_real(123456.0), "123456");
        assert_eq!(format_real(f64::INFINITY), "inf");
    }

    #[test]
    fn round_trips_bits() {
        let values = [
            std::f64::consts::PI,
            std::f64::consts::SQRT_2,
            1.0 / 3.0,
            -7.123456789012345e-12,
            9.999999999999999e22,
            f64::MIN_POSITIVE,
            f64::MAX,
        ];
        for v in values {
            let back = parse_real(&format_real(v)).unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v}");
        }
    }
}

//! Fixed-precision number formatting shared by the text exports.

/// Significant digits used by every CSV and fixture export.
pub const SIG_DIGITS: usize = 9;

/// Formats `x` with `digits` significant digits, like C's `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    assert!(digits > 0);
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_owned()
    }
}

/// Formats with [`SIG_DIGITS`] significant digits.
pub fn fmt9(x: f64) -> String {
    format_sig(x, SIG_DIGITS)
}

/// Rounds `x` to [`SIG_DIGITS`] significant digits.
pub fn round9(x: f64) -> f64 {
    fmt9(x).parse().expect("formatted number parses")
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

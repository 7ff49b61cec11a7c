/// Formats `x` like C's `%.12g`: twelve significant digits, trailing zeros
/// dropped, scientific notation outside `1e-4 <= |x| < 1e12`. Non-finite
/// values print as `inf`, `-inf` and `nan`.
pub fn format_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    // Round to the final digit count first: rounding can bump the exponent.
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Orders print as integers when they are integers.
pub fn format_lambda(lambda: f64) -> String {
    if lambda.fract() == 0.0 && lambda.abs() < 1e15 {
        format!("{}", lambda as i64)
    } else {
        format_g12(lambda)
    }
}

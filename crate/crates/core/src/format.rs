/// Formats a float with 12 significant digits, trimming trailing zeros
/// (like C's `%.12g`).
pub fn sig12(x: f64) -> String {
    sig(x, 12)
}

pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let digits = digits.max(1);
    let exp = x.abs().log10().floor() as i32;
    // rounding may bump the exponent (9.9999 -> 10.000)
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, e) = sci.split_once('e').expect("scientific format has an exponent");
    let e: i32 = e.parse().unwrap_or(exp);
    if e < -5 || e >= digits as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{e}");
    }
    let decimals = (digits as i32 - 1 - e).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

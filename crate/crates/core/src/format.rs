//! Locale-free number formatting shared by every text output.

/// Formats `x` with 9 significant digits, `%.9g` style: trailing zeros
/// trimmed, scientific notation outside `[1e-5, 1e9)`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::fmt_num;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt_num(0.121_070_158_9), "0.121070159");
        assert_eq!(fmt_num(4096.0), "4096");
        assert_eq!(fmt_num(123_456_789.4), "123456789");
        assert_eq!(fmt_num(1.5e10), "1.5e+10");
        assert_eq!(fmt_num(2.0e-7), "2e-07");
        assert_eq!(fmt_num(9.999_999_999_9), "10");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
    }
}

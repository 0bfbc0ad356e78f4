//! Number formatting shared by every text output.

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros
/// stripped, exponent notation outside `1e-5 ..= 1e17`. Parsing the result
/// with `str::parse::<f64>` recovers `x` exactly.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };

    if !(-5..17).contains(&exp) {
        let trimmed = digits.trim_end_matches('0');
        let (head, tail) = trimmed.split_at(1);
        let exp_sign = if exp < 0 { '-' } else { '+' };
        let exp = exp.abs();
        return if tail.is_empty() {
            format!("{sign}{head}e{exp_sign}{exp:02}")
        } else {
            format!("{sign}{head}.{tail}e{exp_sign}{exp:02}")
        };
    }

    let (int_part, frac_part) = if exp >= 0 {
        let split = exp as usize + 1;
        (digits[..split].to_string(), digits[split..].to_string())
    } else {
        ("0".to_string(), format!("{}{}", "0".repeat((-exp - 1) as usize), digits))
    };
    let frac_part = frac_part.trim_end_matches('0');
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

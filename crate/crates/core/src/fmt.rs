/// Formats `x` rounded to `digits` significant digits, using the shortest
/// decimal form of the rounded value.
pub(crate) fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x}");
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x);
    format!("{rounded}")
}

pub(crate) fn sig9(x: f64) -> String {
    sig(x, 9)
}

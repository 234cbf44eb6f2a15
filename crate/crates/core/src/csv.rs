//! Plain CSV writing with round-trip-exact floats.

use std::fmt::Write;

/// Formats `x` with 17 significant decimal digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a header line followed by one line per row.
pub fn render<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let mut first = true;
        for x in row.as_ref() {
            if !first {
                out.push(',');
            }
            first = false;
            write!(out, "{}", fmt17(*x)).expect("writing to String cannot fail");
        }
        out.push('\n');
    }
    out
}

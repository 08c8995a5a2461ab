//! CSV output with 17 significant digits and deterministic row order.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `header` and then one line per row.
pub fn write_csv<I, S>(path: &Path, header: &str, rows: I) -> io::Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{}", row.as_ref())?;
    }
    w.flush()
}

/// Two-column rows `x,y` of floats.
pub fn xy_rows<'a>(xs: &'a [f64], ys: &'a [f64]) -> impl Iterator<Item = String> + 'a {
    xs.iter().zip(ys).map(|(x, y)| format!("{},{}", fmt_f64(*x), fmt_f64(*y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_roundtrip() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }
}

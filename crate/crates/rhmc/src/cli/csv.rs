//! Deterministic CSV output: UTF-8, LF line endings, mandatory header,
//! reals rendered with 17 significant digits so identical runs produce
//! byte-identical files.

use std::path::Path;

use crate::error::Error;

/// Formats a real with 17 significant digits. Infinities render as
/// `inf`/`-inf`, which `f64::from_str` round-trips.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Renders rows as an RFC-4180-style CSV document.
pub fn render(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "row width must match header");
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Writes the document in one shot.
pub fn write_file(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), Error> {
    std::fs::write(path, render(header, rows))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting_is_stable() {
        assert_eq!(format_real(1.125), "1.1250000000000000e0");
        assert_eq!(format_real(f64::INFINITY), "inf");
        assert_eq!("inf".parse::<f64>().unwrap(), f64::INFINITY);
        let x: f64 = format_real(0.1).parse().unwrap();
        assert_eq!(x, 0.1);
    }

    #[test]
    fn render_uses_lf_and_header() {
        let doc = render(&["a", "b"], &[vec!["1".into(), "2".into()]]);
        assert_eq!(doc, "a,b\n1,2\n");
        assert!(!doc.contains('\r'));
    }
}

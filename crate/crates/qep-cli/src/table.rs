//! Deterministic CSV: single header row, comma separator, LF endings,
//! reals with 12 significant digits, `nan` sentinel for missing values.

use std::io::Write;

#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: Vec<String>) -> Self {
        CsvTable {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    #[cfg(test)]
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let mut first = true;
            for &v in row {
                if !first {
                    write!(w, ",")?;
                }
                write!(w, "{}", fmt_real(v))?;
                first = false;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// 12 significant digits, scientific; exact "0" and "nan" sentinels keep the
/// output byte-stable.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.11e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_real(f64::NAN), "nan");
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(0.5), "5.00000000000e-1");
        assert_eq!(fmt_real(-1.25e-9), "-1.25000000000e-9");
    }

    #[test]
    fn writes_lf_only() {
        let mut t = CsvTable::new(vec!["a".into(), "b".into()]);
        t.push_row(vec![1.0, f64::NAN]);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "a,b\n1.00000000000e0,nan\n");
        assert!(!s.contains('\r'));
    }
}

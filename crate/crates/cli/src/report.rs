//! Deterministic report tables in aligned-text and CSV form.

use mkstat_core::Scalar;

/// Rounds to 12 significant digits, then prints the shortest decimal
/// that reads back to the rounded value.
pub fn format_f64(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let shift = 10f64.powi(11 - magnitude);
    let rounded = (x * shift).round() / shift;
    format!("{rounded}")
}

/// Backend-aware scalar rendering: rationals exactly, floats to 12
/// significant digits.
pub fn format_scalar<S: Scalar>(x: &S) -> String {
    if S::EXACT {
        x.to_string()
    } else {
        format_f64(x.to_f64())
    }
}

/// Vectors in brackets with `|` separators; scalars bare.
pub fn format_value<S: Scalar>(v: &[S]) -> String {
    if v.len() == 1 {
        format_scalar(&v[0])
    } else {
        let parts: Vec<String> = v.iter().map(format_scalar).collect();
        format!("[{}]", parts.join("|"))
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<I, T>(headers: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn row<I, T>(&mut self, cells: I)
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let cells: Vec<String> = cells.into_iter().map(Into::into).collect();
        assert_eq!(cells.len(), self.headers.len(), "table row width");
        self.rows.push(cells);
    }

    /// Column-aligned text, two spaces between columns, LF endings.
    pub fn render_aligned(&self) -> String {
        let cols = self.headers.len();
        let mut widths: Vec<usize> = self.headers.iter().map(String::len).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let emit = |cells: &[String], out: &mut String| {
            for (i, cell) in cells.iter().enumerate() {
                out.push_str(cell);
                if i + 1 < cols {
                    for _ in 0..widths[i] - cell.len() + 2 {
                        out.push(' ');
                    }
                }
            }
            out.push('\n');
        };
        emit(&self.headers, &mut out);
        for row in &self.rows {
            emit(row, &mut out);
        }
        out
    }

    /// Header row then one data row per record, LF endings.
    pub fn render_csv(&self) -> String {
        let mut out = String::new();
        let emit = |cells: &[String], out: &mut String| {
            let escaped: Vec<String> = cells.iter().map(|c| csv_cell(c)).collect();
            out.push_str(&escaped.join(","));
            out.push('\n');
        };
        emit(&self.headers, &mut out);
        for row in &self.rows {
            emit(row, &mut out);
        }
        out
    }
}

fn csv_cell(cell: &str) -> String {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

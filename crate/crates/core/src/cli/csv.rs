//! Numeric CSV tables: one header row, comma separated, LF line endings.

use std::path::Path;

use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Build from named columns of equal length.
    pub fn from_columns(names: &[&str], columns: &[&[f64]]) -> Self {
        assert_eq!(names.len(), columns.len(), "one name per column");
        let n = columns.first().map_or(0, |c| c.len());
        assert!(columns.iter().all(|c| c.len() == n), "columns differ in length");
        Table {
            header: names.iter().map(|s| s.to_string()).collect(),
            rows: (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// 17 significant digits, round-trip exact for f64.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_string(table: &Table) -> String {
    let mut out = table.header.join(",");
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write(path: &Path, table: &Table) -> Result<(), CliError> {
    std::fs::write(path, to_string(table)).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_error(line: Option<u64>, message: impl Into<String>) -> CliError {
    CliError::Parse {
        line: line.map(|l| l as usize),
        message: message.into(),
    }
}

/// Parse a table written by [`to_string`] (or any header + numeric CSV).
pub fn parse(text: &str) -> Result<Table, CliError> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(e.position().map(|p| p.line()), e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().any(|h| h.is_empty()) {
        return Err(csv_error(Some(1), "empty column name"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e.position().map(|p| p.line()), e.to_string()))?;
        let line = record.position().map(|p| p.line());
        let row = record
            .iter()
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| csv_error(line, format!("not a number: {cell:?}")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

pub fn read(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_is_exact_and_locale_free() {
        for v in [0.0, 1.0, -0.1, std::f64::consts::PI, 1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = format_value(v);
            assert!(!s.contains(' ') && !s.contains(';'));
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_value(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn round_trip() {
        let t = Table::from_columns(&["depth_m", "phi_rad"], &[&[0.0, 1e-3], &[0.1, -2.5e-7]]);
        let text = to_string(&t);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert!(text.lines().all(|l| !l.ends_with(',')));
        assert_eq!(parse(&text).unwrap(), t);
        assert_eq!(t.column("phi_rad").unwrap(), vec![0.1, -2.5e-7]);
        assert!(t.column("missing").is_none());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse("a,b\n1,x\n").is_err());
        assert!(parse("a,b\n1,2,3\n").is_err());
        assert!(parse("a,,b\n1,2,3\n").is_err());
        match parse("a\n1\n2\nq\n") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, Some(4)),
            other => panic!("{other:?}"),
        }
    }
}

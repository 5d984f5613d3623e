//! Report files: coefficients table, remainder CSV and verdict JSON. Every
//! file is written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

pub const CSV_HEADER: [&str; 6] = ["epsilon", "order", "quantity", "direct", "formula", "abs_diff"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow {
    pub epsilon: f64,
    pub order: usize,
    pub quantity: String,
    pub direct: f64,
    pub formula: f64,
    pub abs_diff: f64,
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let fail = |source| CliError::Write { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(fail)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// Rounds to 15 significant digits so that values like `0.9999999999999999`
/// print as `1.0`.
pub fn format_value(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let r: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    format!("{r:?}")
}

/// `key=value` lines in insertion order.
pub fn coefficients_table(entries: &[(String, f64)]) -> String {
    let mut out = String::new();
    for (k, v) in entries {
        out.push_str(k);
        out.push('=');
        out.push_str(&format_value(*v));
        out.push('\n');
    }
    out
}

/// Looks up a key in a table produced by [`coefficients_table`].
pub fn parse_table(text: &str) -> Vec<(String, f64)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .filter_map(|(k, v)| v.trim().parse().ok().map(|v| (k.trim().to_string(), v)))
        .collect()
}

pub fn remainder_csv(rows: &[CsvRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Schema(format!("csv encoding: {e}"));
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Schema(format!("csv encoding: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(format_value(0.9999999999999999), "1.0");
        assert_eq!(format_value(0.5), "0.5");
        assert_eq!(format_value(1.0 / 6.0), "0.166666666666667");
        assert_eq!(format_value(-2.5e-20), "-2.5e-20");
    }

    #[test]
    fn table_round_trip() {
        let t = coefficients_table(&[("lambda_1".into(), 1.0), ("p_2".into(), 0.125)]);
        assert_eq!(t, "lambda_1=1.0\np_2=0.125\n");
        assert_eq!(parse_table(&t), vec![("lambda_1".into(), 1.0), ("p_2".into(), 0.125)]);
    }

    #[test]
    fn csv_header_first() {
        let rows =
            [CsvRow { epsilon: 0.1, order: 1, quantity: "lambda".into(), direct: 0.5, formula: 0.5, abs_diff: 0.0 }];
        let text = String::from_utf8(remainder_csv(&rows).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("epsilon,order,quantity,direct,formula,abs_diff"));
        assert_eq!(lines.next(), Some("0.1,1,lambda,0.5,0.5,0.0"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("x.txt");
        atomic_write(&p, b"one").unwrap();
        atomic_write(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}

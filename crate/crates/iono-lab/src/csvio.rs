//! Deterministic CSV emission: one write per file, floats in Rust's shortest
//! round-trip form, LF line endings. Rows arrive pre-joined so callers keep
//! full control over column formatting.

use std::fs;
use std::io;
use std::path::Path;

pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> io::Result<()> {
    let mut body = String::with_capacity(header.len() + 1 + rows.iter().map(|r| r.len() + 1).sum::<usize>());
    body.push_str(header);
    body.push('\n');
    for row in rows {
        body.push_str(row);
        body.push('\n');
    }
    fs::write(path, body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_header_rows_and_trailing_newline() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, "a,b", &["1,2".into(), "3,4".into()]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a,b\n1,2\n3,4\n");
    }

    #[test]
    fn float_display_round_trips() {
        for v in [0.01, 1e-9, 57.29577951308232, -0.3e-3] {
            let s = format!("{v}");
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }
}

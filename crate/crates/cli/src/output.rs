//! CSV and JSON writers. Both carry the full config, its SHA-256 and the
//! tolerances in force, and nothing that changes between identical runs.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use timeless_core::linalg;

use crate::Result;

/// Provenance written ahead of the data.
#[derive(Debug, Clone)]
pub struct Meta {
    pub kind: &'static str,
    pub config: Value,
    pub tolerances: Vec<(&'static str, f64)>,
}

impl Meta {
    pub fn new(kind: &'static str, config: Value) -> Self {
        Self {
            kind,
            config,
            tolerances: vec![("structural", linalg::STRUCTURAL_TOL), ("density", linalg::DENSITY_TOL)],
        }
    }

    pub fn with_tolerance(mut self, name: &'static str, value: f64) -> Self {
        self.tolerances.push((name, value));
        self
    }

    pub fn config_json(&self) -> String {
        self.config.to_string()
    }

    pub fn hash(&self) -> String {
        crate::config::hash_str(&self.config_json())
    }
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Flag(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Flag(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

/// Shortest round-trip text, in scientific form outside `[1e-4, 1e16)`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// `#`-prefixed metadata lines, then the header, then the rows.
pub fn render_csv(meta: &Meta, header: &[&str], rows: &[Vec<Cell>]) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!("# timeless {}\n", meta.kind));
    out.push_str(&format!("# config: {}\n", meta.config_json()));
    out.push_str(&format!("# config_sha256: {}\n", meta.hash()));
    for (name, value) in &meta.tolerances {
        out.push_str(&format!("# tolerance_{name}: {value:e}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e.to_string())
}

#[derive(Serialize)]
struct JsonDoc<'a, T: Serialize> {
    kind: &'a str,
    config: &'a Value,
    config_sha256: String,
    tolerances: Value,
    rows: T,
}

pub fn render_json<T: Serialize>(meta: &Meta, rows: T) -> Result<String> {
    let tolerances: serde_json::Map<String, Value> =
        meta.tolerances.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let doc = JsonDoc {
        kind: meta.kind,
        config: &meta.config,
        config_sha256: meta.hash(),
        tolerances: Value::Object(tolerances),
        rows,
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Complex matrix as nested `[re, im]` pairs.
pub fn complex_pairs(m: &linalg::CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let meta = Meta::new("sweep", json!({"a": 1}));
        let rows = vec![vec![Cell::Num(0.5), Cell::Empty, Cell::Flag(true)]];
        let text = render_csv(&meta, &["x", "y", "singular"], &rows).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# timeless sweep");
        assert_eq!(lines[1], r#"# config: {"a":1}"#);
        assert!(lines[2].starts_with("# config_sha256: ") && lines[2].len() == 17 + 64);
        assert_eq!(lines[lines.len() - 2], "x,y,singular");
        assert_eq!(lines[lines.len() - 1], "0.5,,true");
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.0, 1.0, -0.25, 1e-10, 3.776910543616773e51, 1.602176634e-19, 123456.789] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(1e-10), "1e-10");
        assert_eq!(format_float(4.0 / 3.0), "1.3333333333333333");
    }

    #[test]
    fn json_pairs() {
        let m = linalg::pauli_y();
        assert_eq!(complex_pairs(&m), vec![vec![[0.0, 0.0], [0.0, -1.0]], vec![[0.0, 1.0], [0.0, 0.0]]]);
        let meta = Meta::new("run", json!({"b": 2}));
        let text = render_json(&meta, vec![1, 2]).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["config"], json!({"b": 2}));
        assert_eq!(v["rows"], json!([1, 2]));
        assert_eq!(v["config_sha256"].as_str().unwrap(), meta.hash());
    }
}

//! CSV and JSON emission. Files are written to a temporary sibling and
//! renamed into place, so readers never see partial output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::measures::AtomicMeasure;

/// A rectangular table with a header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip representation; `NaN` and infinities spelled out.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| fmt_f64(v)).collect());
    }

    /// Comma-separated, LF endings, `# ` comment lines before the header.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut s = String::new();
        for c in comments {
            for line in c.lines() {
                let _ = writeln!(s, "# {line}");
            }
        }
        s.push_str(&self.columns.iter().map(|c| escape(c)).collect::<Vec<_>>().join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|c| escape(c)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }
}

fn escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

/// Write `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path.file_name().ok_or_else(|| std::io::Error::other("output path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

/// Atoms as `x0,...,x{n-1},weight`.
pub fn measure_table(mu: &AtomicMeasure) -> Table {
    let mut t = Table::new((0..mu.dim).map(|i| format!("x{i}")).chain(["weight".to_string()]));
    let (pts, ws) = mu.atoms();
    for (p, w) in pts.chunks(mu.dim).zip(&ws) {
        let mut row: Vec<String> = p.iter().map(|&v| fmt_f64(v)).collect();
        row.push(fmt_f64(*w));
        t.push(row);
    }
    t
}

#[derive(Serialize)]
struct Sidecar<'a> {
    n: usize,
    alpha: f64,
    mollifier_width: f64,
    provenance: &'a str,
    atoms: usize,
    mass: f64,
}

/// JSON metadata accompanying [`measure_table`].
pub fn measure_sidecar(mu: &AtomicMeasure) -> String {
    to_json(&Sidecar {
        n: mu.dim,
        alpha: mu.alpha_meta,
        mollifier_width: mu.mollifier_width,
        provenance: &mu.provenance,
        atoms: mu.len(),
        mass: mu.mass(),
    })
}

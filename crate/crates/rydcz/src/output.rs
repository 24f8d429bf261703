//! Result files: CSV with 17 significant digits, JSON with sorted keys, and
//! the per-run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{Dim, Matrix, RawStorage};
use rydcz_core::C64;
use serde_json::{json, Value};

/// `x` with 17 significant digits; `NaN` for missing values.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// JSON number, or `null` when not finite.
pub fn jnum(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn table<T: nalgebra::Scalar, R: Dim, C: Dim, S: RawStorage<T, R, C>>(
    m: &Matrix<T, R, C, S>,
    f: impl Fn(&T) -> f64,
) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| jnum(f(&m[(r, c)]))).collect()))
            .collect(),
    )
}

/// Row-major nested arrays of a real matrix.
pub fn real_table<R: Dim, C: Dim, S: RawStorage<f64, R, C>>(m: &Matrix<f64, R, C, S>) -> Value {
    table(m, |x| *x)
}

/// `{"re": [[…]], "im": [[…]]}`.
pub fn complex_table<R: Dim, C: Dim, S: RawStorage<C64, R, C>>(m: &Matrix<C64, R, C, S>) -> Value {
    json!({
        "re": table(m, |z| z.re),
        "im": table(m, |z| z.im),
    })
}

/// CSV text starting with a `# config_hash=` line and any extra comments.
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(config_hash: &str, comments: &[&str], header: &[&str]) -> Self {
        let mut text = format!("# config_hash={config_hash}\n");
        for c in comments {
            let _ = writeln!(text, "# {c}");
        }
        text.push_str(&header.join(","));
        text.push('\n');
        Csv {
            text,
            columns: header.len(),
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        assert_eq!(fields.len(), self.columns, "CSV row width");
        let line: Vec<&str> = fields.iter().map(|f| f.as_ref()).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Output directory of one run; remembers what was written.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> std::io::Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, contents)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> std::io::Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON serializes");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// `manifest.json`: config hash, toolkit version, wall time and files.
    pub fn write_manifest(
        &mut self,
        command: &str,
        config_hash: &str,
        wall_time_s: f64,
        warnings: &[String],
    ) -> std::io::Result<PathBuf> {
        let files: Vec<String> = self
            .written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        let manifest = json!({
            "command": command,
            "config_hash": config_hash,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": wall_time_s,
            "files": files,
            "warnings": warnings,
        });
        self.write_json("manifest.json", &manifest)
    }
}

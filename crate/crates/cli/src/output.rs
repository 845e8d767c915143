//! Deterministic file emission.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) in CSV and JSON
//! alike, so equal values always produce equal bytes and every value parses
//! back to the same `f64`. Non-finite floats become `null` in JSON and
//! `NaN`/`inf` in CSV.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;
pub const CONFIG_FILE: &str = "config.toml";
pub const INDEX_FILE: &str = "index.json";
pub const FAILED_FILE: &str = "FAILED";

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Pretty JSON with fixed-precision floats.
struct FixedFloat<'a>(serde_json::ser::PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FixedFloat<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, FixedFloat(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Envelope around every JSON document.
#[derive(Serialize)]
pub struct Document<'a, T: Serialize> {
    pub schema_version: u32,
    pub run_id: &'a str,
    pub command: &'a str,
    pub kind: &'a str,
    pub data: T,
}

/// A CSV table built in memory.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
        }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => fmt_f64(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Serialize)]
struct IndexEntry {
    file: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Index<'a> {
    schema_version: u32,
    run_id: &'a str,
    command: &'a str,
    files: Vec<IndexEntry>,
}

/// One run's directory, `<root>/<run id>/`. Created fresh: a previous run
/// with the same id is replaced.
pub struct RunDir {
    pub path: PathBuf,
    pub run_id: String,
    pub command: String,
    written: Vec<(String, String)>,
}

impl RunDir {
    pub fn create(root: &Path, run_id: &str, command: &str) -> io::Result<Self> {
        let path = root.join(run_id);
        if path.exists() {
            fs::remove_dir_all(&path)?;
        }
        fs::create_dir_all(&path)?;
        Ok(Self {
            path,
            run_id: run_id.to_string(),
            command: command.to_string(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, text: String) -> io::Result<()> {
        fs::write(self.path.join(name), text.as_bytes())?;
        let digest = hex::encode(Sha256::digest(text.as_bytes()));
        self.written.push((name.to_string(), digest));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, kind: &str, data: T) -> io::Result<()> {
        let doc = Document {
            schema_version: SCHEMA_VERSION,
            run_id: &self.run_id,
            command: &self.command,
            kind,
            data,
        };
        let text = to_json(&doc).map_err(io::Error::other)?;
        self.write(name, text)
    }

    /// Writes the index listing every file so far; called once, last.
    pub fn finish(mut self) -> io::Result<PathBuf> {
        let mut files: Vec<IndexEntry> = self
            .written
            .drain(..)
            .map(|(file, sha256)| {
                let bytes = fs::metadata(self.path.join(&file)).map(|m| m.len() as usize).unwrap_or(0);
                IndexEntry { file, bytes, sha256 }
            })
            .collect();
        files.sort_by(|a, b| a.file.cmp(&b.file));
        let index = Index {
            schema_version: SCHEMA_VERSION,
            run_id: &self.run_id,
            command: &self.command,
            files,
        };
        fs::write(self.path.join(INDEX_FILE), to_json(&index).map_err(io::Error::other)?)?;
        Ok(self.path)
    }

    /// Leaves partial outputs in place and marks the run as failed.
    pub fn fail(self, reason: &str) -> io::Result<PathBuf> {
        fs::write(self.path.join(FAILED_FILE), format!("{reason}\n"))?;
        Ok(self.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-1.0), "-1.0000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 1.7976931348623157e308, 5e-324] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_uses_fixed_floats() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: Vec<f64>,
            c: Option<f64>,
        }
        let s = to_json(&S {
            a: 0.5,
            b: vec![1.0, f64::INFINITY],
            c: None,
        })
        .unwrap();
        assert!(s.contains("\"a\": 5.0000000000000000e-1"), "{s}");
        assert!(s.contains("null"));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"].as_f64(), Some(0.5));
    }

    #[test]
    fn csv_rows() {
        let mut c = Csv::new(&["iter", "x"]);
        c.row(&[Cell::Int(1), Cell::Float(0.25)]);
        c.row(&[Cell::Text("a".into()), Cell::Float(-0.0)]);
        assert_eq!(c.into_string(), "iter,x\n1,2.5000000000000000e-1\na,-0.0000000000000000e0\n");
    }
}

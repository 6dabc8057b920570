//! Deterministic CSV/JSON writers. Every float is printed with 17 significant digits.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON with floats in the same fixed format as the CSV files.
struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> io::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(io::Error::other)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(io::Error::other)
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub format: &'static str,
    pub description: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub columns: Vec<String>,
    /// Suggested plot axes, by column name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axes: Option<Axes>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Axes {
    pub x: &'static str,
    pub y: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_by: Option<&'static str>,
}

impl Axes {
    pub fn new(x: &'static str, y: &[&'static str]) -> Self {
        Self {
            x,
            y: y.to_vec(),
            group_by: None,
        }
    }

    pub fn grouped(mut self, column: &'static str) -> Self {
        self.group_by = Some(column);
        self
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    tool_version: &'static str,
    command: &'a str,
    seed: Option<u64>,
    files: &'a [FileEntry],
    config: &'a C,
}

/// Collects the files of one command and writes the manifest last.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn csv<R>(
        &mut self,
        name: &str,
        description: &str,
        header: &[&str],
        axes: Option<Axes>,
        rows: R,
    ) -> io::Result<()>
    where
        R: IntoIterator,
        R::Item: AsRef<[f64]>,
    {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut w = io::BufWriter::new(fs::File::create(&path)?);
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let row = row.as_ref();
            debug_assert_eq!(row.len(), header.len());
            let line: Vec<String> = row.iter().map(|x| float(*x)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()?;
        self.files.push(FileEntry {
            path: name.to_string(),
            format: "csv",
            description: description.to_string(),
            columns: header.iter().map(|s| s.to_string()).collect(),
            axes,
        });
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, description: &str, value: &T) -> io::Result<()> {
        fs::write(self.dir.join(name), to_json(value)?)?;
        self.files.push(FileEntry {
            path: name.to_string(),
            format: "json",
            description: description.to_string(),
            columns: Vec::new(),
            axes: None,
        });
        Ok(())
    }

    pub fn finish<C: Serialize>(self, command: &str, seed: Option<u64>, config: &C) -> io::Result<PathBuf> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            files: &self.files,
            config,
        };
        let path = self.dir.join("manifest.json");
        fs::write(&path, to_json(&manifest)?)?;
        Ok(path)
    }
}

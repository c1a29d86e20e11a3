//! CSV plumbing shared by every tabular file.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use csv::StringRecord;

use crate::error::{io_err, Error, Result};

pub struct Row<'a> {
    path: &'a Path,
    pub line: u64,
    record: &'a StringRecord,
}

impl Row<'_> {
    pub fn get<T: FromStr>(&self, idx: usize, name: &str) -> Result<T> {
        let raw = self.record.get(idx).unwrap_or("").trim();
        raw.parse().map_err(|_| self.error(format!("bad {name} {raw:?}")))
    }

    pub fn raw(&self, idx: usize) -> &str {
        self.record.get(idx).unwrap_or("").trim()
    }

    /// A timestamp; fractional milliseconds are truncated.
    pub fn millis(&self, idx: usize, name: &str) -> Result<i64> {
        let v: f64 = self.get(idx, name)?;
        if !v.is_finite() || v.abs() > 9.0e15 {
            return Err(self.error(format!("bad {name} {v}")));
        }
        Ok(v.trunc() as i64)
    }

    pub fn finite(&self, idx: usize, name: &str) -> Result<f64> {
        let v: f64 = self.get(idx, name)?;
        if !v.is_finite() {
            return Err(self.error(format!("non-finite {name}")));
        }
        Ok(v)
    }

    pub fn error(&self, msg: String) -> Error {
        Error::Parse { path: self.path.to_path_buf(), line: self.line, msg }
    }
}

/// Reads a headed CSV file whose header must equal `header`.
pub fn read_csv(path: &Path, header: &[&str], mut each: impl FnMut(&Row<'_>) -> Result<()>) -> Result<()> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(file);
    let parse_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        Error::Parse { path: path.to_path_buf(), line, msg: e.to_string() }
    };
    let found = reader.headers().map_err(parse_err)?.clone();
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found != header {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("expected header {:?}, found {:?}", header.join(","), found.join(",")),
        });
    }
    let mut record = StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => return Ok(()),
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                each(&Row { path, line, record: &record })?;
            }
            Err(e) => return Err(parse_err(e)),
        }
    }
}

/// Buffered text output that reports errors against its path.
pub struct Out<'a> {
    path: &'a Path,
    w: BufWriter<File>,
}

impl<'a> Out<'a> {
    pub fn create(path: &'a Path) -> Result<Self> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        let f = File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Ok(Out { path, w: BufWriter::new(f) })
    }

    pub fn line(&mut self, args: std::fmt::Arguments<'_>) -> Result<()> {
        self.w.write_fmt(args).and_then(|_| self.w.write_all(b"\n")).map_err(|source| Error::Io {
            path: self.path.to_path_buf(),
            source,
        })
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush().map_err(|source| Error::Io { path: self.path.to_path_buf(), source })
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut out = Out::create(path)?;
    out.w.write_all(text.as_bytes()).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    out.finish()
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

/// Quotes a CSV field when needed.
pub fn field(s: &str) -> std::borrow::Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) || s.trim() != s {
        format!("\"{}\"", s.replace('"', "\"\"")).into()
    } else {
        s.into()
    }
}

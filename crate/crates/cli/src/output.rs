//! CSV, JSON and gnuplot emitters.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// Destination for a command's main output: a file or stdout.
pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Single JSON document with a `schema_version` field in front.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub fn write_json<T: Serialize>(w: &mut dyn Write, command: &str, body: &T) -> io::Result<()> {
    let doc = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        body,
    };
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)?;
    w.flush()
}

/// Header-first CSV with `{}` float formatting (shortest round-trip, always a
/// decimal point, never locale separators).
pub struct Csv<'a> {
    w: &'a mut dyn Write,
    columns: usize,
}

impl<'a> Csv<'a> {
    pub fn new(w: &'a mut dyn Write, header: &[&str]) -> io::Result<Self> {
        writeln!(w, "{}", header.join(","))?;
        Ok(Self {
            w,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, values: &[f64]) -> io::Result<()> {
        debug_assert_eq!(values.len(), self.columns);
        let cells: Vec<String> = values.iter().map(|v| format_float(*v)).collect();
        writeln!(self.w, "{}", cells.join(","))
    }

    pub fn finish(self) -> io::Result<()> {
        self.w.flush()
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:?}")
    }
}

/// A gnuplot script plotting `columns` (1-based, against column 1) of `data`.
pub fn write_gnuplot(
    script: &Path,
    data: Option<&Path>,
    xlabel: &str,
    ylabel: &str,
    columns: &[(usize, &str)],
) -> io::Result<()> {
    let data: PathBuf = data
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("data.csv"));
    let mut f = BufWriter::new(File::create(script)?);
    writeln!(f, "set datafile separator ','")?;
    writeln!(f, "set key autotitle columnhead")?;
    writeln!(f, "set xlabel '{xlabel}'")?;
    writeln!(f, "set ylabel '{ylabel}'")?;
    let plots: Vec<String> = columns
        .iter()
        .map(|(c, title)| format!("'{}' using 1:{c} with lines title '{title}'", data.display()))
        .collect();
    writeln!(f, "plot {}", plots.join(", \\\n     "))?;
    f.flush()
}

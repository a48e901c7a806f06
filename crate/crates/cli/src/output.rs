use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

/// Version tag written at the top of every CSV output.
pub const CSV_VERSION: u32 = 1;

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub struct Sink {
    out: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Self { out })
    }

    /// Version comment followed by the column header.
    pub fn csv_header(&mut self, command: &str, columns: &[String]) -> io::Result<()> {
        writeln!(self.out, "# spinstar {command} v{CSV_VERSION}")?;
        writeln!(self.out, "{}", columns.join(","))
    }

    pub fn csv_row(&mut self, values: &[f64]) -> io::Result<()> {
        let cells: Vec<String> = values.iter().map(|&v| num(v)).collect();
        writeln!(self.out, "{}", cells.join(","))
    }

    pub fn csv_cells(&mut self, cells: &[String]) -> io::Result<()> {
        writeln!(self.out, "{}", cells.join(","))
    }

    /// `# key,value` trailer line.
    pub fn comment(&mut self, key: &str, value: &str) -> io::Result<()> {
        writeln!(self.out, "# {key},{value}")
    }

    pub fn json_line<T: Serialize>(&mut self, value: &T) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, value)?;
        writeln!(self.out)
    }

    pub fn json_pretty<T: Serialize>(&mut self, value: &T) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut self.out, value)?;
        writeln!(self.out)
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}

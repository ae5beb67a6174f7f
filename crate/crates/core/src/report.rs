//! CSV output with an embedded provenance header.
//!
//! Every file starts with `# config: <json>` holding the effective run
//! configuration, followed by RFC-4180 records. Floats are written with 17
//! significant digits so the files round-trip exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

/// Shortest-safe scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_vec(v: &[f64]) -> Vec<String> {
    v.iter().map(|&x| fmt_f64(x)).collect()
}

pub struct CsvReport<W: Write> {
    writer: csv::Writer<W>,
}

impl CsvReport<BufWriter<File>> {
    pub fn create(path: &Path, config: &str, header: &[&str]) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        CsvReport::from_writer(BufWriter::new(File::create(path)?), config, header)
    }
}

impl<W: Write> CsvReport<W> {
    pub fn from_writer(mut inner: W, config: &str, header: &[&str]) -> Result<Self> {
        // The JSON must stay on one line to remain a single comment record.
        write!(inner, "# config: {}\r\n", config.replace('\n', " "))?;
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(inner);
        writer.write_record(header)?;
        Ok(CsvReport { writer })
    }

    pub fn row<S: AsRef<[u8]>>(&mut self, fields: &[S]) -> Result<()> {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.writer.into_inner().map_err(|e| crate::Error::Io(e.into_error()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn header_and_quoting() {
        let mut r = CsvReport::from_writer(Vec::new(), "{\"a\": 1}", &["site", "value"]).unwrap();
        r.row(&["(0,1)", "1"]).unwrap();
        let out = String::from_utf8(r.into_inner().unwrap()).unwrap();
        assert_eq!(out, "# config: {\"a\": 1}\r\nsite,value\r\n\"(0,1)\",1\r\n");
    }
}

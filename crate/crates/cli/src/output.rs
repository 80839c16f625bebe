//! CSV emission.
//!
//! Floats use Rust's shortest round-trip decimal form: plain digits, never
//! an exponent, at most 17 significant digits, and it parses back to the same
//! bits. Formatting does not depend on locale.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub struct CsvWriter {
    inner: BufWriter<Box<dyn Write>>,
    path: Option<PathBuf>,
    columns: usize,
}

impl CsvWriter {
    /// Writes to `path`, or stdout when `None`.
    pub fn create(path: Option<&Path>, header: &[&str]) -> Result<Self, CliError> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(File::create(p).map_err(|e| CliError::io("cannot create", p, e))?),
            None => Box::new(io::stdout()),
        };
        let mut w = CsvWriter { inner: BufWriter::new(sink), path: path.map(Path::to_path_buf), columns: header.len() };
        w.line(header.iter().map(|s| s.to_string()).collect())?;
        Ok(w)
    }

    fn err(&self, e: io::Error) -> CliError {
        match &self.path {
            Some(p) => CliError::io("cannot write", p, e),
            None => CliError::Data(format!("cannot write to stdout: {e}")),
        }
    }

    fn line(&mut self, fields: Vec<String>) -> Result<(), CliError> {
        debug_assert_eq!(fields.len(), self.columns);
        let text = fields.join(",");
        writeln!(self.inner, "{text}").map_err(|e| self.err(e))
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        self.line(fields.to_vec())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush().map_err(|e| self.err(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_without_exponent() {
        for v in [0.1 + 0.2, -0.9045587368640046, 1e-7, 123456789.125, 0.0] {
            let s = fmt_f64(v);
            assert!(!s.contains('e'), "{s}");
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
            let digits = s.trim_start_matches('-').replace('.', "");
            assert!(digits.trim_start_matches('0').len() <= 17, "{s}");
        }
    }

    proptest::proptest! {
        #[test]
        fn any_finite_float_round_trips(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = fmt_f64(v);
            proptest::prop_assert!(!s.contains('e') && !s.contains(','));
            proptest::prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}

//! File emission. Every float goes through [`num`] so identical runs give
//! byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Emit;
use crate::error::CliError;

pub fn num(x: f64) -> String {
    // `+ 0.0` folds −0 into 0
    format!("{:.12e}", x + 0.0)
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn opt_int(x: Option<i32>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub struct Output {
    dir: PathBuf,
    emit: Vec<Emit>,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, emit: &[Emit]) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Output {
            dir: dir.to_path_buf(),
            emit: emit.to_vec(),
            written: Vec::new(),
        })
    }

    pub fn wants(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }

    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), CliError> {
        if !self.wants(Emit::Csv) {
            return Ok(());
        }
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if !self.wants(Emit::Json) {
            return Ok(());
        }
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }

    /// Two whitespace-separated columns, one point per line.
    pub fn plot(&mut self, name: &str, points: &[(f64, f64)]) -> Result<(), CliError> {
        if !self.wants(Emit::Plotdata) {
            return Ok(());
        }
        let path = self.dir.join(name);
        let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
        for &(x, y) in points {
            writeln!(f, "{} {}", num(x), num(y))?;
        }
        f.flush()?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_format() {
        assert_eq!(num(1.0), "1.000000000000e0");
        assert_eq!(num(-0.000123), "-1.230000000000e-4");
        assert_eq!(num(-0.0), "0.000000000000e0");
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn skips_formats_not_requested() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Output::new(dir.path(), &[Emit::Plotdata]).unwrap();
        out.csv("a.csv", &["x"], &[vec!["1".into()]]).unwrap();
        out.plot("a.dat", &[(1.0, 2.0)]).unwrap();
        assert_eq!(out.written().len(), 1);
        let text = fs::read_to_string(dir.path().join("a.dat")).unwrap();
        assert_eq!(text, "1.000000000000e0 2.000000000000e0\n");
    }
}

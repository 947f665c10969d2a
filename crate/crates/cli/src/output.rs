use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hdmd::{AtomicMeasure, HdmdError, MatRef, c64};
use hdmd::spectral::probes::ProbeTable;

use crate::CliError;

pub(crate) struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(path).map_err(CliError::io(path))?;
        Ok(Self(path.to_path_buf()))
    }

    fn open(&self, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
        let path = self.0.join(name);
        let f = File::create(&path).map_err(CliError::io(&path))?;
        Ok((path, BufWriter::new(f)))
    }

    fn finish(path: PathBuf, res: Result<(), HdmdError>) -> Result<(), CliError> {
        res.map_err(|e| match e {
            HdmdError::Io(source) => CliError::Io { path, source },
            other => CliError::Input(other.to_string()),
        })
    }

    pub fn measure(&self, name: &str, m: &AtomicMeasure) -> Result<(), CliError> {
        let (path, w) = self.open(name)?;
        Self::finish(path, m.write_csv(w))
    }

    pub fn probe(&self, name: &str, t: &ProbeTable) -> Result<(), CliError> {
        let (path, w) = self.open(name)?;
        Self::finish(path, t.write_csv(w))
    }

    pub fn matrix(&self, name: &str, m: MatRef<'_, c64>) -> Result<(), CliError> {
        let (path, w) = self.open(name)?;
        Self::finish(path, hdmd::io::write_matrix_csv(m, w))
    }

    /// Plain CSV from pre-formatted string fields.
    pub fn table(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let (path, w) = self.open(name)?;
        let mut wtr = csv::Writer::from_writer(w);
        let res = (|| -> csv::Result<()> {
            wtr.write_record(header)?;
            for r in rows {
                wtr.write_record(r)?;
            }
            wtr.flush()?;
            Ok(())
        })();
        Self::finish(path, res.map_err(HdmdError::from))
    }

    pub fn json(&self, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
        let (path, mut w) = self.open(name)?;
        let text = serde_json::to_string_pretty(value).expect("summary serializes");
        w.write_all(text.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .and_then(|_| w.flush())
            .map_err(CliError::io(path))
    }
}

//! Outputs are staged in memory and written only after a command has fully
//! succeeded, so a failing run never leaves partial files behind.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("outputs serialize");
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = T>) {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).expect("rows serialize");
        }
        self.raw(name, w.into_inner().expect("in-memory writer"));
    }

    pub fn raw(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Writes every file into `dir` via a temporary name and a rename.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Output { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let target = dir.join(name);
            let tmp = dir.join(format!(".{name}.tmp"));
            std::fs::write(&tmp, bytes).map_err(io(&tmp))?;
            std::fs::rename(&tmp, &target).map_err(io(&target))?;
            written.push(target);
        }
        Ok(written)
    }
}

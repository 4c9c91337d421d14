// SPDX-License-Identifier: Apache-2.0
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Output directory that refuses to replace existing files unless told to.
pub struct OutDir {
    dir: PathBuf,
    overwrite: bool,
}

impl OutDir {
    pub fn new(dir: &Path, overwrite: bool) -> Self {
        OutDir { dir: dir.to_path_buf(), overwrite }
    }

    /// Creates the directory and checks every file a command will write
    /// before any work starts, so a refused run leaves nothing behind.
    pub fn prepare<S: AsRef<str>>(&self, names: &[S]) -> Result<(), CliError> {
        if !self.overwrite {
            for name in names {
                let p = self.dir.join(name.as_ref());
                if p.exists() {
                    return Err(CliError::OutputExists(p));
                }
            }
        }
        fs::create_dir_all(&self.dir)?;
        Ok(())
    }

    pub fn write_with<F>(&self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
    {
        let mut w = BufWriter::new(fs::File::create(self.dir.join(name))?);
        body(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        self.write_with(name, |w| writeln!(w, "{text}"))
    }
}

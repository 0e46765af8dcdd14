//! Output directory handling: atomic file writes and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Collects the files written by one command.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    /// Writes through a temporary file in the same directory, then renames.
    pub fn write_with(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<PathBuf> {
        let path = self.root.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root)?;
        f(tmp.as_file_mut())?;
        tmp.as_file_mut().flush()?;
        tmp.persist(&path).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn write_str(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        self.write_with(name, |w| Ok(w.write_all(contents.as_bytes())?))
    }

    /// Writes `manifest.json` listing every output, the configuration and
    /// the library version.
    pub fn finish<C: Serialize>(mut self, command: &str, config: &C) -> Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a, C> {
            command: &'a str,
            version: &'a str,
            outputs: &'a [String],
            config: &'a C,
        }
        let outputs = std::mem::take(&mut self.written);
        let manifest = Manifest { command, version: dendro_evo::VERSION, outputs: &outputs, config };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        self.write_str("manifest.json", &text)?;
        Ok(())
    }
}

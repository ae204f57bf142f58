use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Where a command's main output goes.
#[derive(Debug, Clone)]
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Sink {
        path.map_or(Sink::Stdout, Sink::File)
    }

    /// Renders into memory, then writes in one go; files are replaced atomically.
    pub fn emit(&self, render: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        render(&mut buf).context("rendering output")?;
        match self {
            Sink::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(&buf)?;
                out.flush()?;
                Ok(())
            }
            Sink::File(path) => write_atomic(path, &buf),
        }
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

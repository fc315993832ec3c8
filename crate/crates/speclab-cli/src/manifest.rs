//! Run manifests and atomic output writing. A manifest captures the
//! command, the fully resolved configuration (every default made explicit)
//! and the list of output files, so any run can be reproduced bit-exactly
//! with `speclab rerun <manifest>`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema: u32,
    pub command: String,
    pub config: RunConfig,
    /// Output file names relative to the run directory, in write order.
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).context("parsing manifest")
    }
}

/// Collects outputs and writes them (and the manifest) atomically: each
/// file lands via a temp-file rename after its content is complete.
pub struct RunWriter {
    dir: PathBuf,
    outputs: Vec<String>,
}

impl RunWriter {
    pub fn new(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(RunWriter { dir: dir.to_path_buf(), outputs: Vec::new() })
    }

    pub fn write(&mut self, name: &str, content: &[u8]) -> anyhow::Result<()> {
        write_atomic(&self.dir.join(name), content)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn finish(self, command: &str, config: &RunConfig) -> anyhow::Result<PathBuf> {
        let manifest = Manifest {
            schema: 1,
            command: command.to_string(),
            config: config.clone(),
            outputs: self.outputs,
        };
        let path = self.dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

fn write_atomic(path: &Path, content: &[u8]) -> anyhow::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(content)?;
        f.sync_all().ok();
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

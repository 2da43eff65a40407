use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use idla_core::acceptance::CriterionOutcome;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct OutputDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

impl OutputDigest {
    pub fn of(path: &Path) -> io::Result<Self> {
        let data = fs::read(path)?;
        Ok(OutputDigest {
            path: path.to_path_buf(),
            sha256: format!("{:x}", Sha256::digest(&data)),
            bytes: data.len() as u64,
        })
    }
}

/// Everything needed to reproduce a run's data files.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub subcommand: String,
    pub config: serde_json::Value,
    pub master_seed: Option<u64>,
    pub threads: usize,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputDigest>,
    pub status: String,
    pub exit_code: u8,
    pub error: Option<String>,
    pub checks: Vec<CriterionOutcome>,
}

impl RunManifest {
    /// Writes `<dir>/<subcommand>.manifest.json` through a temporary file
    /// and a rename.
    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.manifest.json", self.subcommand));
        let tmp = dir.join(format!(".{}.manifest.json.tmp", self.subcommand));
        let mut text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("abc.txt");
        fs::write(&path, "abc").unwrap();
        let d = OutputDigest::of(&path).unwrap();
        assert_eq!(d.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(d.bytes, 3);
    }
}

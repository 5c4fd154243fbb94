use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use hyperlit_core::{Error, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

/// A file written next to its destination and renamed into place on commit.
pub struct Staged {
    target: PathBuf,
    file: NamedTempFile,
}

impl Staged {
    pub fn commit(self) -> Result<()> {
        self.file
            .persist(&self.target)
            .map(drop)
            .map_err(|e| Error::io(&self.target, e.error))
    }
}

/// Write `path` through `fill` into a temporary sibling. Nothing appears at
/// `path` until [`Staged::commit`].
pub fn stage(path: &Path, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<Staged> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let file = NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file.as_file());
    fill(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))?;
    drop(out);
    Ok(Staged { target: path.to_path_buf(), file })
}

pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    stage(path, fill)?.commit()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// What a run did: enough to reproduce it and to detect changed inputs.
pub struct Manifest {
    pub subcommand: String,
    pub parameters: BTreeMap<String, Value>,
    pub inputs: Vec<PathBuf>,
    pub seed: u64,
}

impl Manifest {
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        output.with_file_name(name)
    }

    pub fn to_json(&self) -> Result<Value> {
        let mut inputs = BTreeMap::new();
        for p in &self.inputs {
            inputs.insert(p.display().to_string(), Value::String(sha256_file(p)?));
        }
        Ok(json!({
            "subcommand": self.subcommand,
            "parameters": self.parameters,
            "inputs": inputs,
            "seed": self.seed,
            "version": env!("CARGO_PKG_VERSION"),
        }))
    }

    pub fn write_next_to(&self, output: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json()?).expect("manifest values serialise");
        write_atomic(&Self::path_for(output), |w| writeln!(w, "{text}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staged_file_appears_only_on_commit() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out.txt");
        let staged = stage(&target, |w| w.write_all(b"hello\n")).unwrap();
        assert!(!target.exists());
        staged.commit().unwrap();
        assert_eq!(std::fs::read_to_string(&target).unwrap(), "hello\n");
        let failed = stage(&target, |_| Err(std::io::Error::other("boom")));
        assert!(failed.is_err());
        assert_eq!(std::fs::read_to_string(&target).unwrap(), "hello\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn digest_of_known_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc");
        std::fs::write(&p, b"abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(Manifest::path_for(Path::new("a/w.txt")), Path::new("a/w.txt.manifest.json"));
    }
}

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Output files of one run, by file name, plus its exit code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub exit_code: u8,
    pub files: BTreeMap<String, String>,
}

impl Bundle {
    fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update([self.exit_code]);
        for (name, body) in &self.files {
            h.update((name.len() as u64).to_le_bytes());
            h.update(name.as_bytes());
            h.update((body.len() as u64).to_le_bytes());
            h.update(body.as_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    digest: String,
    bundle: Bundle,
}

pub enum Lookup {
    Hit(Bundle),
    Miss,
    /// A damaged entry was removed.
    Evicted,
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// `HAMSYS_CACHE_DIR`, else the user cache directory, else `.hamsys-cache`.
    pub fn from_env() -> Self {
        let dir = std::env::var_os("HAMSYS_CACHE_DIR")
            .map(PathBuf::from)
            .or_else(|| std::env::var_os("XDG_CACHE_HOME").map(|d| PathBuf::from(d).join("hamsys")))
            .or_else(|| std::env::var_os("HOME").map(|d| PathBuf::from(d).join(".cache").join("hamsys")))
            .unwrap_or_else(|| PathBuf::from(".hamsys-cache"));
        Self { dir }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn lookup(&self, key: &str) -> Lookup {
        let path = self.path(key);
        let Ok(text) = fs::read_to_string(&path) else {
            return Lookup::Miss;
        };
        match serde_json::from_str::<Entry>(&text) {
            Ok(e) if e.key == key && e.digest == e.bundle.digest() => Lookup::Hit(e.bundle),
            _ => {
                let _ = fs::remove_file(&path);
                Lookup::Evicted
            }
        }
    }

    pub fn store(&self, key: &str, bundle: &Bundle) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let entry = Entry { key: key.to_string(), digest: bundle.digest(), bundle: bundle.clone() };
        let text = serde_json::to_string(&entry).map_err(std::io::Error::other)?;
        atomic_write(&self.path(key), text.as_bytes())
    }
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes through a temporary file in the target directory and renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(
        ".{name}.{}.{}.tmp",
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

//! JSON-backed registry file, held under an exclusive lock while in use.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use authenc::group::RegistryEntry;
use authenc::{CaMode, CaRegistry, GroupParams, PublicKey};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::config::CaModeArg;
use crate::CliError;

#[derive(Serialize, Deserialize)]
struct StoredEntry {
    seq: u64,
    identity: String,
    y: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredRegistry {
    ca_mode: CaModeArg,
    params_fingerprint: String,
    entries: Vec<StoredEntry>,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub struct LockedRegistry {
    path: PathBuf,
    file: File,
    /// Set while a file created by [`LockedRegistry::open`] is still empty.
    fresh: bool,
    pub registry: CaRegistry,
}

impl LockedRegistry {
    /// Opens or creates the registry at `path`. A new file takes
    /// `requested` (default mode when `None`); an existing one must agree.
    pub fn open(
        path: &Path,
        params: &GroupParams,
        requested: Option<CaMode>,
    ) -> Result<Self, CliError> {
        let err = |e: std::io::Error| CliError::Usage(format!("{}: {e}", path.display()));
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(path)
            .map_err(err)?;
        file.lock().map_err(err)?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(err)?;

        let fresh = text.trim().is_empty();
        let registry = if fresh {
            CaRegistry::new(requested.unwrap_or_default())
        } else {
            parse(path, &text, params, requested)?
        };
        Ok(Self {
            path: path.to_owned(),
            file,
            fresh,
            registry,
        })
    }

    pub fn save(&mut self, params: &GroupParams) -> Result<(), CliError> {
        let stored = StoredRegistry {
            ca_mode: self.registry.mode().into(),
            params_fingerprint: hex(&params.fingerprint()),
            entries: self
                .registry
                .entries()
                .iter()
                .map(|e| StoredEntry {
                    seq: e.seq,
                    identity: e.identity.clone(),
                    y: e.key.y.to_str_radix(16),
                })
                .collect(),
        };
        let mut json = serde_json::to_string_pretty(&stored).expect("registry serializes");
        json.push('\n');
        let err = |e: std::io::Error| CliError::Usage(format!("{}: {e}", self.path.display()));
        self.file.set_len(0).map_err(err)?;
        self.file.seek(SeekFrom::Start(0)).map_err(err)?;
        self.file.write_all(json.as_bytes()).map_err(err)?;
        self.file.sync_all().map_err(err)?;
        self.fresh = false;
        Ok(())
    }
}

impl Drop for LockedRegistry {
    // a failed first registration should not leave an empty file behind
    fn drop(&mut self) {
        if self.fresh {
            let _ = std::fs::remove_file(&self.path);
        }
    }
}

fn parse(
    path: &Path,
    text: &str,
    params: &GroupParams,
    requested: Option<CaMode>,
) -> Result<CaRegistry, CliError> {
    let bad = |msg: String| CliError::Usage(format!("{}: {msg}", path.display()));
    let stored: StoredRegistry = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    if stored.params_fingerprint != hex(&params.fingerprint()) {
        return Err(bad("registry belongs to different group parameters".into()));
    }
    let mode = CaMode::from(stored.ca_mode);
    if requested.is_some_and(|r| r != mode) {
        return Err(bad(format!(
            "registry was created in {:?} mode",
            stored.ca_mode
        )));
    }
    let entries = stored
        .entries
        .into_iter()
        .map(|e| {
            let y = BigUint::parse_bytes(e.y.as_bytes(), 16)
                .ok_or_else(|| bad(format!("bad key for {:?}", e.identity)))?;
            Ok(RegistryEntry {
                seq: e.seq,
                identity: e.identity,
                key: PublicKey::new(y),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    CaRegistry::from_entries(mode, entries).map_err(|e| bad(e.to_string()))
}

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use authenc::codec::{armor, dearmor, Record};
use authenc::{GroupParams, KeyPair, PublicKey};

use crate::CliError;

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Reads a record, armored or raw TLV.
pub fn read_record<T: Record>(path: &Path) -> Result<T, CliError> {
    let bytes = read(path)?;
    let bad = |e: authenc::codec::CodecError| CliError::Usage(format!("{}: {e}", path.display()));
    if bytes.starts_with(b"-----BEGIN") {
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| CliError::Usage(format!("{}: armor is not UTF-8", path.display())))?;
        T::decode(&dearmor(T::KIND, text).map_err(bad)?).map_err(bad)
    } else {
        T::decode(&bytes).map_err(bad)
    }
}

pub fn read_raw(path: &Path) -> Result<Vec<u8>, CliError> {
    read(path)
}

pub fn read_params(path: &Path) -> Result<GroupParams, CliError> {
    read_record(path)
}

pub fn read_public(path: &Path, params: &GroupParams) -> Result<PublicKey, CliError> {
    let key: PublicKey = read_record(path)?;
    if !params.is_member(&key.y) {
        return Err(CliError::Usage(format!(
            "{}: key is not in the group of these parameters",
            path.display()
        )));
    }
    Ok(key)
}

pub fn read_secret(path: &Path, params: &GroupParams) -> Result<KeyPair, CliError> {
    let key: KeyPair = read_record(path)?;
    if !key.is_consistent(params) {
        return Err(CliError::Usage(format!(
            "{}: secret key does not match these parameters",
            path.display()
        )));
    }
    Ok(key)
}

pub fn encode_record<T: Record>(obj: &T, binary: bool) -> Vec<u8> {
    let raw = obj.encode();
    if binary {
        raw
    } else {
        armor(T::KIND, &raw).into_bytes()
    }
}

/// Writes to `path`, or stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => {
            fs::write(p, bytes).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Usage(format!("stdout: {e}")))
        }
    }
}

/// Writes secret material with owner-only permissions. Never goes to stdout.
pub fn write_secret(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut opts = OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    let err = |e: std::io::Error| CliError::Usage(format!("{}: {e}", path.display()));
    let mut file = opts.open(path).map_err(err)?;
    file.write_all(bytes).map_err(err)
}

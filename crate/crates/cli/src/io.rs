//! Artifact writing: atomic file replacement plus a JSON config sidecar for
//! every emitted file, so any artifact can be reproduced from its sidecar.

use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Writes `content` atomically (temp file in the same directory, then
/// rename).
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.to_path_buf();
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".to_string());
    tmp.set_file_name(format!(".{file_name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Writes an artifact plus its `<name>.config.json` sidecar holding the
/// resolved configuration that produced it.
pub fn write_with_sidecar<C: Serialize>(path: &Path, content: &str, config: &C) -> std::io::Result<()> {
    write_atomic(path, content)?;
    let sidecar = sidecar_path(path);
    let body = serde_json::to_string_pretty(config).expect("config serializes");
    write_atomic(&sidecar, &format!("{body}\n"))
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut sidecar = path.as_os_str().to_os_string();
    sidecar.push(".config.json");
    PathBuf::from(sidecar)
}

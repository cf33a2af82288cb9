//! The bundled model suite shipped under `models/`.

use std::path::{Path, PathBuf};

use crate::kconfig::{load_linked, Diagnostic, LinkedModel};

pub const BUNDLED: &[&str] = &["arch", "media", "choice", "nonbool", "tristate", "gen100", "gen300"];

pub fn bundled_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models")
}

pub fn load_bundled(name: &str) -> Result<LinkedModel, Diagnostic> {
    let root = bundled_root().join(name);
    load_linked(&root, &root.join("Kconfig"))
}

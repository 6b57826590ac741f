//! Shared helpers for the integration suites.
#![allow(dead_code)] // each suite uses a different subset

use gogviz::compiler::{compile, CompileOutput, FsResolver};
use std::path::{Path, PathBuf};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn gallery_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/gallery")
}

pub fn conformance_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/conformance")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Compiles a spec file with dataset paths resolved against the fixtures
/// directory.
pub fn compile_file(path: &Path) -> CompileOutput {
    let spec = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("read {}: {e}", path.display()));
    compile(&spec, &FsResolver { base: fixtures_dir() })
}

pub fn compile_str(spec: &str) -> CompileOutput {
    compile(spec, &FsResolver { base: fixtures_dir() })
}

/// All spec files that must compile cleanly: the gallery plus the
/// conformance extras.
pub fn all_spec_files() -> Vec<PathBuf> {
    let mut files = Vec::new();
    for dir in [gallery_dir(), conformance_dir()] {
        let mut batch: Vec<PathBuf> = std::fs::read_dir(&dir)
            .unwrap_or_else(|e| panic!("read_dir {}: {e}", dir.display()))
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        batch.sort();
        files.extend(batch);
    }
    files
}

pub fn errors_of(out: &CompileOutput) -> Vec<String> {
    out.diagnostics
        .iter()
        .filter(|d| d.is_error())
        .map(|d| d.to_string())
        .collect()
}

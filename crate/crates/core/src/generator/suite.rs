use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::generator::{gen_infeasible, gen_weak, GenError, GenParams};
use crate::instance::{CertificateBundle, DualInstance, Instance};
use crate::io::native::write_native;
use crate::io::sdpa::{export_sdpa, import_sdpa};
use crate::io::{NativeDocument, SIDECAR_EXTENSION};
use crate::verifier::{verify_dual_infeasible, verify_weakly_infeasible, VerifyError};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("i/o error at {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("instance {name}: {source}")]
    Generate { name: String, source: GenError },
    #[error("instance {name}: {source}")]
    Verify { name: String, source: VerifyError },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Category {
    pub weak: bool,
    pub messy: bool,
    pub m: usize,
}

impl Category {
    pub fn all() -> Vec<Category> {
        let mut out = Vec::with_capacity(8);
        for weak in [false, true] {
            for messy in [false, true] {
                for m in [10, 20] {
                    out.push(Category { weak, messy, m });
                }
            }
        }
        out
    }

    pub fn name(&self) -> String {
        format!(
            "{}-{}-m{}",
            if self.messy { "messy" } else { "clean" },
            if self.weak { "weak" } else { "infeasible" },
            self.m
        )
    }

    pub fn params(&self, seed: u64) -> GenParams {
        let mut p = GenParams::preset(if self.m == 10 { "m10" } else { "m20" }).expect("known preset").with_seed(seed);
        p.mess = self.messy;
        p
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub category: String,
    pub seed: u64,
    pub native: String,
    pub sdpa: String,
    pub certificate: String,
    pub verified: bool,
    pub sdpa_reimport_verified: bool,
    pub sdpa_lossy: bool,
    pub max_y_denominator: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub master_seed: u64,
    pub per_category: usize,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn all_verified(&self) -> bool {
        self.entries.iter().all(|e| e.verified && e.sdpa_reimport_verified)
    }
}

// Per-instance seeds are a fixed function of the master seed, category and index.
pub fn instance_seed(master: u64, category: usize, index: usize) -> u64 {
    master.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((category as u64) << 40) ^ index as u64
}

fn check(cat: Category, inst: &DualInstance, bundle: &CertificateBundle) -> Result<bool, VerifyError> {
    if cat.weak {
        verify_weakly_infeasible(inst, bundle)
    } else {
        match &bundle.dual_infeasible {
            Some(w) => Ok(verify_dual_infeasible(inst, w)?.is_proven()),
            None => Ok(false),
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), SuiteError> {
    fs::write(path, text).map_err(|source| SuiteError::Io { path: path.to_path_buf(), source })
}

fn produce(
    outdir: &Path,
    cat: Category,
    cat_index: usize,
    index: usize,
    master: u64,
) -> Result<ManifestEntry, SuiteError> {
    let seed = instance_seed(master, cat_index, index);
    let name = format!("{}-{index:03}", cat.name());
    let params = cat.params(seed);
    let generated = if cat.weak { gen_weak(&params) } else { gen_infeasible(&params) };
    let (inst, bundle) = generated.map_err(|source| SuiteError::Generate { name: name.clone(), source })?;
    let verr = |source| SuiteError::Verify { name: name.clone(), source };
    let verified = check(cat, &inst, &bundle).map_err(verr)?;
    let sdpa = export_sdpa(&inst);
    let reimported = import_sdpa(&sdpa.text).ok();
    let sdpa_reimport_verified = match &reimported {
        Some(back) => check(cat, back, &bundle).map_err(verr)?,
        None => false,
    };
    let files = [
        (format!("{name}.frc"), write_native(&NativeDocument::new(Instance::Dual(inst), bundle.clone()))),
        (format!("{name}.dat-s"), sdpa.text),
        (
            format!("{name}.{SIDECAR_EXTENSION}"),
            write_native(&NativeDocument { instance: None, bundle: bundle.clone() }),
        ),
    ];
    for (file, text) in &files {
        write(&outdir.join(file), text)?;
    }
    let max_y_denominator = bundle
        .dual_not_strong
        .as_ref()
        .map(|w| crate::linalg::max_denominator(w.ys.iter().flat_map(|y| y.upper())).to_string());
    let [native, sdpa_file, certificate] = files.map(|(f, _)| f);
    Ok(ManifestEntry {
        name,
        category: cat.name(),
        seed,
        native,
        sdpa: sdpa_file,
        certificate,
        verified,
        sdpa_reimport_verified,
        sdpa_lossy: sdpa.lossy,
        max_y_denominator,
    })
}

pub fn run_suite(outdir: &Path, per_category: usize, master_seed: u64) -> Result<Manifest, SuiteError> {
    fs::create_dir_all(outdir).map_err(|source| SuiteError::Io { path: outdir.to_path_buf(), source })?;
    let jobs: Vec<(usize, Category, usize)> = Category::all()
        .into_iter()
        .enumerate()
        .flat_map(|(ci, cat)| (0..per_category).map(move |i| (ci, cat, i)))
        .collect();
    let entries =
        jobs.par_iter().map(|&(ci, cat, i)| produce(outdir, cat, ci, i, master_seed)).collect::<Result<Vec<_>, _>>()?;
    let manifest = Manifest { master_seed, per_category, entries };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&outdir.join("manifest.json"), &json)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("frcert-suite-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn one_per_category() {
        let dir = scratch("one");
        let m = run_suite(&dir, 1, 7).unwrap();
        assert_eq!(m.entries.len(), 8);
        assert!(m.all_verified());
        assert!(dir.join("manifest.json").exists());
        assert!(dir.join(&m.entries[0].sdpa).exists());
        let again = run_suite(&dir, 1, 7).unwrap();
        assert_eq!(m, again);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn empty_suite() {
        let dir = scratch("empty");
        let m = run_suite(&dir, 0, 1).unwrap();
        assert!(m.entries.is_empty());
        fs::remove_dir_all(&dir).unwrap();
    }
}

//! On-disk suite layout:
//!
//! ```text
//! <dir>/manifest.json
//! <dir>/cases/<case_id>/base.dxf
//! <dir>/cases/<case_id>/v00.dxf ...
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BaseCase, CheckKind, InjectionSite, Suite, SuiteCase, Transform, Variant};
use crate::report::Status;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed manifest: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestVariant {
    pub transform: Transform,
    pub dxf: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCase {
    pub case_id: String,
    pub kind: CheckKind,
    pub compliant: bool,
    pub seed: u64,
    pub ground_truth: BTreeMap<String, Status>,
    pub site: InjectionSite,
    pub dxf: String,
    pub variants: Vec<ManifestVariant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub cases: Vec<ManifestCase>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ManifestError + '_ {
    move |source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(root: &Path, rel: &str, bytes: &[u8]) -> Result<(), ManifestError> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(&path, bytes).map_err(io_err(&path))
}

/// Write every DXF plus the manifest; returns the manifest path.
pub fn write_suite(suite: &Suite, dir: &Path) -> Result<PathBuf, ManifestError> {
    let mut cases = Vec::with_capacity(suite.cases.len());
    for sc in &suite.cases {
        let b = &sc.base;
        let base_rel = format!("cases/{}/base.dxf", b.case_id);
        write(dir, &base_rel, &b.dxf)?;
        let mut variants = Vec::with_capacity(sc.variants.len());
        for (i, v) in sc.variants.iter().enumerate() {
            let rel = format!("cases/{}/v{i:02}.dxf", b.case_id);
            write(dir, &rel, &v.dxf)?;
            variants.push(ManifestVariant {
                transform: v.transform,
                dxf: rel,
            });
        }
        cases.push(ManifestCase {
            case_id: b.case_id.clone(),
            kind: b.kind,
            compliant: b.compliant,
            seed: b.seed,
            ground_truth: b.ground_truth.clone(),
            site: b.site.clone(),
            dxf: base_rel,
            variants,
        });
    }
    let manifest = Manifest {
        seed: suite.seed,
        cases,
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    write(dir, MANIFEST_FILE, &json)?;
    Ok(dir.join(MANIFEST_FILE))
}

/// Load a suite; DXF paths resolve relative to the manifest's directory.
pub fn load_suite(manifest_path: &Path) -> Result<Suite, ManifestError> {
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    let text = fs::read(manifest_path).map_err(io_err(manifest_path))?;
    let manifest: Manifest = serde_json::from_slice(&text)?;
    let read = |rel: &str| {
        let path = root.join(rel);
        fs::read(&path).map_err(io_err(&path))
    };
    let mut cases = Vec::with_capacity(manifest.cases.len());
    for mc in manifest.cases {
        let variants = mc
            .variants
            .iter()
            .map(|v| {
                Ok(Variant {
                    parent: mc.case_id.clone(),
                    transform: v.transform,
                    dxf: read(&v.dxf)?,
                })
            })
            .collect::<Result<Vec<_>, ManifestError>>()?;
        cases.push(SuiteCase {
            base: BaseCase {
                dxf: read(&mc.dxf)?,
                case_id: mc.case_id,
                kind: mc.kind,
                compliant: mc.compliant,
                seed: mc.seed,
                ground_truth: mc.ground_truth,
                site: mc.site,
            },
            variants,
        });
    }
    Ok(Suite {
        seed: manifest.seed,
        cases,
    })
}

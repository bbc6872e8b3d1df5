#![allow(dead_code)]

use std::path::PathBuf;

use v2g_core::bench::{generate_case, CheckKind};
use v2g_core::pipeline::{audit_bytes, PipelineConfig};
use v2g_core::report::to_structured;

pub const GOLDEN_SEED: u64 = 7;

/// (golden file name, kind, compliant)
pub const GOLDEN_FIXTURES: [(&str, CheckKind, bool); 3] = [
    ("compliant.json", CheckKind::MP, true),
    ("mp.json", CheckKind::MP, false),
    ("mg.json", CheckKind::MG, false),
];

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Structured report for a golden fixture, produced fresh.
pub fn golden_report(name: &str, kind: CheckKind, compliant: bool) -> Vec<u8> {
    let case = generate_case(kind, compliant, GOLDEN_SEED);
    let schematic = name.replace(".json", ".dxf");
    let audit = audit_bytes(&case.dxf, &schematic, &PipelineConfig::default(), None).expect("fixture audits");
    to_structured(&audit.report)
}

/// Compare against the frozen file, rewriting it when UPDATE_GOLDEN is set.
pub fn check_golden(name: &str, fresh: &[u8]) -> Result<(), String> {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
        std::fs::write(&path, fresh).map_err(|e| e.to_string())?;
    }
    let frozen = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if frozen == fresh {
        Ok(())
    } else {
        Err(format!("{name} differs from the frozen report (rerun with UPDATE_GOLDEN=1 if intended)"))
    }
}

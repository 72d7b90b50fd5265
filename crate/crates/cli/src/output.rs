//! Report assembly and atomic artifact writes.

use crate::commands::{Outcome, Row};
use crate::config::{Command, Resolved};
use crate::CliError;
use holelab_core::continuation::{Problem, Thresholds};
use holelab_core::mesh3::MeshStats;
use holelab_core::Execution;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Serialize)]
struct Report<'a> {
    tool: &'static str,
    version: &'static str,
    command: Command,
    provenance: Provenance,
    thresholds: &'a Thresholds,
    degree: usize,
    result: &'a serde_json::Value,
}

#[derive(Serialize)]
struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    run_id: Option<String>,
    config: serde_json::Value,
    solver: &'static str,
    dimension: usize,
    execution: Execution,
    #[serde(skip_serializing_if = "Option::is_none")]
    meshes: Option<MeshPair>,
}

#[derive(Serialize)]
struct MeshPair {
    inner: MeshStats,
    outer: MeshStats,
}

/// The JSON report. The config echo keeps ε-coefficients as the decimal
/// strings they were given as.
pub fn report(
    resolved: &Resolved,
    outcome: &Outcome,
    config: serde_json::Value,
    run_id: Option<String>,
) -> Result<String, CliError> {
    let meshes = match &resolved.problem {
        Problem::Bem { geometry, .. } => Some(MeshPair {
            inner: geometry.inner.stats(),
            outer: geometry.outer.stats(),
        }),
        Problem::Spectral { .. } => None,
    };
    let r = Report {
        tool: "holelab",
        version: env!("CARGO_PKG_VERSION"),
        command: resolved.command,
        provenance: Provenance {
            run_id,
            config,
            solver: resolved.problem.solver_id(),
            dimension: resolved.problem.dimension().get(),
            execution: resolved.exec,
            meshes,
        },
        thresholds: &resolved.thresholds,
        degree: resolved.degree,
        result: &outcome.result,
    };
    let mut text = serde_json::to_string_pretty(&r).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn csv_text(rows: &[Row]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::Output(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let fail = |e: &dyn std::fmt::Display| CliError::Output(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| fail(&e))?;
    tmp.as_file().sync_all().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

pub fn write_artifacts(
    dir: &Path,
    rows: &[Row],
    report: &str,
) -> Result<(PathBuf, PathBuf), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let csv = dir.join("sweep.csv");
    let json = dir.join("report.json");
    write_atomic(&csv, &csv_text(rows)?)?;
    write_atomic(&json, report)?;
    Ok((csv, json))
}

#[cfg(test)]
mod tests {
    use super::*;
    use holelab_core::Frame;

    #[test]
    fn csv_layout() {
        let rows = [
            Row {
                eps: 0.05,
                frame: Frame::Macroscopic,
                target_index: 0,
                value: 0.125,
                cond_estimate: 3.5,
            },
            Row {
                eps: -0.1,
                frame: Frame::Microscopic,
                target_index: 1,
                value: -1e-20,
                cond_estimate: 1e7,
            },
        ];
        assert_eq!(
            csv_text(&rows).unwrap(),
            "eps,frame,target_index,value,cond_estimate\n0.05,macroscopic,0,0.125,3.5\n-0.1,microscopic,1,-1e-20,10000000.0\n"
        );
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}

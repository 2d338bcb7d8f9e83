//! Golden-file regression: a fixed registry of experiment configurations is
//! re-run and compared cell-by-cell against committed CSV files, each with
//! its own numeric tolerance. `--update` rewrites the golden files instead.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use crate::commands::{self, QcorrCurveArgs, QkdArgs};
use crate::config::{ParamSource, DEFAULT_SEED};
use crate::table::{parse_csv, ResultTable};

/// One registered regression table.
pub struct RegressEntry {
    /// Golden file stem (`<name>.csv`).
    pub name: &'static str,
    /// Relative tolerance of the cell comparison.
    pub tolerance: f64,
    /// Rebuilds the table from its registered configuration.
    pub build: fn() -> Result<ResultTable>,
}

/// The registered tables: one per data figure the toolkit reproduces, all
/// pure functions of the baked-in configuration and the default seed.
pub fn registry() -> Vec<RegressEntry> {
    vec![
        RegressEntry {
            name: "qkd_efficiency_vs_ln",
            tolerance: 1e-9,
            build: || {
                commands::qkd(
                    &QkdArgs {
                        lambda: Some(2.0),
                        cp: Some(0.6),
                        x0a: Some(1.0),
                        attack: Some("ind".into()),
                        sweep_points: Some(9),
                        cx_min: Some(1.3),
                        cx_max: Some(1.54),
                        ..Default::default()
                    },
                    &mut ParamSource::default(),
                )
            },
        },
        RegressEntry {
            name: "broadcast_ptilde_plateau",
            tolerance: 1e-12,
            build: || {
                commands::broadcast_ptilde(
                    &commands::BroadcastPtildeArgs {
                        a: Some(1.5),
                        n: Some(2.0),
                        sigma: Some(0.0),
                        grid: Some(12),
                        x0_max: Some(20.0),
                        delta_max: Some(6.0),
                    },
                    &mut ParamSource::default(),
                )
            },
        },
        RegressEntry {
            name: "broadcast_useful_region",
            tolerance: 1e-5,
            build: || {
                commands::broadcast_region(
                    &commands::BroadcastRegionArgs {
                        epsilon: Some(1e-3),
                        sigma: Some(0.0),
                        grid: Some(4),
                        x0_max: Some(4.0),
                        delta_max: Some(4.0),
                    },
                    &mut ParamSource::default(),
                )
            },
        },
        RegressEntry {
            // Exact comparison: the protocol run is a deterministic function
            // of the seed, so any drift at all is a regression.
            name: "broadcast_honest_run",
            tolerance: 0.0,
            build: || {
                commands::broadcast_run(
                    &commands::BroadcastRunArgs {
                        a: Some(1.5),
                        n: Some(1.0),
                        x0: Some(3.0),
                        sigma: Some(0.1),
                        m_states: Some(2000),
                        bit: Some(0),
                        strategy: Some("honest".into()),
                        ..Default::default()
                    },
                    &mut ParamSource::default(),
                    DEFAULT_SEED,
                )
            },
        },
        RegressEntry {
            name: "qcorr_tms_curve",
            tolerance: 1e-9,
            build: || {
                commands::qcorr_curve(
                    &QcorrCurveArgs {
                        family: Some("tms".into()),
                        points: Some(10),
                        r_max: Some(1.0),
                        ..Default::default()
                    },
                    &mut ParamSource::default(),
                )
            },
        },
        RegressEntry {
            name: "qcorr_bell_curve",
            tolerance: 1e-6,
            build: || {
                commands::qcorr_curve(
                    &QcorrCurveArgs {
                        family: Some("bell".into()),
                        points: Some(3),
                        ..Default::default()
                    },
                    &mut ParamSource::default(),
                )
            },
        },
        RegressEntry {
            name: "qcorr_photon_subtracted_curve",
            tolerance: 1e-6,
            build: || {
                commands::qcorr_curve(
                    &QcorrCurveArgs {
                        family: Some("psub".into()),
                        points: Some(5),
                        r_max: Some(1.0),
                        transmittivity: Some(0.8),
                        ..Default::default()
                    },
                    &mut ParamSource::default(),
                )
            },
        },
        RegressEntry {
            name: "qcorr_mixture_curve",
            tolerance: 1e-9,
            build: || {
                commands::qcorr_curve(
                    &QcorrCurveArgs {
                        family: Some("mixture".into()),
                        points: Some(5),
                        r: Some(0.8),
                        ..Default::default()
                    },
                    &mut ParamSource::default(),
                )
            },
        },
        RegressEntry {
            name: "qcorr_scatter",
            tolerance: 1e-9,
            build: || {
                commands::qcorr_scatter(
                    &commands::QcorrScatterArgs {
                        count: Some(60),
                        lambda_max: Some(3.0),
                    },
                    &mut ParamSource::default(),
                    DEFAULT_SEED,
                )
            },
        },
        RegressEntry {
            name: "atomlight_epr",
            tolerance: 1e-9,
            build: || {
                commands::atomlight_epr(
                    &commands::AtomEprArgs { kappa: Some(1.0) },
                    &mut ParamSource::default(),
                    DEFAULT_SEED,
                )
            },
        },
        RegressEntry {
            name: "atomlight_eraser_sweep",
            tolerance: 1e-9,
            build: || {
                commands::atomlight_eraser(
                    &commands::AtomEraserArgs {
                        kappa1: Some(1.0),
                        samples: Some(2),
                        points: Some(7),
                    },
                    &mut ParamSource::default(),
                    DEFAULT_SEED,
                )
            },
        },
        RegressEntry {
            name: "atomlight_ghz_pairwise",
            tolerance: 1e-9,
            build: || {
                commands::atomlight_ghz(
                    &commands::AtomGhzArgs {
                        samples: Some(3),
                        kappa: Some(1.0),
                        mode: Some("pairwise".into()),
                    },
                    &mut ParamSource::default(),
                    DEFAULT_SEED,
                )
            },
        },
        RegressEntry {
            name: "atomlight_cluster_path",
            tolerance: 1e-9,
            build: || {
                commands::atomlight_cluster(
                    &commands::AtomClusterArgs {
                        samples: Some(4),
                        kappa: Some(1.0),
                    },
                    &mut ParamSource::default(),
                    DEFAULT_SEED,
                )
            },
        },
    ]
}

/// Report of one regression comparison.
pub struct RegressReport {
    /// Human-readable pass/fail lines.
    pub lines: Vec<String>,
    /// Number of failing tables.
    pub failures: usize,
}

/// Re-runs the registered configurations and compares them against
/// `golden_dir`; with `update` the golden files are rewritten instead.
/// `only` restricts the run to a single named table.
pub fn run(golden_dir: &Path, update: bool, only: Option<&str>) -> Result<RegressReport> {
    let mut lines = Vec::new();
    let mut failures = 0usize;
    let entries: Vec<RegressEntry> = registry()
        .into_iter()
        .filter(|e| only.is_none_or(|name| e.name == name))
        .collect();
    if entries.is_empty() {
        anyhow::bail!("no registered table matches the requested name");
    }
    if update {
        std::fs::create_dir_all(golden_dir)
            .with_context(|| format!("cannot create {}", golden_dir.display()))?;
    }
    for entry in entries {
        let table =
            (entry.build)().with_context(|| format!("rebuilding golden table '{}'", entry.name))?;
        let path = golden_dir.join(format!("{}.csv", entry.name));
        if update {
            std::fs::write(&path, table.to_csv())
                .with_context(|| format!("cannot write {}", path.display()))?;
            lines.push(format!("UPDATED {}", entry.name));
            continue;
        }
        let golden_text = std::fs::read_to_string(&path)
            .with_context(|| format!("missing golden file {}", path.display()))?;
        let (golden_cols, golden_rows) = parse_csv(&golden_text)?;
        let mismatches = compare(&table, &golden_cols, &golden_rows, entry.tolerance);
        if mismatches.is_empty() {
            lines.push(format!("PASS {}", entry.name));
        } else {
            failures += 1;
            let mut line = format!("FAIL {}", entry.name);
            for m in mismatches.iter().take(5) {
                write!(line, "\n  {m}").unwrap();
            }
            if mismatches.len() > 5 {
                write!(line, "\n  … and {} more cells", mismatches.len() - 5).unwrap();
            }
            lines.push(line);
        }
    }
    Ok(RegressReport { lines, failures })
}

/// Compares a rebuilt table against golden columns/rows; returns one message
/// per mismatching cell (or shape defect). Cells agree when both are NaN
/// (infeasible) or |got − want| ≤ tol·max(1, |want|); `tol = 0` demands
/// exact equality.
pub fn compare(
    table: &ResultTable,
    golden_cols: &[String],
    golden_rows: &[Vec<f64>],
    tol: f64,
) -> Vec<String> {
    let mut out = Vec::new();
    if table.columns != golden_cols {
        out.push(format!(
            "column mismatch: got {:?}, want {:?}",
            table.columns, golden_cols
        ));
        return out;
    }
    if table.rows.len() != golden_rows.len() {
        out.push(format!(
            "row-count mismatch: got {}, want {}",
            table.rows.len(),
            golden_rows.len()
        ));
        return out;
    }
    for (i, (got_row, want_row)) in table.rows.iter().zip(golden_rows).enumerate() {
        for (j, (&got, &want)) in got_row.iter().zip(want_row).enumerate() {
            let equal = if got.is_nan() || want.is_nan() {
                got.is_nan() && want.is_nan()
            } else if tol == 0.0 {
                got == want
            } else {
                (got - want).abs() <= tol * want.abs().max(1.0)
            };
            if !equal {
                out.push(format!(
                    "row {i}, column '{}': got {got:e}, want {want:e} (tol {tol:e})",
                    table.columns[j]
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn compare_flags_drift_and_accepts_nan_pairs() {
        let mut t = ResultTable::new(&["a"], json!({}));
        t.push_row(vec![1.0]).unwrap();
        t.push_row(vec![f64::NAN]).unwrap();
        let cols = vec!["a".to_string()];
        let rows = vec![vec![1.0 + 1e-12], vec![f64::NAN]];
        assert!(compare(&t, &cols, &rows, 1e-9).is_empty());
        assert_eq!(compare(&t, &cols, &rows, 0.0).len(), 1);
        let bad = vec![vec![2.0], vec![f64::NAN]];
        assert_eq!(compare(&t, &cols, &bad, 1e-9).len(), 1);
    }

    #[test]
    fn registry_names_are_unique() {
        let mut names: Vec<&str> = registry().iter().map(|e| e.name).collect();
        names.sort_unstable();
        let before = names.len();
        names.dedup();
        assert_eq!(names.len(), before);
    }
}

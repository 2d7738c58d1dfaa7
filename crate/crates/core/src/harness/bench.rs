//! Runs algorithms over a directory of instance files and tabulates the results.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::files::{FileError, InstanceFile};
use super::{run_algo, Algo};
use crate::baselines::ratio_f64;
use crate::model::Epsilon;
use crate::rational::{format_rational, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub algo: Algo,
    pub cost: Option<Rational>,
    pub optimum: Option<Rational>,
    pub wall_ms: f64,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn ratio(&self) -> Option<f64> {
        ratio_f64(self.cost.as_ref()?, self.optimum.as_ref()?)
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    instance: &'a str,
    algo: String,
    cost: String,
    optimum: String,
    ratio: String,
    wall_ms: String,
    error: &'a str,
}

/// Instance files (`*.json`) in `dir`, sorted by name.
pub fn instance_paths(dir: &Path) -> Result<Vec<PathBuf>, FileError> {
    let entries = std::fs::read_dir(dir).map_err(|e| FileError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths)
}

/// One row per (instance, algorithm). The optimum comes from the exhaustive
/// search when it fits in `budget`. Rows are computed in parallel and
/// returned in (instance, algorithm) order.
pub fn run_bench(paths: &[PathBuf], algos: &[Algo], eps: Epsilon, budget: u64) -> Vec<BenchRow> {
    let per_instance: Vec<Vec<BenchRow>> = paths
        .par_iter()
        .map(|path| {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let instance = InstanceFile::read(path).and_then(|f| f.to_instance());
            let instance = match instance {
                Ok(i) => i,
                Err(e) => {
                    return algos
                        .iter()
                        .map(|&algo| BenchRow {
                            instance: name.clone(),
                            algo,
                            cost: None,
                            optimum: None,
                            wall_ms: 0.0,
                            error: Some(e.to_string()),
                        })
                        .collect();
                }
            };
            let optimum = run_algo(&instance, Algo::Brute, eps, budget).ok().map(|r| r.cost);
            algos
                .iter()
                .map(|&algo| {
                    let start = Instant::now();
                    let result = run_algo(&instance, algo, eps, budget);
                    let wall_ms = start.elapsed().as_secs_f64() * 1000.0;
                    let (cost, error) = match result {
                        Ok(r) => (Some(r.cost), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    BenchRow {
                        instance: name.clone(),
                        algo,
                        cost,
                        optimum: optimum.clone(),
                        wall_ms,
                        error,
                    }
                })
                .collect()
        })
        .collect();
    per_instance.into_iter().flatten().collect()
}

pub fn write_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(CsvRow {
            instance: &r.instance,
            algo: r.algo.to_string(),
            cost: r.cost.as_ref().map(format_rational).unwrap_or_default(),
            optimum: r.optimum.as_ref().map(format_rational).unwrap_or_default(),
            ratio: r.ratio().map(|x| format!("{x:.6}")).unwrap_or_default(),
            wall_ms: format!("{:.3}", r.wall_ms),
            error: r.error.as_deref().unwrap_or(""),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub rows: usize,
    pub failed: usize,
    pub compared: usize,
    pub max_ratio: Option<f64>,
    /// Rows whose cost exceeds `bound * optimum`, by exact comparison.
    pub violations: usize,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn line(&self) -> String {
        let max = self.max_ratio.map(|r| format!("{r:.6}")).unwrap_or_else(|| "-".into());
        format!(
            "{} rows={} failed={} compared={} max_ratio={} violations={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.rows,
            self.failed,
            self.compared,
            max,
            self.violations
        )
    }
}

pub fn summarize(rows: &[BenchRow], bound: Option<&Rational>) -> Summary {
    let mut s = Summary {
        rows: rows.len(),
        failed: rows.iter().filter(|r| r.error.is_some()).count(),
        compared: 0,
        max_ratio: None,
        violations: 0,
    };
    for r in rows {
        let (Some(cost), Some(opt)) = (&r.cost, &r.optimum) else {
            continue;
        };
        s.compared += 1;
        if let Some(x) = r.ratio() {
            s.max_ratio = Some(s.max_ratio.map_or(x, |m: f64| m.max(x)));
        }
        if let Some(b) = bound {
            if cost > &(b * opt) {
                s.violations += 1;
            }
        }
    }
    s
}

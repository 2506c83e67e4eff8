//! CSV tables and the JSON run manifest.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use kga_core::experiments::{ExperimentKind, ExperimentResult};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Fixed 17-significant-digit rendering, identical on every platform.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// One CSV file in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub header: &'static str,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

fn by<T>(v: &mut [T], cmp: impl Fn(&T, &T) -> Ordering) {
    v.sort_by(cmp);
}

/// The CSV tables of an experiment, rows sorted by their key columns.
pub fn tables(result: &ExperimentResult) -> Vec<Table> {
    let t = &result.tables;
    let kind = result.spec.kind;
    let mut out = Vec::new();
    match kind {
        ExperimentKind::PropagationOfChaos => {
            let mut w1 = t.w1.clone();
            by(&mut w1, |a, b| (&a.kernel, a.n, a.rep, a.k).cmp(&(&b.kernel, b.n, b.rep, b.k)));
            out.push(Table {
                name: "w1.csv",
                header: "kind,kernel,N,rep,k,w1",
                rows: w1
                    .iter()
                    .map(|r| {
                        vec![
                            kind.name().to_string(),
                            r.kernel.clone(),
                            r.n.to_string(),
                            r.rep.to_string(),
                            r.k.to_string(),
                            fmt_f64(r.w1),
                        ]
                    })
                    .collect(),
            });
            let mut s = t.w1_summary.clone();
            by(&mut s, |a, b| (&a.kernel, a.n, a.k).cmp(&(&b.kernel, b.n, b.k)));
            out.push(Table {
                name: "w1_summary.csv",
                header: "kernel,N,k,mean_w1,q10,q90",
                rows: s
                    .iter()
                    .map(|r| {
                        vec![
                            r.kernel.clone(),
                            r.n.to_string(),
                            r.k.to_string(),
                            fmt_f64(r.mean),
                            fmt_f64(r.q10),
                            fmt_f64(r.q90),
                        ]
                    })
                    .collect(),
            });
        }
        ExperimentKind::SteadyState => {
            let key = |k: &str, a: Option<f64>| (k.to_string(), a.map(f64::to_bits));
            let mut h = t.steady.clone();
            h.sort_by(|a, b| {
                key(&a.kernel, a.alpha).cmp(&key(&b.kernel, b.alpha)).then(a.bin_left.total_cmp(&b.bin_left))
            });
            out.push(Table {
                name: "steady.csv",
                header: "kernel,alpha,bin_left,bin_right,density",
                rows: h
                    .iter()
                    .map(|r| {
                        vec![
                            r.kernel.clone(),
                            fmt_opt(r.alpha),
                            fmt_f64(r.bin_left),
                            fmt_f64(r.bin_right),
                            fmt_f64(r.density),
                        ]
                    })
                    .collect(),
            });
            let mut s = t.steady_stats.clone();
            s.sort_by_key(|r| key(&r.kernel, r.alpha));
            out.push(Table {
                name: "steady_stats.csv",
                header: "kernel,alpha,mean,std,best_value,best_error,mean_error,n_outside",
                rows: s
                    .iter()
                    .map(|r| {
                        vec![
                            r.kernel.clone(),
                            fmt_opt(r.alpha),
                            fmt_f64(r.mean),
                            fmt_f64(r.std),
                            fmt_f64(r.best_value),
                            fmt_f64(r.best_error),
                            fmt_f64(r.mean_error),
                            r.overflow.to_string(),
                        ]
                    })
                    .collect(),
            });
            out.push(Table {
                name: "sigma.csv",
                header: "k,sigma",
                rows: t.sigma_trace.iter().map(|r| vec![r.k.to_string(), fmt_f64(r.sigma)]).collect(),
            });
        }
        ExperimentKind::ScalingComparison => {
            let mut s = t.scaling.clone();
            by(&mut s, |a, b| (&a.method, &a.objective, a.n, a.rep).cmp(&(&b.method, &b.objective, b.n, b.rep)));
            out.push(Table {
                name: "scaling.csv",
                header: "method,objective,diffusion,N,rep,error_l2,accuracy_gap",
                rows: s
                    .iter()
                    .map(|r| {
                        vec![
                            r.method.clone(),
                            r.objective.clone(),
                            r.diffusion.clone(),
                            r.n.to_string(),
                            r.rep.to_string(),
                            fmt_f64(r.error_l2),
                            fmt_f64(r.accuracy_gap),
                        ]
                    })
                    .collect(),
            });
            let mut b = t.scaling_box.clone();
            by(&mut b, |x, y| {
                (&x.method, &x.objective, x.n, &x.metric).cmp(&(&y.method, &y.objective, y.n, &y.metric))
            });
            out.push(Table {
                name: "scaling_box.csv",
                header: "method,objective,diffusion,N,metric,median,q1,q3,wlow,whigh,n_outliers",
                rows: b
                    .iter()
                    .map(|r| {
                        vec![
                            r.method.clone(),
                            r.objective.clone(),
                            r.diffusion.clone(),
                            r.n.to_string(),
                            r.metric.clone(),
                            fmt_f64(r.median),
                            fmt_f64(r.q1),
                            fmt_f64(r.q3),
                            fmt_f64(r.whisker_low),
                            fmt_f64(r.whisker_high),
                            r.n_outliers.to_string(),
                        ]
                    })
                    .collect(),
            });
        }
        ExperimentKind::ConvergenceCheck => {
            let mut c = t.convergence.clone();
            c.sort_by_key(|r| r.k);
            out.push(Table {
                name: "convergence.csv",
                header: "k,mean_error,envelope_tau,envelope_half_tau",
                rows: c
                    .iter()
                    .map(|r| {
                        vec![
                            r.k.to_string(),
                            fmt_f64(r.mean_error),
                            fmt_f64(r.envelope_tau),
                            fmt_f64(r.envelope_half_tau),
                        ]
                    })
                    .collect(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub preset: Option<String>,
    pub master_seed: u64,
    pub threads: Option<usize>,
    pub started: String,
    pub finished: String,
    /// Resolved configuration as TOML; `kga run --config` on it reproduces
    /// every file below.
    pub config_toml: String,
    pub config: kga_core::experiments::ExperimentSpec,
    pub files: Vec<FileDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<kga_core::experiments::ConvergenceSummary>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every table of `result` into `out_dir`. On an I/O failure the
/// files already written by this call are removed.
pub fn emit_csv(result: &ExperimentResult, out_dir: &Path) -> Result<Vec<FileDigest>, CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let mut digests = Vec::new();
    for table in tables(result) {
        let path = out_dir.join(table.name);
        let text = table.render();
        written.push(path.clone());
        if let Err(e) = fs::write(&path, &text) {
            cleanup(&written);
            return Err(io(&path, e));
        }
        digests.push(FileDigest {
            path: PathBuf::from(table.name),
            sha256: sha256_hex(text.as_bytes()),
            bytes: text.len(),
        });
    }
    Ok(digests)
}

pub fn cleanup(paths: &[PathBuf]) {
    for p in paths {
        let _ = fs::remove_file(p);
    }
}

/// Writes `manifest.json` next to the tables.
pub fn write_manifest(manifest: &RunManifest, out_dir: &Path) -> Result<PathBuf, CliError> {
    let path = out_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Io(e.to_string()))?;
    let _ = writeln!(text);
    fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use kga_core::experiments::{presets, Tables};

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
        for x in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, -7.5e-5] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn empty_result_gives_header_only() {
        for name in presets::NAMES {
            let spec = presets::preset(name, false).unwrap();
            let r = ExperimentResult { spec, tables: Tables::default() };
            for t in tables(&r) {
                assert_eq!(t.render(), format!("{}\n", t.header));
            }
        }
    }

    #[test]
    fn emit_removes_partial_output() {
        let dir = tempfile::tempdir().unwrap();
        let spec = presets::preset("fig1a", false).unwrap();
        let r = ExperimentResult { spec, tables: Tables::default() };
        // A directory where the second table would go makes that write fail.
        fs::create_dir(dir.path().join("w1_summary.csv")).unwrap();
        assert!(matches!(emit_csv(&r, dir.path()), Err(CliError::Io(_))));
        assert!(!dir.path().join("w1.csv").exists());

        let ok = tempfile::tempdir().unwrap();
        let files = emit_csv(&r, ok.path()).unwrap();
        assert_eq!(files.len(), 2);
        let text = fs::read_to_string(ok.path().join("w1.csv")).unwrap();
        assert_eq!(text, "kind,kernel,N,rep,k,w1\n");
        assert_eq!(files[0].sha256, sha256_hex(text.as_bytes()));
    }
}

//! Robustness benchmark over a directory of hosts: one watermark, one attack
//! suite, a BER table with PSNR/SSIM per host and an average row.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::{apply_attack, AttackKind, AttackSpec};
use crate::codec::{embed, extract, sequential_assignment, WatermarkBits};
use crate::error::{Error, Result};
use crate::imaging::{read_image, RasterImage};
use crate::metrics::{ber, format_psnr, psnr, psnr_value, ssim};
use crate::optimizer::{fitness_attacks, optimize_watermarking, OptimizeConfig};
use crate::transforms::{GraphKind, GraphPolicy};

pub const REPORT_VERSION: u32 = 1;
pub const NO_ATTACK: &str = "no-attack";
const HOST_EXTENSIONS: [&str; 4] = ["png", "ppm", "pgm", "pnm"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Strength {
    Fixed { alpha: f64 },
    Optimized(OptimizeConfig),
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub attacks: Vec<AttackSpec>,
    pub strength: Strength,
    pub graph: GraphKind,
    /// Overrides the optimizer seed and seeds the objective's attacks.
    pub seed: u64,
}

impl BenchConfig {
    /// Report suite, seeded with `seed`.
    pub fn new(strength: Strength, seed: u64) -> Self {
        Self {
            attacks: AttackKind::REPORT_SUITE
                .iter()
                .map(|k| k.default_spec(seed))
                .collect(),
            strength,
            graph: GraphKind::PathUniform,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub graph: GraphKind,
    pub block_size: usize,
    pub wm_width: usize,
    pub wm_height: usize,
    pub strength: Strength,
    /// Attacks inside the optimization objective; empty for a fixed alpha.
    pub fitness_attacks: Vec<AttackSpec>,
    pub attacks: Vec<AttackSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostRow {
    pub host: String,
    #[serde(with = "psnr_value")]
    pub psnr: f64,
    pub ssim: f64,
    /// Aligned with `BenchReport::columns`.
    pub ber: Vec<f64>,
    pub mean_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostFailure {
    pub host: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub report_version: u32,
    pub provenance: Provenance,
    pub columns: Vec<String>,
    pub rows: Vec<HostRow>,
    /// Column means over successful hosts; absent when none succeeded.
    pub average: Option<HostRow>,
    pub failures: Vec<HostFailure>,
}

impl BenchReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_table(&self) -> String {
        let mut header = vec!["host".to_string(), "psnr".into(), "ssim".into()];
        header.extend(self.columns.iter().cloned());
        let mut lines = vec![header];
        for row in self.rows.iter().chain(&self.average) {
            let mut cells = vec![row.host.clone(), format_psnr(row.psnr), format!("{:.4}", row.ssim)];
            cells.extend(row.ber.iter().map(|b| format!("{b:.4}")));
            lines.push(cells);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in &lines {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (cell, &w))| {
                    if i == 0 {
                        format!("{cell:<w$}")
                    } else {
                        format!("{cell:>w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        for f in &self.failures {
            let _ = writeln!(out, "{}: failed: {}", f.host, f.error);
        }
        out
    }
}

/// Host images in `dir`, sorted by file name.
pub fn list_hosts(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut hosts = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let known = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| HOST_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if known && path.is_file() {
            hosts.push(path);
        }
    }
    hosts.sort();
    if hosts.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no host images in {}",
            dir.display()
        )));
    }
    Ok(hosts)
}

fn host_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn run_host(
    host: &RasterImage,
    name: String,
    watermark: &WatermarkBits,
    config: &BenchConfig,
    fitness: &[AttackSpec],
    policy: &GraphPolicy,
) -> Result<HostRow> {
    let (watermarked, key) = match &config.strength {
        Strength::Fixed { alpha } => embed(
            host,
            watermark,
            &sequential_assignment(watermark.len(), *alpha),
            policy,
        )?,
        Strength::Optimized(opt) => {
            let opt = OptimizeConfig { seed: config.seed, ..opt.clone() };
            let out = optimize_watermarking(host, watermark, fitness, policy, &opt, None)?;
            (out.watermarked, out.key)
        }
    };
    let mut bers = vec![ber(watermark, &extract(&watermarked, &key, policy)?)?];
    for spec in &config.attacks {
        let attacked = apply_attack(&watermarked, spec)?;
        bers.push(ber(watermark, &extract(&attacked, &key, policy)?)?);
    }
    let mean_alpha = key.entries.iter().map(|e| e.alpha).sum::<f64>() / key.entries.len() as f64;
    Ok(HostRow {
        host: name,
        psnr: psnr(host, &watermarked)?,
        ssim: ssim(host, &watermarked)?,
        ber: bers,
        mean_alpha,
    })
}

fn average_row(rows: &[HostRow]) -> Option<HostRow> {
    if rows.is_empty() {
        return None;
    }
    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&HostRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    Some(HostRow {
        host: "average".into(),
        psnr: mean(&|r| r.psnr),
        ssim: mean(&|r| r.ssim),
        ber: (0..rows[0].ber.len()).map(|c| mean(&|r| r.ber[c])).collect(),
        mean_alpha: mean(&|r| r.mean_alpha),
    })
}

/// Runs the benchmark over already loaded hosts (name, image). Hosts run in
/// parallel; `on_host` sees each finished host, one at a time.
pub fn bench_images(
    hosts: &[(String, RasterImage)],
    watermark: &WatermarkBits,
    config: &BenchConfig,
    on_host: Option<&(dyn Fn(&std::result::Result<HostRow, HostFailure>) + Sync)>,
) -> Result<BenchReport> {
    if hosts.is_empty() {
        return Err(Error::InvalidArgument("no host images".into()));
    }
    for spec in &config.attacks {
        spec.validate()?;
    }
    let policy = GraphPolicy::new(config.graph, crate::imaging::DEFAULT_BLOCK_SIZE / 2)?;
    let fitness = match config.strength {
        Strength::Fixed { alpha } => {
            if !(alpha.is_finite() && alpha > 0.0) {
                return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
            }
            Vec::new()
        }
        Strength::Optimized(_) => fitness_attacks(config.seed),
    };
    let console = Mutex::new(());
    let outcomes: Vec<std::result::Result<HostRow, HostFailure>> = hosts
        .par_iter()
        .map(|(name, image)| {
            let out = run_host(image, name.clone(), watermark, config, &fitness, &policy)
                .map_err(|e| HostFailure { host: name.clone(), error: e.to_string() });
            if let Some(cb) = on_host {
                let _guard = console.lock().unwrap_or_else(|p| p.into_inner());
                cb(&out);
            }
            out
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => rows.push(r),
            Err(f) => failures.push(f),
        }
    }
    let mut columns = vec![NO_ATTACK.to_string()];
    columns.extend(config.attacks.iter().map(|a| a.kind().name().to_string()));
    let strength = match &config.strength {
        Strength::Optimized(opt) => Strength::Optimized(OptimizeConfig { seed: config.seed, ..opt.clone() }),
        fixed => fixed.clone(),
    };
    Ok(BenchReport {
        report_version: REPORT_VERSION,
        provenance: Provenance {
            seed: config.seed,
            graph: config.graph,
            block_size: crate::imaging::DEFAULT_BLOCK_SIZE,
            wm_width: watermark.width(),
            wm_height: watermark.height(),
            strength,
            fitness_attacks: fitness,
            attacks: config.attacks.clone(),
        },
        columns,
        average: average_row(&rows),
        rows,
        failures,
    })
}

/// Loads every host in `dir` and runs [`bench_images`]. Unreadable hosts are
/// reported as failures rather than aborting the run.
pub fn bench_dir(
    dir: &Path,
    watermark: &WatermarkBits,
    config: &BenchConfig,
    on_host: Option<&(dyn Fn(&std::result::Result<HostRow, HostFailure>) + Sync)>,
) -> Result<BenchReport> {
    let paths = list_hosts(dir)?;
    let mut hosts = Vec::new();
    let mut unreadable = Vec::new();
    for p in &paths {
        match read_image(p) {
            Ok(img) => hosts.push((host_name(p), img)),
            Err(e) => unreadable.push(HostFailure { host: host_name(p), error: e.to_string() }),
        }
    }
    if hosts.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no readable host images in {}",
            dir.display()
        )));
    }
    let mut report = bench_images(&hosts, watermark, config, on_host)?;
    report.failures.extend(unreadable);
    report.failures.sort_by(|a, b| a.host.cmp(&b.host));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hosts() -> Vec<(String, RasterImage)> {
        (0..2)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(i);
                let data = (0..32 * 32 * 3).map(|_| rng.random_range(40..210)).collect();
                (format!("h{i}"), RasterImage::new(32, 32, 3, data).unwrap())
            })
            .collect()
    }

    #[test]
    fn fixed_alpha_table_shape() {
        let wm = WatermarkBits::random(4, 4, &mut ChaCha8Rng::seed_from_u64(2));
        let cfg = BenchConfig::new(Strength::Fixed { alpha: 10.0 }, 1);
        let report = bench_images(&hosts(), &wm, &cfg, None).unwrap();
        assert_eq!(report.columns.len(), 7);
        assert_eq!(report.columns[0], NO_ATTACK);
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows.iter().all(|r| r.ber[0] == 0.0 && r.ber.len() == 7));
        let table = report.to_table();
        assert_eq!(table.lines().count(), 4);
        assert!(table.lines().last().unwrap().starts_with("average"));
        let back: BenchReport = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn capacity_failure_is_recorded_per_host() {
        let wm = WatermarkBits::random(5, 5, &mut ChaCha8Rng::seed_from_u64(2));
        let cfg = BenchConfig::new(Strength::Fixed { alpha: 10.0 }, 1);
        let report = bench_images(&hosts(), &wm, &cfg, None).unwrap();
        assert!(report.rows.is_empty());
        assert!(report.average.is_none());
        assert_eq!(report.failures.len(), 2);
    }

    #[test]
    fn empty_inputs_rejected() {
        let wm = WatermarkBits::random(2, 2, &mut ChaCha8Rng::seed_from_u64(2));
        let cfg = BenchConfig::new(Strength::Fixed { alpha: 10.0 }, 1);
        assert!(bench_images(&[], &wm, &cfg, None).is_err());
        let dir = tempfile::tempdir().unwrap();
        assert!(list_hosts(dir.path()).is_err());
    }
}

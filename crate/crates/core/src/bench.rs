//! Multi-image, multi-method benchmark and rank aggregation.
//!
//! Cells (image, method, k, run) are independent and run in parallel. Rows
//! are sorted by configuration order before being returned, so the output
//! does not depend on scheduling.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::histogram::SamplingMode;
use crate::imageio::{load_image, RawImage};
use crate::kmeans::Termination;
use crate::metrics::{QuantReport, CSV_HEADER};
use crate::pipeline::{run_quantize, Method, QuantizeConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub images: Vec<PathBuf>,
    pub methods: Vec<Method>,
    pub ks: Vec<usize>,
    pub runs: usize,
    pub seed_base: u64,
    pub sampling: SamplingMode,
    pub termination: Termination,
    /// When off, every `time_ms` is 0 and the CSV is reproducible byte for byte.
    pub record_time: bool,
}

impl BenchConfig {
    pub fn new(images: Vec<PathBuf>, methods: Vec<Method>, ks: Vec<usize>) -> Self {
        BenchConfig {
            images,
            methods,
            ks,
            runs: 1,
            seed_base: 0,
            sampling: SamplingMode::default(),
            termination: Termination::default(),
            record_time: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.images.is_empty() {
            return Err(Error::EmptyInput("image list"));
        }
        if self.methods.is_empty() {
            return Err(Error::EmptyInput("method list"));
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::InvalidParameter("k values must be non-empty and at least 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidParameter("runs must be at least 1".into()));
        }
        self.termination.validate()
    }
}

/// Image name as it appears in reports.
pub fn image_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

#[derive(Clone, Debug, PartialEq)]
pub enum BenchRow {
    Ok(QuantReport),
    Failed {
        image: String,
        method: String,
        k: usize,
        run: usize,
        seed: u64,
        sampling: SamplingMode,
        message: String,
    },
}

impl BenchRow {
    pub fn report(&self) -> Option<&QuantReport> {
        match self {
            BenchRow::Ok(r) => Some(r),
            BenchRow::Failed { .. } => None,
        }
    }

    pub fn csv_record(&self) -> Vec<String> {
        match self {
            BenchRow::Ok(r) => r.csv_record(),
            BenchRow::Failed {
                image,
                method,
                k,
                run,
                seed,
                sampling,
                message,
            } => {
                let mut rec = vec![String::new(); CSV_HEADER.len()];
                rec[0] = image.clone();
                rec[1] = method.clone();
                rec[2] = k.to_string();
                rec[3] = run.to_string();
                rec[4] = seed.to_string();
                rec[5] = sampling.token().to_owned();
                rec[12] = format!("error={message}");
                rec
            }
        }
    }
}

pub fn write_rows<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.csv_record())?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let images: Vec<(String, std::result::Result<RawImage, String>)> = cfg
        .images
        .par_iter()
        .map(|p| (image_name(p), load_image(p).map(|l| l.image).map_err(|e| e.to_string())))
        .collect();
    let mut cells = Vec::new();
    for (ii, _) in images.iter().enumerate() {
        for (mi, _) in cfg.methods.iter().enumerate() {
            for &k in &cfg.ks {
                for run in 0..cfg.runs {
                    cells.push((ii, mi, k, run));
                }
            }
        }
    }
    let mut rows: Vec<((usize, usize, usize, usize), BenchRow)> = cells
        .into_par_iter()
        .map(|(ii, mi, k, run)| {
            let (name, img) = &images[ii];
            let method = cfg.methods[mi];
            let seed = cfg.seed_base.wrapping_add(run as u64);
            let outcome = img.as_ref().map_err(Clone::clone).and_then(|img| {
                let qc = QuantizeConfig {
                    method,
                    k,
                    sampling: cfg.sampling,
                    seed,
                    termination: cfg.termination,
                    timing: cfg.record_time,
                };
                run_quantize(img, name, &qc).map_err(|e| e.to_string())
            });
            let row = match outcome {
                Ok(q) => {
                    let mut r = q.report;
                    r.run = run;
                    BenchRow::Ok(r)
                }
                Err(message) => {
                    log::warn!("{name} {method} k={k} run={run}: {message}");
                    BenchRow::Failed {
                        image: name.clone(),
                        method: method.to_string(),
                        k,
                        run,
                        seed,
                        sampling: cfg.sampling,
                        message,
                    }
                }
            };
            ((ii, mi, k, run), row)
        })
        .collect();
    rows.sort_by_key(|(key, _)| *key);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Average ranks, 1 for the smallest value; ties share the mean of the
/// positions they occupy.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Equal-weight combination of the two criterion ranks.
pub fn overall_rank(mse_rank: f64, time_rank: f64) -> f64 {
    (mse_rank + time_rank) / 2.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankEntry {
    pub method: String,
    /// `None` for the summary over all k.
    pub k: Option<usize>,
    pub mse_rank: f64,
    pub time_rank: f64,
    pub overall: f64,
    /// (image, k) groups that contributed.
    pub groups: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RankTable {
    pub entries: Vec<RankEntry>,
    /// (image, k) groups dropped because some method has no result.
    pub excluded: Vec<(String, usize)>,
}

impl RankTable {
    pub fn get(&self, method: &str, k: Option<usize>) -> Option<&RankEntry> {
        self.entries.iter().find(|e| e.method == method && e.k == k)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "k", "mse_rank", "time_rank", "overall_rank", "groups"])?;
        for e in &self.entries {
            w.write_record([
                e.method.clone(),
                e.k.map_or_else(|| "all".to_owned(), |k| k.to_string()),
                format!("{:.4}", e.mse_rank),
                format!("{:.4}", e.time_rank),
                format!("{:.4}", e.overall),
                e.groups.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Ranks methods by mean MSE and mean time (over runs) within each
/// (image, k) group, then averages ranks over images. Groups where some
/// method has no successful run are skipped.
pub fn rank_aggregate(rows: &[BenchRow]) -> RankTable {
    let mut methods: Vec<String> = Vec::new();
    // (image, k) -> method -> (mse sum, time sum, runs)
    let mut groups: BTreeMap<(String, usize), BTreeMap<String, (f64, f64, usize)>> = BTreeMap::new();
    for row in rows {
        let (image, method, k) = match row {
            BenchRow::Ok(r) => (&r.image, &r.method, r.k),
            BenchRow::Failed { image, method, k, .. } => (image, method, *k),
        };
        if !methods.contains(method) {
            methods.push(method.clone());
        }
        let g = groups.entry((image.clone(), k)).or_default();
        if let BenchRow::Ok(r) = row {
            let e = g.entry(method.clone()).or_insert((0.0, 0.0, 0));
            e.0 += r.mse;
            e.1 += r.time_ms;
            e.2 += 1;
        }
    }
    let mut table = RankTable::default();
    // (method, k) -> (mse rank sum, time rank sum, groups)
    let mut acc: BTreeMap<(usize, usize), (f64, f64, usize)> = BTreeMap::new();
    for ((image, k), per) in &groups {
        if methods.iter().any(|m| !per.contains_key(m)) {
            log::warn!("excluding {image} k={k} from ranking: incomplete results");
            table.excluded.push((image.clone(), *k));
            continue;
        }
        let means: Vec<(f64, f64)> = methods
            .iter()
            .map(|m| {
                let (s, t, n) = per[m];
                (s / n as f64, t / n as f64)
            })
            .collect();
        let mse_r = midranks(&means.iter().map(|m| m.0).collect::<Vec<_>>());
        let time_r = midranks(&means.iter().map(|m| m.1).collect::<Vec<_>>());
        for (mi, (a, b)) in mse_r.into_iter().zip(time_r).enumerate() {
            let e = acc.entry((mi, *k)).or_insert((0.0, 0.0, 0));
            e.0 += a;
            e.1 += b;
            e.2 += 1;
        }
    }
    let mut ks: Vec<usize> = acc.keys().map(|&(_, k)| k).collect();
    ks.sort_unstable();
    ks.dedup();
    for (mi, m) in methods.iter().enumerate() {
        let mut all = (0.0, 0.0, 0usize);
        for &k in &ks {
            let Some(&(a, b, n)) = acc.get(&(mi, k)) else { continue };
            let (mr, tr) = (a / n as f64, b / n as f64);
            table.entries.push(RankEntry {
                method: m.clone(),
                k: Some(k),
                mse_rank: mr,
                time_rank: tr,
                overall: overall_rank(mr, tr),
                groups: n,
            });
            all.0 += a;
            all.1 += b;
            all.2 += n;
        }
        if all.2 > 0 {
            let (mr, tr) = (all.0 / all.2 as f64, all.1 / all.2 as f64);
            table.entries.push(RankEntry {
                method: m.clone(),
                k: None,
                mse_rank: mr,
                time_rank: tr,
                overall: overall_rank(mr, tr),
                groups: all.2,
            });
        }
    }
    table
}

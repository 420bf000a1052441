//! User-count sweeps across schedulers and seeds.

use rayon::prelude::*;

use crate::config::{SchedulerKind, SimConfig};
use crate::engine::run;

pub const SWEEP_HEADER: &str = "scheduler,n_users,seed,throughput_bps,plr_percent,error";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n_users: Vec<usize>,
    pub schedulers: Vec<SchedulerKind>,
    /// Seeds per point; seed k of a point is `base.rng_seed + k`.
    pub seeds: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_users.is_empty() {
            return Err("sweep needs at least one user count".into());
        }
        if self.schedulers.is_empty() {
            return Err("sweep needs at least one scheduler".into());
        }
        if self.seeds == 0 {
            return Err("sweep needs at least one seed".into());
        }
        Ok(())
    }

    /// Points in output order: scheduler, then user count, then seed.
    pub fn points(&self, base: &SimConfig) -> Vec<SimConfig> {
        let mut out = Vec::new();
        for &kind in &self.schedulers {
            for &n in &self.n_users {
                for k in 0..self.seeds {
                    let mut cfg = base.clone();
                    cfg.scheduler_kind = kind;
                    cfg.n_users = n;
                    cfg.rng_seed = base.rng_seed.wrapping_add(k);
                    out.push(cfg);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheduler: SchedulerKind,
    pub n_users: usize,
    pub seed: u64,
    pub throughput_bps: f64,
    pub plr_ratio: f64,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn plr_percent(&self) -> f64 {
        self.plr_ratio * 100.0
    }

    pub fn to_csv(&self) -> String {
        if let Some(err) = &self.error {
            let clean = err.replace([',', '\n', '\r'], ";");
            format!("{},{},{},,,{clean}", self.scheduler, self.n_users, self.seed)
        } else {
            format!(
                "{},{},{},{},{},",
                self.scheduler,
                self.n_users,
                self.seed,
                self.throughput_bps,
                self.plr_percent()
            )
        }
    }
}

fn run_point(cfg: &SimConfig) -> SweepRow {
    match run(cfg) {
        Ok(s) => SweepRow {
            scheduler: cfg.scheduler_kind,
            n_users: cfg.n_users,
            seed: cfg.rng_seed,
            throughput_bps: s.throughput_bps,
            plr_ratio: s.plr_ratio,
            error: None,
        },
        Err(e) => SweepRow {
            scheduler: cfg.scheduler_kind,
            n_users: cfg.n_users,
            seed: cfg.rng_seed,
            throughput_bps: f64::NAN,
            plr_ratio: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

/// Runs every point with at most `jobs` worker threads. Rows come back in
/// [`SweepSpec::points`] order whatever the parallelism.
pub fn run_sweep(base: &SimConfig, spec: &SweepSpec, jobs: usize) -> Vec<SweepRow> {
    let points = spec.points(base);
    if jobs <= 1 {
        return points.iter().map(run_point).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| points.par_iter().map(run_point).collect()),
        Err(_) => points.iter().map(run_point).collect(),
    }
}

/// Mean and standard error over seeds for one (scheduler, n_users) point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointStats {
    pub scheduler: SchedulerKind,
    pub n_users: usize,
    pub seeds: usize,
    pub throughput_mean: f64,
    pub throughput_se: f64,
    pub plr_mean: f64,
    pub plr_se: f64,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn aggregate(rows: &[SweepRow]) -> Vec<PointStats> {
    let mut keys: Vec<(SchedulerKind, usize)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.scheduler, r.n_users)) {
            keys.push((r.scheduler, r.n_users));
        }
    }
    keys.into_iter()
        .filter_map(|(scheduler, n_users)| {
            let ok: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.scheduler == scheduler && r.n_users == n_users && r.error.is_none())
                .collect();
            if ok.is_empty() {
                return None;
            }
            let tp: Vec<f64> = ok.iter().map(|r| r.throughput_bps).collect();
            let plr: Vec<f64> = ok.iter().map(|r| r.plr_ratio).collect();
            let (throughput_mean, throughput_se) = mean_se(&tp);
            let (plr_mean, plr_se) = mean_se(&plr);
            Some(PointStats {
                scheduler,
                n_users,
                seeds: ok.len(),
                throughput_mean,
                throughput_se,
                plr_mean,
                plr_se,
            })
        })
        .collect()
}

/// Long-format CSV, optionally followed by one `mean` row per point.
pub fn render_csv(rows: &[SweepRow], with_means: bool) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    if with_means {
        for s in aggregate(rows) {
            out.push_str(&format!(
                "{},{},mean,{},{},\n",
                s.scheduler,
                s.n_users,
                s.throughput_mean,
                s.plr_mean * 100.0
            ));
        }
    }
    out
}

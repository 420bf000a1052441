//! One simulation run, advanced a TTI at a time.
//!
//! Each TTI runs these phases in order:
//!
//! 1. mobility and fading evolve
//! 2. true SINR per (user, PRB)
//! 3. users quantize and submit CQI reports
//! 4. the eNB fetches matured (possibly blanked) reports
//! 5. SINR estimates: Kalman prediction, or the raw delivered CQI
//! 6. estimates to CQI, efficiency and rate
//! 7. scheduling policy for this TTI
//! 8. PRB allocation
//! 9. buffers drain by allocated capacity, expire, then take new arrivals
//! 10. average throughput and metrics update

use std::io::{self, Write};

use thiserror::Error;

use crate::channel::{compute_sinr, FadingState, LinkQuality};
use crate::config::{ConfigError, LinkModel, SimConfig};
use crate::cqi::{rate_from_efficiency, CqiReport, FeedbackChannel};
use crate::kalman::{ChannelPredictor, KalmanParams};
use crate::metrics::{packet_loss_ratio, system_throughput, MetricsAccumulator};
use crate::rng::{stream_rng, Stream};
use crate::schedulers::{
    allocate, alpha_of, policy_for, update_avg_throughput, Allocation, Policy, UserSchedState,
};
use crate::traffic::{generate_arrivals, hol_delay, UserBuffer};
use crate::world::{init_users, step_mobility, UserState};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("trace output failed: {0}")]
    Trace(#[from] io::Error),
}

pub const TRACE_HEADER: &str =
    "tti,user,prb,true_sinr_db,reported_cqi,estimate_db,scheduled_cqi,rate_bps,policy,assigned";

pub const SUMMARY_HEADER: &str = "scheduler,n_users,seed,throughput_bps,plr_ratio,plr_percent,sim_ttis";

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheduler: String,
    pub n_users: usize,
    pub seed: u64,
    pub throughput_bps: f64,
    pub plr_ratio: f64,
    pub plr_percent: f64,
    pub sim_ttis: u64,
}

impl SummaryRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.scheduler,
            self.n_users,
            self.seed,
            self.throughput_bps,
            self.plr_ratio,
            self.plr_percent,
            self.sim_ttis
        )
    }
}

pub struct SimRun {
    config: SimConfig,
    kalman: KalmanParams,
    predictor_on: bool,
    users: Vec<UserState>,
    fading: FadingState,
    feedback: FeedbackChannel,
    filters: Vec<ChannelPredictor>,
    sched: Vec<UserSchedState>,
    buffers: Vec<UserBuffer>,
    metrics: MetricsAccumulator,
    current_tti: u64,
    last_sinr: Option<LinkQuality>,
    last_rates: Vec<Vec<f64>>,
    last_cqi: Vec<Vec<u8>>,
    last_allocation: Allocation,
    last_policy: Option<Policy>,
    trace: Option<Box<dyn Write + Send>>,
}

impl SimRun {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let n_users = config.n_users;
        let n_prb = config.n_prb;
        let users = init_users(&config, &mut stream_rng(config.rng_seed, Stream::Users));
        let alpha = alpha_of(config.delta_i, config.t_i_seconds);
        Ok(SimRun {
            kalman: KalmanParams::from_config(&config),
            predictor_on: config.predictor_enabled(),
            fading: FadingState::new(&config),
            feedback: FeedbackChannel::from_config(&config),
            filters: vec![ChannelPredictor::new(); n_users * n_prb],
            sched: vec![UserSchedState::new(alpha); n_users],
            buffers: vec![UserBuffer::new(); n_users],
            metrics: MetricsAccumulator::new(n_users),
            current_tti: 0,
            last_sinr: None,
            last_rates: vec![vec![0.0; n_prb]; n_users],
            last_cqi: vec![vec![0; n_prb]; n_users],
            last_allocation: Allocation::empty(n_prb),
            last_policy: None,
            trace: None,
            users,
            config,
        })
    }

    /// Streams one CSV row per (TTI, user, PRB) to `out`.
    pub fn with_trace(mut self, mut out: Box<dyn Write + Send>) -> Result<Self, SimError> {
        writeln!(out, "{TRACE_HEADER}")?;
        self.trace = Some(out);
        Ok(self)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn current_tti(&self) -> u64 {
        self.current_tti
    }

    pub fn is_done(&self) -> bool {
        self.current_tti >= self.config.sim_ttis
    }

    pub fn users(&self) -> &[UserState] {
        &self.users
    }

    pub fn buffers(&self) -> &[UserBuffer] {
        &self.buffers
    }

    pub fn metrics(&self) -> &MetricsAccumulator {
        &self.metrics
    }

    pub fn sched_states(&self) -> &[UserSchedState] {
        &self.sched
    }

    /// True SINR of the last completed TTI.
    pub fn last_sinr(&self) -> Option<&LinkQuality> {
        self.last_sinr.as_ref()
    }

    /// Rates the scheduler saw in the last completed TTI, `[user][prb]`.
    pub fn last_rates(&self) -> &[Vec<f64>] {
        &self.last_rates
    }

    /// CQIs the scheduler used in the last completed TTI, `[user][prb]`.
    pub fn last_scheduled_cqi(&self) -> &[Vec<u8>] {
        &self.last_cqi
    }

    pub fn last_allocation(&self) -> &Allocation {
        &self.last_allocation
    }

    pub fn last_policy(&self) -> Option<Policy> {
        self.last_policy
    }

    /// Advances one TTI. No-op once `sim_ttis` is reached.
    pub fn step(&mut self) -> Result<(), SimError> {
        if self.is_done() {
            return Ok(());
        }
        let t = self.current_tti;
        let cfg = &self.config;
        let n_prb = cfg.n_prb;
        let grid = cfg.cqi_grid;

        // 1. mobility + fading
        for u in self.users.iter_mut() {
            *u = step_mobility(u, cfg.tti_seconds, cfg);
        }
        self.fading.evolve();

        // 2. true SINR
        let sinr = compute_sinr(&self.users, &self.fading, cfg);

        // 3. measure and report
        for user in 0..cfg.n_users {
            let values = sinr.user_row(user).iter().map(|&s| grid.quantize(s)).collect();
            self.feedback
                .submit_report(CqiReport {
                    user_id: user,
                    tti_measured: t,
                    values,
                })
                .expect("one report per user per TTI");
        }

        // 4-6. fetch, estimate, rate
        let mut reported: Vec<Option<Vec<u8>>> = Vec::with_capacity(cfg.n_users);
        let mut estimates: Vec<Vec<Option<f64>>> = Vec::with_capacity(cfg.n_users);
        for user in 0..cfg.n_users {
            let delivered = self.feedback.fetch_report(user, t);
            let est_row: Vec<Option<f64>> = if self.predictor_on {
                (0..n_prb)
                    .map(|prb| {
                        let obs = delivered
                            .as_ref()
                            .filter(|d| !d.blanked)
                            .map(|d| grid.dequantize(d.report.values[prb]));
                        self.filters[user * n_prb + prb].estimate_sinr(
                            obs,
                            cfg.cqi_delay_ttis,
                            &self.kalman,
                        )
                    })
                    .collect()
            } else {
                vec![None; n_prb]
            };
            let cqi_row = &mut self.last_cqi[user];
            for prb in 0..n_prb {
                cqi_row[prb] = if self.predictor_on {
                    est_row[prb].map_or(0, |s| grid.quantize(s))
                } else {
                    delivered.as_ref().map_or(0, |d| d.report.values[prb])
                };
                self.last_rates[user][prb] =
                    rate_from_efficiency(cfg.cqi_efficiency_table.efficiency(cqi_row[prb]), cfg);
            }
            reported.push(delivered.map(|d| d.report.values));
            estimates.push(est_row);
        }

        // 7-8. policy and allocation
        let policy = policy_for(cfg.scheduler_kind, t);
        for (st, buf) in self.sched.iter_mut().zip(&self.buffers) {
            st.hol_delay_s = hol_delay(buf, t, cfg.tti_seconds);
        }
        let backlogged: Vec<bool> = self.buffers.iter().map(|b| !b.is_empty()).collect();
        let allocation = allocate(policy, &self.last_rates, &self.sched, &backlogged, n_prb);

        // 9. serve, expire, arrive
        let record = t >= cfg.warmup_ttis;
        for user in 0..cfg.n_users {
            let mut capacity = 0.0;
            for prb in allocation.prbs_of(user) {
                let supported = match cfg.link_model {
                    LinkModel::Scheduled => true,
                    LinkModel::Outage => self.last_cqi[user][prb] <= grid.quantize(sinr.sinr_db(user, prb)),
                };
                if supported {
                    capacity += self.last_rates[user][prb] * cfg.tti_seconds;
                }
            }
            let buf = &mut self.buffers[user];
            let delivered = buf.drain(capacity.floor() as u64);
            let discarded = buf.expire_packets(t, cfg.tti_seconds, cfg.t_i_seconds);
            let mut arrived = 0;
            for p in generate_arrivals(user, t, cfg) {
                arrived += p.size_bits;
                buf.push(p);
            }
            // 10. R_i and metrics
            let rtot = allocation.rtot(user, &self.last_rates[user]);
            self.sched[user].r_avg = update_avg_throughput(self.sched[user].r_avg, rtot, cfg.t_c);
            if record {
                self.metrics.record(user, delivered, discarded, arrived);
            }
        }
        if record {
            self.metrics.sim_time_seconds = (t + 1 - cfg.warmup_ttis) as f64 * cfg.tti_seconds;
        }

        if let Some(out) = self.trace.as_mut() {
            for user in 0..cfg.n_users {
                for prb in 0..n_prb {
                    let rep = reported[user]
                        .as_ref()
                        .map_or(String::new(), |v| v[prb].to_string());
                    let est = estimates[user][prb].map_or(String::new(), |e| format!("{e:.4}"));
                    writeln!(
                        out,
                        "{t},{user},{prb},{:.4},{rep},{est},{},{},{},{}",
                        sinr.sinr_db(user, prb),
                        self.last_cqi[user][prb],
                        self.last_rates[user][prb],
                        policy.as_str(),
                        u8::from(allocation.is_assigned(user, prb)),
                    )?;
                }
            }
        }

        self.last_sinr = Some(sinr);
        self.last_allocation = allocation;
        self.last_policy = Some(policy);
        self.current_tti += 1;
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<(), SimError> {
        while !self.is_done() {
            self.step()?;
        }
        if let Some(out) = self.trace.as_mut() {
            out.flush()?;
        }
        Ok(())
    }

    pub fn summary(&self) -> SummaryRow {
        let throughput = if self.metrics.sim_time_seconds > 0.0 {
            system_throughput(&self.metrics)
        } else {
            0.0
        };
        let plr = packet_loss_ratio(&self.metrics);
        SummaryRow {
            scheduler: self.config.scheduler_kind.to_string(),
            n_users: self.config.n_users,
            seed: self.config.rng_seed,
            throughput_bps: throughput,
            plr_ratio: plr,
            plr_percent: plr * 100.0,
            sim_ttis: self.config.sim_ttis,
        }
    }
}

/// Runs `config` to completion and returns its summary.
pub fn run(config: &SimConfig) -> Result<SummaryRow, SimError> {
    let mut sim = SimRun::new(config.clone())?;
    sim.run_to_end()?;
    Ok(sim.summary())
}

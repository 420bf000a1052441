//! SINR to CQI quantization, CQI to efficiency and rate, and the delayed,
//! periodically blanked feedback channel.

use std::collections::VecDeque;

use thiserror::Error;

use crate::config::SimConfig;

pub const MAX_CQI: u8 = 15;

/// Efficiency in bits/RE for CQI 1..=15 (4-bit CQI table).
pub const DEFAULT_EFFICIENCY: [f64; 15] = [
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141, 2.4063, 2.7305, 3.3223,
    3.9023, 4.5234, 5.1152, 5.5547,
];

/// Linear SINR grid: CQI 1 starts at `floor_db`, each index spans `step_db`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqiGrid {
    floor_db: f64,
    step_db: f64,
}

impl Default for CqiGrid {
    fn default() -> Self {
        CqiGrid {
            floor_db: -6.0,
            step_db: 2.0,
        }
    }
}

impl CqiGrid {
    pub fn new(floor_db: f64, step_db: f64) -> Result<Self, String> {
        if !floor_db.is_finite() {
            return Err("grid floor must be finite".into());
        }
        if !(step_db.is_finite() && step_db > 0.0) {
            return Err(format!("grid step must be > 0, got {step_db}"));
        }
        Ok(CqiGrid { floor_db, step_db })
    }

    pub fn floor_db(&self) -> f64 {
        self.floor_db
    }

    pub fn step_db(&self) -> f64 {
        self.step_db
    }

    /// Grid level without the 0..=15 clamp.
    pub fn level(&self, sinr_db: f64) -> i64 {
        ((sinr_db - self.floor_db) / self.step_db).floor() as i64 + 1
    }

    /// Midpoint SINR of a (possibly out-of-range) grid level.
    pub fn level_midpoint_db(&self, level: i64) -> f64 {
        self.floor_db + (level as f64 - 0.5) * self.step_db
    }

    pub fn quantize(&self, sinr_db: f64) -> u8 {
        if sinr_db.is_nan() {
            return 0;
        }
        self.level(sinr_db).clamp(0, MAX_CQI as i64) as u8
    }

    /// SINR the eNB reconstructs from a delivered CQI.
    pub fn dequantize(&self, cqi: u8) -> f64 {
        self.level_midpoint_db(cqi as i64)
    }
}

pub fn quantize_sinr_to_cqi(sinr_db: f64) -> u8 {
    CqiGrid::default().quantize(sinr_db)
}

/// 16-entry CQI efficiency table; entry 0 is always 0 (no transmission).
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyTable([f64; 16]);

impl EfficiencyTable {
    pub fn new(cqi_1_to_15: [f64; 15]) -> Result<Self, String> {
        Self::from_slice(&cqi_1_to_15)
    }

    pub fn from_slice(values: &[f64]) -> Result<Self, String> {
        if values.len() != 15 {
            return Err(format!("expected 15 efficiency entries, got {}", values.len()));
        }
        let mut table = [0.0; 16];
        table[1..].copy_from_slice(values);
        if table.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err("efficiencies must be finite and >= 0".into());
        }
        if table.windows(2).any(|w| w[1] < w[0]) {
            return Err("efficiency table must be non-decreasing in CQI".into());
        }
        Ok(EfficiencyTable(table))
    }

    pub fn entries(&self) -> &[f64; 16] {
        &self.0
    }

    /// # Panics
    /// On a CQI above 15.
    pub fn efficiency(&self, cqi: u8) -> f64 {
        assert!(cqi <= MAX_CQI, "CQI {cqi} out of range");
        self.0[cqi as usize]
    }
}

/// Achievable rate of one PRB: `efficiency * RE_data / TTI` in bit/s.
pub fn rate_from_efficiency(bits_per_re: f64, config: &SimConfig) -> f64 {
    bits_per_re * config.re_data as f64 / config.tti_seconds
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CqiReport {
    pub user_id: usize,
    pub tti_measured: u64,
    /// One CQI per PRB.
    pub values: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeliveredReport {
    pub report: CqiReport,
    /// Whether the content was zeroed by periodic unavailability.
    pub blanked: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeedbackError {
    #[error("user {user_id} already reported for TTI {tti}")]
    Duplicate { user_id: usize, tti: u64 },
    #[error("user {0} has no feedback queue")]
    UnknownUser(usize),
    #[error("report has {got} CQI values, expected {expected}")]
    WrongLength { got: usize, expected: usize },
}

/// Fixed-delay report pipe with periodic blanking at delivery.
#[derive(Debug, Clone)]
pub struct FeedbackChannel {
    delay: u64,
    blank_period: u64,
    n_prb: usize,
    queues: Vec<VecDeque<CqiReport>>,
}

impl FeedbackChannel {
    pub fn new(n_users: usize, n_prb: usize, delay_ttis: u64, blank_period_ttis: u64) -> Self {
        FeedbackChannel {
            delay: delay_ttis,
            blank_period: blank_period_ttis,
            n_prb,
            queues: vec![VecDeque::new(); n_users],
        }
    }

    pub fn from_config(config: &SimConfig) -> Self {
        Self::new(
            config.n_users,
            config.n_prb,
            config.cqi_delay_ttis as u64,
            config.cqi_blank_period_ttis as u64,
        )
    }

    pub fn delay(&self) -> u64 {
        self.delay
    }

    pub fn is_blank_tti(&self, tti: u64) -> bool {
        self.blank_period > 0 && tti.is_multiple_of(self.blank_period)
    }

    pub fn submit_report(&mut self, report: CqiReport) -> Result<(), FeedbackError> {
        if report.values.len() != self.n_prb {
            return Err(FeedbackError::WrongLength {
                got: report.values.len(),
                expected: self.n_prb,
            });
        }
        let queue = self
            .queues
            .get_mut(report.user_id)
            .ok_or(FeedbackError::UnknownUser(report.user_id))?;
        if let Some(last) = queue.back() {
            if last.tti_measured >= report.tti_measured {
                return Err(FeedbackError::Duplicate {
                    user_id: report.user_id,
                    tti: report.tti_measured,
                });
            }
        }
        queue.push_back(report);
        Ok(())
    }

    /// Returns the report measured at `current_tti - delay`, zeroed on
    /// blank TTIs, or `None` while nothing has matured for that TTI.
    pub fn fetch_report(&mut self, user_id: usize, current_tti: u64) -> Option<DeliveredReport> {
        let target = current_tti.checked_sub(self.delay)?;
        let queue = self.queues.get_mut(user_id)?;
        while queue.front().is_some_and(|r| r.tti_measured < target) {
            queue.pop_front();
        }
        if queue.front()?.tti_measured != target {
            return None;
        }
        let mut report = queue.pop_front()?;
        let blanked = self.is_blank_tti(current_tti);
        if blanked {
            report.values.iter_mut().for_each(|v| *v = 0);
        }
        Some(DeliveredReport { report, blanked })
    }
}

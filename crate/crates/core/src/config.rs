//! Run configuration and the `key = value` config file format.
//!
//! Every field of [`SimConfig`] is addressable by a key spelled exactly like
//! the field. Lines are `key = value`; `#` starts a comment; blank lines are
//! ignored. List-valued keys take comma-separated values.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::cqi::{CqiGrid, EfficiencyTable, DEFAULT_EFFICIENCY};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::InvalidValue {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchedulerKind {
    FdPf,
    FdMlwdf,
    TdGrouping,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 3] = [
        SchedulerKind::FdPf,
        SchedulerKind::FdMlwdf,
        SchedulerKind::TdGrouping,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchedulerKind::FdPf => "fd_pf",
            SchedulerKind::FdMlwdf => "fd_mlwdf",
            SchedulerKind::TdGrouping => "td_grouping",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "fd_pf" => Ok(SchedulerKind::FdPf),
            "fd_mlwdf" => Ok(SchedulerKind::FdMlwdf),
            "td_grouping" => Ok(SchedulerKind::TdGrouping),
            other => Err(format!(
                "unknown scheduler `{other}` (expected fd_pf, fd_mlwdf or td_grouping)"
            )),
        }
    }
}

/// How bits scheduled on a PRB turn into delivered bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkModel {
    /// The PRB carries the rate of the CQI the scheduler used only if the
    /// true channel supports that CQI; otherwise the PRB delivers nothing.
    Outage,
    /// The PRB always carries the rate of the CQI the scheduler used.
    Scheduled,
}

impl LinkModel {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkModel::Outage => "outage",
            LinkModel::Scheduled => "scheduled",
        }
    }
}

impl FromStr for LinkModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "outage" => Ok(LinkModel::Outage),
            "scheduled" => Ok(LinkModel::Scheduled),
            other => Err(format!(
                "unknown link model `{other}` (expected outage or scheduled)"
            )),
        }
    }
}

/// Single source of truth for one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub bandwidth_hz: f64,
    pub n_prb: usize,
    pub subcarriers_per_prb: usize,
    pub subcarrier_spacing_hz: f64,
    pub tti_seconds: f64,
    pub symbols_per_tti: usize,
    pub re_total: usize,
    pub re_data: usize,
    pub enb_power_dbm: f64,
    pub carrier_hz: f64,
    pub cell_radius_m: f64,
    pub user_speed_mps: f64,
    pub cqi_delay_ttis: usize,
    /// Every this many TTIs the delivered CQI is blanked; 0 disables blanking.
    pub cqi_blank_period_ttis: usize,
    pub t_c: f64,
    pub delta_i: f64,
    pub t_i_seconds: f64,
    pub noise_figure_db: f64,
    /// Constant interference power per PRB; `-inf` switches it off.
    pub interference_dbm: f64,
    pub traffic_packet_bits: u64,
    pub traffic_interarrival_ttis: u64,
    pub sim_ttis: u64,
    pub n_users: usize,
    pub rng_seed: u64,
    pub scheduler_kind: SchedulerKind,

    pub shadowing_sigma_db: f64,
    pub fading_enabled: bool,
    pub cqi_grid: CqiGrid,
    pub cqi_efficiency_table: EfficiencyTable,
    /// `None` means "predict iff the scheduler is td_grouping".
    pub use_predictor: Option<bool>,
    pub kalman_q: [f64; 3],
    pub kalman_r: [f64; 3],
    pub kalman_p0_floor: f64,
    pub kalman_p0_default: [f64; 3],
    pub link_model: LinkModel,
    pub warmup_ttis: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            bandwidth_hz: 5e6,
            n_prb: 25,
            subcarriers_per_prb: 12,
            subcarrier_spacing_hz: 15e3,
            tti_seconds: 1e-3,
            symbols_per_tti: 14,
            re_total: 168,
            re_data: 168,
            enb_power_dbm: 43.01,
            carrier_hz: 2e9,
            cell_radius_m: 100.0,
            user_speed_mps: 33.333,
            cqi_delay_ttis: 3,
            cqi_blank_period_ttis: 10,
            t_c: 1000.0,
            delta_i: 0.05,
            t_i_seconds: 0.1,
            noise_figure_db: 9.0,
            interference_dbm: -110.0,
            traffic_packet_bits: 800,
            traffic_interarrival_ttis: 10,
            sim_ttis: 10_000,
            n_users: 10,
            rng_seed: 1,
            scheduler_kind: SchedulerKind::TdGrouping,
            shadowing_sigma_db: 8.0,
            fading_enabled: true,
            cqi_grid: CqiGrid::default(),
            cqi_efficiency_table: EfficiencyTable::new(DEFAULT_EFFICIENCY)
                .expect("default table is valid"),
            use_predictor: None,
            kalman_q: [1e-2, 1e-3, 1e-4],
            kalman_r: [0.33, 0.67, 2.0],
            kalman_p0_floor: 1e-2,
            kalman_p0_default: [100.0, 1.0, 1.0],
            link_model: LinkModel::Outage,
            warmup_ttis: 0,
        }
    }
}

/// Keys accepted by [`SimConfig::set`], in canonical output order.
pub const KEYS: &[&str] = &[
    "bandwidth_hz",
    "n_prb",
    "subcarriers_per_prb",
    "subcarrier_spacing_hz",
    "tti_seconds",
    "symbols_per_tti",
    "re_total",
    "re_data",
    "enb_power_dbm",
    "carrier_hz",
    "cell_radius_m",
    "user_speed_mps",
    "cqi_delay_ttis",
    "cqi_blank_period_ttis",
    "t_c",
    "delta_i",
    "t_i_seconds",
    "noise_figure_db",
    "interference_dbm",
    "traffic_packet_bits",
    "traffic_interarrival_ttis",
    "sim_ttis",
    "n_users",
    "rng_seed",
    "scheduler_kind",
    "shadowing_sigma_db",
    "fading_enabled",
    "cqi_grid",
    "cqi_efficiency_table",
    "use_predictor",
    "kalman_q",
    "kalman_r",
    "kalman_p0_floor",
    "kalman_p0_default",
    "link_model",
    "warmup_ttis",
];

fn parse_scalar<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| ConfigError::invalid(key, format!("`{}`: {e}", value.trim())))
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = value.trim();
    match v {
        "-inf" | "-Inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => parse_scalar::<f64>(key, v),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value.split(',').map(|v| parse_f64(key, v)).collect()
}

fn parse_triple(key: &str, value: &str) -> Result<[f64; 3], ConfigError> {
    let v = parse_list(key, value)?;
    <[f64; 3]>::try_from(v.as_slice())
        .map_err(|_| ConfigError::invalid(key, format!("expected 3 values, got {}", v.len())))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(ConfigError::invalid(key, format!("`{other}` is not a boolean"))),
    }
}

impl SimConfig {
    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim();
        match key {
            "bandwidth_hz" => self.bandwidth_hz = parse_f64(key, value)?,
            "n_prb" => self.n_prb = parse_scalar(key, value)?,
            "subcarriers_per_prb" => self.subcarriers_per_prb = parse_scalar(key, value)?,
            "subcarrier_spacing_hz" => self.subcarrier_spacing_hz = parse_f64(key, value)?,
            "tti_seconds" => self.tti_seconds = parse_f64(key, value)?,
            "symbols_per_tti" => self.symbols_per_tti = parse_scalar(key, value)?,
            "re_total" => self.re_total = parse_scalar(key, value)?,
            "re_data" => self.re_data = parse_scalar(key, value)?,
            "enb_power_dbm" => self.enb_power_dbm = parse_f64(key, value)?,
            "carrier_hz" => self.carrier_hz = parse_f64(key, value)?,
            "cell_radius_m" => self.cell_radius_m = parse_f64(key, value)?,
            "user_speed_mps" => self.user_speed_mps = parse_f64(key, value)?,
            "cqi_delay_ttis" => self.cqi_delay_ttis = parse_scalar(key, value)?,
            "cqi_blank_period_ttis" => self.cqi_blank_period_ttis = parse_scalar(key, value)?,
            "t_c" => self.t_c = parse_f64(key, value)?,
            "delta_i" => self.delta_i = parse_f64(key, value)?,
            "t_i_seconds" => self.t_i_seconds = parse_f64(key, value)?,
            "noise_figure_db" => self.noise_figure_db = parse_f64(key, value)?,
            "interference_dbm" => self.interference_dbm = parse_f64(key, value)?,
            "traffic_packet_bits" => self.traffic_packet_bits = parse_scalar(key, value)?,
            "traffic_interarrival_ttis" => {
                self.traffic_interarrival_ttis = parse_scalar(key, value)?
            }
            "sim_ttis" => self.sim_ttis = parse_scalar(key, value)?,
            "n_users" => self.n_users = parse_scalar(key, value)?,
            "rng_seed" => self.rng_seed = parse_scalar(key, value)?,
            "scheduler_kind" => self.scheduler_kind = parse_scalar(key, value)?,
            "shadowing_sigma_db" => self.shadowing_sigma_db = parse_f64(key, value)?,
            "fading_enabled" => self.fading_enabled = parse_bool(key, value)?,
            "cqi_grid" => {
                let [floor_db, step_db] = <[f64; 2]>::try_from(parse_list(key, value)?.as_slice())
                    .map_err(|_| ConfigError::invalid(key, "expected `floor_db, step_db`"))?;
                self.cqi_grid = CqiGrid::new(floor_db, step_db)
                    .map_err(|m| ConfigError::invalid(key, m))?;
            }
            "cqi_efficiency_table" => {
                let values = parse_list(key, value)?;
                self.cqi_efficiency_table =
                    EfficiencyTable::from_slice(&values).map_err(|m| ConfigError::invalid(key, m))?;
            }
            "use_predictor" => {
                self.use_predictor = match value.trim() {
                    "auto" => None,
                    v => Some(parse_bool(key, v)?),
                }
            }
            "kalman_q" => self.kalman_q = parse_triple(key, value)?,
            "kalman_r" => self.kalman_r = parse_triple(key, value)?,
            "kalman_p0_floor" => self.kalman_p0_floor = parse_f64(key, value)?,
            "kalman_p0_default" => self.kalman_p0_default = parse_triple(key, value)?,
            "link_model" => self.link_model = parse_scalar(key, value)?,
            "warmup_ttis" => self.warmup_ttis = parse_scalar(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_str(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            self.set(key, value).map_err(|e| ConfigError::Syntax {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_str_validated(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = SimConfig::default();
        cfg.apply_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads defaults overlaid with the file at `path`. Not validated, so
    /// that command-line overrides can still be applied.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = SimConfig::default();
        cfg.apply_str(&text)?;
        Ok(cfg)
    }

    pub fn predictor_enabled(&self) -> bool {
        self.use_predictor
            .unwrap_or(self.scheduler_kind == SchedulerKind::TdGrouping)
    }

    pub fn blanking_enabled(&self) -> bool {
        self.cqi_blank_period_ttis > 0
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(key, format!("must be > 0, got {v}")))
            }
        };
        let at_least_one = |key: &str, v: u64| {
            if v >= 1 {
                Ok(())
            } else {
                Err(ConfigError::invalid(key, "must be >= 1"))
            }
        };
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("subcarrier_spacing_hz", self.subcarrier_spacing_hz)?;
        positive("tti_seconds", self.tti_seconds)?;
        positive("carrier_hz", self.carrier_hz)?;
        positive("cell_radius_m", self.cell_radius_m)?;
        positive("t_i_seconds", self.t_i_seconds)?;
        at_least_one("n_prb", self.n_prb as u64)?;
        at_least_one("subcarriers_per_prb", self.subcarriers_per_prb as u64)?;
        at_least_one("symbols_per_tti", self.symbols_per_tti as u64)?;
        at_least_one("re_total", self.re_total as u64)?;
        at_least_one("re_data", self.re_data as u64)?;
        at_least_one("traffic_packet_bits", self.traffic_packet_bits)?;
        at_least_one("traffic_interarrival_ttis", self.traffic_interarrival_ttis)?;

        let occupied = self.n_prb as f64 * self.subcarriers_per_prb as f64 * self.subcarrier_spacing_hz;
        if occupied > self.bandwidth_hz * (1.0 + 1e-12) {
            return Err(ConfigError::invalid(
                "n_prb",
                format!(
                    "{} PRBs x {} subcarriers x {} Hz = {occupied} Hz exceeds bandwidth {} Hz",
                    self.n_prb, self.subcarriers_per_prb, self.subcarrier_spacing_hz, self.bandwidth_hz
                ),
            ));
        }
        if self.re_data > self.re_total {
            return Err(ConfigError::invalid(
                "re_data",
                format!("{} exceeds re_total {}", self.re_data, self.re_total),
            ));
        }
        if !(self.delta_i > 0.0 && self.delta_i < 1.0) {
            return Err(ConfigError::invalid(
                "delta_i",
                format!("must lie in (0, 1), got {}", self.delta_i),
            ));
        }
        if !(self.t_c >= 1.0 && self.t_c.is_finite()) {
            return Err(ConfigError::invalid("t_c", format!("must be >= 1, got {}", self.t_c)));
        }
        if !(self.user_speed_mps >= 0.0 && self.user_speed_mps.is_finite()) {
            return Err(ConfigError::invalid("user_speed_mps", "must be finite and >= 0"));
        }
        if !(self.shadowing_sigma_db >= 0.0 && self.shadowing_sigma_db.is_finite()) {
            return Err(ConfigError::invalid("shadowing_sigma_db", "must be finite and >= 0"));
        }
        for (key, v) in [("enb_power_dbm", self.enb_power_dbm), ("noise_figure_db", self.noise_figure_db)] {
            if !v.is_finite() {
                return Err(ConfigError::invalid(key, "must be finite"));
            }
        }
        if self.interference_dbm.is_nan() || self.interference_dbm == f64::INFINITY {
            return Err(ConfigError::invalid("interference_dbm", "must be finite or -inf"));
        }
        for (key, triple) in [
            ("kalman_q", self.kalman_q),
            ("kalman_r", self.kalman_r),
            ("kalman_p0_default", self.kalman_p0_default),
        ] {
            if triple.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(ConfigError::invalid(key, "entries must be finite and >= 0"));
            }
        }
        if !(self.kalman_p0_floor.is_finite() && self.kalman_p0_floor >= 0.0) {
            return Err(ConfigError::invalid("kalman_p0_floor", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Renders the configuration back into the file format.
    pub fn to_config_string(&self) -> String {
        let fmt_triple = |t: [f64; 3]| format!("{}, {}, {}", t[0], t[1], t[2]);
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("bandwidth_hz", self.bandwidth_hz.to_string());
        line("n_prb", self.n_prb.to_string());
        line("subcarriers_per_prb", self.subcarriers_per_prb.to_string());
        line("subcarrier_spacing_hz", self.subcarrier_spacing_hz.to_string());
        line("tti_seconds", self.tti_seconds.to_string());
        line("symbols_per_tti", self.symbols_per_tti.to_string());
        line("re_total", self.re_total.to_string());
        line("re_data", self.re_data.to_string());
        line("enb_power_dbm", self.enb_power_dbm.to_string());
        line("carrier_hz", self.carrier_hz.to_string());
        line("cell_radius_m", self.cell_radius_m.to_string());
        line("user_speed_mps", self.user_speed_mps.to_string());
        line("cqi_delay_ttis", self.cqi_delay_ttis.to_string());
        line("cqi_blank_period_ttis", self.cqi_blank_period_ttis.to_string());
        line("t_c", self.t_c.to_string());
        line("delta_i", self.delta_i.to_string());
        line("t_i_seconds", self.t_i_seconds.to_string());
        line("noise_figure_db", self.noise_figure_db.to_string());
        line(
            "interference_dbm",
            if self.interference_dbm == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                self.interference_dbm.to_string()
            },
        );
        line("traffic_packet_bits", self.traffic_packet_bits.to_string());
        line("traffic_interarrival_ttis", self.traffic_interarrival_ttis.to_string());
        line("sim_ttis", self.sim_ttis.to_string());
        line("n_users", self.n_users.to_string());
        line("rng_seed", self.rng_seed.to_string());
        line("scheduler_kind", self.scheduler_kind.to_string());
        line("shadowing_sigma_db", self.shadowing_sigma_db.to_string());
        line("fading_enabled", self.fading_enabled.to_string());
        line(
            "cqi_grid",
            format!("{}, {}", self.cqi_grid.floor_db(), self.cqi_grid.step_db()),
        );
        line(
            "cqi_efficiency_table",
            self.cqi_efficiency_table.entries()[1..]
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(", "),
        );
        line(
            "use_predictor",
            match self.use_predictor {
                None => "auto".to_string(),
                Some(b) => b.to_string(),
            },
        );
        line("kalman_q", fmt_triple(self.kalman_q));
        line("kalman_r", fmt_triple(self.kalman_r));
        line("kalman_p0_floor", self.kalman_p0_floor.to_string());
        line("kalman_p0_default", fmt_triple(self.kalman_p0_default));
        line("link_model", self.link_model.as_str().to_string());
        line("warmup_ttis", self.warmup_ttis.to_string());
        out
    }
}

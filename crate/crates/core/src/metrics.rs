//! System throughput and service packet loss ratio from exact bit counters.

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UserCounters {
    pub prx_total_bits: u64,
    pub pdiscard_total_bits: u64,
    pub psize_total_bits: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsAccumulator {
    pub per_user: Vec<UserCounters>,
    pub sim_time_seconds: f64,
}

impl MetricsAccumulator {
    pub fn new(n_users: usize) -> Self {
        MetricsAccumulator {
            per_user: vec![UserCounters::default(); n_users],
            sim_time_seconds: 0.0,
        }
    }

    pub fn record(&mut self, user: usize, received: u64, discarded: u64, arrived: u64) {
        let c = &mut self.per_user[user];
        c.prx_total_bits += received;
        c.pdiscard_total_bits += discarded;
        c.psize_total_bits += arrived;
    }

    pub fn received_bits(&self) -> u64 {
        self.per_user.iter().map(|c| c.prx_total_bits).sum()
    }

    pub fn discarded_bits(&self) -> u64 {
        self.per_user.iter().map(|c| c.pdiscard_total_bits).sum()
    }

    pub fn arrived_bits(&self) -> u64 {
        self.per_user.iter().map(|c| c.psize_total_bits).sum()
    }
}

/// Received bits over all users divided by the simulated time.
///
/// # Panics
/// If no time has been simulated.
pub fn system_throughput(acc: &MetricsAccumulator) -> f64 {
    assert!(acc.sim_time_seconds > 0.0, "system throughput needs a positive simulation time");
    acc.received_bits() as f64 / acc.sim_time_seconds
}

/// Discarded bits over arrived bits; 0 when nothing arrived.
pub fn packet_loss_ratio(acc: &MetricsAccumulator) -> f64 {
    let arrived = acc.arrived_bits();
    if arrived == 0 {
        0.0
    } else {
        acc.discarded_bits() as f64 / arrived as f64
    }
}

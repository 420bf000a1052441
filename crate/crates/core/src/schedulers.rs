//! Frequency-domain PRB allocation: proportional fair, M-LWDF and the
//! time-domain grouping that alternates between them.

use crate::config::SchedulerKind;

/// Lower bound on a user's average throughput, in bit/s.
pub const R_AVG_FLOOR_BPS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserSchedState {
    /// Exponentially averaged throughput R_i (bit/s).
    pub r_avg: f64,
    /// QoS weight alpha_i.
    pub alpha: f64,
    /// Head-of-line delay W_i (s).
    pub hol_delay_s: f64,
}

impl UserSchedState {
    pub fn new(alpha: f64) -> Self {
        UserSchedState {
            r_avg: R_AVG_FLOOR_BPS,
            alpha,
            hol_delay_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    Pf,
    Mlwdf,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Pf => "pf",
            Policy::Mlwdf => "mlwdf",
        }
    }
}

pub fn pf_priority(r_bps: f64, r_avg_bps: f64) -> f64 {
    r_bps / r_avg_bps
}

/// `alpha = -ln(delta) / T`.
pub fn alpha_of(delta: f64, t_i_seconds: f64) -> f64 {
    -delta.ln() / t_i_seconds
}

pub fn mlwdf_priority(alpha: f64, hol_delay_s: f64, r_bps: f64, r_avg_bps: f64) -> f64 {
    alpha * hol_delay_s * r_bps / r_avg_bps
}

/// `R' = (1 - 1/t_c) R + (1/t_c) rtot`, floored at [`R_AVG_FLOOR_BPS`].
pub fn update_avg_throughput(r_avg: f64, rtot_bps: f64, t_c: f64) -> f64 {
    let inv = 1.0 / t_c;
    ((1.0 - inv) * r_avg + inv * rtot_bps).max(R_AVG_FLOOR_BPS)
}

/// Even TTIs run PF, odd TTIs run M-LWDF.
pub fn select_algorithm(tti_index: u64) -> Policy {
    if tti_index.is_multiple_of(2) {
        Policy::Pf
    } else {
        Policy::Mlwdf
    }
}

/// Policy in force for `kind` at `tti_index`.
pub fn policy_for(kind: SchedulerKind, tti_index: u64) -> Policy {
    match kind {
        SchedulerKind::FdPf => Policy::Pf,
        SchedulerKind::FdMlwdf => Policy::Mlwdf,
        SchedulerKind::TdGrouping => select_algorithm(tti_index),
    }
}

/// PRB to user map for one TTI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub prb_to_user: Vec<Option<usize>>,
}

impl Allocation {
    pub fn empty(n_prb: usize) -> Self {
        Allocation {
            prb_to_user: vec![None; n_prb],
        }
    }

    /// Indicator I_{i,j}.
    pub fn is_assigned(&self, user: usize, prb: usize) -> bool {
        self.prb_to_user[prb] == Some(user)
    }

    pub fn prbs_of(&self, user: usize) -> impl Iterator<Item = usize> + '_ {
        self.prb_to_user
            .iter()
            .enumerate()
            .filter(move |(_, u)| **u == Some(user))
            .map(|(prb, _)| prb)
    }

    /// `rtot_i = sum_j I_{i,j} r_{i,j}`.
    pub fn rtot(&self, user: usize, rates_bps: &[f64]) -> f64 {
        self.prbs_of(user).map(|prb| rates_bps[prb]).sum()
    }
}

/// Per-PRB argmax of `priorities[user][prb]` over backlogged users.
///
/// Ties go to the lowest user id. When no backlogged user has a positive
/// priority, the PRB goes to the backlogged user with the highest positive
/// rate, and stays empty if there is none.
pub fn allocate_by_priority(
    priorities: &[Vec<f64>],
    rates_bps: &[Vec<f64>],
    backlogged: &[bool],
    n_prb: usize,
) -> Allocation {
    let mut alloc = Allocation::empty(n_prb);
    for prb in 0..n_prb {
        let mut best: Option<(usize, f64)> = None;
        for (user, row) in priorities.iter().enumerate() {
            if !backlogged[user] {
                continue;
            }
            let mu = row[prb];
            if mu > 0.0 && best.is_none_or(|(_, b)| mu > b) {
                best = Some((user, mu));
            }
        }
        if best.is_none() {
            for (user, row) in rates_bps.iter().enumerate() {
                if !backlogged[user] {
                    continue;
                }
                let r = row[prb];
                if r > 0.0 && best.is_none_or(|(_, b)| r > b) {
                    best = Some((user, r));
                }
            }
        }
        alloc.prb_to_user[prb] = best.map(|(user, _)| user);
    }
    alloc
}

/// Allocates every PRB under `policy`.
pub fn allocate(
    policy: Policy,
    rates_bps: &[Vec<f64>],
    sched_states: &[UserSchedState],
    backlogged: &[bool],
    n_prb: usize,
) -> Allocation {
    let priorities: Vec<Vec<f64>> = rates_bps
        .iter()
        .zip(sched_states)
        .map(|(row, st)| {
            row.iter()
                .map(|&r| match policy {
                    Policy::Pf => pf_priority(r, st.r_avg),
                    Policy::Mlwdf => mlwdf_priority(st.alpha, st.hol_delay_s, r, st.r_avg),
                })
                .collect()
        })
        .collect();
    allocate_by_priority(&priorities, rates_bps, backlogged, n_prb)
}

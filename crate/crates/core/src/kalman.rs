//! Constant-acceleration Kalman filter over the dB-domain SINR of one
//! (user, PRB) pair.
//!
//! State is `(gamma, v, b)`: SINR in dB, its rate of change per TTI and the
//! change of that rate. Observations are the de-quantized reported SINR and
//! its backward first and second differences, so the observation matrix is
//! the identity. Reports arrive `delay` TTIs late and are missing on blank
//! TTIs; the filter runs on the measurement clock and its corrected mean is
//! extrapolated `delay` steps to the scheduling instant.

use thiserror::Error;

use crate::config::SimConfig;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn diag(d: Vec3) -> Mat3 {
    [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn mat_vec(a: &Mat3, v: &Vec3) -> Vec3 {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

fn mat_add(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += b[i][j];
        }
    }
    out
}

fn mat_sub(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] -= b[i][j];
        }
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting; `None` when singular.
pub fn invert(a: &Mat3) -> Option<Mat3> {
    let mut scale = 0.0f64;
    for row in a {
        for v in row {
            scale = scale.max(v.abs());
        }
    }
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let mut m = *a;
    let mut inv = IDENTITY;
    for col in 0..3 {
        let mut pivot = col;
        for row in col + 1..3 {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        if pivot != col {
            m.swap(col, pivot);
            inv.swap(col, pivot);
        }
        let p = 1.0 / m[col][col];
        for j in 0..3 {
            m[col][j] *= p;
            inv[col][j] *= p;
        }
        for row in 0..3 {
            if row != col {
                let f = m[row][col];
                for j in 0..3 {
                    m[row][j] -= f * m[col][j];
                    inv[row][j] -= f * inv[col][j];
                }
            }
        }
    }
    Some(inv)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KalmanError {
    #[error("innovation covariance is singular")]
    SingularInnovation,
}

/// Model matrices shared by every filter in a run.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanParams {
    pub phi: Mat3,
    pub h: Mat3,
    pub q: Mat3,
    pub r: Mat3,
    /// Lower bound applied to the diagonal of the observation-seeded P0.
    pub p0_floor: f64,
    /// P0 diagonal used when no observation is available yet.
    pub p0_default: Vec3,
    pub step: f64,
}

/// Transition of the constant-acceleration model over `step` TTIs.
pub fn transition(step: f64) -> Mat3 {
    [
        [1.0, step, step * step / 2.0],
        [0.0, 1.0, step],
        [0.0, 0.0, 1.0],
    ]
}

impl KalmanParams {
    pub fn constant_acceleration(q: Vec3, r: Vec3, p0_floor: f64, p0_default: Vec3) -> Self {
        KalmanParams {
            phi: transition(1.0),
            h: IDENTITY,
            q: diag(q),
            r: diag(r),
            p0_floor,
            p0_default,
            step: 1.0,
        }
    }

    pub fn from_config(config: &SimConfig) -> Self {
        Self::constant_acceleration(
            config.kalman_q,
            config.kalman_r,
            config.kalman_p0_floor,
            config.kalman_p0_default,
        )
    }
}

impl Default for KalmanParams {
    fn default() -> Self {
        Self::from_config(&SimConfig::default())
    }
}

/// Observed `(gamma', v', b')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationVector {
    pub z: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub x: Vec3,
    pub p: Mat3,
    /// Observed gamma at t-1 and t-2.
    pub last_two_observations: (Option<f64>, Option<f64>),
}

pub fn init_filter(params: &KalmanParams, first_observation: Option<&ObservationVector>) -> KalmanState {
    let p = match first_observation {
        Some(obs) => diag(obs.z.map(|v| (v * v).max(params.p0_floor))),
        None => diag(params.p0_default),
    };
    KalmanState {
        x: [0.0; 3],
        p,
        last_two_observations: (None, None),
    }
}

/// Time update: `x <- Phi x`, `P <- Phi P Phi^T + Q`.
pub fn predict(state: &KalmanState, params: &KalmanParams) -> KalmanState {
    let phi_t = transpose(&params.phi);
    KalmanState {
        x: mat_vec(&params.phi, &state.x),
        p: mat_add(&mat_mul(&mat_mul(&params.phi, &state.p), &phi_t), &params.q),
        last_two_observations: state.last_two_observations,
    }
}

/// Measurement update with gain `K = P H^T (H P H^T + R)^-1`.
pub fn correct(
    state: &KalmanState,
    obs: &ObservationVector,
    params: &KalmanParams,
) -> Result<KalmanState, KalmanError> {
    let h = &params.h;
    let h_t = transpose(h);
    let s = mat_add(&mat_mul(&mat_mul(h, &state.p), &h_t), &params.r);
    let s_inv = invert(&s).ok_or(KalmanError::SingularInnovation)?;
    let k = mat_mul(&mat_mul(&state.p, &h_t), &s_inv);
    let hx = mat_vec(h, &state.x);
    let innovation = [obs.z[0] - hx[0], obs.z[1] - hx[1], obs.z[2] - hx[2]];
    let dx = mat_vec(&k, &innovation);
    let x = [state.x[0] + dx[0], state.x[1] + dx[1], state.x[2] + dx[2]];
    let p = mat_mul(&mat_sub(&IDENTITY, &mat_mul(&k, h)), &state.p);
    Ok(KalmanState {
        x,
        p,
        last_two_observations: state.last_two_observations,
    })
}

/// Builds `(gamma', v', b')` from a report and the two previous observed
/// values. Missing history counts as equal to the new value.
pub fn build_observation(report_value_db: f64, state: &KalmanState) -> ObservationVector {
    let g0 = report_value_db;
    let g1 = state.last_two_observations.0.unwrap_or(g0);
    let g2 = state.last_two_observations.1.unwrap_or(g1);
    ObservationVector {
        z: [g0, g0 - g1, g0 - 2.0 * g1 + g2],
    }
}

/// Mean after `steps` applications of the transition.
pub fn extrapolate(x: &Vec3, params: &KalmanParams, steps: usize) -> Vec3 {
    (0..steps).fold(*x, |acc, _| mat_vec(&params.phi, &acc))
}

/// Filter for one (user, PRB) link, driven once per TTI.
#[derive(Debug, Clone, Default)]
pub struct ChannelPredictor {
    state: Option<KalmanState>,
}

impl ChannelPredictor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> Option<&KalmanState> {
        self.state.as_ref()
    }

    /// Advances one TTI and returns the SINR estimate for the current TTI.
    ///
    /// `report_db` is the de-quantized delivered value, or `None` when the
    /// report is missing or blanked (prediction only). Returns `None` until
    /// a first report has been absorbed.
    pub fn estimate_sinr(
        &mut self,
        report_db: Option<f64>,
        delay_ttis: usize,
        params: &KalmanParams,
    ) -> Option<f64> {
        let mut state = match (self.state.take(), report_db) {
            (Some(s), _) => predict(&s, params),
            (None, Some(g)) => {
                let first = ObservationVector { z: [g, 0.0, 0.0] };
                predict(&init_filter(params, Some(&first)), params)
            }
            (None, None) => return None,
        };
        let history_value = match report_db {
            Some(g) => {
                let obs = build_observation(g, &state);
                // A singular innovation only happens with R = 0 and P = 0;
                // the prediction is then already exact.
                if let Ok(corrected) = correct(&state, &obs, params) {
                    state = corrected;
                }
                g
            }
            // gaps in the report stream are filled with the prior mean so
            // later differences stay one TTI apart
            None => state.x[0],
        };
        state.last_two_observations = (Some(history_value), state.last_two_observations.0);
        let out = extrapolate(&state.x, params, delay_ttis)[0];
        self.state = Some(state);
        Some(out)
    }
}

/// Free-function form of [`ChannelPredictor::estimate_sinr`].
pub fn estimate_sinr(
    filter: &mut ChannelPredictor,
    maybe_report_db: Option<f64>,
    delay_ttis: usize,
    params: &KalmanParams,
) -> Option<f64> {
    filter.estimate_sinr(maybe_report_db, delay_ttis, params)
}

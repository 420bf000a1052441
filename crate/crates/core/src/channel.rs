//! True per-(user, PRB) channel: path loss, shadowing, time-correlated
//! Rayleigh fading, thermal noise and a constant interference floor.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::config::SimConfig;
use crate::rng::{stream_rng, Stream};
use crate::world::UserState;

pub const SPEED_OF_LIGHT_MPS: f64 = 2.997_924_58e8;
/// Thermal noise density at 290 K.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

/// Urban-macro path loss at 2 GHz; distances below 1 m are clamped.
pub fn path_loss_db(distance_m: f64) -> f64 {
    let d = distance_m.max(1.0);
    128.1 + 37.6 * (d / 1000.0).log10()
}

pub fn doppler_hz(speed_mps: f64, carrier_hz: f64) -> f64 {
    speed_mps * carrier_hz / SPEED_OF_LIGHT_MPS
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 12.0 {
        // power series: sum_k (-1)^k (x^2/4)^k / (k!)^2
        let q = 0.25 * ax * ax;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= -q / (k * k);
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
            k += 1.0;
            if k > 200.0 {
                break;
            }
        }
        sum
    } else {
        // Hankel asymptotic expansion
        let y = 1.0 / (ax * ax);
        let p = 1.0 - 9.0 / 128.0 * y + 3675.0 / 32768.0 * y * y;
        let q = (-1.0 / 8.0 + 75.0 / 1024.0 * y - 59535.0 / 262144.0 * y * y) / ax;
        let phase = ax - std::f64::consts::FRAC_PI_4;
        (2.0 / (std::f64::consts::PI * ax)).sqrt() * (p * phase.cos() - q * phase.sin())
    }
}

/// One-TTI correlation of the AR(1) fading process.
pub fn fading_correlation(config: &SimConfig) -> f64 {
    let fd = doppler_hz(config.user_speed_mps, config.carrier_hz);
    bessel_j0(std::f64::consts::TAU * fd * config.tti_seconds)
}

/// Thermal noise over one PRB plus receiver noise figure, in dBm.
pub fn noise_floor_dbm(config: &SimConfig) -> f64 {
    let prb_hz = config.subcarriers_per_prb as f64 * config.subcarrier_spacing_hz;
    THERMAL_NOISE_DBM_HZ + 10.0 * prb_hz.log10() + config.noise_figure_db
}

/// Noise floor and constant interference summed in linear power.
pub fn noise_plus_interference_dbm(config: &SimConfig) -> f64 {
    let mw = |dbm: f64| 10f64.powf(dbm / 10.0);
    10.0 * (mw(noise_floor_dbm(config)) + mw(config.interference_dbm)).log10()
}

pub fn enb_power_per_prb_dbm(config: &SimConfig) -> f64 {
    config.enb_power_dbm - 10.0 * (config.n_prb as f64).log10()
}

/// Fading coefficients for every (user, PRB) plus per-user shadowing.
///
/// Each (user, PRB) process draws from its own random stream, so
/// realizations do not depend on evaluation order.
#[derive(Debug, Clone)]
pub struct FadingState {
    n_prb: usize,
    rho: f64,
    enabled: bool,
    h: Vec<Complex64>,
    shadowing_db: Vec<f64>,
    streams: Vec<ChaCha8Rng>,
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

impl FadingState {
    pub fn new(config: &SimConfig) -> Self {
        let n_users = config.n_users;
        let n_prb = config.n_prb;
        let mut streams: Vec<ChaCha8Rng> = (0..n_users * n_prb)
            .map(|idx| stream_rng(config.rng_seed, Stream::Fading(idx as u64)))
            .collect();
        let h = if config.fading_enabled {
            streams.iter_mut().map(complex_gaussian).collect()
        } else {
            vec![Complex64::new(1.0, 0.0); n_users * n_prb]
        };
        let shadowing_db = if config.shadowing_sigma_db > 0.0 {
            let mut rng = stream_rng(config.rng_seed, Stream::Shadowing);
            let normal = Normal::new(0.0, config.shadowing_sigma_db).expect("sigma validated");
            (0..n_users).map(|_| normal.sample(&mut rng)).collect()
        } else {
            vec![0.0; n_users]
        };
        FadingState {
            n_prb,
            rho: fading_correlation(config),
            enabled: config.fading_enabled,
            h,
            shadowing_db,
            streams,
        }
    }

    /// Builds a state with explicit coefficients; used by tests and replay.
    pub fn from_parts(n_prb: usize, rho: f64, h: Vec<Complex64>, shadowing_db: Vec<f64>) -> Self {
        assert_eq!(h.len(), n_prb * shadowing_db.len());
        let streams = (0..h.len())
            .map(|idx| ChaCha8Rng::seed_from_u64(idx as u64))
            .collect();
        FadingState {
            n_prb,
            rho,
            enabled: true,
            h,
            shadowing_db,
            streams,
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n_users(&self) -> usize {
        self.shadowing_db.len()
    }

    pub fn n_prb(&self) -> usize {
        self.n_prb
    }

    pub fn coefficient(&self, user: usize, prb: usize) -> Complex64 {
        self.h[user * self.n_prb + prb]
    }

    pub fn shadowing_db(&self, user: usize) -> f64 {
        self.shadowing_db[user]
    }

    /// Advances every process by one TTI:
    /// `h <- rho * h + sqrt(1 - rho^2) * w`, `w ~ CN(0, 1)`.
    pub fn evolve(&mut self) {
        if !self.enabled {
            return;
        }
        let rho = self.rho;
        let innov = (1.0 - rho * rho).max(0.0).sqrt();
        for (h, rng) in self.h.iter_mut().zip(self.streams.iter_mut()) {
            let w = complex_gaussian(rng);
            *h = *h * rho + w * innov;
        }
    }
}

/// True SINR in dB for every (user, PRB) at the current TTI.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkQuality {
    n_prb: usize,
    sinr_db: Vec<f64>,
}

impl LinkQuality {
    pub fn from_vec(n_prb: usize, sinr_db: Vec<f64>) -> Self {
        assert!(n_prb > 0 && sinr_db.len().is_multiple_of(n_prb));
        LinkQuality { n_prb, sinr_db }
    }

    pub fn sinr_db(&self, user: usize, prb: usize) -> f64 {
        self.sinr_db[user * self.n_prb + prb]
    }

    pub fn user_row(&self, user: usize) -> &[f64] {
        &self.sinr_db[user * self.n_prb..(user + 1) * self.n_prb]
    }

    pub fn n_prb(&self) -> usize {
        self.n_prb
    }

    pub fn n_users(&self) -> usize {
        self.sinr_db.len() / self.n_prb
    }
}

/// Large-scale part of the link budget for one user: everything except the
/// fast-fading term.
pub fn mean_sinr_db(user: &UserState, shadowing_db: f64, config: &SimConfig) -> f64 {
    enb_power_per_prb_dbm(config) - path_loss_db(user.distance_m()) - shadowing_db
        - noise_plus_interference_dbm(config)
}

pub fn compute_sinr(users: &[UserState], fading: &FadingState, config: &SimConfig) -> LinkQuality {
    let n_prb = fading.n_prb();
    let mut sinr_db = Vec::with_capacity(users.len() * n_prb);
    for user in users {
        let mean = mean_sinr_db(user, fading.shadowing_db(user.id), config);
        for prb in 0..n_prb {
            // 20 log10 |h| == 10 log10 |h|^2
            let gain_db = 10.0 * fading.coefficient(user.id, prb).norm_sqr().log10();
            sinr_db.push(mean + gain_db);
        }
    }
    LinkQuality { n_prb, sinr_db }
}

//! User population and mobility inside a single circular cell.

use std::f64::consts::TAU;

use rand::Rng;

use crate::config::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserState {
    pub id: usize,
    /// Meters from the cell center.
    pub position: (f64, f64),
    /// Radians, measured from the +x axis.
    pub heading: f64,
    pub speed: f64,
}

impl UserState {
    pub fn distance_m(&self) -> f64 {
        self.position.0.hypot(self.position.1)
    }
}

/// Drops `config.n_users` users uniformly over the cell disc.
pub fn init_users<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Vec<UserState> {
    (0..config.n_users)
        .map(|id| {
            // sqrt of a uniform radius fraction gives uniform density per area
            let r = config.cell_radius_m * rng.gen::<f64>().sqrt();
            let theta = rng.gen::<f64>() * TAU;
            let heading = rng.gen::<f64>() * TAU;
            UserState {
                id,
                position: (r * theta.cos(), r * theta.sin()),
                heading,
                speed: config.user_speed_mps,
            }
        })
        .collect()
}

/// Moves `user` for `dt_seconds` along its heading. Leaving the disc
/// re-enters at the diametrically opposite boundary point with the same
/// heading.
pub fn step_mobility(user: &UserState, dt_seconds: f64, config: &SimConfig) -> UserState {
    let radius = config.cell_radius_m;
    let dir = (user.heading.cos(), user.heading.sin());
    let mut pos = user.position;
    let mut remaining = user.speed * dt_seconds;

    loop {
        let next = (pos.0 + dir.0 * remaining, pos.1 + dir.1 * remaining);
        if next.0.hypot(next.1) <= radius {
            pos = next;
            break;
        }
        // Exit distance s >= 0 along dir: |pos + s*dir| = radius.
        let b = pos.0 * dir.0 + pos.1 * dir.1;
        let c = pos.0 * pos.0 + pos.1 * pos.1 - radius * radius;
        let s = (-b + (b * b - c).max(0.0).sqrt()).max(0.0);
        let exit = (pos.0 + dir.0 * s, pos.1 + dir.1 * s);
        remaining -= s;
        pos = (-exit.0, -exit.1);
        if remaining <= 0.0 {
            break;
        }
    }

    // rounding can leave the point a hair outside
    let norm = pos.0.hypot(pos.1);
    if norm > radius {
        let k = radius / norm;
        pos = (pos.0 * k, pos.1 * k);
    }

    UserState {
        position: pos,
        ..*user
    }
}

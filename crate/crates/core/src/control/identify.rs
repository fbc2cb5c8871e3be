//! Least-squares FOPDT fit to a sampled open-loop step response.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::PlantModel;

/// Deviation of the measurement from its no-step baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResponse {
    /// Sample spacing, s. `response[i]` is taken at `i·dt`, the step at t = 0.
    pub dt: f64,
    /// Actuator step size.
    pub step: f64,
    pub response: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("response is flat; loop is not identifiable")]
    Flat,
    #[error("need at least 3 samples and a non-zero step")]
    TooShort,
}

/// Shape of a unit FOPDT step at time `t`.
#[inline]
fn unit(t: f64, tau: f64, theta: f64) -> f64 {
    if t <= theta {
        0.0
    } else {
        1.0 - (-(t - theta) / tau).exp()
    }
}

/// Best gain and squared error for fixed `(tau, theta)`.
fn best_gain(r: &StepResponse, tau: f64, theta: f64) -> (f64, f64) {
    let (mut sy, mut ss) = (0.0, 0.0);
    for (i, &y) in r.response.iter().enumerate() {
        let phi = r.step * unit(i as f64 * r.dt, tau, theta);
        sy += y * phi;
        ss += phi * phi;
    }
    if ss == 0.0 {
        let sse = r.response.iter().map(|y| y * y).sum();
        return (0.0, sse);
    }
    let k = sy / ss;
    let sse = r
        .response
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let e = y - k * r.step * unit(i as f64 * r.dt, tau, theta);
            e * e
        })
        .sum();
    (k, sse)
}

/// Fit `k·(1 − e^{−(t−θ)/τ₁})` by grid search with successive zooming.
///
/// `τ₁` is kept ≥ dt/10. The dead time is the continuous-time fit; a response
/// that completes within one sample yields θ < dt and the sample-and-hold
/// delay is added at tuning time (see [`super::simc_tune_sampled`]).
pub fn fit_fopdt(r: &StepResponse) -> Result<PlantModel, FitError> {
    let n = r.response.len();
    if n < 3 || r.step == 0.0 || !(r.dt > 0.0) {
        return Err(FitError::TooShort);
    }
    let peak = r.response.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    if peak == 0.0 || !peak.is_finite() {
        return Err(FitError::Flat);
    }
    let horizon = (n - 1) as f64 * r.dt;
    let tau_min = 0.1 * r.dt;
    let (mut ln_tau_lo, mut ln_tau_hi) = (tau_min.ln(), (50.0 * horizon).ln());
    let (mut th_lo, mut th_hi) = (0.0, 0.5 * horizon);
    let total: f64 = r.response.iter().map(|y| y * y).sum();
    // ties broken towards longer dead time for determinism
    let tie = 1e-12 * total;
    let mut best = (f64::INFINITY, 0.0, tau_min, 0.0);
    const GRID: usize = 40;
    for _ in 0..6 {
        for a in 0..=GRID {
            let tau = (ln_tau_lo + (ln_tau_hi - ln_tau_lo) * a as f64 / GRID as f64).exp();
            for b in (0..=GRID).rev() {
                let theta = th_lo + (th_hi - th_lo) * b as f64 / GRID as f64;
                let (k, sse) = best_gain(r, tau, theta);
                if sse < best.0 - tie || (sse <= best.0 + tie && theta > best.3) {
                    best = (sse, k, tau, theta);
                }
            }
        }
        let dl = (ln_tau_hi - ln_tau_lo) / GRID as f64 * 2.0;
        let dt = (th_hi - th_lo) / GRID as f64 * 2.0;
        ln_tau_lo = (best.2.ln() - dl).max(tau_min.ln());
        ln_tau_hi = best.2.ln() + dl;
        th_lo = (best.3 - dt).max(0.0);
        th_hi = (best.3 + dt).min(horizon);
    }
    if best.1 == 0.0 || best.0 >= total {
        return Err(FitError::Flat);
    }
    Ok(PlantModel {
        gain: best.1,
        time_constant: best.2,
        dead_time: best.3,
    })
}

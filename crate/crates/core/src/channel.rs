//! Free-space channel model and achievable-rate bookkeeping.
//!
//! Rates are dimensioned in bits per slot (`slot_rate`) and bits/second
//! after time-averaging; spectral-efficiency outputs assume unit
//! bandwidth.

use ndarray::Array2;
use thiserror::Error;

use crate::geometry::Point2;
use crate::scenario::Scenario;

#[derive(Debug, Error)]
pub enum RateError {
    #[error("dimension mismatch: {what} has {got}, expected {expected}")]
    Dimension { what: &'static str, expected: usize, got: usize },
}

/// Channel power gain between the UAV at horizontal position `q` and a
/// ground node at `w`, for altitude `h`: `beta0 / (||q - w||^2 + h^2)`.
pub fn channel_gain(q: Point2, w: Point2, h: f64, beta0: f64) -> f64 {
    beta0 / (q.dist_sq(w) + h * h)
}

/// Bits delivered in one slot: `delta * log2(1 + gain * p / sigma2)`.
pub fn slot_rate(delta: f64, p: f64, gain: f64, sigma2: f64) -> f64 {
    delta * (1.0 + gain * p / sigma2).log2()
}

/// Per-slot rates and their schedule-weighted time averages.
#[derive(Debug, Clone)]
pub struct RateTable {
    /// `r[k][n]`: bits GN `k` would receive in slot `n` if served.
    pub per_slot: Array2<f64>,
    /// Time-averaged rate per GN in bits/second:
    /// `(1/T) * sum_n s[k][n] * r[k][n]`.
    pub averaged: Vec<f64>,
}

impl RateTable {
    /// Smallest time-averaged rate across ground nodes.
    pub fn min_average(&self) -> f64 {
        self.averaged.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Evaluate the exact rate formulas for a full solution candidate.
/// `waypoints` has `N + 1` entries with index 0 aliasing index `N`; slot
/// `n` (1-based) uses the waypoint at its end, `waypoints[n]`.
pub fn average_rates(
    scenario: &Scenario,
    schedule: &Array2<f64>,
    powers: &[f64],
    waypoints: &[Point2],
    slots: &[f64],
) -> Result<RateTable, RateError> {
    let k = scenario.gns.len();
    let n = scenario.n_slots;
    if schedule.nrows() != k || schedule.ncols() != n {
        return Err(RateError::Dimension {
            what: "schedule",
            expected: k * n,
            got: schedule.len(),
        });
    }
    if powers.len() != n {
        return Err(RateError::Dimension { what: "powers", expected: n, got: powers.len() });
    }
    if waypoints.len() != n + 1 {
        return Err(RateError::Dimension {
            what: "waypoints",
            expected: n + 1,
            got: waypoints.len(),
        });
    }
    if slots.len() != n {
        return Err(RateError::Dimension { what: "slots", expected: n, got: slots.len() });
    }

    let mut per_slot = Array2::zeros((k, n));
    for ki in 0..k {
        for ni in 0..n {
            let gain = channel_gain(waypoints[ni + 1], scenario.gns[ki], scenario.altitude, scenario.beta0);
            per_slot[(ki, ni)] = slot_rate(slots[ni], powers[ni], gain, scenario.sigma2);
        }
    }
    let averaged = (0..k)
        .map(|ki| {
            (0..n).map(|ni| schedule[(ki, ni)] * per_slot[(ki, ni)]).sum::<f64>() / scenario.t_total
        })
        .collect();
    Ok(RateTable { per_slot, averaged })
}
